#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace cbctforge {

// Incremental SHA-256. digest() finalizes; the object must not be reused
// afterwards.
class Sha256 {
public:
    Sha256();

    void update(const void* data, std::size_t len);
    // 64 lowercase hex characters.
    std::string digest();

private:
    void process_block(const std::uint8_t* block);

    std::uint32_t state_[8];
    std::uint64_t total_bytes_ = 0;
    std::uint8_t buffer_[64];
    std::size_t buffered_ = 0;
};

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_hex(const std::string& data);
std::string sha256_file(const std::string& path);

}  // namespace cbctforge
