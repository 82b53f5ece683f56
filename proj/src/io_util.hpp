#pragma once

#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbctforge {

inline std::string strip_extension(const std::string& path, const char* ext) {
    const std::size_t n = std::strlen(ext);
    if (path.size() >= n && path.compare(path.size() - n, n, ext) == 0)
        return path.substr(0, path.size() - n);
    return path;
}

inline std::vector<char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file(const std::string& path, const char* bytes, std::size_t n) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(bytes, static_cast<std::streamsize>(n));
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace cbctforge
