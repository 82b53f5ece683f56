#include "cbctforge/volume_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "io_util.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "raw payloads are little-endian; big-endian hosts are unsupported");

namespace cbctforge {
namespace {

using nlohmann::json;

std::string vol1_stem(const std::string& path) {
    return strip_extension(strip_extension(path, ".json"), ".raw");
}

struct Vol1Header {
    Grid3 grid;
    std::string dtype;
    std::string unit;
};

Vol1Header read_vol1_header(const std::string& stem) {
    std::ifstream in(stem + ".json");
    if (!in) throw std::runtime_error("cannot open " + stem + ".json");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed VOL1 header " + stem + ".json: " + e.what());
    }

    Vol1Header h;
    try {
        auto dims = j.at("dims");
        auto spacing = j.at("spacing_mm");
        auto origin = j.at("origin_mm");
        if (dims.size() != 3 || spacing.size() != 3 || origin.size() != 3)
            throw std::runtime_error("dims/spacing_mm/origin_mm must have 3 entries");
        for (int a = 0; a < 3; ++a) {
            h.grid.dims[a] = dims[a].get<int>();
            h.grid.spacing[a] = spacing[a].get<double>();
            h.grid.origin[a] = origin[a].get<double>();
        }
        h.dtype = j.at("dtype").get<std::string>();
        h.unit = j.at("unit").get<std::string>();
        if (j.at("order").get<std::string>() != "x-fastest")
            throw std::runtime_error("unsupported voxel order");
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed VOL1 header " + stem + ".json: " + e.what());
    }
    h.grid.validate();
    return h;
}

Volume3 read_vol1(const std::string& path) {
    const std::string stem = vol1_stem(path);
    const Vol1Header h = read_vol1_header(stem);
    if (h.dtype != "f32le")
        throw std::runtime_error(stem + ": expected dtype f32le for image volume, got " + h.dtype);
    if (h.unit == "label")
        throw std::runtime_error(stem + ": label volume; use read_label_volume");

    const std::vector<char> raw = read_file(stem + ".raw");
    const std::size_t n = h.grid.voxel_count();
    if (raw.size() != n * sizeof(float))
        throw std::runtime_error(stem + ".raw: payload length does not match dims");

    Volume3 v(h.grid, unit_from_name(h.unit));
    const float* src = reinterpret_cast<const float*>(raw.data());
    if (v.unit == Unit::HU) {
        for (std::size_t i = 0; i < n; ++i)
            v.data[i] = std::clamp(static_cast<double>(src[i]), kHuMin, kHuMax);
    } else {
        for (std::size_t i = 0; i < n; ++i) v.data[i] = src[i];
    }
    return v;
}

// Minimal MetaImage (.mha) reader: text "Key = Value" lines terminated by
// "ElementDataFile = LOCAL", binary payload immediately after.
Volume3 read_metaimage(const std::string& path) {
    const std::vector<char> bytes = read_file(path);

    std::size_t pos = 0;
    Grid3 grid;
    bool have_dims = false;
    std::string element_type;
    bool compressed = false;
    bool msb = false;
    std::size_t data_start = 0;
    bool local_data = false;

    while (pos < bytes.size()) {
        std::size_t eol = pos;
        while (eol < bytes.size() && bytes[eol] != '\n') ++eol;
        std::string line(bytes.data() + pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        pos = eol + 1;

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": malformed MetaImage header line: " + line);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (key == "ObjectType") {
            if (value != "Image") throw std::runtime_error(path + ": ObjectType must be Image");
        } else if (key == "NDims") {
            if (value != "3") throw std::runtime_error(path + ": only NDims = 3 is supported");
        } else if (key == "DimSize") {
            std::istringstream ss(value);
            if (!(ss >> grid.dims[0] >> grid.dims[1] >> grid.dims[2]))
                throw std::runtime_error(path + ": malformed DimSize");
            have_dims = true;
        } else if (key == "ElementSpacing" || key == "ElementSize") {
            std::istringstream ss(value);
            if (!(ss >> grid.spacing[0] >> grid.spacing[1] >> grid.spacing[2]))
                throw std::runtime_error(path + ": malformed " + key);
        } else if (key == "Offset" || key == "Origin" || key == "Position") {
            std::istringstream ss(value);
            if (!(ss >> grid.origin[0] >> grid.origin[1] >> grid.origin[2]))
                throw std::runtime_error(path + ": malformed " + key);
        } else if (key == "ElementType") {
            element_type = value;
        } else if (key == "CompressedData") {
            compressed = (value == "True" || value == "true");
        } else if (key == "BinaryDataByteOrderMSB" || key == "ElementByteOrderMSB") {
            msb = (value == "True" || value == "true");
        } else if (key == "ElementDataFile") {
            if (value != "LOCAL")
                throw std::runtime_error(path + ": only ElementDataFile = LOCAL is supported");
            local_data = true;
            data_start = pos;
            break;
        }
        // other keys (BinaryData, TransformMatrix, ...) are ignored
    }

    if (!local_data) throw std::runtime_error(path + ": missing ElementDataFile = LOCAL");
    if (!have_dims) throw std::runtime_error(path + ": missing DimSize");
    if (compressed) throw std::runtime_error(path + ": compressed MetaImage payloads are unsupported");
    if (msb) throw std::runtime_error(path + ": big-endian MetaImage payloads are unsupported");
    grid.validate();

    std::size_t elem_size;
    if (element_type == "MET_SHORT") elem_size = 2;
    else if (element_type == "MET_FLOAT") elem_size = 4;
    else throw std::runtime_error(path + ": unsupported ElementType " + element_type);

    const std::size_t n = grid.voxel_count();
    if (bytes.size() - data_start != n * elem_size)
        throw std::runtime_error(path + ": payload length does not match dims");

    Volume3 v(grid, Unit::HU);
    const char* src = bytes.data() + data_start;
    if (element_type == "MET_SHORT") {
        for (std::size_t i = 0; i < n; ++i) {
            std::int16_t s;
            std::memcpy(&s, src + 2 * i, 2);
            v.data[i] = std::clamp(static_cast<double>(s), kHuMin, kHuMax);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            float f;
            std::memcpy(&f, src + 4 * i, 4);
            v.data[i] = std::clamp(static_cast<double>(f), kHuMin, kHuMax);
        }
    }
    return v;
}

json make_header(const Grid3& g, const char* dtype, const std::string& unit) {
    json j;
    j["dims"] = {g.dims[0], g.dims[1], g.dims[2]};
    j["spacing_mm"] = {g.spacing[0], g.spacing[1], g.spacing[2]};
    j["origin_mm"] = {g.origin[0], g.origin[1], g.origin[2]};
    j["dtype"] = dtype;
    j["unit"] = unit;
    j["order"] = "x-fastest";
    return j;
}

void write_pair(const std::string& stem, const json& header, const char* payload,
                std::size_t payload_bytes) {
    {
        std::ofstream out(stem + ".json");
        if (!out) throw std::runtime_error("cannot write " + stem + ".json");
        out << header.dump(2) << "\n";
        if (!out) throw std::runtime_error("write failed for " + stem + ".json");
    }
    std::ofstream out(stem + ".raw", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + stem + ".raw");
    out.write(payload, static_cast<std::streamsize>(payload_bytes));
    if (!out) throw std::runtime_error("write failed for " + stem + ".raw");
}

}  // namespace

Volume3 read_volume(const std::string& path, VolumeFormat format) {
    return format == VolumeFormat::VOL1 ? read_vol1(path) : read_metaimage(path);
}

void write_volume(const Volume3& v, const std::string& path) {
    v.validate();
    for (double x : v.data)
        if (!std::isfinite(x))
            throw std::invalid_argument("write_volume: data contains non-finite values");

    std::vector<float> payload(v.data.size());
    for (std::size_t i = 0; i < payload.size(); ++i)
        payload[i] = static_cast<float>(v.data[i]);

    write_pair(vol1_stem(path), make_header(v.grid, "f32le", unit_name(v.unit)),
               reinterpret_cast<const char*>(payload.data()),
               payload.size() * sizeof(float));
}

LabelVolume read_label_volume(const std::string& path, LabelScheme scheme) {
    const std::string stem = vol1_stem(path);
    const Vol1Header h = read_vol1_header(stem);
    if (h.dtype != "u8" || h.unit != "label")
        throw std::runtime_error(stem + ": expected dtype u8 / unit label");

    const std::vector<char> raw = read_file(stem + ".raw");
    if (raw.size() != h.grid.voxel_count())
        throw std::runtime_error(stem + ".raw: payload length does not match dims");

    LabelVolume lv(h.grid, scheme);
    std::memcpy(lv.labels.data(), raw.data(), raw.size());
    lv.validate();
    return lv;
}

void write_label_volume(const LabelVolume& lv, const std::string& path) {
    lv.validate();
    write_pair(vol1_stem(path), make_header(lv.grid, "u8", "label"),
               reinterpret_cast<const char*>(lv.labels.data()), lv.labels.size());
}

}  // namespace cbctforge
