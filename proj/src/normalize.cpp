#include "cbctforge/normalize.hpp"

#include <algorithm>
#include <cmath>

namespace cbctforge {
namespace {

void require_unit(const Volume3& v, Unit u, const char* what) {
    if (v.unit != u)
        throw std::invalid_argument(std::string(what) + ": expected unit " + unit_name(u) +
                                    ", got " + unit_name(v.unit));
}

}  // namespace

Volume3 normalize_ct(const Volume3& v) {
    require_unit(v, Unit::HU, "normalize_ct");
    Volume3 out(v.grid, Unit::NormSigned);
    for (std::size_t i = 0; i < v.data.size(); ++i)
        out.data[i] = (v.data[i] + 1000.0) / 4095.0 * 2.0 - 1.0;
    return out;
}

Volume3 denormalize_ct(const Volume3& v) {
    require_unit(v, Unit::NormSigned, "denormalize_ct");
    Volume3 out(v.grid, Unit::HU);
    for (std::size_t i = 0; i < v.data.size(); ++i)
        out.data[i] = (v.data[i] + 1.0) / 2.0 * 4095.0 - 1000.0;
    return out;
}

Volume3 normalize01_ct(const Volume3& v) {
    require_unit(v, Unit::HU, "normalize01_ct");
    Volume3 out(v.grid, Unit::Norm01);
    for (std::size_t i = 0; i < v.data.size(); ++i)
        out.data[i] = (v.data[i] + 1000.0) / 4095.0;
    return out;
}

Volume3 denormalize01_ct(const Volume3& v) {
    require_unit(v, Unit::Norm01, "denormalize01_ct");
    Volume3 out(v.grid, Unit::HU);
    for (std::size_t i = 0; i < v.data.size(); ++i)
        out.data[i] = v.data[i] * 4095.0 - 1000.0;
    return out;
}

Volume3 encode_labels(const LabelVolume& lv) {
    lv.validate();
    Volume3 out(lv.grid, Unit::NormSigned);
    for (std::size_t i = 0; i < lv.labels.size(); ++i)
        out.data[i] = static_cast<double>(lv.labels[i]) / 4.0 * 2.0 - 1.0;
    return out;
}

LabelVolume decode_labels(const Volume3& v, LabelScheme scheme) {
    if (v.unit != Unit::NormSigned)
        throw std::invalid_argument("decode_labels: expected unit normSigned");
    LabelVolume out(v.grid, scheme);
    for (std::size_t i = 0; i < v.data.size(); ++i) {
        const double l = std::round((v.data[i] + 1.0) / 2.0 * 4.0);
        out.labels[i] = static_cast<std::uint8_t>(std::clamp(l, 0.0, 4.0));
    }
    return out;
}

LabelVolume relabel(const LabelVolume& lv, LabelScheme target) {
    lv.validate();
    LabelVolume out = lv;
    out.scheme = target;
    if (lv.scheme == target) return out;
    for (auto& l : out.labels)
        if (l != 0) l = static_cast<std::uint8_t>(5 - l);
    return out;
}

std::pair<Volume3, std::pair<double, double>> rescale01(const Volume3& v) {
    v.validate();
    const auto [lo_it, hi_it] = std::minmax_element(v.data.begin(), v.data.end());
    const double lo = *lo_it, hi = *hi_it;
    Volume3 out(v.grid, Unit::Norm01);
    if (hi > lo) {
        const double inv = 1.0 / (hi - lo);
        for (std::size_t i = 0; i < v.data.size(); ++i)
            out.data[i] = std::clamp((v.data[i] - lo) * inv, 0.0, 1.0);
    }
    return {std::move(out), {lo, hi}};
}

}  // namespace cbctforge
