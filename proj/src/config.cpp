#include "cbctforge/config.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>

namespace cbctforge {

using nlohmann::json;

namespace {

void check_keys(const json& j, const char* ctx, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw std::runtime_error(std::string(ctx) + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                known = true;
                break;
            }
        if (!known)
            throw std::runtime_error(std::string(ctx) + ": unknown key \"" + it.key() + '"');
    }
}

// json type errors carry the bare key context; rewrap with the section name.
template <typename F>
auto in_section(const char* ctx, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string(ctx) + ": " + e.what());
    }
}

}  // namespace

json to_json(const PlaheParams& p) {
    return json{{"alpha", p.alpha}, {"beta", p.beta}, {"window", p.window}, {"gain", p.gain}};
}

PlaheParams plahe_params_from_json(const json& j) {
    const char* ctx = "plahe params";
    check_keys(j, ctx, {"alpha", "beta", "window", "gain"});
    return in_section(ctx, [&] {
        PlaheParams p;
        p.alpha = j.value("alpha", p.alpha);
        p.beta = j.value("beta", p.beta);
        if (j.contains("window")) p.window = j.at("window").get<std::array<int, 3>>();
        p.gain = j.value("gain", p.gain);
        p.validate();
        return p;
    });
}

json to_json(const AffineSpec& a) {
    json j{{"kind", affine_kind_name(a.kind)}};
    switch (a.kind) {
        case AffineKind::Identity:
            break;
        case AffineKind::ScaleShear:
            j["scale"] = a.scale;
            j["shear_deg"] = a.shear_deg;
            break;
        case AffineKind::ScaleRotate:
            j["scale"] = a.scale;
            j["rotate_deg"] = a.rotate_deg;
            break;
        case AffineKind::Custom:
            j["matrix"] = *a.matrix;
            break;
    }
    return j;
}

AffineSpec affine_spec_from_json(const json& j) {
    const char* ctx = "affine spec";
    check_keys(j, ctx, {"kind", "scale", "shear_deg", "rotate_deg", "matrix"});
    return in_section(ctx, [&] {
        AffineSpec a;
        a.kind = affine_kind_from_name(j.at("kind").get<std::string>());
        a.scale = j.value("scale", a.scale);
        a.shear_deg = j.value("shear_deg", a.shear_deg);
        a.rotate_deg = j.value("rotate_deg", a.rotate_deg);
        if (j.contains("matrix")) a.matrix = j.at("matrix").get<Mat4>();
        a.validate();
        return a;
    });
}

json to_json(const ConeBeamGeometry& g) {
    json j{{"sad", g.sad},
           {"sdd", g.sdd},
           {"det_dims", g.det_dims},
           {"det_spacing", g.det_spacing},
           {"n_views", g.n_views}};
    if (!g.angles.empty()) j["angles"] = g.angles;
    if (g.step_mm) j["step_mm"] = *g.step_mm;
    return j;
}

ConeBeamGeometry geometry_from_json(const json& j) {
    const char* ctx = "geometry";
    check_keys(j, ctx,
               {"sad", "sdd", "det_dims", "det_spacing", "n_views", "angles", "step_mm"});
    return in_section(ctx, [&] {
        ConeBeamGeometry g;
        g.sad = j.value("sad", g.sad);
        g.sdd = j.value("sdd", g.sdd);
        if (j.contains("det_dims")) g.det_dims = j.at("det_dims").get<std::array<int, 2>>();
        if (j.contains("det_spacing"))
            g.det_spacing = j.at("det_spacing").get<std::array<double, 2>>();
        g.n_views = j.value("n_views", g.n_views);
        if (j.contains("angles")) g.angles = j.at("angles").get<std::vector<double>>();
        if (j.contains("step_mm")) g.step_mm = j.at("step_mm").get<double>();
        g.validate();
        return g;
    });
}

json to_json(const OsartConfig& c) {
    return json{{"n_subsets", c.n_subsets},
                {"n_iterations", c.n_iterations},
                {"relax", c.relax},
                {"nonneg", c.nonneg},
                {"init", c.init}};
}

OsartConfig osart_config_from_json(const json& j) {
    const char* ctx = "osart config";
    check_keys(j, ctx, {"n_subsets", "n_iterations", "relax", "nonneg", "init"});
    return in_section(ctx, [&] {
        OsartConfig c;
        c.n_subsets = j.value("n_subsets", c.n_subsets);
        c.n_iterations = j.value("n_iterations", c.n_iterations);
        c.relax = j.value("relax", c.relax);
        c.nonneg = j.value("nonneg", c.nonneg);
        c.init = j.value("init", c.init);
        c.validate();
        return c;
    });
}

json to_json(const Grid3& g) {
    return json{{"dims", g.dims}, {"spacing", g.spacing}, {"origin", g.origin}};
}

Grid3 grid_from_json(const json& j) {
    const char* ctx = "grid";
    check_keys(j, ctx, {"dims", "spacing", "origin"});
    return in_section(ctx, [&] {
        Grid3 g;
        g.dims = j.at("dims").get<std::array<int, 3>>();
        if (j.contains("spacing")) g.spacing = j.at("spacing").get<std::array<double, 3>>();
        if (j.contains("origin")) g.origin = j.at("origin").get<std::array<double, 3>>();
        g.validate();
        return g;
    });
}

json to_json(const PipelineConfig& cfg) {
    json bank = json::array();
    for (const auto& p : cfg.artifact_bank) bank.push_back(to_json(p));
    json geoms = json::array();
    for (const auto& a : cfg.geoms) geoms.push_back(to_json(a));
    return json{{"schema_version", kConfigSchemaVersion},
                {"artifact_bank", std::move(bank)},
                {"geoms", std::move(geoms)},
                {"geometry", to_json(cfg.geometry)},
                {"osart", to_json(cfg.osart)},
                {"noise_sigma", cfg.noise_sigma},
                {"seed", cfg.seed},
                {"label_scheme", scheme_name(cfg.label_scheme)}};
}

PipelineConfig pipeline_config_from_json(const json& j) {
    const char* ctx = "pipeline config";
    check_keys(j, ctx,
               {"schema_version", "artifact_bank", "geoms", "geometry", "osart", "noise_sigma",
                "seed", "label_scheme"});
    return in_section(ctx, [&] {
        const std::string version = j.value("schema_version", std::string(kConfigSchemaVersion));
        if (version != kConfigSchemaVersion)
            throw std::runtime_error("pipeline config: unsupported schema_version \"" + version +
                                     "\" (expected \"" + kConfigSchemaVersion + "\")");
        PipelineConfig cfg;
        if (j.contains("artifact_bank")) {
            for (const auto& e : j.at("artifact_bank"))
                cfg.artifact_bank.push_back(plahe_params_from_json(e));
        } else {
            cfg.artifact_bank = default_artifact_bank();
        }
        if (j.contains("geoms")) {
            for (const auto& e : j.at("geoms")) cfg.geoms.push_back(affine_spec_from_json(e));
        } else {
            cfg.geoms.push_back(AffineSpec{});
        }
        if (j.contains("geometry")) cfg.geometry = geometry_from_json(j.at("geometry"));
        if (j.contains("osart")) cfg.osart = osart_config_from_json(j.at("osart"));
        cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
        if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(j.at("seed").get<std::int64_t>());
        if (j.contains("label_scheme"))
            cfg.label_scheme = scheme_from_name(j.at("label_scheme").get<std::string>());
        cfg.validate();
        return cfg;
    });
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

PipelineConfig load_pipeline_config(const std::string& path) {
    try {
        return pipeline_config_from_json(load_json_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

const char* config_schema() {
    return R"schema({
  "$schema": "http://json-schema.org/draft-07/schema#",
  "title": "cbctforge pipeline config",
  "type": "object",
  "additionalProperties": false,
  "properties": {
    "schema_version": { "type": "string", "const": "1" },
    "artifact_bank": {
      "type": "array", "minItems": 1,
      "items": { "$ref": "#/definitions/plahe_params" },
      "description": "default: the five stock artifact settings"
    },
    "geoms": {
      "type": "array", "minItems": 1,
      "items": { "$ref": "#/definitions/affine_spec" },
      "description": "default: [identity]"
    },
    "geometry": { "$ref": "#/definitions/geometry" },
    "osart": { "$ref": "#/definitions/osart" },
    "noise_sigma": { "type": "number", "minimum": 0, "default": 0.01 },
    "seed": { "type": "integer", "default": 0 },
    "label_scheme": { "enum": ["eso1", "eso4"], "default": "eso4" }
  },
  "definitions": {
    "plahe_params": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "alpha": { "type": "number", "exclusiveMinimum": 0, "maximum": 1, "default": 1.0 },
        "beta": { "type": "number", "minimum": 0, "maximum": 1, "default": 1.0 },
        "window": {
          "type": "array", "minItems": 3, "maxItems": 3,
          "items": { "type": "integer", "minimum": 1 },
          "description": "odd extents per axis", "default": [9, 9, 9]
        },
        "gain": { "type": "number", "minimum": 0, "default": 0.5 }
      }
    },
    "affine_spec": {
      "type": "object",
      "additionalProperties": false,
      "required": ["kind"],
      "properties": {
        "kind": { "enum": ["identity", "scale_shear", "scale_rotate", "custom"] },
        "scale": { "type": "number", "exclusiveMinimum": 0, "default": 1.0 },
        "shear_deg": { "type": "number", "exclusiveMinimum": -45, "exclusiveMaximum": 45, "default": 0.0 },
        "rotate_deg": { "type": "number", "default": 0.0 },
        "matrix": {
          "type": "array", "minItems": 4, "maxItems": 4,
          "items": {
            "type": "array", "minItems": 4, "maxItems": 4,
            "items": { "type": "number" }
          },
          "description": "homogeneous world transform; custom kind only, bottom row [0,0,0,1]"
        }
      }
    },
    "geometry": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "sad": { "type": "number", "exclusiveMinimum": 0, "default": 1000.0 },
        "sdd": { "type": "number", "exclusiveMinimum": 0, "default": 1500.0 },
        "det_dims": {
          "type": "array", "minItems": 2, "maxItems": 2,
          "items": { "type": "integer", "minimum": 1 }, "default": [256, 256]
        },
        "det_spacing": {
          "type": "array", "minItems": 2, "maxItems": 2,
          "items": { "type": "number", "exclusiveMinimum": 0 }, "default": [2.0, 2.0]
        },
        "n_views": { "type": "integer", "minimum": 1, "default": 360 },
        "angles": {
          "type": "array", "items": { "type": "number" },
          "description": "radians; omitted = uniform over [0, 2pi)"
        },
        "step_mm": {
          "type": "number", "exclusiveMinimum": 0,
          "description": "omitted = half the smallest voxel spacing"
        }
      }
    },
    "osart": {
      "type": "object",
      "additionalProperties": false,
      "properties": {
        "n_subsets": { "type": "integer", "minimum": 1, "default": 10 },
        "n_iterations": { "type": "integer", "minimum": 1, "default": 20 },
        "relax": { "type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 2, "default": 0.5 },
        "nonneg": { "type": "boolean", "default": true },
        "init": { "type": "number", "default": 0.0 }
      }
    }
  }
})schema";
}

}  // namespace cbctforge
