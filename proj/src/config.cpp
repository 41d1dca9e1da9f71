#include "microdepth/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "microdepth/errors.hpp"

namespace microdepth {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void check_keys(const json& obj, const std::string& scope,
                std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed)
            if (key == a) {
                ok = true;
                break;
            }
        if (!ok) throw invalid_input("config: unknown key '" + scope + key + "'");
    }
}

template <typename T>
void fetch(const json& obj, const std::string& scope, const char* key, T& out) {
    const auto it = obj.find(key);
    if (it == obj.end()) return; // keep default
    try {
        out = it->get<T>();
    } catch (const json::exception&) {
        throw invalid_input("config: bad value type for '" + scope + key + "'");
    }
}

void parse_grid(const json& j, GridSpec& g) {
    if (!j.is_object()) throw invalid_input("config: 'grid' must be an object");
    check_keys(j, "grid.",
               {"mode", "uniform_k", "fg_grid", "bg_grid", "expansion_ratio", "blur_sigma"});
    std::string mode = g.mode == GridMode::Adaptive ? "adaptive" : "uniform";
    fetch(j, "grid.", "mode", mode);
    if (mode == "adaptive")
        g.mode = GridMode::Adaptive;
    else if (mode == "uniform")
        g.mode = GridMode::Uniform;
    else
        throw invalid_input("config: grid.mode must be 'adaptive' or 'uniform'");
    fetch(j, "grid.", "uniform_k", g.uniform_k);
    fetch(j, "grid.", "fg_grid", g.fg_grid);
    fetch(j, "grid.", "bg_grid", g.bg_grid);
    fetch(j, "grid.", "expansion_ratio", g.expansion_ratio);
    fetch(j, "grid.", "blur_sigma", g.blur_sigma);
}

void parse_metrics(const json& j, std::array<bool, kNumMetrics>& metrics) {
    if (!j.is_object()) throw invalid_input("config: 'metrics' must be an object");
    check_keys(j, "metrics.",
               {"entropy", "log", "tenengrad", "brenner", "gray_variance", "max_abs_gradient"});
    for (int i = 0; i < kNumMetrics; ++i) {
        bool v = metrics[i];
        fetch(j, "metrics.", metric_name(static_cast<FocusMetricId>(i)).c_str(), v);
        metrics[i] = v;
    }
}

void parse_preprocess(const json& j, PrepConfig& p) {
    if (!j.is_object()) throw invalid_input("config: 'preprocess' must be an object");
    check_keys(j, "preprocess.",
               {"denoise", "wiener_window", "canny_low", "canny_high", "resize_to", "roi_size"});
    fetch(j, "preprocess.", "denoise", p.denoise);
    fetch(j, "preprocess.", "wiener_window", p.wiener_window);
    fetch(j, "preprocess.", "canny_low", p.canny_low);
    fetch(j, "preprocess.", "canny_high", p.canny_high);
    fetch(j, "preprocess.", "resize_to", p.resize_to);
    fetch(j, "preprocess.", "roi_size", p.roi_size);
}

void parse_regressor(const json& j, RegressorConfig& r) {
    if (!j.is_object()) throw invalid_input("config: 'regressor' must be an object");
    check_keys(j, "regressor.", {"kind", "lambda", "lr", "epochs", "batch", "hidden", "seed"});
    std::string kind = r.kind == RegressorKind::Ridge ? "ridge" : "mlp";
    fetch(j, "regressor.", "kind", kind);
    if (kind == "ridge")
        r.kind = RegressorKind::Ridge;
    else if (kind == "mlp")
        r.kind = RegressorKind::Mlp;
    else
        throw invalid_input("config: regressor.kind must be 'ridge' or 'mlp'");
    fetch(j, "regressor.", "lambda", r.lambda);
    fetch(j, "regressor.", "lr", r.mlp.lr);
    fetch(j, "regressor.", "epochs", r.mlp.epochs);
    fetch(j, "regressor.", "batch", r.mlp.batch);
    fetch(j, "regressor.", "hidden", r.mlp.hidden);
    fetch(j, "regressor.", "seed", r.mlp.seed);
}

void parse_split(const json& j, SplitConfig& s) {
    if (!j.is_object()) throw invalid_input("config: 'split' must be an object");
    check_keys(j, "split.", {"test_fraction", "train_fraction"});
    fetch(j, "split.", "test_fraction", s.test_fraction);
    fetch(j, "split.", "train_fraction", s.train_fraction);
}

void parse_synth(const json& j, SynthConfig& s) {
    if (!j.is_object()) throw invalid_input("config: 'synth' must be an object");
    check_keys(j, "synth.",
               {"n_samples", "z_min_um", "z_max_um", "blur_coeff", "base_sigma", "noise_std",
                "shape", "asymmetric", "asym_gain", "seed"});
    fetch(j, "synth.", "n_samples", s.n_samples);
    fetch(j, "synth.", "z_min_um", s.z_min_um);
    fetch(j, "synth.", "z_max_um", s.z_max_um);
    fetch(j, "synth.", "blur_coeff", s.blur_coeff);
    fetch(j, "synth.", "base_sigma", s.base_sigma);
    fetch(j, "synth.", "noise_std", s.noise_std);
    std::string shape = shape_name(s.shape);
    fetch(j, "synth.", "shape", shape);
    s.shape = shape_from_name(shape);
    fetch(j, "synth.", "asymmetric", s.asymmetric);
    fetch(j, "synth.", "asym_gain", s.asym_gain);
    fetch(j, "synth.", "seed", s.seed);
}

void parse_paths(const json& j, Paths& p) {
    if (!j.is_object()) throw invalid_input("config: 'paths' must be an object");
    check_keys(j, "paths.", {"data_dir", "features", "model", "report", "embeddings"});
    fetch(j, "paths.", "data_dir", p.data_dir);
    fetch(j, "paths.", "features", p.features);
    fetch(j, "paths.", "model", p.model);
    fetch(j, "paths.", "report", p.report);
    fetch(j, "paths.", "embeddings", p.embeddings);
}

} // namespace

RunConfig config_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw invalid_input(std::string("config: JSON parse error: ") + e.what());
    }
    if (!j.is_object()) throw invalid_input("config: top level must be an object");
    check_keys(j, "",
               {"seed", "paths", "grid", "metrics", "log_sigma", "preprocess", "regressor",
                "split", "synth"});
    RunConfig cfg;
    fetch(j, "", "seed", cfg.seed);
    fetch(j, "", "log_sigma", cfg.log_sigma);
    if (j.contains("paths")) parse_paths(j["paths"], cfg.paths);
    if (j.contains("grid")) parse_grid(j["grid"], cfg.grid);
    if (j.contains("metrics")) parse_metrics(j["metrics"], cfg.metrics);
    if (j.contains("preprocess")) parse_preprocess(j["preprocess"], cfg.preprocess);
    if (j.contains("regressor")) parse_regressor(j["regressor"], cfg.regressor);
    if (j.contains("split")) parse_split(j["split"], cfg.split);
    if (j.contains("synth")) parse_synth(j["synth"], cfg.synth);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::Kind::MissingFile, path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_string(ss.str());
}

std::string config_to_json_string(const RunConfig& cfg) {
    ojson j;
    j["seed"] = cfg.seed;
    j["paths"] = {{"data_dir", cfg.paths.data_dir},
                  {"features", cfg.paths.features},
                  {"model", cfg.paths.model},
                  {"report", cfg.paths.report},
                  {"embeddings", cfg.paths.embeddings}};
    j["grid"] = {{"mode", cfg.grid.mode == GridMode::Adaptive ? "adaptive" : "uniform"},
                 {"uniform_k", cfg.grid.uniform_k},
                 {"fg_grid", cfg.grid.fg_grid},
                 {"bg_grid", cfg.grid.bg_grid},
                 {"expansion_ratio", cfg.grid.expansion_ratio},
                 {"blur_sigma", cfg.grid.blur_sigma}};
    ojson jm;
    for (int i = 0; i < kNumMetrics; ++i)
        jm[metric_name(static_cast<FocusMetricId>(i))] = cfg.metrics[i];
    j["metrics"] = jm;
    j["log_sigma"] = cfg.log_sigma;
    j["preprocess"] = {{"denoise", cfg.preprocess.denoise},
                       {"wiener_window", cfg.preprocess.wiener_window},
                       {"canny_low", cfg.preprocess.canny_low},
                       {"canny_high", cfg.preprocess.canny_high},
                       {"resize_to", cfg.preprocess.resize_to},
                       {"roi_size", cfg.preprocess.roi_size}};
    j["regressor"] = {{"kind", cfg.regressor.kind == RegressorKind::Ridge ? "ridge" : "mlp"},
                      {"lambda", cfg.regressor.lambda},
                      {"lr", cfg.regressor.mlp.lr},
                      {"epochs", cfg.regressor.mlp.epochs},
                      {"batch", cfg.regressor.mlp.batch},
                      {"hidden", cfg.regressor.mlp.hidden},
                      {"seed", cfg.regressor.mlp.seed}};
    j["split"] = {{"test_fraction", cfg.split.test_fraction},
                  {"train_fraction", cfg.split.train_fraction}};
    j["synth"] = {{"n_samples", cfg.synth.n_samples},
                  {"z_min_um", cfg.synth.z_min_um},
                  {"z_max_um", cfg.synth.z_max_um},
                  {"blur_coeff", cfg.synth.blur_coeff},
                  {"base_sigma", cfg.synth.base_sigma},
                  {"noise_std", cfg.synth.noise_std},
                  {"shape", shape_name(cfg.synth.shape)},
                  {"asymmetric", cfg.synth.asymmetric},
                  {"asym_gain", cfg.synth.asym_gain},
                  {"seed", cfg.synth.seed}};
    return j.dump(2) + "\n";
}

void validate(const RunConfig& cfg) {
    validate(cfg.grid);
    bool any_metric = false;
    for (bool b : cfg.metrics) any_metric = any_metric || b;
    if (!any_metric) throw invalid_input("config: at least one metric must be enabled");
    if (!(cfg.log_sigma > 0.0)) throw invalid_input("config: log_sigma must be positive");
    if (cfg.preprocess.wiener_window < 3 || cfg.preprocess.wiener_window % 2 == 0)
        throw invalid_input("config: wiener_window must be odd and >= 3");
    if (cfg.preprocess.canny_low < 0.0 || cfg.preprocess.canny_high < 0.0)
        throw invalid_input("config: canny thresholds must be >= 0");
    if (cfg.preprocess.canny_high > 0.0 && !(cfg.preprocess.canny_low < cfg.preprocess.canny_high))
        throw invalid_input("config: canny_low must be < canny_high");
    if (cfg.preprocess.resize_to < 0 || (cfg.preprocess.resize_to > 0 && cfg.preprocess.resize_to < 16))
        throw invalid_input("config: resize_to must be 0 (off) or >= 16");
    if (cfg.preprocess.roi_size < 0 || (cfg.preprocess.roi_size > 0 && cfg.preprocess.roi_size < 16))
        throw invalid_input("config: roi_size must be 0 (off) or >= 16");
    if (!(cfg.regressor.lambda >= 0.0))
        throw invalid_input("config: regressor.lambda must be >= 0");
    if (!(cfg.regressor.mlp.lr > 0.0)) throw invalid_input("config: regressor.lr must be > 0");
    if (cfg.regressor.mlp.epochs < 1 || cfg.regressor.mlp.batch < 1)
        throw invalid_input("config: regressor.epochs/batch must be >= 1");
    if (cfg.regressor.mlp.hidden.empty())
        throw invalid_input("config: regressor.hidden must not be empty");
    for (int hsize : cfg.regressor.mlp.hidden)
        if (hsize < 1) throw invalid_input("config: regressor.hidden sizes must be >= 1");
    if (!(cfg.split.test_fraction >= 0.0 && cfg.split.test_fraction < 1.0))
        throw invalid_input("config: split.test_fraction must be in [0, 1)");
    if (!(cfg.split.train_fraction > 0.0 && cfg.split.train_fraction <= 1.0))
        throw invalid_input("config: split.train_fraction must be in (0, 1]");
    validate(cfg.synth);
}

std::string layout_id(const GridSpec& grid) {
    if (grid.mode == GridMode::Uniform)
        return "uniform" + std::to_string(grid.uniform_k) + "/" +
               std::to_string(grid.uniform_k * grid.uniform_k);
    const int patches = grid.fg_grid * grid.fg_grid + grid.bg_grid * grid.bg_grid;
    return "adaptive" + std::to_string(grid.fg_grid) + "x" + std::to_string(grid.bg_grid) + "/" +
           std::to_string(patches);
}

std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::uint64_t layout_hash(const std::string& layout, const std::array<bool, kNumMetrics>& metrics,
                          std::size_t dim) {
    std::string desc = layout + "|m=";
    for (bool b : metrics) desc += b ? '1' : '0';
    desc += "|d=" + std::to_string(dim);
    return fnv1a64(desc);
}

} // namespace microdepth
