#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "microdepth/config.hpp"
#include "microdepth/dataset.hpp"
#include "microdepth/errors.hpp"
#include "microdepth/experiment.hpp"
#include "microdepth/model_io.hpp"
#include "microdepth/pipeline.hpp"
#include "microdepth/synth.hpp"
#include "microdepth/threading.hpp"

namespace {

using namespace microdepth;
using ojson = nlohmann::ordered_json;

// Option value + its CLI11 handle, so "flags win over the config file" can
// be decided per flag after parsing.
template <typename T>
struct Flag {
    T v{};
    CLI::Option* o = nullptr;
    bool set() const { return o != nullptr && o->count() > 0; }
};

RunConfig base_config(const std::string& path) {
    return path.empty() ? RunConfig{} : load_config(path);
}

std::string hex16(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": cannot open for writing");
    out << text;
    out.flush();
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": write failed");
}

ojson config_echo(const RunConfig& cfg) { return ojson::parse(config_to_json_string(cfg)); }

void write_report(const std::string& path, const ojson& j) {
    if (!path.empty()) write_text(path, j.dump(2) + "\n");
}

ojson json_r2(const EvalReport& r) { return r.r2 ? ojson(*r.r2) : ojson(nullptr); }

double flag_double(const std::string& field, const std::string& what) {
    double out = 0.0;
    const char* b = field.data();
    const char* e = b + field.size();
    auto [p, ec] = std::from_chars(b, e, out);
    if (ec != std::errc() || p != e)
        throw invalid_input(what + ": bad number '" + field + "'");
    return out;
}

GridSpec grid_from_flag(const std::string& s, GridSpec g) {
    if (s == "adaptive") {
        g.mode = GridMode::Adaptive;
        return g;
    }
    if (s.rfind("uniform:", 0) == 0) {
        const std::string ks = s.substr(8);
        int k = 0;
        auto [p, ec] = std::from_chars(ks.data(), ks.data() + ks.size(), k);
        if (ec != std::errc() || p != ks.data() + ks.size())
            throw invalid_input("--grid: bad patch count '" + ks + "'");
        g.mode = GridMode::Uniform;
        g.uniform_k = k;
        return g;
    }
    throw invalid_input("--grid must be 'adaptive' or 'uniform:K' (K in {2,4,6,8})");
}

std::array<bool, kNumMetrics> metrics_from_flag(const std::string& s) {
    std::array<bool, kNumMetrics> m{};
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        const std::string tok = s.substr(pos, comma - pos);
        bool ok = false;
        for (int i = 0; i < kNumMetrics; ++i) {
            const auto id = static_cast<FocusMetricId>(i);
            if (tok == "m" + std::to_string(i + 1) || tok == metric_name(id)) {
                m[i] = true;
                ok = true;
                break;
            }
        }
        if (!ok)
            throw invalid_input("--metrics: unknown metric '" + tok +
                                "' (use m1..m6 or entropy,log,tenengrad,brenner,"
                                "gray_variance,max_abs_gradient)");
        pos = comma + 1;
    }
    return m;
}

std::vector<double> fractions_from_flag(const std::string& s) {
    std::vector<double> fs;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t comma = s.find(',', pos);
        if (comma == std::string::npos) comma = s.size();
        fs.push_back(flag_double(s.substr(pos, comma - pos), "--fraction"));
        pos = comma + 1;
    }
    for (double f : fs)
        if (!(f > 0.0 && f <= 1.0)) throw invalid_input("--fraction values must be in (0, 1]");
    return fs;
}

Matrix fuse_rows(const Matrix& X, const std::vector<std::vector<double>>& emb) {
    if (emb.empty()) return X;
    if (emb.size() != X.rows) throw invalid_dataset("embeddings: row count mismatch");
    const std::size_t k = emb.front().size();
    Matrix F(X.rows, X.cols + k);
    for (std::size_t r = 0; r < X.rows; ++r) {
        if (emb[r].size() != k) throw invalid_dataset("embeddings: ragged rows");
        for (std::size_t c = 0; c < X.cols; ++c) F.at(r, c) = X.at(r, c);
        for (std::size_t c = 0; c < k; ++c) F.at(r, X.cols + c) = emb[r][c];
    }
    return F;
}

// ---------------------------------------------------------------- synth ---

struct SynthOpts {
    std::string config;
    std::string out;
    Flag<int> n;
    Flag<std::uint64_t> seed;
    Flag<std::string> shape;
    Flag<double> z_min, z_max, blur_coeff, base_sigma, noise, asym_gain;
    Flag<bool> asym;
};

void run_synth(const SynthOpts& o) {
    RunConfig cfg = base_config(o.config);
    if (!o.out.empty()) cfg.paths.data_dir = o.out;
    if (o.n.set()) cfg.synth.n_samples = o.n.v;
    if (o.seed.set()) cfg.synth.seed = o.seed.v;
    if (o.shape.set()) cfg.synth.shape = shape_from_name(o.shape.v);
    if (o.z_min.set()) cfg.synth.z_min_um = o.z_min.v;
    if (o.z_max.set()) cfg.synth.z_max_um = o.z_max.v;
    if (o.blur_coeff.set()) cfg.synth.blur_coeff = o.blur_coeff.v;
    if (o.base_sigma.set()) cfg.synth.base_sigma = o.base_sigma.v;
    if (o.noise.set()) cfg.synth.noise_std = o.noise.v;
    if (o.asym.set()) cfg.synth.asymmetric = o.asym.v;
    if (o.asym_gain.set()) cfg.synth.asym_gain = o.asym_gain.v;
    validate(cfg);
    if (cfg.paths.data_dir.empty())
        throw invalid_input("synth: --out (or paths.data_dir in the config) is required");

    const auto labels = generate_dataset(cfg.synth, cfg.paths.data_dir);
    // The dataset manifest echoes the synthesis settings; the resolved run
    // config rides alongside so downstream stages can be reproduced.
    write_text(cfg.paths.data_dir + "/run_config.json", config_to_json_string(cfg));
    std::printf("wrote %zu samples to %s (shape %s, z in [%g, %g] um, seed %llu)\n", labels.size(),
                cfg.paths.data_dir.c_str(), shape_name(cfg.synth.shape).c_str(),
                cfg.synth.z_min_um, cfg.synth.z_max_um,
                static_cast<unsigned long long>(cfg.synth.seed));
}

// -------------------------------------------------------------- extract ---

struct ExtractOpts {
    std::string config;
    Flag<std::string> data, out, grid, metrics;
    Flag<double> log_sigma;
    Flag<bool> denoise;
    Flag<int> wiener_window, roi, resize, threads;
};

void apply_extract_flags(RunConfig& cfg, const ExtractOpts& o) {
    if (o.data.set()) cfg.paths.data_dir = o.data.v;
    if (o.out.set()) cfg.paths.features = o.out.v;
    if (o.grid.set()) cfg.grid = grid_from_flag(o.grid.v, cfg.grid);
    if (o.metrics.set()) cfg.metrics = metrics_from_flag(o.metrics.v);
    if (o.log_sigma.set()) cfg.log_sigma = o.log_sigma.v;
    if (o.denoise.set()) cfg.preprocess.denoise = o.denoise.v;
    if (o.wiener_window.set()) cfg.preprocess.wiener_window = o.wiener_window.v;
    if (o.roi.set()) cfg.preprocess.roi_size = o.roi.v;
    if (o.resize.set()) cfg.preprocess.resize_to = o.resize.v;
    if (o.threads.set() && o.threads.v > 0) set_threads(o.threads.v);
}

void run_extract(const ExtractOpts& o) {
    RunConfig cfg = base_config(o.config);
    apply_extract_flags(cfg, o);
    validate(cfg);
    if (cfg.paths.data_dir.empty())
        throw invalid_input("extract: --data (or paths.data_dir) is required");
    if (cfg.paths.features.empty())
        throw invalid_input("extract: --out (or paths.features) is required");

    ExtractCounters counters;
    const FeatureTable table = extract_dataset(cfg.paths.data_dir, cfg, &counters);
    for (const auto& w : counters.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    const std::size_t total = counters.n_rows + counters.n_skipped;
    if (total == 0 || counters.n_rows == 0)
        throw invalid_dataset("extract: no usable rows in " + cfg.paths.data_dir);
    if (counters.n_skipped * 2 > total)
        throw invalid_dataset("extract: " + std::to_string(counters.n_skipped) + " of " +
                              std::to_string(total) + " rows failed");

    write_feature_csv(cfg.paths.features, table);

    const std::uint64_t lh = layout_hash(table.layout_id, cfg.metrics, table.X.cols);
    ojson manifest;
    manifest["command"] = "extract";
    manifest["layout"] = table.layout_id;
    manifest["layout_hash"] = hex16(lh);
    manifest["patch_count"] = table.patch_count;
    manifest["feature_dim"] = table.X.cols;
    manifest["n_rows"] = counters.n_rows;
    manifest["n_no_detection"] = counters.n_no_detection;
    manifest["n_skipped"] = counters.n_skipped;
    manifest["config"] = config_echo(cfg);
    write_text(cfg.paths.features + ".manifest.json", manifest.dump(2) + "\n");

    std::printf("extracted %zu rows -> %s (layout %s, %zu features, hash %s)\n", counters.n_rows,
                cfg.paths.features.c_str(), table.layout_id.c_str(), table.X.cols,
                hex16(lh).c_str());
    if (counters.n_no_detection > 0)
        std::printf("no-detection fallbacks (full-frame grid): %zu\n", counters.n_no_detection);
    if (counters.n_skipped > 0) std::printf("skipped rows: %zu\n", counters.n_skipped);
}

// ---------------------------------------------------------- train / eval --

struct TrainOpts {
    std::string config;
    Flag<std::string> features, model_out, report, embeddings, regressor, grid, metrics;
    Flag<double> lambda, lr, test_fraction, train_fraction;
    Flag<int> epochs, batch;
    Flag<std::vector<int>> hidden;
    Flag<std::uint64_t> seed;
};

void apply_train_flags(RunConfig& cfg, const TrainOpts& o) {
    if (o.features.set()) cfg.paths.features = o.features.v;
    if (o.grid.set()) cfg.grid = grid_from_flag(o.grid.v, cfg.grid);
    if (o.metrics.set()) cfg.metrics = metrics_from_flag(o.metrics.v);
    if (o.model_out.set()) cfg.paths.model = o.model_out.v;
    if (o.report.set()) cfg.paths.report = o.report.v;
    if (o.embeddings.set()) cfg.paths.embeddings = o.embeddings.v;
    if (o.regressor.set()) {
        if (o.regressor.v == "ridge")
            cfg.regressor.kind = RegressorKind::Ridge;
        else if (o.regressor.v == "mlp")
            cfg.regressor.kind = RegressorKind::Mlp;
        else
            throw invalid_input("--regressor must be 'ridge' or 'mlp'");
    }
    if (o.lambda.set()) cfg.regressor.lambda = o.lambda.v;
    if (o.lr.set()) cfg.regressor.mlp.lr = o.lr.v;
    if (o.epochs.set()) cfg.regressor.mlp.epochs = o.epochs.v;
    if (o.batch.set()) cfg.regressor.mlp.batch = o.batch.v;
    if (o.hidden.set()) cfg.regressor.mlp.hidden = o.hidden.v;
    if (o.test_fraction.set()) cfg.split.test_fraction = o.test_fraction.v;
    if (o.train_fraction.set()) cfg.split.train_fraction = o.train_fraction.v;
    if (o.seed.set()) cfg.seed = o.seed.v;
}

void print_eval_table(const ExperimentResult& res) {
    std::printf("%-6s %8s %14s %10s\n", "set", "rows", "mse_um2", "r2");
    std::printf("%-6s %8zu %14.6f %10s\n", "train", res.n_train, res.train.mse,
                res.train.r2 ? std::to_string(*res.train.r2).c_str() : "n/a");
    std::printf("%-6s %8zu %14.6f %10s\n", "test", res.n_test, res.test.mse,
                res.test.r2 ? std::to_string(*res.test.r2).c_str() : "n/a");
}

void run_train(const TrainOpts& o) {
    RunConfig cfg = base_config(o.config);
    apply_train_flags(cfg, o);
    validate(cfg);
    if (cfg.paths.features.empty())
        throw invalid_input("train: --features (or paths.features) is required");

    const FeatureTable table = read_feature_csv(cfg.paths.features);
    std::vector<std::vector<double>> emb;
    if (!cfg.paths.embeddings.empty())
        emb = read_embeddings_csv(cfg.paths.embeddings, table.paths);
    const ExperimentResult res = run_experiment(table, cfg, emb);
    if (!cfg.paths.model.empty()) save_model(cfg.paths.model, res.model);

    ojson rep;
    rep["command"] = "train";
    rep["mse_um2"] = res.test.mse;
    rep["r2"] = json_r2(res.test);
    rep["train_mse_um2"] = res.train.mse;
    rep["train_r2"] = json_r2(res.train);
    rep["n_train"] = res.n_train;
    rep["n_test"] = res.n_test;
    rep["test_hash"] = hex16(res.test_hash);
    rep["layout"] = res.model.layout;
    rep["layout_hash"] = hex16(res.model.hash);
    rep["model"] = cfg.paths.model;
    rep["config"] = config_echo(cfg);
    write_report(cfg.paths.report, rep);

    print_eval_table(res);
    if (!cfg.paths.model.empty()) std::printf("model -> %s\n", cfg.paths.model.c_str());
}

struct EvalOpts {
    std::string config;
    Flag<std::string> features, model, report, embeddings, fractions, regressor, grid, metrics;
    Flag<double> lambda, test_fraction;
    Flag<std::uint64_t> seed;
};

void run_eval_sweep(RunConfig cfg, const std::vector<double>& fractions) {
    const FeatureTable table = read_feature_csv(cfg.paths.features);
    const auto rows = fraction_sweep(table, cfg, fractions);

    ojson jrows = ojson::array();
    std::printf("%-9s %8s %14s %10s\n", "fraction", "n_train", "mse_um2", "r2");
    for (const auto& row : rows) {
        const auto& r = row.result;
        std::printf("%-9.2f %8zu %14.6f %10s\n", row.fraction, r.n_train, r.test.mse,
                    r.test.r2 ? std::to_string(*r.test.r2).c_str() : "n/a");
        ojson jr;
        jr["fraction"] = row.fraction;
        jr["n_train"] = r.n_train;
        jr["mse_um2"] = r.test.mse;
        jr["r2"] = json_r2(r.test);
        jrows.push_back(jr);
    }
    const std::uint64_t th = rows.empty() ? 0 : rows.front().result.test_hash;
    std::printf("test rows: %zu (hash %s)\n", rows.empty() ? 0 : rows.front().result.n_test,
                hex16(th).c_str());

    ojson rep;
    rep["command"] = "eval";
    rep["mode"] = "sweep";
    rep["test_hash"] = hex16(th);
    rep["rows"] = jrows;
    rep["config"] = config_echo(cfg);
    write_report(cfg.paths.report, rep);
}

void run_eval(const EvalOpts& o) {
    RunConfig cfg = base_config(o.config);
    if (o.features.set()) cfg.paths.features = o.features.v;
    if (o.model.set()) cfg.paths.model = o.model.v;
    if (o.report.set()) cfg.paths.report = o.report.v;
    if (o.embeddings.set()) cfg.paths.embeddings = o.embeddings.v;
    if (o.grid.set()) cfg.grid = grid_from_flag(o.grid.v, cfg.grid);
    if (o.metrics.set()) cfg.metrics = metrics_from_flag(o.metrics.v);
    if (o.regressor.set()) {
        if (o.regressor.v == "ridge")
            cfg.regressor.kind = RegressorKind::Ridge;
        else if (o.regressor.v == "mlp")
            cfg.regressor.kind = RegressorKind::Mlp;
        else
            throw invalid_input("--regressor must be 'ridge' or 'mlp'");
    }
    if (o.lambda.set()) cfg.regressor.lambda = o.lambda.v;
    if (o.test_fraction.set()) cfg.split.test_fraction = o.test_fraction.v;
    if (o.seed.set()) cfg.seed = o.seed.v;
    validate(cfg);
    if (cfg.paths.features.empty())
        throw invalid_input("eval: --features (or paths.features) is required");

    if (o.fractions.set()) {
        run_eval_sweep(cfg, fractions_from_flag(o.fractions.v));
        return;
    }

    if (cfg.paths.model.empty())
        throw invalid_input("eval: --model (or paths.model) is required unless --fraction is given");
    const SavedModel m = load_model(cfg.paths.model);
    const FeatureTable table = read_feature_csv(cfg.paths.features);
    std::vector<std::vector<double>> emb;
    if (!cfg.paths.embeddings.empty())
        emb = read_embeddings_csv(cfg.paths.embeddings, table.paths);
    const Matrix X = fuse_rows(table.X, emb);

    // The model's layout/metrics/dim identity must be reproducible from the
    // feature table; otherwise the features came from a different grid.
    const std::size_t slash = m.layout.rfind('/');
    const std::size_t model_patches =
        slash == std::string::npos ? 0 : std::strtoull(m.layout.c_str() + slash + 1, nullptr, 10);
    const std::uint64_t have = layout_hash(m.layout, m.metrics, X.cols);
    if (table.patch_count != model_patches || have != m.hash)
        throw invalid_dataset("eval: features do not match the model: model '" + m.layout +
                              "' dim " + std::to_string(m.dim) + " hash " + hex16(m.hash) +
                              ", features have " + std::to_string(table.patch_count) +
                              " patches, dim " + std::to_string(X.cols) + " (hash " + hex16(have) +
                              "); re-extract with the model's grid/metric settings");

    const std::vector<double> y_hat = predict(m, X);
    const EvalReport r = evaluate(y_hat, table.depths);

    ojson rep;
    rep["command"] = "eval";
    rep["mode"] = "model";
    rep["mse_um2"] = r.mse;
    rep["r2"] = json_r2(r);
    rep["n"] = r.n;
    rep["model"] = cfg.paths.model;
    rep["layout"] = m.layout;
    rep["layout_hash"] = hex16(m.hash);
    rep["config"] = config_echo(cfg);
    write_report(cfg.paths.report, rep);

    std::printf("%zu rows: mse_um2 %.6f, r2 %s\n", r.n, r.mse,
                r.r2 ? std::to_string(*r.r2).c_str() : "n/a");
}

// --------------------------------------------------------------- ablate ---

struct AblateOpts {
    std::string config;
    Flag<std::string> data, report, regressor;
    Flag<double> lambda, test_fraction;
    Flag<std::uint64_t> seed;
    Flag<int> threads;
};

void run_ablate(const AblateOpts& o) {
    RunConfig cfg = base_config(o.config);
    if (o.data.set()) cfg.paths.data_dir = o.data.v;
    if (o.report.set()) cfg.paths.report = o.report.v;
    if (o.regressor.set()) {
        if (o.regressor.v == "ridge")
            cfg.regressor.kind = RegressorKind::Ridge;
        else if (o.regressor.v == "mlp")
            cfg.regressor.kind = RegressorKind::Mlp;
        else
            throw invalid_input("--regressor must be 'ridge' or 'mlp'");
    }
    if (o.lambda.set()) cfg.regressor.lambda = o.lambda.v;
    if (o.test_fraction.set()) cfg.split.test_fraction = o.test_fraction.v;
    if (o.seed.set()) cfg.seed = o.seed.v;
    if (o.threads.set() && o.threads.v > 0) set_threads(o.threads.v);
    validate(cfg);
    if (cfg.paths.data_dir.empty())
        throw invalid_input("ablate: --data (or paths.data_dir) is required");

    std::vector<std::pair<std::string, GridSpec>> variants;
    for (int k : {2, 4, 6, 8}) {
        GridSpec g = cfg.grid;
        g.mode = GridMode::Uniform;
        g.uniform_k = k;
        variants.emplace_back("uniform" + std::to_string(k), g);
    }
    {
        GridSpec g = cfg.grid;
        g.mode = GridMode::Adaptive;
        variants.emplace_back("adaptive", g);
    }

    struct Row {
        std::string name;
        std::string layout;
        ExperimentResult res;
    };
    std::vector<Row> rows;
    for (const auto& [name, g] : variants) {
        RunConfig rc = cfg;
        rc.grid = g;
        ExtractCounters counters;
        const FeatureTable table = extract_dataset(rc.paths.data_dir, rc, &counters);
        for (const auto& w : counters.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
        if (counters.n_rows == 0)
            throw invalid_dataset("ablate: no usable rows in " + rc.paths.data_dir);
        rows.push_back({name, table.layout_id, run_experiment(table, rc)});
    }
    for (const auto& r : rows)
        if (r.res.test_hash != rows.front().res.test_hash)
            throw std::runtime_error("ablate: test split diverged between configurations");

    const Row* best = &rows.front();
    for (const auto& r : rows)
        if (r.res.test.mse < best->res.test.mse) best = &r;

    ojson jrows = ojson::array();
    std::printf("%-10s %-16s %8s %14s %10s\n", "grid", "layout", "n_test", "mse_um2", "r2");
    for (const auto& r : rows) {
        std::printf("%-10s %-16s %8zu %14.6f %10s\n", r.name.c_str(), r.layout.c_str(),
                    r.res.n_test, r.res.test.mse,
                    r.res.test.r2 ? std::to_string(*r.res.test.r2).c_str() : "n/a");
        ojson jr;
        jr["grid"] = r.name;
        jr["layout"] = r.layout;
        jr["mse_um2"] = r.res.test.mse;
        jr["r2"] = json_r2(r.res.test);
        jrows.push_back(jr);
    }
    std::printf("best: %s (mse_um2 %.6f); shared test hash %s\n", best->name.c_str(),
                best->res.test.mse, hex16(rows.front().res.test_hash).c_str());

    ojson rep;
    rep["command"] = "ablate";
    rep["test_hash"] = hex16(rows.front().res.test_hash);
    rep["best"] = best->name;
    rep["rows"] = jrows;
    rep["config"] = config_echo(cfg);
    write_report(cfg.paths.report, rep);
}

// ---------------------------------------------------------------- bench ---

struct BenchOpts {
    std::string config;
    Flag<std::string> data, model, report;
    Flag<int> n, warmup;
};

void run_bench(const BenchOpts& o) {
    RunConfig cfg = base_config(o.config);
    if (o.data.set()) cfg.paths.data_dir = o.data.v;
    if (o.model.set()) cfg.paths.model = o.model.v;
    if (o.report.set()) cfg.paths.report = o.report.v;
    validate(cfg);
    if (cfg.paths.data_dir.empty())
        throw invalid_input("bench: --data (or paths.data_dir) is required");
    const int n_cap = o.n.set() ? o.n.v : 500;
    const int warmup = o.warmup.set() ? o.warmup.v : 100;
    if (n_cap < 1 || warmup < 0) throw invalid_input("bench: --n must be >= 1, --warmup >= 0");

    const auto labels = read_labels_csv(cfg.paths.data_dir + "/labels.csv");
    const std::size_t n = std::min(labels.size(), static_cast<std::size_t>(n_cap));
    if (n == 0) throw invalid_dataset("bench: no rows in " + cfg.paths.data_dir + "/labels.csv");
    std::vector<Sample> samples;
    samples.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        samples.push_back(
            {load_image(cfg.paths.data_dir + "/" + labels[i].filename), labels[i].depth_um});

    // The model for the end-to-end stage: either the one supplied, or a
    // quick fit on this same set (the timing target is predict, not fit).
    SavedModel model;
    const FeatureTable table = extract_dataset(samples, cfg);
    if (!cfg.paths.model.empty()) {
        model = load_model(cfg.paths.model);
        const std::uint64_t have = layout_hash(table.layout_id, model.metrics, table.X.cols);
        if (have != model.hash)
            throw invalid_dataset("bench: feature layout does not match the model (model hash " +
                                  hex16(model.hash) + ", features hash " + hex16(have) + ")");
    } else {
        model = run_experiment(table, cfg).model;
    }

    const int hw_threads = max_threads();
    using clock = std::chrono::steady_clock;

    const auto time_stage = [&](int threads, bool with_predict) {
        set_threads(threads);
        for (int w = 0; w < warmup; ++w) {
            const ImageFeatures f = image_features(samples[w % n].image, cfg);
            (void)f;
        }
        double sink = 0.0;
        const auto t0 = clock::now();
        for (std::size_t i = 0; i < n; ++i) {
            const ImageFeatures f = image_features(samples[i].image, cfg);
            if (with_predict) {
                Matrix X(1, f.fv.values.size());
                std::copy(f.fv.values.begin(), f.fv.values.end(), X.a.begin());
                sink += predict(model, X)[0];
            } else {
                sink += f.fv.values[0];
            }
        }
        const std::chrono::duration<double> dt = clock::now() - t0;
        if (!std::isfinite(sink))
            throw std::runtime_error("bench: non-finite prediction encountered");
        return static_cast<double>(n) / dt.count();
    };

    const double extract_1 = time_stage(1, false);
    const double extract_m = time_stage(hw_threads, false);
    const double predict_1 = time_stage(1, true);
    const double predict_m = time_stage(hw_threads, true);
    set_threads(hw_threads);

    std::printf("%-8s %8s %12s\n", "stage", "threads", "img/s");
    std::printf("%-8s %8d %12.2f\n", "extract", 1, extract_1);
    std::printf("%-8s %8d %12.2f\n", "extract", hw_threads, extract_m);
    std::printf("%-8s %8d %12.2f\n", "predict", 1, predict_1);
    std::printf("%-8s %8d %12.2f\n", "predict", hw_threads, predict_m);

    ojson rep;
    rep["command"] = "bench";
    rep["n_images"] = n;
    rep["warmup"] = warmup;
    rep["threads_multi"] = hw_threads;
    rep["throughput_img_s"] = extract_m;
    rep["extract_img_s"] = {{"single_thread", extract_1}, {"multi_thread", extract_m}};
    rep["predict_img_s"] = {{"single_thread", predict_1}, {"multi_thread", predict_m}};
    rep["config"] = config_echo(cfg);
    write_report(cfg.paths.report, rep);
}

} // namespace

namespace microdepth_cli {

int run(int argc, char** argv) {
    CLI::App app{"microdepth: physics-informed depth-from-focus for transparent microrobots"};
    app.require_subcommand(1);

    auto so = std::make_shared<SynthOpts>();
    auto* synth = app.add_subcommand("synth", "Generate a synthetic defocus dataset");
    synth->add_option("--config", so->config, "JSON config file (flags override it)");
    synth->add_option("--out", so->out, "output directory");
    so->n.o = synth->add_option("--n", so->n.v, "number of samples");
    so->seed.o = synth->add_option("--seed", so->seed.v, "synthesis seed");
    so->shape.o = synth->add_option("--shape", so->shape.v, "disc|ring|spheroid_pair");
    so->z_min.o = synth->add_option("--z-min", so->z_min.v, "depth range lower bound (um)");
    so->z_max.o = synth->add_option("--z-max", so->z_max.v, "depth range upper bound (um)");
    so->blur_coeff.o = synth->add_option("--blur-coeff", so->blur_coeff.v, "sigma per um of |z|");
    so->base_sigma.o = synth->add_option("--base-sigma", so->base_sigma.v, "sigma at focus");
    so->noise.o = synth->add_option("--noise", so->noise.v, "sensor noise std");
    so->asym.o = synth->add_flag("--asym,!--no-asym", so->asym.v,
                                 "brightness ramp above focus (makes signed depth learnable)");
    so->asym_gain.o = synth->add_option("--asym-gain", so->asym_gain.v, "ramp strength");
    synth->callback([so]() { run_synth(*so); });

    auto eo = std::make_shared<ExtractOpts>();
    auto* extract = app.add_subcommand("extract", "Images + labels.csv -> feature CSV");
    extract->add_option("--config", eo->config, "JSON config file (flags override it)");
    eo->data.o = extract->add_option("--data", eo->data.v, "dataset directory (with labels.csv)");
    eo->out.o = extract->add_option("--out", eo->out.v, "feature CSV path");
    eo->grid.o = extract->add_option("--grid", eo->grid.v, "'adaptive' or 'uniform:K'");
    eo->metrics.o =
        extract->add_option("--metrics", eo->metrics.v, "comma list, e.g. m1,m3,m6 (default all)");
    eo->log_sigma.o = extract->add_option("--log-sigma", eo->log_sigma.v, "LoG smoothing sigma");
    eo->denoise.o = extract->add_flag("--denoise,!--no-denoise", eo->denoise.v, "Wiener denoise");
    eo->wiener_window.o =
        extract->add_option("--wiener-window", eo->wiener_window.v, "odd window size >= 3");
    eo->roi.o = extract->add_option("--roi", eo->roi.v, "ROI crop size (0 = off)");
    eo->resize.o = extract->add_option("--resize", eo->resize.v, "working size (0 = keep)");
    eo->threads.o = extract->add_option("--threads", eo->threads.v, "worker threads");
    extract->callback([eo]() { run_extract(*eo); });

    auto to = std::make_shared<TrainOpts>();
    auto* train = app.add_subcommand("train", "Fit a regressor on a feature CSV");
    train->add_option("--config", to->config, "JSON config file (flags override it)");
    to->features.o = train->add_option("--features", to->features.v, "feature CSV path");
    to->model_out.o = train->add_option("--model-out", to->model_out.v, "model JSON output path");
    to->report.o = train->add_option("--report", to->report.v, "JSON report output path");
    to->embeddings.o =
        train->add_option("--embeddings", to->embeddings.v, "deep-embedding CSV to fuse");
    to->grid.o = train->add_option("--grid", to->grid.v,
                                   "grid the features were extracted with ('adaptive'/'uniform:K')");
    to->metrics.o =
        train->add_option("--metrics", to->metrics.v, "metric set used at extraction");
    to->regressor.o = train->add_option("--regressor", to->regressor.v, "ridge|mlp");
    to->lambda.o = train->add_option("--lambda", to->lambda.v, "ridge penalty");
    to->lr.o = train->add_option("--lr", to->lr.v, "mlp learning rate");
    to->epochs.o = train->add_option("--epochs", to->epochs.v, "mlp epochs");
    to->batch.o = train->add_option("--batch", to->batch.v, "mlp batch size");
    to->hidden.o =
        train->add_option("--hidden", to->hidden.v, "mlp hidden sizes, e.g. 64,32")->delimiter(',');
    to->test_fraction.o =
        train->add_option("--test-fraction", to->test_fraction.v, "held-out fraction");
    to->train_fraction.o = train->add_option("--train-fraction", to->train_fraction.v,
                                             "fraction of the training pool used");
    to->seed.o = train->add_option("--seed", to->seed.v, "split/experiment seed");
    train->callback([to]() { run_train(*to); });

    auto vo = std::make_shared<EvalOpts>();
    auto* eval = app.add_subcommand("eval", "Evaluate a model, or sweep training fractions");
    eval->add_option("--config", vo->config, "JSON config file (flags override it)");
    vo->features.o = eval->add_option("--features", vo->features.v, "feature CSV path");
    vo->model.o = eval->add_option("--model", vo->model.v, "model JSON path");
    vo->report.o = eval->add_option("--report", vo->report.v, "JSON report output path");
    vo->embeddings.o =
        eval->add_option("--embeddings", vo->embeddings.v, "deep-embedding CSV to fuse");
    vo->fractions.o = eval->add_option("--fraction", vo->fractions.v,
                                       "comma list (e.g. 1.0,0.8,0.6,0.4,0.2): retrain on nested "
                                       "subsets and report each test MSE");
    vo->grid.o = eval->add_option("--grid", vo->grid.v,
                                  "grid the features were extracted with ('adaptive'/'uniform:K')");
    vo->metrics.o = eval->add_option("--metrics", vo->metrics.v, "metric set used at extraction");
    vo->regressor.o = eval->add_option("--regressor", vo->regressor.v, "ridge|mlp (sweep mode)");
    vo->lambda.o = eval->add_option("--lambda", vo->lambda.v, "ridge penalty (sweep mode)");
    vo->test_fraction.o =
        eval->add_option("--test-fraction", vo->test_fraction.v, "held-out fraction (sweep mode)");
    vo->seed.o = eval->add_option("--seed", vo->seed.v, "split seed (sweep mode)");
    eval->callback([vo]() { run_eval(*vo); });

    auto ao = std::make_shared<AblateOpts>();
    auto* ablate =
        app.add_subcommand("ablate", "Compare uniform 2/4/6/8 grids against the adaptive grid");
    ablate->add_option("--config", ao->config, "JSON config file (flags override it)");
    ao->data.o = ablate->add_option("--data", ao->data.v, "dataset directory (with labels.csv)");
    ao->report.o = ablate->add_option("--report", ao->report.v, "JSON report output path");
    ao->regressor.o = ablate->add_option("--regressor", ao->regressor.v, "ridge|mlp");
    ao->lambda.o = ablate->add_option("--lambda", ao->lambda.v, "ridge penalty");
    ao->test_fraction.o =
        ablate->add_option("--test-fraction", ao->test_fraction.v, "held-out fraction");
    ao->seed.o = ablate->add_option("--seed", ao->seed.v, "split/experiment seed");
    ao->threads.o = ablate->add_option("--threads", ao->threads.v, "worker threads");
    ablate->callback([ao]() { run_ablate(*ao); });

    auto bo = std::make_shared<BenchOpts>();
    auto* bench = app.add_subcommand("bench", "Feature-extraction / predict throughput");
    bench->add_option("--config", bo->config, "JSON config file (flags override it)");
    bo->data.o = bench->add_option("--data", bo->data.v, "dataset directory (with labels.csv)");
    bo->model.o = bench->add_option("--model", bo->model.v, "model JSON (default: quick fit)");
    bo->report.o = bench->add_option("--report", bo->report.v, "JSON report output path");
    bo->n.o = bench->add_option("--n", bo->n.v, "timed images (default 500)");
    bo->warmup.o = bench->add_option("--warmup", bo->warmup.v, "warmup iterations (default 100)");
    bench->callback([bo]() { run_bench(*bo); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    return 0;
}

} // namespace microdepth_cli
