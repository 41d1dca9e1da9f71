#include "microdepth/experiment.hpp"

#include <algorithm>

#include "microdepth/errors.hpp"

namespace microdepth {

namespace {

Matrix fused_matrix(const FeatureTable& table, const std::vector<std::vector<double>>& embeddings) {
    if (embeddings.empty()) return table.X;
    if (embeddings.size() != table.X.rows)
        throw invalid_dataset("experiment: embedding row count does not match features");
    const std::size_t edim = embeddings.front().size();
    for (const auto& e : embeddings)
        if (e.size() != edim) throw invalid_dataset("experiment: ragged embedding lengths");
    if (edim == 0) return table.X;
    Matrix X(table.X.rows, table.X.cols + edim);
    for (std::size_t r = 0; r < X.rows; ++r) {
        std::copy(&table.X.a[r * table.X.cols], &table.X.a[r * table.X.cols] + table.X.cols,
                  &X.a[r * X.cols]);
        std::copy(embeddings[r].begin(), embeddings[r].end(), &X.a[r * X.cols + table.X.cols]);
    }
    return X;
}

Matrix take_rows(const Matrix& X, const std::vector<std::size_t>& idx) {
    Matrix out(idx.size(), X.cols);
    for (std::size_t r = 0; r < idx.size(); ++r)
        std::copy(&X.a[idx[r] * X.cols], &X.a[idx[r] * X.cols] + X.cols, &out.a[r * X.cols]);
    return out;
}

std::vector<double> take(const std::vector<double>& v, const std::vector<std::size_t>& idx) {
    std::vector<double> out(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
    return out;
}

std::uint64_t hash_indices(const std::vector<std::size_t>& idx) {
    std::string s;
    for (std::size_t i : idx) s += std::to_string(i) + ",";
    return fnv1a64(s);
}

} // namespace

ExperimentResult run_experiment(const FeatureTable& table, const RunConfig& cfg,
                                const std::vector<std::vector<double>>& embeddings) {
    // The config declares the feature layout (a CSV only records the patch
    // count, not the grid that produced it); verify the table against it so a
    // model is never stamped with the wrong identity.
    const std::string layout = layout_id(cfg.grid);
    const auto implied = static_cast<std::size_t>(patch_count(cfg.grid));
    if (table.patch_count != implied)
        throw invalid_dataset("feature table has " + std::to_string(table.patch_count) +
                              " patches but the configured grid '" + layout + "' implies " +
                              std::to_string(implied) +
                              "; pass the grid settings used at extraction");
    if (!table.layout_id.empty() && table.layout_id != layout)
        throw invalid_dataset("feature table layout '" + table.layout_id +
                              "' does not match the configured grid '" + layout + "'");

    const Matrix X = fused_matrix(table, embeddings);
    const SplitIndices split =
        split_dataset(X.rows, cfg.split.test_fraction, cfg.split.train_fraction, cfg.seed);

    const Matrix Xtr_raw = take_rows(X, split.train);
    const Matrix Xte_raw = take_rows(X, split.test);
    const std::vector<double> ytr = take(table.depths, split.train);
    const std::vector<double> yte = take(table.depths, split.test);

    ExperimentResult res;
    res.n_train = split.train.size();
    res.n_test = split.test.size();
    res.test_hash = hash_indices(split.test);

    SavedModel model;
    model.kind = cfg.regressor.kind;
    model.layout = layout;
    model.metrics = cfg.metrics;
    model.dim = X.cols;
    model.hash = layout_hash(model.layout, model.metrics, model.dim);
    model.standardizer = fit_standardizer(Xtr_raw);

    const Matrix Ztr = apply(model.standardizer, Xtr_raw);
    const Matrix Zte = apply(model.standardizer, Xte_raw);

    std::vector<double> pred_tr, pred_te;
    if (cfg.regressor.kind == RegressorKind::Ridge) {
        model.ridge = fit_ridge(Ztr, ytr, cfg.regressor.lambda);
        pred_tr = predict(model.ridge, Ztr);
        pred_te = predict(model.ridge, Zte);
    } else {
        model.mlp = fit_mlp(Ztr, ytr, cfg.regressor.mlp);
        pred_tr = predict(model.mlp, Ztr);
        pred_te = predict(model.mlp, Zte);
    }

    res.train = evaluate(pred_tr, ytr);
    res.test = evaluate(pred_te, yte);
    res.model = std::move(model);
    return res;
}

std::vector<SweepRow> fraction_sweep(const FeatureTable& table, const RunConfig& cfg,
                                     const std::vector<double>& fractions) {
    std::vector<SweepRow> rows;
    rows.reserve(fractions.size());
    for (double f : fractions) {
        RunConfig c = cfg;
        c.split.train_fraction = f;
        rows.push_back({f, run_experiment(table, c)});
    }
    return rows;
}

} // namespace microdepth
