#pragma once

#include <cstdint>
#include <vector>

#include "microdepth/dataset.hpp"
#include "microdepth/model_io.hpp"
#include "microdepth/regress.hpp"

namespace microdepth {

struct ExperimentResult {
    EvalReport train;
    EvalReport test;
    SavedModel model;
    std::uint64_t test_hash = 0; // identifies the exact test index set
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

// Split -> standardize on the training rows only -> fit -> evaluate.
// Embeddings, when present, are fused (concatenated) before standardizing.
ExperimentResult run_experiment(const FeatureTable& table, const RunConfig& cfg,
                                const std::vector<std::vector<double>>& embeddings = {});

struct SweepRow {
    double fraction = 1.0;
    ExperimentResult result;
};

// Fig. of merit for the data-efficiency question: nested training subsets,
// one shared test set.
std::vector<SweepRow> fraction_sweep(const FeatureTable& table, const RunConfig& cfg,
                                     const std::vector<double>& fractions);

} // namespace microdepth
