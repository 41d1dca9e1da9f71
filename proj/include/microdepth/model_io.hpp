#pragma once

#include <string>

#include "microdepth/config.hpp"
#include "microdepth/regress.hpp"

namespace microdepth {

// On-disk model blob (versioned JSON): standardizer + parameters + the
// feature-layout hash guarding against grid/metric mismatches at eval time.
struct SavedModel {
    int version = 1;
    RegressorKind kind = RegressorKind::Ridge;
    std::string layout;
    std::array<bool, kNumMetrics> metrics{true, true, true, true, true, true};
    std::size_t dim = 0;
    std::uint64_t hash = 0;
    Standardizer standardizer;
    RidgeModel ridge;
    MlpModel mlp;
};

void save_model(const std::string& path, const SavedModel& m);
SavedModel load_model(const std::string& path);

std::vector<double> predict(const SavedModel& m, const Matrix& X_raw);

} // namespace microdepth
