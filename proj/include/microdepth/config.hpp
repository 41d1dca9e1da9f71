#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "microdepth/grid.hpp"
#include "microdepth/regress.hpp"
#include "microdepth/synth.hpp"

namespace microdepth {

enum class RegressorKind { Ridge, Mlp };

struct PrepConfig {
    bool denoise = true;
    int wiener_window = 5;
    double canny_low = 0.0;  // 0 = auto (percentile rule)
    double canny_high = 0.0; // 0 = auto
    int resize_to = 224;     // 0 = keep input size
    int roi_size = 0;        // 0 = skip ROI crop (synthetic frames are pre-cropped)
};

struct RegressorConfig {
    RegressorKind kind = RegressorKind::Ridge;
    double lambda = 1.0;
    MlpConfig mlp;
};

struct SplitConfig {
    double test_fraction = 0.2;
    double train_fraction = 1.0;
};

struct Paths {
    std::string data_dir;
    std::string features;
    std::string model;
    std::string report;
    std::string embeddings; // optional deep-feature CSV
};

// The single declarative configuration: every command reads one of these
// (file + flag overrides, flags win) and echoes the resolved copy into its
// output manifest.
struct RunConfig {
    std::uint64_t seed = 7;
    Paths paths;
    GridSpec grid;
    std::array<bool, kNumMetrics> metrics{true, true, true, true, true, true};
    double log_sigma = 1.0;
    PrepConfig preprocess;
    RegressorConfig regressor;
    SplitConfig split;
    SynthConfig synth;
};

// Strict parse: unknown keys anywhere are rejected (invalid_input), partial
// objects inherit defaults. to_json_string produces the canonical echo.
RunConfig config_from_json_string(const std::string& text);
RunConfig load_config(const std::string& path);
std::string config_to_json_string(const RunConfig& cfg);

void validate(const RunConfig& cfg);

// Feature-layout identity: grid shape + metric toggles + vector length.
// Stored with models and checked before evaluation so a model can never be
// applied to features from a different layout.
std::string layout_id(const GridSpec& grid);
std::uint64_t layout_hash(const std::string& layout, const std::array<bool, kNumMetrics>& metrics,
                          std::size_t dim);

std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

} // namespace microdepth
