#pragma once

#include <array>
#include <cmath>
#include <string>

#include "microdepth/image.hpp"

namespace microdepth {

// Canonical metric order. This ordering is a serialization contract: it
// fixes the layout of MetricVector, the 312-value feature vector and the
// feature CSV columns. Do not reorder.
enum class FocusMetricId {
    Entropy = 0,       // M1
    LoG,               // M2
    Tenengrad,         // M3
    Brenner,           // M4
    GrayVariance,      // M5
    MaxAbsGradient,    // M6
};

inline constexpr int kNumMetrics = 6;

using MetricVector = std::array<double, kNumMetrics>;

const std::string& metric_name(FocusMetricId id);

// Shared 256-level binning for histogram ops (entropy, Otsu): round
// half-up, clamp to [0, 255].
inline int quantize256(double v) {
    const double q = std::floor(v + 0.5);
    return q < 0.0 ? 0 : (q > 255.0 ? 255 : static_cast<int>(q));
}

// M1: Shannon entropy (bits) of the 256-bin intensity histogram; values are
// rounded half-up and clamped to [0, 255] before binning.
double entropy(const GrayImage& img);

// M2: sum of squared Laplacian-of-Gaussian responses.
double log_energy(const GrayImage& img, double sigma = 1.0);

// M3: sum over all pixels of Gx^2 + Gy^2 (Sobel).
double tenengrad(const GrayImage& img);

// M4: sum of (I(x+2, y) - I(x, y))^2 over x with x+2 < width; no padding.
double brenner(const GrayImage& img);

// M5: population variance (divide by N) of all intensities.
double gray_variance(const GrayImage& img);

// M6: max over pixels of sqrt(Gx^2 + Gy^2).
double max_abs_gradient(const GrayImage& img);

// All six in canonical order. Propagates the per-metric errors, so the
// image must satisfy every metric's preconditions (at least 3x3 plus room
// for the LoG kernel).
MetricVector metric_vector(const GrayImage& img, double log_sigma = 1.0);

} // namespace microdepth
