#pragma once

#include <optional>
#include <vector>

#include "microdepth/focus_metrics.hpp"
#include "microdepth/image.hpp"
#include "microdepth/preprocess.hpp"

namespace microdepth {

enum class GridMode { Adaptive, Uniform };

struct GridSpec {
    GridMode mode = GridMode::Adaptive;
    int uniform_k = 4;          // Uniform only; one of {2, 4, 6, 8}
    int fg_grid = 6;            // per side, over the detected bbox
    int bg_grid = 4;            // per side, over the full frame
    double expansion_ratio = 1.2;
    double blur_sigma = 2.0;    // detection blur
};

// Throws invalid_input when the spec is out of contract.
void validate(const GridSpec& spec);

// Total number of patches the spec produces (uniform k*k, adaptive fg^2+bg^2).
int patch_count(const GridSpec& spec);

enum class PatchTag { Foreground, Background, Pad };

struct Patch {
    BoundingBox box;
    PatchTag tag = PatchTag::Pad;
};

// Fixed patch layout for one image. Adaptive mode always has 52 slots:
// 0..35 foreground (row-major over the bbox grid), 36..51 background
// (row-major over the full frame). Degenerate zero-area cells are tagged
// Pad in place so slot indices never shift. Uniform(k) has k*k slots.
struct PatchGrid {
    std::vector<Patch> patches;
    std::optional<BoundingBox> source_bbox;
    int img_w = 0;
    int img_h = 0;
    GridMode mode = GridMode::Adaptive;
};

// values = per-patch metric vectors, patch-major (patch p occupies
// [6p, 6p+6) in canonical M1..M6 order); mask marks real (non-pad) slots.
struct PhysicsFeatureVector {
    std::vector<double> values;
    std::vector<bool> mask;
};

struct ExtractOptions {
    double log_sigma = 1.0;
    // Disabled metrics are zeroed in place; the 6-per-patch layout never
    // changes, so CSV columns and model dims stay stable across toggles.
    std::array<bool, kNumMetrics> metrics{true, true, true, true, true, true};
};

struct ExtractStats {
    int tiny_patches = 0; // patches too small for gradient/LoG metrics
};

// Blur -> Otsu -> largest component -> expand. nullopt when the image is
// degenerate (single gray level): callers fall back to the full frame.
std::optional<BoundingBox> detect_robot(const GrayImage& img, const GridSpec& spec,
                                        Polarity polarity = Polarity::Minority);

PatchGrid build_grid(int img_w, int img_h, const std::optional<BoundingBox>& bbox,
                     const GridSpec& spec);

PhysicsFeatureVector extract_features(const GrayImage& img, const PatchGrid& grid,
                                      const ExtractOptions& opts = {},
                                      ExtractStats* stats = nullptr);

// Guarded per-patch metric vector: metrics whose minimum-size precondition
// the patch violates are reported as 0 and *tiny is set. Shared by the
// parallel extractor and its serial reference so both produce identical
// values.
MetricVector patch_metrics(const GrayImage& patch, const ExtractOptions& opts, bool* tiny);

} // namespace microdepth
