#pragma once

#include <string>
#include <vector>

#include "microdepth/config.hpp"
#include "microdepth/dataset.hpp"
#include "microdepth/synth.hpp"

namespace microdepth {

// Per-frame preparation: optional ROI crop, resize to the working size,
// optional Wiener denoise — in that order.
GrayImage prepare_image(const GrayImage& img, const PrepConfig& prep);

struct ImageFeatures {
    PhysicsFeatureVector fv;
    bool no_detection = false; // adaptive mode fell back to the full frame
    ExtractStats stats;
};

ImageFeatures image_features(const GrayImage& img, const RunConfig& cfg);

struct ExtractCounters {
    std::size_t n_rows = 0;
    std::size_t n_no_detection = 0;
    std::size_t n_skipped = 0;
    std::vector<std::string> warnings;
};

// Directory dataset (labels.csv + images) -> feature table. Unreadable
// images are skipped with a warning; row order follows labels.csv.
FeatureTable extract_dataset(const std::string& data_dir, const RunConfig& cfg,
                             ExtractCounters* counters = nullptr);

// In-memory variant used by experiments and tests.
FeatureTable extract_dataset(const std::vector<Sample>& samples, const RunConfig& cfg,
                             ExtractCounters* counters = nullptr);

} // namespace microdepth
