#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "microdepth/image.hpp"
#include "microdepth/rng.hpp"

namespace microdepth {

inline constexpr int kSynthImageSize = 224;

enum class RobotShape { Disc, Ring, SpheroidPair };

const std::string& shape_name(RobotShape s);
RobotShape shape_from_name(const std::string& name);

// Synthetic defocus generator. Defocus is modeled as a linear blur law
// sigma(z) = base_sigma + blur_coeff * |z|; since that is even in z, raw
// samples only expose |z|. With `asymmetric` set, frames above focus
// (z > 0) additionally get a horizontal brightness gradient whose slope
// grows like sqrt(z), which gives variance-type patch features a response
// linear in max(z, 0) and makes signed depth learnable.
struct SynthConfig {
    int n_samples = 500;
    double z_min_um = -5.0;
    double z_max_um = 5.0;
    double blur_coeff = 0.4;   // sigma per micrometre
    double base_sigma = 0.3;
    double noise_std = 2.0;    // intensity units, added after blur
    RobotShape shape = RobotShape::Disc;
    bool asymmetric = false;
    double asym_gain = 30.0;   // ramp strength, intensity units across the frame at z = 1
    std::uint64_t seed = 7;
};

void validate(const SynthConfig& cfg);

struct Sample {
    GrayImage image;
    double depth_um = 0.0;
};

// One rendered frame: silhouette at a jittered in-plane position, blurred
// with sigma(z), optional asymmetric ramp, then clamped Gaussian noise.
GrayImage render_sample(const SynthConfig& cfg, double z, Rng& rng);

// Uniformly distributed depths over [z_min, z_max], master-seeded.
std::vector<double> sample_depths(const SynthConfig& cfg);

// All samples in memory; per-sample rng streams split from cfg.seed, so
// the result is independent of evaluation order.
std::vector<Sample> generate_samples(const SynthConfig& cfg);

// Writes sample_#####.pgm files, labels.csv (filename,depth_um) and
// manifest.json (config echo) into out_dir. Returns the labels written.
std::vector<std::pair<std::string, double>> generate_dataset(const SynthConfig& cfg,
                                                             const std::string& out_dir);

std::string synth_manifest_json(const SynthConfig& cfg);

} // namespace microdepth
