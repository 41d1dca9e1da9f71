#include "microdepth/synth.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "microdepth/errors.hpp"
#include "microdepth/format.hpp"

namespace microdepth {

const std::string& shape_name(RobotShape s) {
    static const std::array<std::string, 3> names{"disc", "ring", "spheroid_pair"};
    return names[static_cast<int>(s)];
}

RobotShape shape_from_name(const std::string& name) {
    if (name == "disc") return RobotShape::Disc;
    if (name == "ring") return RobotShape::Ring;
    if (name == "spheroid_pair") return RobotShape::SpheroidPair;
    throw invalid_input("unknown shape '" + name + "' (disc|ring|spheroid_pair)");
}

void validate(const SynthConfig& cfg) {
    if (cfg.n_samples < 1) throw invalid_input("SynthConfig: n_samples must be >= 1");
    if (!(cfg.z_min_um < cfg.z_max_um)) throw invalid_input("SynthConfig: need z_min < z_max");
    if (!(cfg.blur_coeff > 0.0)) throw invalid_input("SynthConfig: blur_coeff must be > 0");
    if (cfg.base_sigma < 0.0) throw invalid_input("SynthConfig: base_sigma must be >= 0");
    if (cfg.noise_std < 0.0) throw invalid_input("SynthConfig: noise_std must be >= 0");
    if (cfg.asym_gain < 0.0) throw invalid_input("SynthConfig: asym_gain must be >= 0");
}

namespace {

constexpr double kBackground = 200.0;
constexpr double kBody = 90.0;       // robot body intensity
constexpr double kBand = 60.0;       // darker internal band (texture)
constexpr double kBodyAlt = 110.0;   // second spheroid

// Intensity of the scene at a continuous point, before blur.
double scene_at(RobotShape shape, double cx, double cy, double px, double py) {
    const double dx = px - cx, dy = py - cy;
    const double d = std::sqrt(dx * dx + dy * dy);
    switch (shape) {
        case RobotShape::Disc:
            if (d <= 28.0) return (d >= 10.0 && d <= 16.0) ? kBand : kBody;
            return kBackground;
        case RobotShape::Ring:
            return (d >= 18.0 && d <= 28.0) ? kBody : kBackground;
        case RobotShape::SpheroidPair: {
            const double dl = std::sqrt((px - (cx - 22.0)) * (px - (cx - 22.0)) + dy * dy);
            if (dl <= 16.0) return kBody;
            const double dr = std::sqrt((px - (cx + 22.0)) * (px - (cx + 22.0)) + dy * dy);
            if (dr <= 16.0) return kBodyAlt;
            return kBackground;
        }
    }
    return kBackground;
}

// 4x4 supersampled rasterization of the silhouette.
GrayImage rasterize(RobotShape shape, double cx, double cy) {
    GrayImage img(kSynthImageSize, kSynthImageSize);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int sy = 0; sy < 4; ++sy)
                for (int sx = 0; sx < 4; ++sx)
                    acc += scene_at(shape, cx, cy, x + (sx + 0.5) / 4.0, y + (sy + 0.5) / 4.0);
            img.at(x, y) = acc / 16.0;
        }
    }
    return img;
}

} // namespace

GrayImage render_sample(const SynthConfig& cfg, double z, Rng& rng) {
    validate(cfg);
    if (!(z >= cfg.z_min_um && z <= cfg.z_max_um))
        throw invalid_input("render_sample: depth outside configured range");

    // Draw order is part of the determinism contract: jitter x, jitter y,
    // then one noise value per pixel in row-major order.
    const double jx = rng.uniform(-10.0, 10.0);
    const double jy = rng.uniform(-10.0, 10.0);
    const double cx = kSynthImageSize / 2.0 + jx;
    const double cy = kSynthImageSize / 2.0 + jy;

    GrayImage img = rasterize(cfg.shape, cx, cy);
    const double sigma = cfg.base_sigma + cfg.blur_coeff * std::abs(z);
    img = gaussian_blur(img, sigma);

    // Above focus only: a horizontal brightness gradient whose slope grows
    // like sqrt(z), so variance-style patch responses scale linearly in z.
    if (cfg.asymmetric && z > 0.0) {
        const double amp = cfg.asym_gain * std::sqrt(z);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                img.at(x, y) += amp * ((x + 0.5) / img.width - 0.5);
    }

    for (double& v : img.data) {
        if (cfg.noise_std > 0.0) v += cfg.noise_std * rng.gaussian();
        // quantize like an 8-bit sensor so in-memory samples match PGM
        // round-trips exactly
        v = std::floor(v + 0.5);
        v = v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v);
    }
    return img;
}

std::vector<double> sample_depths(const SynthConfig& cfg) {
    validate(cfg);
    Rng rng(cfg.seed);
    std::vector<double> z(static_cast<std::size_t>(cfg.n_samples));
    for (double& v : z) v = rng.uniform(cfg.z_min_um, cfg.z_max_um);
    return z;
}

std::vector<Sample> generate_samples(const SynthConfig& cfg) {
    const std::vector<double> depths = sample_depths(cfg);
    std::vector<std::uint64_t> seeds(depths.size());
    std::uint64_t state = cfg.seed;
    for (auto& s : seeds) s = splitmix64(state);

    std::vector<Sample> out(depths.size());
    // Per-sample rng streams make this order-independent; noise draws for
    // sample i never depend on sample j.
    for (std::size_t i = 0; i < depths.size(); ++i) {
        Rng rng(seeds[i]);
        out[i].image = render_sample(cfg, depths[i], rng);
        out[i].depth_um = depths[i];
    }
    return out;
}

std::string synth_manifest_json(const SynthConfig& cfg) {
    nlohmann::ordered_json j;
    j["synth"] = {{"n_samples", cfg.n_samples},
                  {"z_min_um", cfg.z_min_um},
                  {"z_max_um", cfg.z_max_um},
                  {"blur_coeff", cfg.blur_coeff},
                  {"base_sigma", cfg.base_sigma},
                  {"noise_std", cfg.noise_std},
                  {"shape", shape_name(cfg.shape)},
                  {"asymmetric", cfg.asymmetric},
                  {"asym_gain", cfg.asym_gain},
                  {"seed", cfg.seed}};
    return j.dump(2) + "\n";
}

std::vector<std::pair<std::string, double>> generate_dataset(const SynthConfig& cfg,
                                                             const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw io_error(io_error::Kind::IoFailure, out_dir + ": cannot create output directory");

    const std::vector<Sample> samples = generate_samples(cfg);
    std::vector<std::pair<std::string, double>> labels;
    labels.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%05zu.pgm", i);
        save_image(samples[i].image, (fs::path(out_dir) / name).string());
        labels.emplace_back(name, samples[i].depth_um);
    }

    const std::string labels_path = (fs::path(out_dir) / "labels.csv").string();
    std::ofstream out(labels_path, std::ios::binary);
    if (!out) throw io_error(io_error::Kind::IoFailure, labels_path + ": cannot open for writing");
    out << "filename,depth_um\n";
    for (const auto& [name, depth] : labels) out << name << "," << format_double(depth) << "\n";
    if (!out) throw io_error(io_error::Kind::IoFailure, labels_path + ": write failed");
    out.close();

    const std::string manifest_path = (fs::path(out_dir) / "manifest.json").string();
    std::ofstream mf(manifest_path, std::ios::binary);
    if (!mf) throw io_error(io_error::Kind::IoFailure, manifest_path + ": cannot open for writing");
    mf << synth_manifest_json(cfg);
    if (!mf) throw io_error(io_error::Kind::IoFailure, manifest_path + ": write failed");
    return labels;
}

} // namespace microdepth
