#include "microdepth/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "microdepth/errors.hpp"

namespace microdepth {

GrayImage prepare_image(const GrayImage& img, const PrepConfig& prep) {
    GrayImage work = img;
    if (prep.roi_size > 0) work = roi_crop(work, prep.roi_size);
    if (prep.resize_to > 0 && (work.width != prep.resize_to || work.height != prep.resize_to))
        work = resize_bilinear(work, prep.resize_to, prep.resize_to);
    if (prep.denoise) work = wiener_denoise(work, prep.wiener_window);
    return work;
}

ImageFeatures image_features(const GrayImage& img, const RunConfig& cfg) {
    const GrayImage work = prepare_image(img, cfg.preprocess);
    ImageFeatures out;
    std::optional<BoundingBox> bbox;
    if (cfg.grid.mode == GridMode::Adaptive) {
        bbox = detect_robot(work, cfg.grid);
        out.no_detection = !bbox.has_value();
    }
    const PatchGrid grid = build_grid(work.width, work.height, bbox, cfg.grid);
    ExtractOptions opts;
    opts.log_sigma = cfg.log_sigma;
    opts.metrics = cfg.metrics;
    out.fv = extract_features(work, grid, opts, &out.stats);
    return out;
}

namespace {

struct RowResult {
    bool ok = false;
    bool no_detection = false;
    std::string warning;
    std::vector<double> values;
    std::vector<bool> mask;
};

FeatureTable assemble(const std::vector<RowResult>& results, const std::vector<LabelRow>& labels,
                      const RunConfig& cfg, ExtractCounters* counters) {
    const int patches = cfg.grid.mode == GridMode::Uniform
                            ? cfg.grid.uniform_k * cfg.grid.uniform_k
                            : cfg.grid.fg_grid * cfg.grid.fg_grid + cfg.grid.bg_grid * cfg.grid.bg_grid;
    FeatureTable t;
    t.patch_count = static_cast<std::size_t>(patches);
    t.layout_id = layout_id(cfg.grid);
    const std::size_t dim = t.patch_count * kNumMetrics;

    std::size_t kept = 0;
    for (const RowResult& r : results) kept += r.ok ? 1u : 0u;
    t.X = Matrix(kept, dim);
    t.paths.reserve(kept);
    t.depths.reserve(kept);
    t.masks.reserve(kept);

    std::size_t out_row = 0;
    for (std::size_t i = 0; i < results.size(); ++i) {
        const RowResult& r = results[i];
        if (counters) {
            if (!r.warning.empty()) counters->warnings.push_back(r.warning);
            counters->n_no_detection += r.no_detection ? 1u : 0u;
            counters->n_skipped += r.ok ? 0u : 1u;
        }
        if (!r.ok) continue;
        t.paths.push_back(labels[i].filename);
        t.depths.push_back(labels[i].depth_um);
        std::copy(r.values.begin(), r.values.end(), t.X.a.begin() + out_row * dim);
        t.masks.push_back(r.mask);
        ++out_row;
    }
    if (counters) counters->n_rows = kept;
    return t;
}

} // namespace

FeatureTable extract_dataset(const std::string& data_dir, const RunConfig& cfg,
                             ExtractCounters* counters) {
    namespace fs = std::filesystem;
    const std::vector<LabelRow> labels = read_labels_csv((fs::path(data_dir) / "labels.csv").string());
    if (labels.empty()) throw invalid_dataset(data_dir + ": labels.csv has no rows");

    std::vector<RowResult> results(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        RowResult& r = results[i];
        try {
            const GrayImage img = load_image((fs::path(data_dir) / labels[i].filename).string());
            const ImageFeatures f = image_features(img, cfg);
            r.values = f.fv.values;
            r.mask = f.fv.mask;
            r.no_detection = f.no_detection;
            r.ok = true;
        } catch (const io_error& e) {
            r.warning = std::string("skipped ") + labels[i].filename + ": " + e.what();
        } catch (const degenerate_input& e) {
            r.warning = std::string("skipped ") + labels[i].filename + ": " + e.what();
        }
    }
    return assemble(results, labels, cfg, counters);
}

FeatureTable extract_dataset(const std::vector<Sample>& samples, const RunConfig& cfg,
                             ExtractCounters* counters) {
    if (samples.empty()) throw invalid_dataset("extract_dataset: no samples");
    std::vector<LabelRow> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "sample_%05zu.pgm", i);
        labels[i] = {name, samples[i].depth_um};
    }
    std::vector<RowResult> results(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const ImageFeatures f = image_features(samples[i].image, cfg);
        results[i].values = f.fv.values;
        results[i].mask = f.fv.mask;
        results[i].no_detection = f.no_detection;
        results[i].ok = true;
    }
    return assemble(results, labels, cfg, counters);
}

} // namespace microdepth
