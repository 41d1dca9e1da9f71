#include "microdepth/grid.hpp"

#include <cmath>

#include "microdepth/errors.hpp"

namespace microdepth {

void validate(const GridSpec& spec) {
    if (!(spec.blur_sigma > 0.0) || !std::isfinite(spec.blur_sigma))
        throw invalid_input("GridSpec: blur_sigma must be positive");
    if (!(spec.expansion_ratio >= 1.0) || !std::isfinite(spec.expansion_ratio))
        throw invalid_input("GridSpec: expansion_ratio must be >= 1");
    if (spec.mode == GridMode::Uniform) {
        if (spec.uniform_k != 2 && spec.uniform_k != 4 && spec.uniform_k != 6 &&
            spec.uniform_k != 8)
            throw invalid_input("GridSpec: uniform_k must be one of {2, 4, 6, 8}");
    } else {
        if (spec.fg_grid < 1 || spec.bg_grid < 1)
            throw invalid_input("GridSpec: grid sides must be positive");
        if (spec.fg_grid <= spec.bg_grid)
            throw invalid_input("GridSpec: adaptive mode requires fg_grid > bg_grid");
    }
}

int patch_count(const GridSpec& spec) {
    return spec.mode == GridMode::Uniform
               ? spec.uniform_k * spec.uniform_k
               : spec.fg_grid * spec.fg_grid + spec.bg_grid * spec.bg_grid;
}

std::optional<BoundingBox> detect_robot(const GrayImage& img, const GridSpec& spec,
                                        Polarity polarity) {
    validate(spec);
    if (img.width < 16 || img.height < 16)
        throw invalid_input("detect_robot: image must be at least 16x16");
    const GrayImage blurred = gaussian_blur(img, spec.blur_sigma);
    int t = 0;
    try {
        t = otsu_threshold(blurred);
    } catch (const degenerate_input&) {
        return std::nullopt;
    }
    const BinaryImage fg = binarize(blurred, t, polarity);
    const std::optional<BoundingBox> box = largest_component_bbox(fg);
    if (!box) return std::nullopt;
    return expand_bbox(*box, spec.expansion_ratio, img.width, img.height);
}

namespace {

// Split [origin, origin+extent) into k strips: the first k-1 get
// floor(extent/k), the last absorbs the remainder.
void strip(int origin, int extent, int k, int i, int& start, int& len) {
    const int base = extent / k;
    start = origin + i * base;
    len = (i == k - 1) ? extent - (k - 1) * base : base;
}

} // namespace

PatchGrid build_grid(int img_w, int img_h, const std::optional<BoundingBox>& bbox,
                     const GridSpec& spec) {
    validate(spec);
    const int need = spec.mode == GridMode::Uniform ? spec.uniform_k
                                                    : std::max(spec.fg_grid, spec.bg_grid);
    if (img_w < need || img_h < need)
        throw invalid_input("build_grid: image smaller than the grid side");

    PatchGrid grid;
    grid.img_w = img_w;
    grid.img_h = img_h;
    grid.mode = spec.mode;

    if (spec.mode == GridMode::Uniform) {
        const int k = spec.uniform_k;
        grid.patches.reserve(static_cast<std::size_t>(k) * k);
        for (int gy = 0; gy < k; ++gy)
            for (int gx = 0; gx < k; ++gx) {
                BoundingBox b;
                strip(0, img_w, k, gx, b.x0, b.w);
                strip(0, img_h, k, gy, b.y0, b.h);
                grid.patches.push_back({b, PatchTag::Foreground});
            }
        return grid;
    }

    // Adaptive: fine grid over the (expanded) bbox, coarse grid over the
    // frame. A missing detection degrades to the full frame.
    const BoundingBox fg = bbox.value_or(BoundingBox{0, 0, img_w, img_h});
    grid.source_bbox = fg;
    const int kf = spec.fg_grid, kb = spec.bg_grid;
    grid.patches.reserve(static_cast<std::size_t>(kf) * kf + static_cast<std::size_t>(kb) * kb);
    for (int gy = 0; gy < kf; ++gy)
        for (int gx = 0; gx < kf; ++gx) {
            BoundingBox b;
            strip(fg.x0, fg.w, kf, gx, b.x0, b.w);
            strip(fg.y0, fg.h, kf, gy, b.y0, b.h);
            const bool real = b.w > 0 && b.h > 0;
            grid.patches.push_back({b, real ? PatchTag::Foreground : PatchTag::Pad});
        }
    for (int gy = 0; gy < kb; ++gy)
        for (int gx = 0; gx < kb; ++gx) {
            BoundingBox b;
            strip(0, img_w, kb, gx, b.x0, b.w);
            strip(0, img_h, kb, gy, b.y0, b.h);
            const bool real = b.w > 0 && b.h > 0;
            grid.patches.push_back({b, real ? PatchTag::Background : PatchTag::Pad});
        }
    return grid;
}

MetricVector patch_metrics(const GrayImage& patch, const ExtractOptions& opts, bool* tiny) {
    MetricVector m{};
    const int minside = std::min(patch.width, patch.height);
    // Side needed by the LoG: blur kernel plus the 3x3 Laplacian minimum.
    const int log_side = std::max(3, 2 * static_cast<int>(std::ceil(3.0 * opts.log_sigma)) + 1);
    bool clipped = false;

    if (opts.metrics[0]) m[0] = entropy(patch);
    if (opts.metrics[1]) {
        if (minside >= log_side)
            m[1] = log_energy(patch, opts.log_sigma);
        else
            clipped = true;
    }
    if (opts.metrics[2]) {
        if (minside >= 3)
            m[2] = tenengrad(patch);
        else
            clipped = true;
    }
    if (opts.metrics[3]) {
        if (patch.width >= 3)
            m[3] = brenner(patch);
        else
            clipped = true;
    }
    if (opts.metrics[4]) m[4] = gray_variance(patch);
    if (opts.metrics[5]) {
        if (minside >= 3)
            m[5] = max_abs_gradient(patch);
        else
            clipped = true;
    }
    if (tiny && clipped) *tiny = true;
    return m;
}

PhysicsFeatureVector extract_features(const GrayImage& img, const PatchGrid& grid,
                                      const ExtractOptions& opts, ExtractStats* stats) {
    const std::size_t n = grid.patches.size();
    for (const Patch& p : grid.patches) {
        if (p.tag == PatchTag::Pad) continue;
        if (p.box.x0 < 0 || p.box.y0 < 0 || p.box.x0 + p.box.w > img.width ||
            p.box.y0 + p.box.h > img.height)
            throw invalid_input("extract_features: patch outside the image");
    }

    PhysicsFeatureVector fv;
    fv.values.assign(n * kNumMetrics, 0.0);
    // vector<bool> is bit-packed, so the mask is filled serially; the
    // parallel loop only touches disjoint doubles and bytes.
    fv.mask.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) fv.mask[i] = grid.patches[i].tag != PatchTag::Pad;
    std::vector<unsigned char> tiny_flags(n, 0);

#pragma omp parallel for schedule(static)
    for (long long pi = 0; pi < static_cast<long long>(n); ++pi) {
        const Patch& p = grid.patches[pi];
        if (p.tag == PatchTag::Pad) continue;
        const GrayImage view = crop(img, p.box.x0, p.box.y0, p.box.w, p.box.h);
        bool tiny = false;
        const MetricVector m = patch_metrics(view, opts, &tiny);
        for (int k = 0; k < kNumMetrics; ++k)
            fv.values[static_cast<std::size_t>(pi) * kNumMetrics + k] = m[k];
        tiny_flags[pi] = tiny ? 1 : 0;
    }

    if (stats) {
        stats->tiny_patches = 0;
        for (unsigned char f : tiny_flags) stats->tiny_patches += f;
    }
    return fv;
}

} // namespace microdepth
