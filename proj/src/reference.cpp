#include "microdepth/reference.hpp"

#include <algorithm>
#include <cmath>

#include "microdepth/errors.hpp"

namespace microdepth::reference {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

} // namespace

GrayImage convolve(const GrayImage& img, const Kernel2D& k) {
    if (k.size > img.width || k.size > img.height)
        throw invalid_input("reference::convolve: kernel larger than image");
    const int c = k.size / 2;
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int i = 0; i < k.size; ++i) {
                const int sy = clampi(y - (i - c), 0, img.height - 1);
                for (int j = 0; j < k.size; ++j) {
                    const int sx = clampi(x - (j - c), 0, img.width - 1);
                    acc += k.at(i, j) * img.at(sx, sy);
                }
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma == 0.0) return img;
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw invalid_input("reference::gaussian_blur: sigma must be >= 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = 2 * radius + 1;
    if (side > img.width || side > img.height)
        throw invalid_input("reference::gaussian_blur: kernel larger than image");
    std::vector<double> w(static_cast<std::size_t>(side));
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double v = std::exp(-static_cast<double>(t) * t * inv);
        w[t + radius] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;

    GrayImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += w[t + radius] * img.at(clampi(x + t, 0, img.width - 1), y);
            tmp.at(x, y) = acc;
        }
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += w[t + radius] * tmp.at(x, clampi(y + t, 0, img.height - 1));
            out.at(x, y) = acc;
        }
    return out;
}

std::pair<GrayImage, GrayImage> sobel_gradients(const GrayImage& img) {
    if (img.width < 3 || img.height < 3)
        throw invalid_input("reference::sobel_gradients: image must be at least 3x3");
    GrayImage gx(img.width, img.height), gy(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const int ym = clampi(y - 1, 0, img.height - 1);
        const int yp = clampi(y + 1, 0, img.height - 1);
        for (int x = 0; x < img.width; ++x) {
            const int xm = clampi(x - 1, 0, img.width - 1);
            const int xp = clampi(x + 1, 0, img.width - 1);
            const double a = img.at(xm, ym), b = img.at(x, ym), c = img.at(xp, ym);
            const double d = img.at(xm, y), f = img.at(xp, y);
            const double g = img.at(xm, yp), h = img.at(x, yp), i = img.at(xp, yp);
            gx.at(x, y) = (c + 2.0 * f + i) - (a + 2.0 * d + g);
            gy.at(x, y) = (g + 2.0 * h + i) - (a + 2.0 * b + c);
        }
    }
    return {std::move(gx), std::move(gy)};
}

GrayImage wiener_denoise(const GrayImage& img, int window) {
    if (window < 3 || window % 2 == 0)
        throw invalid_input("reference::wiener_denoise: window must be odd and >= 3");
    const int r = window / 2;
    const int w = img.width, h = img.height;
    GrayImage mean(w, h), var(w, h);
    std::vector<double> row_var_sum(static_cast<std::size_t>(h), 0.0);
    for (int y = 0; y < h; ++y) {
        const int y0 = clampi(y - r, 0, h - 1), y1 = clampi(y + r, 0, h - 1);
        double row_sum = 0.0;
        for (int x = 0; x < w; ++x) {
            const int x0 = clampi(x - r, 0, w - 1), x1 = clampi(x + r, 0, w - 1);
            double s = 0.0, s2 = 0.0;
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) {
                    const double v = img.at(xx, yy);
                    s += v;
                    s2 += v * v;
                }
            const double cnt = static_cast<double>((y1 - y0 + 1) * (x1 - x0 + 1));
            const double m = s / cnt;
            const double v2 = std::max(0.0, s2 / cnt - m * m);
            mean.at(x, y) = m;
            var.at(x, y) = v2;
            row_sum += v2;
        }
        row_var_sum[y] = row_sum;
    }
    double nu2 = 0.0;
    for (int y = 0; y < h; ++y) nu2 += row_var_sum[y];
    nu2 /= static_cast<double>(w) * h;

    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double v2 = var.at(x, y);
            const double den = std::max(v2, nu2);
            const double gain = den > 0.0 ? std::max(0.0, v2 - nu2) / den : 0.0;
            out.at(x, y) = mean.at(x, y) + gain * (img.at(x, y) - mean.at(x, y));
        }
    return out;
}

PhysicsFeatureVector extract_features(const GrayImage& img, const PatchGrid& grid,
                                      const ExtractOptions& opts) {
    PhysicsFeatureVector fv;
    const std::size_t n = grid.patches.size();
    fv.values.assign(n * kNumMetrics, 0.0);
    fv.mask.assign(n, false);
    for (std::size_t pi = 0; pi < n; ++pi) {
        const Patch& p = grid.patches[pi];
        if (p.tag == PatchTag::Pad) continue;
        const GrayImage view = crop(img, p.box.x0, p.box.y0, p.box.w, p.box.h);
        bool tiny = false;
        const MetricVector m = patch_metrics(view, opts, &tiny);
        for (int k = 0; k < kNumMetrics; ++k) fv.values[pi * kNumMetrics + k] = m[k];
        fv.mask[pi] = true;
    }
    return fv;
}

} // namespace microdepth::reference
