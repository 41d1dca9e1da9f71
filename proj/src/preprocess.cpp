#include "microdepth/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "microdepth/errors.hpp"
#include "microdepth/focus_metrics.hpp"

namespace microdepth {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

std::array<std::int64_t, 256> histogram256(const GrayImage& img) {
    std::array<std::int64_t, 256> hist{};
    for (double v : img.data) ++hist[quantize256(v)];
    return hist;
}

} // namespace

GrayImage wiener_denoise(const GrayImage& img, int window) {
    if (window < 3 || window % 2 == 0)
        throw invalid_input("wiener_denoise: window must be odd and >= 3");
    const int r = window / 2;
    const int w = img.width, h = img.height;
    GrayImage mean(w, h), var(w, h);
    std::vector<double> row_var_sum(static_cast<std::size_t>(h), 0.0);

#pragma omp parallel for schedule(static)
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
    // Noise power: mean of the local variances. Summed as ordered per-row
    // partials so the result does not depend on the thread count.
    double nu2 = 0.0;
    for (int y = 0; y < h; ++y) nu2 += row_var_sum[y];
    nu2 /= static_cast<double>(w) * h;

    GrayImage out(w, h);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double v2 = var.at(x, y);
            const double den = std::max(v2, nu2);
            const double gain = den > 0.0 ? std::max(0.0, v2 - nu2) / den : 0.0;
            out.at(x, y) = mean.at(x, y) + gain * (img.at(x, y) - mean.at(x, y));
        }
    }
    return out;
}

int otsu_threshold(const GrayImage& img) {
    const auto hist = histogram256(img);
    const std::int64_t total = static_cast<std::int64_t>(img.data.size());
    std::int64_t weighted_total = 0;
    for (int i = 0; i < 256; ++i) weighted_total += static_cast<std::int64_t>(i) * hist[i];

    int best_t = -1;
    double best_bcv = 0.0;
    std::int64_t w0 = 0, sum0 = 0;
    for (int t = 0; t <= 254; ++t) {
        w0 += hist[t];
        sum0 += static_cast<std::int64_t>(t) * hist[t];
        const std::int64_t w1 = total - w0;
        if (w0 == 0 || w1 == 0) continue;
        const double mu0 = static_cast<double>(sum0) / static_cast<double>(w0);
        const double mu1 = static_cast<double>(weighted_total - sum0) / static_cast<double>(w1);
        const double d = mu0 - mu1;
        const double bcv = static_cast<double>(w0) * static_cast<double>(w1) * d * d;
        if (bcv > best_bcv) {
            best_bcv = bcv;
            best_t = t;
        }
    }
    if (best_t < 0) throw degenerate_input("otsu_threshold: image has a single intensity level");
    return best_t;
}

BinaryImage binarize(const GrayImage& img, double t, Polarity polarity) {
    if (!(t >= 0.0 && t <= 255.0)) throw invalid_input("binarize: threshold must be in [0, 255]");
    BinaryImage out(img.width, img.height);
    std::size_t bright = 0;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const bool b = img.data[i] > t;
        out.mask[i] = b ? 1 : 0;
        bright += b ? 1u : 0u;
    }
    bool flip = false;
    switch (polarity) {
        case Polarity::Bright: flip = false; break;
        case Polarity::Dark: flip = true; break;
        case Polarity::Minority:
            // Robot = minority class; ties keep the brighter class.
            flip = bright > img.data.size() - bright;
            break;
    }
    if (flip)
        for (auto& m : out.mask) m = m ? 0 : 1;
    return out;
}

std::optional<BoundingBox> largest_component_bbox(const BinaryImage& bin) {
    const int w = bin.width, h = bin.height;
    std::vector<std::int32_t> label(static_cast<std::size_t>(w) * h, -1);
    std::vector<std::size_t> stack;

    std::optional<BoundingBox> best;
    std::size_t best_count = 0;
    std::int32_t next_label = 0;

    for (int sy = 0; sy < h; ++sy) {
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t start = static_cast<std::size_t>(sy) * w + sx;
            if (!bin.mask[start] || label[start] >= 0) continue;
            // flood this 8-connected component
            label[start] = next_label;
            stack.assign(1, start);
            std::size_t count = 0;
            int minx = sx, maxx = sx, miny = sy, maxy = sy;
            while (!stack.empty()) {
                const std::size_t idx = stack.back();
                stack.pop_back();
                ++count;
                const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
                minx = std::min(minx, x);
                maxx = std::max(maxx, x);
                miny = std::min(miny, y);
                maxy = std::max(maxy, y);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                        if (!bin.mask[nidx] || label[nidx] >= 0) continue;
                        label[nidx] = next_label;
                        stack.push_back(nidx);
                    }
                }
            }
            ++next_label;
            const BoundingBox box{minx, miny, maxx - minx + 1, maxy - miny + 1};
            const bool better =
                count > best_count ||
                (count == best_count && best &&
                 (box.y0 < best->y0 || (box.y0 == best->y0 && box.x0 < best->x0)));
            if (!best || better) {
                best = box;
                best_count = count;
            }
        }
    }
    return best;
}

BoundingBox expand_bbox(const BoundingBox& b, double ratio, int img_w, int img_h) {
    if (!(ratio >= 1.0) || !std::isfinite(ratio))
        throw invalid_input("expand_bbox: ratio must be >= 1");
    if (img_w < 1 || img_h < 1) throw invalid_input("expand_bbox: empty bounds");
    long nw = std::lround(b.w * ratio);
    long nh = std::lround(b.h * ratio);
    const double cx = b.x0 + b.w / 2.0;
    const double cy = b.y0 + b.h / 2.0;
    long nx = std::lround(cx - static_cast<double>(nw) / 2.0);
    long ny = std::lround(cy - static_cast<double>(nh) / 2.0);
    nw = std::min<long>(nw, img_w);
    nh = std::min<long>(nh, img_h);
    nx = std::clamp<long>(nx, 0, img_w - nw);
    ny = std::clamp<long>(ny, 0, img_h - nh);
    return {static_cast<int>(nx), static_cast<int>(ny), static_cast<int>(nw), static_cast<int>(nh)};
}

namespace {

// magnitude + NMS shared by canny_edges and canny_auto_thresholds
GrayImage sobel_magnitude(const GrayImage& smoothed) {
    const auto [gx, gy] = sobel_gradients(smoothed);
    GrayImage mag(smoothed.width, smoothed.height);
    for (std::size_t i = 0; i < mag.data.size(); ++i)
        mag.data[i] = std::sqrt(gx.data[i] * gx.data[i] + gy.data[i] * gy.data[i]);
    return mag;
}

} // namespace

BinaryImage canny_edges(const GrayImage& img, double low, double high) {
    if (!(low >= 0.0) || !(low < high) || !std::isfinite(high))
        throw invalid_input("canny_edges: need 0 <= low < high");
    const GrayImage smoothed = gaussian_blur(img, 1.4);
    const auto [gx, gy] = sobel_gradients(smoothed);
    const int w = img.width, h = img.height;
    GrayImage mag(w, h);
    for (std::size_t i = 0; i < mag.data.size(); ++i)
        mag.data[i] = std::sqrt(gx.data[i] * gx.data[i] + gy.data[i] * gy.data[i]);

    // Non-maximum suppression over 4 quantized gradient directions. The
    // asymmetric tie-break (>, >=) keeps exactly one pixel of a two-wide
    // plateau.
    GrayImage nms(w, h, 0.0);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double m = mag.at(x, y);
            if (m <= 0.0) continue;
            double a = std::atan2(gy.at(x, y), gx.at(x, y)) * 180.0 / 3.14159265358979323846;
            if (a < 0.0) a += 180.0;
            int dx1, dy1;
            if (a < 22.5 || a >= 157.5) {
                dx1 = 1; dy1 = 0;
            } else if (a < 67.5) {
                dx1 = 1; dy1 = 1;
            } else if (a < 112.5) {
                dx1 = 0; dy1 = 1;
            } else {
                dx1 = -1; dy1 = 1;
            }
            const double n1 = mag.at(clampi(x - dx1, 0, w - 1), clampi(y - dy1, 0, h - 1));
            const double n2 = mag.at(clampi(x + dx1, 0, w - 1), clampi(y + dy1, 0, h - 1));
            if (m > n1 && m >= n2) nms.at(x, y) = m;
        }
    }

    // Double threshold + 8-connected hysteresis from the strong pixels.
    BinaryImage edges(w, h);
    std::vector<std::size_t> stack;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            if (nms.at(x, y) >= high) {
                const std::size_t idx = static_cast<std::size_t>(y) * w + x;
                if (!edges.mask[idx]) {
                    edges.mask[idx] = 1;
                    stack.push_back(idx);
                }
            }
    while (!stack.empty()) {
        const std::size_t idx = stack.back();
        stack.pop_back();
        const int x = static_cast<int>(idx % w), y = static_cast<int>(idx / w);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const int nx = x + dx, ny = y + dy;
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                const std::size_t nidx = static_cast<std::size_t>(ny) * w + nx;
                if (edges.mask[nidx] || nms.at(nx, ny) < low) continue;
                edges.mask[nidx] = 1;
                stack.push_back(nidx);
            }
    }
    return edges;
}

std::pair<double, double> canny_auto_thresholds(const GrayImage& img) {
    const GrayImage mag = sobel_magnitude(gaussian_blur(img, 1.4));
    std::vector<double> sorted(mag.data);
    std::sort(sorted.begin(), sorted.end());
    // nearest-rank percentile
    const std::size_t n = sorted.size();
    const std::size_t rank = std::min(n - 1, static_cast<std::size_t>(std::ceil(0.9 * n)) - 1);
    double high = sorted[rank];
    if (!(high > 0.0)) return {0.0, 1e-9}; // flat image: no edges at any threshold
    return {0.1 * high, high};
}

GrayImage roi_crop(const GrayImage& img, int size) {
    if (size < 1) throw invalid_input("roi_crop: size must be positive");
    if (img.width < size || img.height < size)
        throw invalid_input("roi_crop: image smaller than crop window");
    double cx = (img.width - 1) / 2.0, cy = (img.height - 1) / 2.0;
    try {
        const int t = otsu_threshold(img);
        const BinaryImage fg = binarize(img, t, Polarity::Minority);
        std::int64_t sx = 0, sy = 0, cnt = 0;
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                if (fg.at(x, y)) {
                    sx += x;
                    sy += y;
                    ++cnt;
                }
        if (cnt > 0) {
            cx = static_cast<double>(sx) / cnt;
            cy = static_cast<double>(sy) / cnt;
        }
    } catch (const degenerate_input&) {
        // single-level image: keep the center crop
    }
    const int ox = clampi(static_cast<int>(std::lround(cx)) - size / 2, 0, img.width - size);
    const int oy = clampi(static_cast<int>(std::lround(cy)) - size / 2, 0, img.height - size);
    return crop(img, ox, oy, size, size);
}

} // namespace microdepth
