#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "microdepth/image.hpp"

namespace microdepth {

// Top-left inclusive, (x, y) order.
struct BoundingBox {
    int x0 = 0;
    int y0 = 0;
    int w = 0;
    int h = 0;

    bool operator==(const BoundingBox&) const = default;
};

struct BinaryImage {
    int width = 0;
    int height = 0;
    std::vector<unsigned char> mask; // row-major, 0/1

    BinaryImage() = default;
    BinaryImage(int w, int h) : width(w), height(h), mask(static_cast<std::size_t>(w) * h, 0) {}

    unsigned char& at(int x, int y) { return mask[static_cast<std::size_t>(y) * width + x]; }
    unsigned char at(int x, int y) const { return mask[static_cast<std::size_t>(y) * width + x]; }
};

// Which Otsu class counts as foreground. Microrobots can render brighter or
// darker than the background depending on defocus, but they always occupy a
// minority of the frame, so Minority is the robust default for detection.
enum class Polarity { Bright, Dark, Minority };

// Pixel-wise adaptive Wiener filter:
//   out = mu + max(0, var - nu2) / max(var, nu2) * (I - mu)
// where mu/var are local window stats (window clamped at borders, divisor =
// actual pixel count) and nu2 is the mean of all local variances.
GrayImage wiener_denoise(const GrayImage& img, int window = 5);

// 256-bin Otsu threshold in [0, 254], maximizing between-class variance;
// ties resolved toward the smallest threshold.
int otsu_threshold(const GrayImage& img);

BinaryImage binarize(const GrayImage& img, double t, Polarity polarity = Polarity::Bright);

// Bounding box of the largest 8-connected foreground component; ties broken
// by smaller (y0, x0). Empty mask -> nullopt so callers can fall back.
std::optional<BoundingBox> largest_component_bbox(const BinaryImage& bin);

// Scale about the box center by ratio (>= 1), round, clamp to bounds.
BoundingBox expand_bbox(const BoundingBox& b, double ratio, int img_w, int img_h);

// Gaussian smooth (sigma 1.4) -> Sobel magnitude -> non-maximum suppression
// over 4 quantized directions -> double-threshold hysteresis, 8-connected.
BinaryImage canny_edges(const GrayImage& img, double low, double high);

// (low, high) defaults when the caller has none: high = 90th percentile of
// the smoothed gradient magnitude, low = 0.1 * high.
std::pair<double, double> canny_auto_thresholds(const GrayImage& img);

// size x size window centered on the binarized-foreground centroid, clamped
// in-bounds. A degenerate (single-level) image falls back to a center crop.
GrayImage roi_crop(const GrayImage& img, int size = 256);

} // namespace microdepth
