#pragma once

// Small deterministic image builders shared across the test files.

#include <cstdint>

#include "microdepth/image.hpp"
#include "microdepth/rng.hpp"

namespace testutil {

using microdepth::GrayImage;

inline GrayImage constant(int w, int h, double v) { return GrayImage(w, h, v); }

// I(x, y) = offset + slope * x
inline GrayImage ramp_x(int w, int h, double slope = 1.0, double offset = 0.0) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = offset + slope * x;
    return img;
}

// columns [0, edge) = lo, [edge, w) = hi
inline GrayImage vstep(int w, int h, int edge, double lo, double hi) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) img.at(x, y) = x < edge ? lo : hi;
    return img;
}

inline GrayImage checkerboard(int w, int h, int period, double lo, double hi) {
    GrayImage img(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            img.at(x, y) = ((x / period + y / period) % 2 == 0) ? lo : hi;
    return img;
}

inline GrayImage impulse(int w, int h, int x, int y, double v = 1.0, double bg = 0.0) {
    GrayImage img(w, h, bg);
    img.at(x, y) = v;
    return img;
}

inline GrayImage random_image(int w, int h, std::uint64_t seed, double lo = 0.0,
                              double hi = 255.0) {
    microdepth::Rng rng(seed);
    GrayImage img(w, h);
    for (double& v : img.data) v = rng.uniform(lo, hi);
    return img;
}

inline GrayImage add_noise(GrayImage img, double stddev, std::uint64_t seed) {
    microdepth::Rng rng(seed);
    for (double& v : img.data) v += rng.gaussian(0.0, stddev);
    return img;
}

inline void fill_rect(GrayImage& img, int x0, int y0, int w, int h, double v) {
    for (int y = y0; y < y0 + h; ++y)
        for (int x = x0; x < x0 + w; ++x) img.at(x, y) = v;
}

} // namespace testutil
