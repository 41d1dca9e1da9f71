#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <queue>
#include <vector>

#include "microdepth/errors.hpp"
#include "microdepth/focus_metrics.hpp"
#include "microdepth/image.hpp"
#include "microdepth/preprocess.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace microdepth;
using namespace testutil;

namespace {

// per-column sum of |Gx|, used to locate a vertical edge
int argmax_gradient_column(const GrayImage& img) {
    const auto [gx, gy] = sobel_gradients(img);
    int best = 0;
    double best_sum = -1.0;
    for (int x = 0; x < img.width; ++x) {
        double s = 0.0;
        for (int y = 0; y < img.height; ++y) s += std::abs(gx.at(x, y));
        if (s > best_sum) {
            best_sum = s;
            best = x;
        }
    }
    return best;
}

int count_components8(const BinaryImage& bin) {
    std::vector<char> seen(bin.mask.size(), 0);
    int components = 0;
    for (int sy = 0; sy < bin.height; ++sy)
        for (int sx = 0; sx < bin.width; ++sx) {
            const std::size_t start = static_cast<std::size_t>(sy) * bin.width + sx;
            if (!bin.mask[start] || seen[start]) continue;
            ++components;
            std::queue<std::size_t> q;
            q.push(start);
            seen[start] = 1;
            while (!q.empty()) {
                const std::size_t idx = q.front();
                q.pop();
                const int x = static_cast<int>(idx % bin.width);
                const int y = static_cast<int>(idx / bin.width);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= bin.width || ny >= bin.height) continue;
                        const std::size_t n = static_cast<std::size_t>(ny) * bin.width + nx;
                        if (bin.mask[n] && !seen[n]) {
                            seen[n] = 1;
                            q.push(n);
                        }
                    }
            }
        }
    return components;
}

BinaryImage random_mask(int w, int h, std::uint64_t seed, double density) {
    Rng rng(seed);
    BinaryImage bin(w, h);
    for (auto& m : bin.mask) m = rng.uniform() < density ? 1 : 0;
    return bin;
}

} // namespace

TEST_SUITE("preprocess") {

TEST_CASE("wiener_denoise: constants pass through untouched") {
    const GrayImage img = constant(16, 12, 7.25);
    const GrayImage out = wiener_denoise(img);
    for (double v : out.data) CHECK(std::abs(v - 7.25) <= 1e-12);
}

TEST_CASE("wiener_denoise strictly reduces the variance of i.i.d. noise") {
    const GrayImage noisy = add_noise(constant(64, 64, 128.0), 10.0, 3);
    const GrayImage out = wiener_denoise(noisy);
    CHECK(gray_variance(out) < gray_variance(noisy));

    for (std::uint64_t seed : {21u, 22u, 23u}) {
        const GrayImage n2 = add_noise(constant(32, 32, 100.0), 6.0, seed);
        CHECK(gray_variance(wiener_denoise(n2)) <= gray_variance(n2));
    }
}

TEST_CASE("wiener_denoise keeps a step edge in place") {
    const GrayImage img = add_noise(vstep(64, 64, 32, 50.0, 200.0), 2.0, 9);
    const GrayImage out = wiener_denoise(img);
    CHECK(argmax_gradient_column(out) == argmax_gradient_column(img));
}

TEST_CASE("wiener_denoise validates the window") {
    CHECK_THROWS_AS(wiener_denoise(constant(8, 8, 0.0), 4), invalid_input);
    CHECK_THROWS_AS(wiener_denoise(constant(8, 8, 0.0), 1), invalid_input);
}

TEST_CASE("otsu_threshold: half 0 / half 255 settles on the smallest tied threshold") {
    const GrayImage img = vstep(16, 16, 8, 0.0, 255.0);
    const int t = otsu_threshold(img);
    CHECK(t == oracle::otsu(img));
    CHECK(t == 0); // every candidate splits {0} vs {255}; ties keep the smallest
}

TEST_CASE("otsu_threshold separates well-split bimodal clusters") {
    Rng rng(11);
    GrayImage img(32, 32);
    int lo_max = 0, hi_min = 255;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double v = (i % 2 == 0) ? rng.gaussian(60.0, 8.0) : rng.gaussian(190.0, 8.0);
        img.data[i] = v;
        if (i % 2 == 0)
            lo_max = std::max(lo_max, quantize256(v));
        else
            hi_min = std::min(hi_min, quantize256(v));
    }
    REQUIRE(lo_max < hi_min); // the two clusters really are disjoint for this seed
    const int t = otsu_threshold(img);
    // Every split inside the empty histogram gap gives the same between-class
    // variance; the scan keeps the first maximizer, so t sits at the gap's
    // lower edge rather than its middle.
    CHECK(t >= lo_max);
    CHECK(t < hi_min);
    CHECK(t == oracle::otsu(img));
}

TEST_CASE("otsu_threshold rejects single-level images") {
    CHECK_THROWS_AS(otsu_threshold(constant(8, 8, 13.4)), degenerate_input);
}

TEST_CASE("otsu_threshold equals the exhaustive oracle on random images") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        GrayImage img = random_image(32, 32, 1000 + seed);
        if (seed % 3 == 1) { // bimodal
            Rng rng(2000 + seed);
            for (std::size_t i = 0; i < img.data.size(); ++i)
                img.data[i] = (i % 2 == 0) ? rng.gaussian(70, 15) : rng.gaussian(180, 15);
        } else if (seed % 3 == 2) { // coarsely quantized
            for (double& v : img.data) v = 32.0 * std::floor(v / 32.0);
        }
        CHECK(otsu_threshold(img) == oracle::otsu(img));
    }
}

TEST_CASE("binarize: threshold domain and polarity") {
    const GrayImage img = vstep(16, 16, 8, 0.0, 255.0);
    CHECK_THROWS_AS(binarize(img, -1.0), invalid_input);
    CHECK_THROWS_AS(binarize(img, 256.0), invalid_input);

    const BinaryImage b = binarize(img, 127.0, Polarity::Bright);
    std::size_t fg = 0;
    for (auto m : b.mask) fg += m;
    CHECK(fg == img.data.size() / 2);
    CHECK(b.at(0, 0) == 0);
    CHECK(b.at(15, 0) == 1);

    const BinaryImage d = binarize(img, 127.0, Polarity::Dark);
    for (std::size_t i = 0; i < d.mask.size(); ++i) CHECK(d.mask[i] == (b.mask[i] ? 0 : 1));

    // t=254: only full-white pixels are foreground
    GrayImage two(4, 1, 250.0);
    two.at(2, 0) = 255.0;
    const BinaryImage hi = binarize(two, 254.0, Polarity::Bright);
    CHECK(hi.at(0, 0) == 0);
    CHECK(hi.at(2, 0) == 1);
}

TEST_CASE("binarize Minority keeps whichever class is smaller") {
    GrayImage img(16, 16, 10.0);
    fill_rect(img, 2, 2, 5, 5, 240.0); // 25 bright of 256
    const BinaryImage a = binarize(img, 127.0, Polarity::Minority);
    CHECK(a.at(3, 3) == 1);
    CHECK(a.at(0, 0) == 0);

    GrayImage inv(16, 16, 240.0);
    fill_rect(inv, 2, 2, 5, 5, 10.0); // 25 dark of 256
    const BinaryImage b = binarize(inv, 127.0, Polarity::Minority);
    CHECK(b.at(3, 3) == 1);
    CHECK(b.at(0, 0) == 0);
}

TEST_CASE("largest_component_bbox: pinned cases") {
    BinaryImage empty(8, 8);
    CHECK(!largest_component_bbox(empty).has_value());

    BinaryImage one(8, 8);
    one.at(4, 3) = 1; // x = 4, y = 3
    const auto b1 = largest_component_bbox(one);
    REQUIRE(b1.has_value());
    CHECK(*b1 == BoundingBox{4, 3, 1, 1});

    // sizes 5 vs 9: the 9-pixel block wins
    BinaryImage two(16, 16);
    two.at(1, 1) = two.at(2, 1) = two.at(3, 1) = two.at(1, 2) = two.at(2, 2) = 1;
    for (int y = 10; y < 13; ++y)
        for (int x = 10; x < 13; ++x) two.at(x, y) = 1;
    const auto b2 = largest_component_bbox(two);
    REQUIRE(b2.has_value());
    CHECK(*b2 == BoundingBox{10, 10, 3, 3});
    CHECK(*b2 == *oracle::largest_bbox(two));

    BinaryImage full(6, 4);
    for (auto& m : full.mask) m = 1;
    CHECK(*largest_component_bbox(full) == BoundingBox{0, 0, 6, 4});
}

TEST_CASE("largest_component_bbox ties break toward smaller (y0, x0)") {
    BinaryImage bin(12, 12);
    for (int y = 1; y < 3; ++y)
        for (int x = 5; x < 7; ++x) bin.at(x, y) = 1; // 4 px at (5,1)
    for (int y = 5; y < 7; ++y)
        for (int x = 1; x < 3; ++x) bin.at(x, y) = 1; // 4 px at (1,5)
    const auto b = largest_component_bbox(bin);
    REQUIRE(b.has_value());
    CHECK(*b == BoundingBox{5, 1, 2, 2});
    CHECK(*b == *oracle::largest_bbox(bin));
}

TEST_CASE("largest_component_bbox equals the flood-fill oracle on random masks") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const double density = 0.05 + 0.9 * (seed % 10) / 10.0;
        const BinaryImage bin = random_mask(24, 24, 3000 + seed, density);
        const auto got = largest_component_bbox(bin);
        const auto want = oracle::largest_bbox(bin);
        CHECK(got.has_value() == want.has_value());
        if (got && want) CHECK(*got == *want);
    }
}

TEST_CASE("expand_bbox: pinned arithmetic, identity, clamping") {
    CHECK(expand_bbox({50, 50, 100, 100}, 1.2, 224, 224) == BoundingBox{40, 40, 120, 120});
    CHECK(expand_bbox({13, 27, 31, 18}, 1.0, 224, 224) == BoundingBox{13, 27, 31, 18});

    const BoundingBox clamped = expand_bbox({0, 0, 50, 50}, 1.5, 224, 224);
    CHECK(clamped.x0 == 0);
    CHECK(clamped.y0 == 0);
    CHECK(clamped.w == 75);
    CHECK(clamped.h == 75);

    CHECK_THROWS_AS(expand_bbox({0, 0, 10, 10}, 0.9, 224, 224), invalid_input);
}

TEST_CASE("expand_bbox always returns an in-bounds box at least as large") {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
        const int W = 32 + static_cast<int>(rng.below(200));
        const int H = 32 + static_cast<int>(rng.below(200));
        const int w = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(W)));
        const int h = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(H)));
        const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(W - w + 1)));
        const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(H - h + 1)));
        const double ratio = 1.0 + rng.uniform() * 2.0;
        const BoundingBox e = expand_bbox({x0, y0, w, h}, ratio, W, H);
        CHECK(e.x0 >= 0);
        CHECK(e.y0 >= 0);
        CHECK(e.x0 + e.w <= W);
        CHECK(e.y0 + e.h <= H);
        CHECK(e.w >= w); // never shrinks
        CHECK(e.h >= h);
    }
}

TEST_CASE("canny_edges: flat images yield no edges") {
    const BinaryImage e = canny_edges(constant(32, 32, 99.0), 10.0, 30.0);
    for (auto m : e.mask) CHECK(m == 0);

    const auto [lo, hi] = canny_auto_thresholds(constant(32, 32, 99.0));
    CHECK(hi > lo);
    const BinaryImage e2 = canny_edges(constant(32, 32, 99.0), lo, hi);
    for (auto m : e2.mask) CHECK(m == 0);
}

TEST_CASE("canny_edges thins a clean vertical step to one pixel per row") {
    const GrayImage img = vstep(64, 64, 32, 0.0, 255.0);
    const BinaryImage e = canny_edges(img, 50.0, 200.0);
    int edge_col = -1;
    for (int y = 1; y < 63; ++y) {
        int count = 0, col = -1;
        for (int x = 0; x < 64; ++x)
            if (e.at(x, y)) {
                ++count;
                col = x;
            }
        CHECK(count == 1);
        if (edge_col < 0) edge_col = col;
        CHECK(col == edge_col); // one straight line
    }
    CHECK(std::abs(edge_col - 31) <= 1); // sits on the transition
}

TEST_CASE("canny_edges outlines a rectangle as one connected loop") {
    GrayImage img(96, 96, 0.0);
    fill_rect(img, 24, 32, 48, 32, 200.0);
    const auto [lo, hi] = canny_auto_thresholds(img);
    const BinaryImage e = canny_edges(img, lo, hi);

    std::size_t edge_count = 0;
    for (auto m : e.mask) edge_count += m;
    // Non-maximum suppression thins the diagonal-gradient corner pixels, so
    // the loop may run a few pixels short of the exact perimeter.
    CHECK(edge_count >= 2u * (48 + 32) - 8);
    CHECK(edge_count <= 3u * (48 + 32)); // still a thin outline, not a band
    CHECK(count_components8(e) == 1);

    // edge evidence on all four sides of the rectangle
    bool top = false, bottom = false, left = false, right = false;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            if (e.at(x, y)) {
                if (std::abs(y - 32) <= 3 && x >= 24 && x < 72) top = true;
                if (std::abs(y - 63) <= 3 && x >= 24 && x < 72) bottom = true;
                if (std::abs(x - 24) <= 3 && y >= 32 && y < 64) left = true;
                if (std::abs(x - 71) <= 3 && y >= 32 && y < 64) right = true;
            }
    CHECK(top);
    CHECK(bottom);
    CHECK(left);
    CHECK(right);
}

TEST_CASE("canny_edges validates its thresholds") {
    CHECK_THROWS_AS(canny_edges(constant(16, 16, 0.0), 30.0, 10.0), invalid_input);
    CHECK_THROWS_AS(canny_edges(constant(16, 16, 0.0), -1.0, 10.0), invalid_input);
}

TEST_CASE("roi_crop centers the window on the foreground centroid") {
    GrayImage img(678, 488, 30.0);
    fill_rect(img, 329, 234, 21, 21, 255.0); // centroid exactly (339, 244)
    const GrayImage out = roi_crop(img, 256);
    CHECK(out.width == 256);
    CHECK(out.height == 256);
    // origin (339-128, 244-128) = (211, 116): the blob lands at (128, 128)
    CHECK(out.at(128, 128) == 255.0);
    CHECK(out.at(0, 0) == 30.0);
    const GrayImage manual = crop(img, 211, 116, 256, 256);
    CHECK(out.data == manual.data);
}

TEST_CASE("roi_crop clamps at the border and handles degenerate input") {
    GrayImage corner(678, 488, 30.0);
    fill_rect(corner, 0, 0, 11, 11, 255.0);
    const GrayImage out = roi_crop(corner, 256);
    CHECK(out.width == 256);
    CHECK(out.at(5, 5) == 255.0); // window clamped to the top-left corner

    // single-level image: center crop fallback
    const GrayImage flat = roi_crop(constant(300, 300, 64.0), 256);
    CHECK(flat.width == 256);
    CHECK(flat.height == 256);

    const GrayImage exact = roi_crop(random_image(256, 256, 5), 256);
    CHECK(exact.width == 256);

    CHECK_THROWS_AS(roi_crop(constant(100, 300, 0.0), 256), invalid_input);
}

TEST_CASE("roi_crop output is always size x size") {
    Rng rng(19);
    for (int i = 0; i < 10; ++i) {
        const int W = 256 + static_cast<int>(rng.below(100));
        const int H = 256 + static_cast<int>(rng.below(100));
        GrayImage img = random_image(W, H, 400 + static_cast<std::uint64_t>(i));
        const GrayImage out = roi_crop(img, 256);
        CHECK(out.width == 256);
        CHECK(out.height == 256);
    }
}

} // TEST_SUITE("preprocess")
