#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "microdepth/errors.hpp"
#include "microdepth/image.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

using namespace microdepth;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

bool same_pixels(const GrayImage& a, const GrayImage& b, double tol = 0.0) {
    if (a.width != b.width || a.height != b.height) return false;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        if (std::abs(a.data[i] - b.data[i]) > tol) return false;
    return true;
}

fs::path temp_dir() {
    static const fs::path base = [] {
        fs::path p = fs::temp_directory_path() / "microdepth_image_tests";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return base;
}

} // namespace

TEST_SUITE("image") {

TEST_CASE("convolve keeps a constant image constant under any normalized kernel") {
    const GrayImage img = constant(5, 5, 7.25);
    const Kernel2D box(3, std::vector<double>(9, 1.0 / 9.0));
    const GrayImage out = convolve(img, box);
    for (double v : out.data) CHECK(v == doctest::Approx(7.25).epsilon(1e-12));
}

TEST_CASE("convolve with the identity kernel is the identity") {
    const GrayImage img = random_image(6, 4, 11);
    const Kernel2D id(3, {0, 0, 0, 0, 1, 0, 0, 0, 0});
    const GrayImage out = convolve(img, id);
    CHECK(out.data == img.data);
}

TEST_CASE("convolve of an impulse reproduces the kernel (flip of the sliding stencil)") {
    // out(x,y) = sum k(i,j) * I(x-(j-c), y-(i-c)): the impulse response is the
    // kernel itself, i.e. the 180-degree flip of the window a correlation
    // sweep would stamp.
    GrayImage img(7, 7, 0.0);
    img.at(3, 3) = 1.0;
    const Kernel2D k(3, {1, 2, 3, 4, 5, 6, 7, 8, 9});
    const GrayImage out = convolve(img, k);
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            CHECK(out.at(3 + dx, 3 + dy) == k.at(1 + dy, 1 + dx));
    CHECK(out.at(0, 0) == 0.0);
    // an asymmetric kernel distinguishes this from correlation
    CHECK(out.at(2, 2) != k.at(2, 2));
}

TEST_CASE("convolve matches the brute-force definition on random images") {
    const GrayImage img = random_image(9, 7, 21);
    for (int size : {1, 3, 5}) {
        Rng rng(100 + static_cast<std::uint64_t>(size));
        std::vector<double> w(static_cast<std::size_t>(size) * size);
        for (double& v : w) v = rng.uniform(-1.0, 1.0);
        const Kernel2D k(size, w);
        const GrayImage got = convolve(img, k);
        const GrayImage want = oracle::convolve(img, k);
        CHECK(same_pixels(got, want, 1e-12));
    }
}

TEST_CASE("convolve is linear") {
    const GrayImage i1 = random_image(16, 16, 31);
    const GrayImage i2 = random_image(16, 16, 32);
    const Kernel2D k = gaussian_kernel(1.0);
    const double a = 0.7, b = -1.3;
    GrayImage mix(16, 16);
    for (std::size_t i = 0; i < mix.data.size(); ++i)
        mix.data[i] = a * i1.data[i] + b * i2.data[i];
    const GrayImage lhs = convolve(mix, k);
    const GrayImage r1 = convolve(i1, k);
    const GrayImage r2 = convolve(i2, k);
    for (std::size_t i = 0; i < lhs.data.size(); ++i)
        CHECK(lhs.data[i] == doctest::Approx(a * r1.data[i] + b * r2.data[i]).epsilon(1e-6));
}

TEST_CASE("convolve rejects kernels larger than the image") {
    const GrayImage img = constant(4, 4, 1.0);
    const Kernel2D k(5, std::vector<double>(25, 0.04));
    CHECK_THROWS_AS(convolve(img, k), invalid_input);
}

TEST_CASE("Kernel2D rejects even sides and mismatched weight counts") {
    CHECK_THROWS_AS(Kernel2D(2, std::vector<double>(4, 0.0)), invalid_input);
    CHECK_THROWS_AS(Kernel2D(3, std::vector<double>(8, 0.0)), invalid_input);
    CHECK_THROWS_AS(GrayImage(0, 3), invalid_input);
}

TEST_CASE("gaussian_kernel: size rule, normalization, symmetry, peak") {
    const Kernel2D k1 = gaussian_kernel(1.0);
    CHECK(k1.size == 7);
    const Kernel2D k05 = gaussian_kernel(0.5);
    CHECK(k05.size == 5);

    for (double sigma : {0.5, 1.0, 2.0, 4.0}) {
        const Kernel2D k = gaussian_kernel(sigma);
        double sum = 0.0;
        for (double w : k.weights) sum += w;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        const int n = k.size;
        double peak = 0.0;
        for (double w : k.weights) peak = std::max(peak, w);
        CHECK(k.at(n / 2, n / 2) == peak);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                CHECK(k.at(i, j) == k.at(n - 1 - i, j)); // vertical flip
                CHECK(k.at(i, j) == k.at(i, n - 1 - j)); // horizontal flip
            }
    }
    CHECK_THROWS_AS(gaussian_kernel(0.0), invalid_input);
    CHECK_THROWS_AS(gaussian_kernel(-1.0), invalid_input);
}

TEST_CASE("gaussian_blur: sigma 0 is a copy, otherwise equals the 2-D convolution") {
    const GrayImage img = random_image(32, 24, 41);
    const GrayImage same = gaussian_blur(img, 0.0);
    CHECK(same.data == img.data);

    for (double sigma : {0.5, 1.0, 2.0}) {
        const GrayImage sep = gaussian_blur(img, sigma);
        const GrayImage full = convolve(img, gaussian_kernel(sigma));
        // separable passes reorder the summation, so not bit-identical
        CHECK(same_pixels(sep, full, 1e-9));
    }

    const GrayImage flat = gaussian_blur(constant(16, 16, 42.5), 1.5);
    for (double v : flat.data) CHECK(v == doctest::Approx(42.5).epsilon(1e-12));

    CHECK_THROWS_AS(gaussian_blur(constant(16, 16, 0.0), 20.0), invalid_input);
    CHECK_THROWS_AS(gaussian_blur(constant(16, 16, 0.0), -0.5), invalid_input);
}

TEST_CASE("sobel_gradients: constant, step and ramp responses") {
    const auto [gx0, gy0] = sobel_gradients(constant(8, 8, 9.0));
    for (double v : gx0.data) CHECK(v == 0.0);
    for (double v : gy0.data) CHECK(v == 0.0);

    // left half 0, right half 255; edge between x=3 and x=4
    const GrayImage step = vstep(8, 8, 4, 0.0, 255.0);
    const auto [gx, gy] = sobel_gradients(step);
    for (double v : gy.data) CHECK(v == 0.0);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            const double want = (x == 3 || x == 4) ? 1020.0 : 0.0;
            CHECK(std::abs(gx.at(x, y)) == want);
        }

    const GrayImage ramp = ramp_x(10, 6, 1.0);
    const auto [gxr, gyr] = sobel_gradients(ramp);
    for (int y = 0; y < 6; ++y)
        for (int x = 1; x < 9; ++x) CHECK(gxr.at(x, y) == doctest::Approx(8.0).epsilon(1e-12));
    for (double v : gyr.data) CHECK(v == 0.0);

    CHECK_THROWS_AS(sobel_gradients(constant(2, 8, 0.0)), invalid_input);
}

TEST_CASE("sobel_gradients of the transpose swaps Gx and Gy") {
    const GrayImage img = random_image(16, 16, 51);
    const auto [gx, gy] = sobel_gradients(img);
    const auto [tgx, tgy] = sobel_gradients(transpose(img));
    for (int y = 0; y < 16; ++y)
        for (int x = 0; x < 16; ++x) {
            CHECK(tgx.at(y, x) == doctest::Approx(gy.at(x, y)).epsilon(1e-12));
            CHECK(tgy.at(y, x) == doctest::Approx(gx.at(x, y)).epsilon(1e-12));
        }
}

TEST_CASE("log_response vanishes on constants and on ramp interiors") {
    const GrayImage flat = log_response(constant(12, 12, 33.0), 1.0);
    for (double v : flat.data) CHECK(std::abs(v) <= 1e-12);

    const GrayImage r = log_response(ramp_x(20, 8, 3.0), 1.0);
    // replicate borders flatten the ramp within blur radius (3) + 1 of the
    // left/right edges; everything further in is exactly affine
    for (int y = 0; y < 8; ++y)
        for (int x = 4; x < 16; ++x) CHECK(std::abs(r.at(x, y)) <= 1e-9);

    CHECK_THROWS_AS(log_response(constant(12, 12, 0.0), 0.0), invalid_input);
}

TEST_CASE("log_response of an impulse: center-surround sign pattern, matches composition") {
    const GrayImage img = impulse(15, 15, 7, 7, 100.0);
    const GrayImage got = log_response(img, 1.0);
    CHECK(got.at(7, 7) < 0.0);
    CHECK(got.at(5, 7) > 0.0);
    CHECK(got.at(9, 7) > 0.0);
    CHECK(got.at(7, 5) > 0.0);
    CHECK(got.at(7, 9) > 0.0);

    const Kernel2D lap(3, {0, 1, 0, 1, -4, 1, 0, 1, 0});
    const GrayImage want = oracle::convolve(oracle::convolve(img, gaussian_kernel(1.0)), lap);
    CHECK(same_pixels(got, want, 1e-9));
}

TEST_CASE("crop and transpose") {
    const GrayImage img = random_image(10, 8, 61);
    const GrayImage c = crop(img, 2, 3, 4, 5);
    CHECK(c.width == 4);
    CHECK(c.height == 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 4; ++x) CHECK(c.at(x, y) == img.at(2 + x, 3 + y));
    CHECK_THROWS_AS(crop(img, 7, 0, 4, 4), invalid_input);
    CHECK_THROWS_AS(crop(img, 0, 0, 0, 4), invalid_input);
    CHECK_THROWS_AS(crop(img, -1, 0, 4, 4), invalid_input);

    const GrayImage t = transpose(img);
    CHECK(t.width == 8);
    CHECK(t.height == 10);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 10; ++x) CHECK(t.at(y, x) == img.at(x, y));
    CHECK(transpose(t).data == img.data);
}

TEST_CASE("resize_bilinear: identity, constants, pinned downsample, corner alignment") {
    const GrayImage img = random_image(12, 9, 71);
    CHECK(resize_bilinear(img, 12, 9).data == img.data);

    const GrayImage flat = resize_bilinear(constant(8, 8, 19.0), 5, 3);
    for (double v : flat.data) CHECK(v == 19.0);

    GrayImage row(4, 1);
    row.at(0, 0) = 0.0;
    row.at(1, 0) = 100.0;
    row.at(2, 0) = 200.0;
    row.at(3, 0) = 300.0;
    const GrayImage half = resize_bilinear(row, 2, 1);
    CHECK(half.at(0, 0) == 50.0);
    CHECK(half.at(1, 0) == 250.0);

    const GrayImage small = random_image(2, 2, 81);
    const GrayImage up = resize_bilinear(small, 4, 4);
    CHECK(up.at(0, 0) == small.at(0, 0));
    CHECK(up.at(3, 0) == small.at(1, 0));
    CHECK(up.at(0, 3) == small.at(0, 1));
    CHECK(up.at(3, 3) == small.at(1, 1));

    CHECK_THROWS_AS(resize_bilinear(img, 0, 5), invalid_input);
}

TEST_CASE("PGM round-trip is the identity for integer images; save rounds and clamps") {
    GrayImage img = random_image(23, 17, 91);
    for (double& v : img.data) v = std::floor(v); // integer-valued
    const std::string path = (temp_dir() / "roundtrip.pgm").string();
    save_image(img, path);
    const GrayImage back = load_image(path);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.data == img.data);

    GrayImage odd(4, 1);
    odd.at(0, 0) = -3.2;
    odd.at(1, 0) = 300.7;
    odd.at(2, 0) = 100.5;
    odd.at(3, 0) = 99.4;
    const std::string path2 = (temp_dir() / "clamp.pgm").string();
    save_image(odd, path2);
    const GrayImage back2 = load_image(path2);
    CHECK(back2.at(0, 0) == 0.0);
    CHECK(back2.at(1, 0) == 255.0);
    CHECK(back2.at(2, 0) == 101.0);
    CHECK(back2.at(3, 0) == 99.0);
}

TEST_CASE("PPM color input reduces by luma weights") {
    const std::string path = (temp_dir() / "color.ppm").string();
    {
        std::ofstream out(path, std::ios::binary);
        out << "P6\n# a comment\n1 3\n255\n";
        const unsigned char px[9] = {255, 0, 0, 0, 255, 0, 10, 10, 10};
        out.write(reinterpret_cast<const char*>(px), 9);
    }
    const GrayImage img = load_image(path);
    CHECK(img.width == 1);
    CHECK(img.height == 3);
    CHECK(img.at(0, 0) == doctest::Approx(0.299 * 255).epsilon(1e-12));
    CHECK(img.at(0, 1) == doctest::Approx(0.587 * 255).epsilon(1e-12));
    CHECK(img.at(0, 2) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("load_image reports distinct error kinds") {
    const fs::path dir = temp_dir();
    auto write_file = [&](const char* name, const std::string& bytes) {
        std::ofstream out(dir / name, std::ios::binary);
        out << bytes;
        return (dir / name).string();
    };

    try {
        load_image((dir / "nope.pgm").string());
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.kind == io_error::Kind::MissingFile);
    }

    const std::string p4 = write_file("bitmap.pbm", "P4\n4 4\n");
    CHECK_THROWS_AS(load_image(p4), io_error);
    try {
        load_image(p4);
    } catch (const io_error& e) {
        CHECK(e.kind == io_error::Kind::UnsupportedFormat);
    }

    const std::string junk = write_file("junk.pgm", "XX 4 4 255 data");
    try {
        load_image(junk);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.kind == io_error::Kind::BadHeader);
    }

    const std::string deep = write_file("deep.pgm", "P5\n2 2\n65535\n\0\0\0\0\0\0\0\0");
    try {
        load_image(deep);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.kind == io_error::Kind::UnsupportedDepth);
    }

    const std::string trunc = write_file("trunc.pgm", "P5\n4 4\n255\nab");
    try {
        load_image(trunc);
        FAIL("expected io_error");
    } catch (const io_error& e) {
        CHECK(e.kind == io_error::Kind::IoFailure);
    }

    // comments and odd whitespace in the header are fine
    std::string ok = "P5 # magic\n# width next\n 2\t2 \n255\n";
    ok += std::string("\x10\x20\x30\x40", 4);
    const std::string commented = write_file("ok.pgm", ok);
    const GrayImage img = load_image(commented);
    CHECK(img.width == 2);
    CHECK(img.at(1, 1) == 0x40);
}

} // TEST_SUITE("image")
