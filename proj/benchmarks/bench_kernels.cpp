// Microbenchmarks comparing the OpenMP kernels against their serial
// reference implementations. On a single-core host the two land within
// noise of each other; on multicore hosts the parallel columns should pull
// ahead on the larger inputs.

#include <benchmark/benchmark.h>

#include "microdepth/grid.hpp"
#include "microdepth/image.hpp"
#include "microdepth/preprocess.hpp"
#include "microdepth/reference.hpp"
#include "microdepth/rng.hpp"
#include "microdepth/synth.hpp"
#include "microdepth/threading.hpp"

using namespace microdepth;

namespace {

GrayImage random_image(int w, int h, std::uint64_t seed) {
    Rng rng(seed);
    GrayImage img(w, h);
    for (double& v : img.data) v = rng.uniform(0.0, 255.0);
    return img;
}

const GrayImage& frame512() {
    static const GrayImage img = random_image(512, 512, 1);
    return img;
}

// A realistic extraction input: one rendered 224x224 synthetic frame plus
// the adaptive patch layout its detection produces.
struct ExtractFixture {
    GrayImage img;
    PatchGrid grid;
};

const ExtractFixture& extract_fixture() {
    static const ExtractFixture fx = [] {
        SynthConfig cfg;
        Rng rng(3);
        ExtractFixture f{render_sample(cfg, 2.5, rng), {}};
        const GridSpec spec;
        f.grid = build_grid(f.img.width, f.img.height, detect_robot(f.img, spec), spec);
        return f;
    }();
    return fx;
}

void BM_convolve5x5(benchmark::State& state) {
    const Kernel2D k = gaussian_kernel(0.8); // 5x5
    for (auto _ : state) benchmark::DoNotOptimize(convolve(frame512(), k));
}
BENCHMARK(BM_convolve5x5);

void BM_convolve5x5_serial(benchmark::State& state) {
    const Kernel2D k = gaussian_kernel(0.8);
    for (auto _ : state) benchmark::DoNotOptimize(reference::convolve(frame512(), k));
}
BENCHMARK(BM_convolve5x5_serial);

void BM_gaussian_blur(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(gaussian_blur(frame512(), 2.0));
}
BENCHMARK(BM_gaussian_blur);

void BM_gaussian_blur_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(reference::gaussian_blur(frame512(), 2.0));
}
BENCHMARK(BM_gaussian_blur_serial);

void BM_sobel(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(sobel_gradients(frame512()));
}
BENCHMARK(BM_sobel);

void BM_sobel_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(reference::sobel_gradients(frame512()));
}
BENCHMARK(BM_sobel_serial);

void BM_wiener(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(wiener_denoise(frame512(), 5));
}
BENCHMARK(BM_wiener);

void BM_wiener_serial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(reference::wiener_denoise(frame512(), 5));
}
BENCHMARK(BM_wiener_serial);

void BM_extract_features(benchmark::State& state) {
    const ExtractFixture& fx = extract_fixture();
    for (auto _ : state) benchmark::DoNotOptimize(extract_features(fx.img, fx.grid));
}
BENCHMARK(BM_extract_features);

void BM_extract_features_serial(benchmark::State& state) {
    const ExtractFixture& fx = extract_fixture();
    for (auto _ : state) benchmark::DoNotOptimize(reference::extract_features(fx.img, fx.grid));
}
BENCHMARK(BM_extract_features_serial);

} // namespace

int main(int argc, char** argv) {
    benchmark::Initialize(&argc, argv);
    std::printf("openmp: %s, max threads: %d\n", openmp_enabled() ? "on" : "off", max_threads());
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
