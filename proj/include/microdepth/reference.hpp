#pragma once

#include "microdepth/grid.hpp"
#include "microdepth/image.hpp"
#include "microdepth/preprocess.hpp"

namespace microdepth::reference {

// Plain serial implementations of the parallel kernels, kept as the
// equivalence baseline for tests and benchmarks. Each mirrors the exact
// arithmetic (same summation order) of its OpenMP counterpart, so the
// comparison is bit-for-bit, not approximate.
GrayImage convolve(const GrayImage& img, const Kernel2D& k);
GrayImage gaussian_blur(const GrayImage& img, double sigma);
std::pair<GrayImage, GrayImage> sobel_gradients(const GrayImage& img);
GrayImage wiener_denoise(const GrayImage& img, int window = 5);
PhysicsFeatureVector extract_features(const GrayImage& img, const PatchGrid& grid,
                                      const ExtractOptions& opts = {});

} // namespace microdepth::reference
