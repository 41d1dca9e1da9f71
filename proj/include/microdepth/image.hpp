#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace microdepth {

// Row-major grayscale raster. Intensities are stored as doubles in the
// nominal [0, 255] range; filtering results are kept unquantized and only
// histogram-based operations bin them back to 256 levels.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0);

    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }

    double& at(int x, int y) { return data[index(x, y)]; }
    double at(int x, int y) const { return data[index(x, y)]; }

    std::size_t size() const { return data.size(); }
};

struct Kernel2D {
    int size = 0;                // odd side length
    std::vector<double> weights; // size*size, row-major

    Kernel2D() = default;
    Kernel2D(int n, std::vector<double> w);

    double at(int i, int j) const { return weights[static_cast<std::size_t>(i) * size + j]; }
};

enum class BorderMode { Replicate };

// True convolution (kernel flipped relative to correlation):
//   out(x, y) = sum_{i,j} k(i, j) * img(x - (j - c), y - (i - c)), c = size/2
// with out-of-range coordinates clamped to the nearest edge pixel.
GrayImage convolve(const GrayImage& img, const Kernel2D& k, BorderMode border = BorderMode::Replicate);

// Sampled 2-D Gaussian, side 2*ceil(3*sigma)+1, normalized to unit sum.
Kernel2D gaussian_kernel(double sigma);

// Separable Gaussian blur with replicate borders; mathematically equal to
// convolve(img, gaussian_kernel(sigma)). sigma == 0 returns a copy.
GrayImage gaussian_blur(const GrayImage& img, double sigma);

// Classic Sobel pair. Gx responds to intensity increasing with x, Gy to
// intensity increasing with y; replicate borders.
std::pair<GrayImage, GrayImage> sobel_gradients(const GrayImage& img);

// Laplacian-of-Gaussian: blur with sigma, then the 4-neighbor Laplacian
// stencil [0 1 0; 1 -4 1; 0 1 0].
GrayImage log_response(const GrayImage& img, double sigma);

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h);
GrayImage transpose(const GrayImage& img);
GrayImage resize_bilinear(const GrayImage& img, int new_w, int new_h);

// Binary PGM (P5) and PPM (P6, reduced via 0.299R + 0.587G + 0.114B).
// Only maxval 255 is accepted.
GrayImage load_image(const std::string& path);
void save_image(const GrayImage& img, const std::string& path);

} // namespace microdepth
