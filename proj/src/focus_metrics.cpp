#include "microdepth/focus_metrics.hpp"

#include <array>
#include <cmath>
#include <cstdint>

#include "microdepth/errors.hpp"

namespace microdepth {

const std::string& metric_name(FocusMetricId id) {
    static const std::array<std::string, kNumMetrics> names{
        "entropy", "log", "tenengrad", "brenner", "gray_variance", "max_abs_gradient"};
    return names[static_cast<int>(id)];
}

double entropy(const GrayImage& img) {
    if (img.data.empty()) throw invalid_input("entropy: empty image");
    std::array<std::int64_t, 256> hist{};
    for (double v : img.data) ++hist[quantize256(v)];
    const double n = static_cast<double>(img.data.size());
    double h = 0.0;
    for (std::int64_t c : hist) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double log_energy(const GrayImage& img, double sigma) {
    const GrayImage r = log_response(img, sigma);
    double sum = 0.0;
    for (double v : r.data) sum += v * v;
    return sum;
}

double tenengrad(const GrayImage& img) {
    const auto [gx, gy] = sobel_gradients(img);
    double sum = 0.0;
    for (std::size_t i = 0; i < gx.data.size(); ++i)
        sum += gx.data[i] * gx.data[i] + gy.data[i] * gy.data[i];
    return sum;
}

double brenner(const GrayImage& img) {
    if (img.width < 3) throw invalid_input("brenner: image width must be >= 3");
    double sum = 0.0;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x + 2 < img.width; ++x) {
            const double d = img.at(x + 2, y) - img.at(x, y);
            sum += d * d;
        }
    }
    return sum;
}

double gray_variance(const GrayImage& img) {
    if (img.data.empty()) throw invalid_input("gray_variance: empty image");
    const double n = static_cast<double>(img.data.size());
    double mean = 0.0;
    for (double v : img.data) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : img.data) var += (v - mean) * (v - mean);
    return var / n;
}

double max_abs_gradient(const GrayImage& img) {
    const auto [gx, gy] = sobel_gradients(img);
    double best = 0.0;
    for (std::size_t i = 0; i < gx.data.size(); ++i) {
        const double m2 = gx.data[i] * gx.data[i] + gy.data[i] * gy.data[i];
        if (m2 > best) best = m2;
    }
    return std::sqrt(best); // sqrt of the max == max of the sqrts
}

MetricVector metric_vector(const GrayImage& img, double log_sigma) {
    return {entropy(img),   log_energy(img, log_sigma), tenengrad(img),
            brenner(img),   gray_variance(img),         max_abs_gradient(img)};
}

} // namespace microdepth
