#include "microdepth/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <utility>

#include "microdepth/errors.hpp"

namespace microdepth {

namespace {

int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

std::vector<double> gaussian_taps(double sigma, int radius) {
    std::vector<double> w(2 * radius + 1);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double v = std::exp(-static_cast<double>(t) * t * inv);
        w[t + radius] = v;
        sum += v;
    }
    for (double& v : w) v /= sum;
    return w;
}

} // namespace

GrayImage::GrayImage(int w, int h, double fill) {
    if (w < 1 || h < 1) throw invalid_input("GrayImage: width and height must be >= 1");
    width = w;
    height = h;
    data.assign(static_cast<std::size_t>(w) * h, fill);
}

Kernel2D::Kernel2D(int n, std::vector<double> w) {
    if (n < 1 || n % 2 == 0) throw invalid_input("Kernel2D: side length must be odd and positive");
    if (w.size() != static_cast<std::size_t>(n) * n)
        throw invalid_input("Kernel2D: weight count does not match side length");
    size = n;
    weights = std::move(w);
}

GrayImage convolve(const GrayImage& img, const Kernel2D& k, BorderMode) {
    if (k.size > img.width || k.size > img.height)
        throw invalid_input("convolve: kernel larger than image");
    const int c = k.size / 2;
    GrayImage out(img.width, img.height);
#pragma omp parallel for schedule(static)
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

Kernel2D gaussian_kernel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw invalid_input("gaussian_kernel: sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = 2 * radius + 1;
    std::vector<double> w(static_cast<std::size_t>(side) * side);
    const double inv = 1.0 / (2.0 * sigma * sigma);
    double sum = 0.0;
    for (int i = 0; i < side; ++i) {
        const double dy = i - radius;
        for (int j = 0; j < side; ++j) {
            const double dx = j - radius;
            const double v = std::exp(-(dx * dx + dy * dy) * inv);
            w[static_cast<std::size_t>(i) * side + j] = v;
            sum += v;
        }
    }
    for (double& v : w) v /= sum;
    return Kernel2D(side, std::move(w));
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
    if (sigma == 0.0) return img;
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw invalid_input("gaussian_blur: sigma must be >= 0");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int side = 2 * radius + 1;
    if (side > img.width || side > img.height)
        throw invalid_input("gaussian_blur: kernel larger than image");
    const std::vector<double> w = gaussian_taps(sigma, radius);

    // Two 1-D passes; with per-axis clamping this equals the full 2-D
    // replicate-border convolution because the outer-product sum separates.
    GrayImage tmp(img.width, img.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += w[t + radius] * img.at(clampi(x + t, 0, img.width - 1), y);
            tmp.at(x, y) = acc;
        }
    }
    GrayImage out(img.width, img.height);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t)
                acc += w[t + radius] * tmp.at(x, clampi(y + t, 0, img.height - 1));
            out.at(x, y) = acc;
        }
    }
    return out;
}

std::pair<GrayImage, GrayImage> sobel_gradients(const GrayImage& img) {
    if (img.width < 3 || img.height < 3)
        throw invalid_input("sobel_gradients: image must be at least 3x3");
    GrayImage gx(img.width, img.height);
    GrayImage gy(img.width, img.height);
#pragma omp parallel for schedule(static)
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

GrayImage log_response(const GrayImage& img, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw invalid_input("log_response: sigma must be positive");
    const GrayImage blurred = gaussian_blur(img, sigma);
    static const Kernel2D lap(3, {0.0, 1.0, 0.0, 1.0, -4.0, 1.0, 0.0, 1.0, 0.0});
    return convolve(blurred, lap);
}

GrayImage crop(const GrayImage& img, int x0, int y0, int w, int h) {
    if (w < 1 || h < 1 || x0 < 0 || y0 < 0 || x0 + w > img.width || y0 + h > img.height)
        throw invalid_input("crop: rectangle out of bounds");
    GrayImage out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
    return out;
}

GrayImage transpose(const GrayImage& img) {
    GrayImage out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(y, x) = img.at(x, y);
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1) throw invalid_input("resize_bilinear: target must be >= 1x1");
    if (new_w == img.width && new_h == img.height) return img;
    GrayImage out(new_w, new_h);
    const double sx = static_cast<double>(img.width) / new_w;
    const double sy = static_cast<double>(img.height) / new_h;
#pragma omp parallel for schedule(static)
    for (int y = 0; y < new_h; ++y) {
        const double fy = (y + 0.5) * sy - 0.5;
        int y0 = static_cast<int>(std::floor(fy));
        const double wy = fy - y0;
        const int y1 = clampi(y0 + 1, 0, img.height - 1);
        y0 = clampi(y0, 0, img.height - 1);
        for (int x = 0; x < new_w; ++x) {
            const double fx = (x + 0.5) * sx - 0.5;
            int x0 = static_cast<int>(std::floor(fx));
            const double wx = fx - x0;
            const int x1 = clampi(x0 + 1, 0, img.width - 1);
            x0 = clampi(x0, 0, img.width - 1);
            const double top = img.at(x0, y0) + wx * (img.at(x1, y0) - img.at(x0, y0));
            const double bot = img.at(x0, y1) + wx * (img.at(x1, y1) - img.at(x0, y1));
            out.at(x, y) = top + wy * (bot - top);
        }
    }
    return out;
}

namespace {

// PGM/PPM header token: skips whitespace and '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {}
            continue;
        }
        if (!std::isspace(ch)) {
            tok.push_back(static_cast<char>(ch));
            break;
        }
    }
    if (tok.empty()) return tok;
    while ((ch = in.get()) != EOF && !std::isspace(ch)) tok.push_back(static_cast<char>(ch));
    return tok;
}

int parse_header_int(std::istream& in, const std::string& path, const char* what) {
    const std::string tok = next_token(in);
    if (tok.empty()) throw io_error(io_error::Kind::BadHeader, path + ": truncated header");
    int value = 0;
    for (char c : tok) {
        if (c < '0' || c > '9')
            throw io_error(io_error::Kind::BadHeader,
                           path + ": malformed " + what + " field '" + tok + "'");
        value = value * 10 + (c - '0');
        if (value > 1 << 30) throw io_error(io_error::Kind::BadHeader, path + ": absurd " + what);
    }
    return value;
}

} // namespace

GrayImage load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(io_error::Kind::MissingFile, path + ": cannot open file");
    const std::string magic = next_token(in);
    if (magic != "P5" && magic != "P6") {
        if (magic.size() == 2 && magic[0] == 'P')
            throw io_error(io_error::Kind::UnsupportedFormat,
                           path + ": only binary PGM (P5) / PPM (P6) supported, got " + magic);
        throw io_error(io_error::Kind::BadHeader, path + ": not a PGM/PPM file");
    }
    const int w = parse_header_int(in, path, "width");
    const int h = parse_header_int(in, path, "height");
    const int maxval = parse_header_int(in, path, "maxval");
    if (w < 1 || h < 1) throw io_error(io_error::Kind::BadHeader, path + ": empty image");
    if (maxval != 255)
        throw io_error(io_error::Kind::UnsupportedDepth,
                       path + ": only 8-bit images supported (maxval " + std::to_string(maxval) + ")");
    // The single whitespace byte after maxval was already consumed by the
    // token reader.
    const int channels = (magic == "P5") ? 1 : 3;
    const std::size_t n = static_cast<std::size_t>(w) * h * channels;
    std::vector<unsigned char> raw(n);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
        throw io_error(io_error::Kind::IoFailure, path + ": truncated pixel data");
    GrayImage img(w, h);
    if (channels == 1) {
        for (std::size_t i = 0; i < img.data.size(); ++i) img.data[i] = raw[i];
    } else {
        for (std::size_t i = 0; i < img.data.size(); ++i) {
            const double r = raw[3 * i], g = raw[3 * i + 1], b = raw[3 * i + 2];
            img.data[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        }
    }
    return img;
}

void save_image(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": cannot open for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.data.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double q = std::floor(img.data[i] + 0.5);
        raw[i] = static_cast<unsigned char>(q < 0.0 ? 0.0 : (q > 255.0 ? 255.0 : q));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw io_error(io_error::Kind::IoFailure, path + ": write failed");
}

} // namespace microdepth
