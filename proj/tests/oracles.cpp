#include "oracles.hpp"

#include <cmath>
#include <cstdint>
#include <queue>
#include <stdexcept>

using namespace microdepth;

namespace oracle {

namespace {

int clamp_coord(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

int bin256(double v) {
    const double q = std::floor(v + 0.5);
    if (q < 0.0) return 0;
    if (q > 255.0) return 255;
    return static_cast<int>(q);
}

} // namespace

GrayImage convolve(const GrayImage& img, const Kernel2D& k) {
    const int c = k.size / 2;
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            double acc = 0.0;
            // Column-major over the kernel, unlike the implementation.
            for (int j = 0; j < k.size; ++j)
                for (int i = 0; i < k.size; ++i) {
                    const int sx = clamp_coord(x - (j - c), img.width - 1);
                    const int sy = clamp_coord(y - (i - c), img.height - 1);
                    acc += k.at(i, j) * img.at(sx, sy);
                }
            out.at(x, y) = acc;
        }
    return out;
}

int otsu(const GrayImage& img) {
    std::int64_t hist[256] = {};
    for (double v : img.data) ++hist[bin256(v)];
    const auto total = static_cast<std::int64_t>(img.data.size());

    int best_t = -1;
    double best = -1.0;
    for (int t = 0; t <= 254; ++t) {
        // Both class sums recomputed from scratch for every candidate.
        std::int64_t w0 = 0, sum0 = 0;
        for (int b = 0; b <= t; ++b) {
            w0 += hist[b];
            sum0 += hist[b] * static_cast<std::int64_t>(b);
        }
        std::int64_t w1 = 0, sum1 = 0;
        for (int b = t + 1; b <= 255; ++b) {
            w1 += hist[b];
            sum1 += hist[b] * static_cast<std::int64_t>(b);
        }
        if (w0 == 0 || w1 == 0) continue;
        if (w0 + w1 != total) throw std::logic_error("oracle::otsu: histogram mismatch");
        const double mu0 = static_cast<double>(sum0) / static_cast<double>(w0);
        const double mu1 = static_cast<double>(sum1) / static_cast<double>(w1);
        const double d = mu1 - mu0;
        const double bcv = static_cast<double>(w0) * static_cast<double>(w1) * d * d;
        if (bcv > best) {
            best = bcv;
            best_t = t;
        }
    }
    if (best_t < 0) throw std::logic_error("oracle::otsu: degenerate image");
    return best_t;
}

std::optional<BoundingBox> largest_bbox(const BinaryImage& bin) {
    const int w = bin.width, h = bin.height;
    std::vector<char> seen(static_cast<std::size_t>(w) * h, 0);
    bool found = false;
    std::int64_t best_count = 0;
    BoundingBox best{};

    for (int sy = 0; sy < h; ++sy)
        for (int sx = 0; sx < w; ++sx) {
            const std::size_t si = static_cast<std::size_t>(sy) * w + sx;
            if (!bin.mask[si] || seen[si]) continue;
            std::int64_t count = 0;
            int x0 = sx, x1 = sx, y0 = sy, y1 = sy;
            std::queue<std::pair<int, int>> q;
            q.emplace(sx, sy);
            seen[si] = 1;
            while (!q.empty()) {
                const auto [x, y] = q.front();
                q.pop();
                ++count;
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        if (dx == 0 && dy == 0) continue;
                        const int nx = x + dx, ny = y + dy;
                        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                        const std::size_t ni = static_cast<std::size_t>(ny) * w + nx;
                        if (bin.mask[ni] && !seen[ni]) {
                            seen[ni] = 1;
                            q.emplace(nx, ny);
                        }
                    }
            }
            const BoundingBox cand{x0, y0, x1 - x0 + 1, y1 - y0 + 1};
            const bool better =
                !found || count > best_count ||
                (count == best_count &&
                 (cand.y0 < best.y0 || (cand.y0 == best.y0 && cand.x0 < best.x0)));
            if (better) {
                found = true;
                best_count = count;
                best = cand;
            }
        }
    if (!found) return std::nullopt;
    return best;
}

RidgeSolution ridge_gd(const Matrix& X, const std::vector<double>& y, double lambda,
                       int max_iters, double grad_tol) {
    const std::size_t n = X.rows, d = X.cols;
    std::vector<double> theta(d + 1, 0.0); // [w..., b]

    // gradient of ||Xw + b - y||^2 + lambda ||w||^2 at theta
    const auto grad_at = [&](const std::vector<double>& t, std::vector<double>& g) {
        std::vector<double> resid(n);
        for (std::size_t r = 0; r < n; ++r) {
            double p = t[d];
            for (std::size_t c = 0; c < d; ++c) p += X.at(r, c) * t[c];
            resid[r] = p - y[r];
        }
        g.assign(d + 1, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) g[c] += 2.0 * X.at(r, c) * resid[r];
            g[d] += 2.0 * resid[r];
        }
        for (std::size_t c = 0; c < d; ++c) g[c] += 2.0 * lambda * t[c];
    };
    // Hessian-vector product: H v = 2 (Xt X~ v + lambda I~ v)
    const auto hess_vec = [&](const std::vector<double>& v, std::vector<double>& hv) {
        std::vector<double> xv(n);
        for (std::size_t r = 0; r < n; ++r) {
            double p = v[d];
            for (std::size_t c = 0; c < d; ++c) p += X.at(r, c) * v[c];
            xv[r] = p;
        }
        hv.assign(d + 1, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < d; ++c) hv[c] += 2.0 * X.at(r, c) * xv[r];
            hv[d] += 2.0 * xv[r];
        }
        for (std::size_t c = 0; c < d; ++c) hv[c] += 2.0 * lambda * v[c];
    };

    std::vector<double> g, hg;
    grad_at(theta, g);
    double g0 = 0.0;
    for (double v : g) g0 += v * v;
    g0 = std::sqrt(g0);

    RidgeSolution sol;
    for (int it = 0; it < max_iters; ++it) {
        double gg = 0.0;
        for (double v : g) gg += v * v;
        if (std::sqrt(gg) <= grad_tol * std::max(1.0, g0)) {
            sol.iterations = it;
            break;
        }
        hess_vec(g, hg);
        double ghg = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) ghg += g[i] * hg[i];
        if (!(ghg > 0.0)) break; // flat or indefinite: nothing left to do
        const double step = gg / ghg; // exact line search on the quadratic
        for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= step * g[i];
        grad_at(theta, g);
        sol.iterations = it + 1;
    }

    sol.weights.assign(theta.begin(), theta.begin() + d);
    sol.bias = theta[d];
    return sol;
}

std::vector<double> mlp_fd_gradients(const MlpModel& m, const Matrix& X,
                                     const std::vector<double>& y, double h) {
    std::vector<double> out;
    MlpModel probe = m;
    for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
        for (std::size_t i = 0; i < m.weights[layer].size(); ++i) {
            const double orig = probe.weights[layer][i];
            const double step = h * std::max(1.0, std::abs(orig));
            probe.weights[layer][i] = orig + step;
            const double lp = mlp_loss(probe, X, y);
            probe.weights[layer][i] = orig - step;
            const double lm = mlp_loss(probe, X, y);
            probe.weights[layer][i] = orig;
            out.push_back((lp - lm) / (2.0 * step));
        }
        for (std::size_t i = 0; i < m.biases[layer].size(); ++i) {
            const double orig = probe.biases[layer][i];
            const double step = h * std::max(1.0, std::abs(orig));
            probe.biases[layer][i] = orig + step;
            const double lp = mlp_loss(probe, X, y);
            probe.biases[layer][i] = orig - step;
            const double lm = mlp_loss(probe, X, y);
            probe.biases[layer][i] = orig;
            out.push_back((lp - lm) / (2.0 * step));
        }
    }
    return out;
}

std::vector<double> mlp_flat_gradients(const MlpModel& m, const Matrix& X,
                                       const std::vector<double>& y) {
    std::vector<std::vector<double>> gw, gb;
    mlp_gradients(m, X, y, gw, gb);
    std::vector<double> out;
    for (std::size_t layer = 0; layer < gw.size(); ++layer) {
        out.insert(out.end(), gw[layer].begin(), gw[layer].end());
        out.insert(out.end(), gb[layer].begin(), gb[layer].end());
    }
    return out;
}

GrayImage rot90(const GrayImage& img) {
    GrayImage out(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) out.at(y, img.width - 1 - x) = img.at(x, y);
    return out;
}

} // namespace oracle
