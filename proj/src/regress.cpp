#include "microdepth/regress.hpp"

#include <algorithm>
#include <cmath>

#include "microdepth/errors.hpp"
#include "microdepth/rng.hpp"

namespace microdepth {

std::vector<double> fuse(const PhysicsFeatureVector& physics, const std::vector<double>& embedding) {
    std::vector<double> out = physics.values;
    out.insert(out.end(), embedding.begin(), embedding.end());
    return out;
}

Standardizer fit_standardizer(const Matrix& X) {
    if (X.rows < 2) throw invalid_dataset("fit_standardizer: need at least 2 rows");
    Standardizer s;
    s.mean.assign(X.cols, 0.0);
    s.stddev.assign(X.cols, 1.0);
    s.flagged.assign(X.cols, false);
    for (std::size_t c = 0; c < X.cols; ++c) {
        double m = 0.0;
        for (std::size_t r = 0; r < X.rows; ++r) m += X.at(r, c);
        m /= static_cast<double>(X.rows);
        double var = 0.0;
        for (std::size_t r = 0; r < X.rows; ++r) {
            const double d = X.at(r, c) - m;
            var += d * d;
        }
        var /= static_cast<double>(X.rows);
        const double sd = std::sqrt(var);
        // Constant columns (up to fp residue) pass through unchanged.
        if (sd <= 1e-12 * std::max(1.0, std::abs(m))) {
            s.flagged[c] = true;
            s.mean[c] = 0.0;
            s.stddev[c] = 1.0;
        } else {
            s.mean[c] = m;
            s.stddev[c] = sd;
        }
    }
    return s;
}

Matrix apply(const Standardizer& s, const Matrix& X) {
    if (X.cols != s.mean.size()) throw invalid_dataset("standardizer: column count mismatch");
    Matrix out(X.rows, X.cols);
    for (std::size_t r = 0; r < X.rows; ++r)
        for (std::size_t c = 0; c < X.cols; ++c)
            out.at(r, c) = (X.at(r, c) - s.mean[c]) / s.stddev[c];
    return out;
}

std::vector<double> apply_row(const Standardizer& s, const std::vector<double>& row) {
    if (row.size() != s.mean.size()) throw invalid_dataset("standardizer: column count mismatch");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) out[c] = (row[c] - s.mean[c]) / s.stddev[c];
    return out;
}

namespace {

// In-place Cholesky solve of A x = b for symmetric positive definite A
// (n x n row-major). Returns false when a pivot collapses.
bool cholesky_solve(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double d = A[j * n + j];
        for (std::size_t k = 0; k < j; ++k) d -= A[j * n + k] * A[j * n + k];
        if (!(d > 0.0) || !std::isfinite(d)) return false;
        const double l = std::sqrt(d);
        A[j * n + j] = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = A[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= A[i * n + k] * A[j * n + k];
            A[i * n + j] = v / l;
        }
    }
    for (std::size_t i = 0; i < n; ++i) { // L y = b
        double v = b[i];
        for (std::size_t k = 0; k < i; ++k) v -= A[i * n + k] * b[k];
        b[i] = v / A[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) { // L^T x = y
        double v = b[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= A[k * n + ii] * b[k];
        b[ii] = v / A[ii * n + ii];
    }
    return true;
}

} // namespace

RidgeModel fit_ridge(const Matrix& X, const std::vector<double>& y, double lambda) {
    if (X.rows == 0 || X.cols == 0) throw invalid_input("fit_ridge: empty problem");
    if (y.size() != X.rows) throw invalid_input("fit_ridge: row/label count mismatch");
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw invalid_input("fit_ridge: lambda must be >= 0");

    // Bordered normal equations: unknowns [w; b], bias unpenalized.
    const std::size_t d = X.cols, n = d + 1;
    std::vector<double> A(n * n, 0.0), rhs(n, 0.0);
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(d); ++i) {
        for (std::size_t j = i; j < d; ++j) {
            double s = 0.0;
            for (std::size_t r = 0; r < X.rows; ++r) s += X.at(r, i) * X.at(r, j);
            A[i * n + j] = s;
            A[j * n + i] = s;
        }
        double cs = 0.0, ys = 0.0;
        for (std::size_t r = 0; r < X.rows; ++r) {
            cs += X.at(r, i);
            ys += X.at(r, i) * y[r];
        }
        A[i * n + d] = cs;
        A[d * n + i] = cs;
        rhs[i] = ys;
    }
    for (std::size_t i = 0; i < d; ++i) A[i * n + i] += lambda;
    A[d * n + d] = static_cast<double>(X.rows);
    double ysum = 0.0;
    for (double v : y) ysum += v;
    rhs[d] = ysum;

    if (!cholesky_solve(A, rhs, n))
        throw invalid_dataset(
            "fit_ridge: normal equations are singular (collinear features); set lambda > 0");

    RidgeModel m;
    m.weights.assign(rhs.begin(), rhs.begin() + static_cast<std::ptrdiff_t>(d));
    m.bias = rhs[d];
    m.lambda = lambda;
    return m;
}

std::vector<double> predict(const RidgeModel& m, const Matrix& X) {
    if (X.cols != m.weights.size()) throw invalid_dataset("ridge predict: dimension mismatch");
    std::vector<double> y(X.rows);
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < static_cast<long long>(X.rows); ++r) {
        double s = m.bias;
        for (std::size_t c = 0; c < X.cols; ++c) s += m.weights[c] * X.at(r, c);
        y[r] = s;
    }
    return y;
}

namespace {

double softplus(double x) {
    if (x > 30.0) return x;
    if (x < -30.0) return std::exp(x);
    return std::log1p(std::exp(x));
}

double sigmoid(double x) {
    if (x >= 0.0) {
        const double e = std::exp(-x);
        return 1.0 / (1.0 + e);
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// Forward pass storing pre-activations per layer; returns the prediction.
double mlp_forward(const MlpModel& m, const double* x, std::vector<std::vector<double>>& zs,
                   std::vector<std::vector<double>>& as) {
    const std::size_t L = m.weights.size();
    as[0].assign(x, x + m.layers[0]);
    for (std::size_t l = 0; l < L; ++l) {
        const int out_n = m.layers[l + 1], in_n = m.layers[l];
        zs[l].resize(out_n);
        as[l + 1].resize(out_n);
        for (int o = 0; o < out_n; ++o) {
            double s = m.biases[l][o];
            const double* wrow = &m.weights[l][static_cast<std::size_t>(o) * in_n];
            for (int i = 0; i < in_n; ++i) s += wrow[i] * as[l][i];
            zs[l][o] = s;
            as[l + 1][o] = (l + 1 == L) ? s : softplus(s); // linear output head
        }
    }
    return as[L][0];
}

} // namespace

MlpModel init_mlp(int input_dim, const MlpConfig& cfg) {
    if (input_dim < 1) throw invalid_input("init_mlp: input dimension must be >= 1");
    for (int hsize : cfg.hidden)
        if (hsize < 1) throw invalid_input("init_mlp: hidden sizes must be >= 1");
    MlpModel m;
    m.layers.push_back(input_dim);
    for (int hsize : cfg.hidden) m.layers.push_back(hsize);
    m.layers.push_back(1);

    Rng rng(cfg.seed);
    const std::size_t L = m.layers.size() - 1;
    m.weights.resize(L);
    m.biases.resize(L);
    for (std::size_t l = 0; l < L; ++l) {
        const int in_n = m.layers[l], out_n = m.layers[l + 1];
        const double limit = std::sqrt(6.0 / (in_n + out_n));
        m.weights[l].resize(static_cast<std::size_t>(in_n) * out_n);
        for (double& w : m.weights[l]) w = rng.uniform(-limit, limit);
        m.biases[l].assign(static_cast<std::size_t>(out_n), 0.0);
    }
    return m;
}

double mlp_loss(const MlpModel& m, const Matrix& X, const std::vector<double>& y) {
    if (X.rows == 0 || y.size() != X.rows) throw invalid_input("mlp_loss: bad batch");
    std::vector<std::vector<double>> zs(m.weights.size()), as(m.layers.size());
    double loss = 0.0;
    for (std::size_t r = 0; r < X.rows; ++r) {
        const double pred = mlp_forward(m, &X.a[r * X.cols], zs, as);
        loss += (pred - y[r]) * (pred - y[r]);
    }
    return loss / static_cast<double>(X.rows);
}

void mlp_gradients(const MlpModel& m, const Matrix& X, const std::vector<double>& y,
                   std::vector<std::vector<double>>& grad_w,
                   std::vector<std::vector<double>>& grad_b) {
    if (X.rows == 0 || y.size() != X.rows) throw invalid_input("mlp_gradients: bad batch");
    const std::size_t L = m.weights.size();
    grad_w.assign(L, {});
    grad_b.assign(L, {});
    for (std::size_t l = 0; l < L; ++l) {
        grad_w[l].assign(m.weights[l].size(), 0.0);
        grad_b[l].assign(m.biases[l].size(), 0.0);
    }

    std::vector<std::vector<double>> zs(L), as(m.layers.size()), delta(L);
    for (std::size_t r = 0; r < X.rows; ++r) {
        const double pred = mlp_forward(m, &X.a[r * X.cols], zs, as);
        // dL/dpred for the per-batch mean of squared errors
        const double dl = 2.0 * (pred - y[r]) / static_cast<double>(X.rows);
        delta[L - 1].assign(1, dl);
        for (std::size_t l = L - 1; l-- > 0;) {
            const int out_n = m.layers[l + 1];
            const int next_n = m.layers[l + 2];
            delta[l].assign(out_n, 0.0);
            for (int o = 0; o < out_n; ++o) {
                double s = 0.0;
                for (int q = 0; q < next_n; ++q)
                    s += m.weights[l + 1][static_cast<std::size_t>(q) * out_n + o] * delta[l + 1][q];
                delta[l][o] = s * sigmoid(zs[l][o]); // softplus' = sigmoid
            }
        }
        for (std::size_t l = 0; l < L; ++l) {
            const int out_n = m.layers[l + 1], in_n = m.layers[l];
            for (int o = 0; o < out_n; ++o) {
                grad_b[l][o] += delta[l][o];
                double* gw = &grad_w[l][static_cast<std::size_t>(o) * in_n];
                for (int i = 0; i < in_n; ++i) gw[i] += delta[l][o] * as[l][i];
            }
        }
    }
}

MlpModel fit_mlp(const Matrix& X, const std::vector<double>& y, const MlpConfig& cfg,
                 std::vector<double>* epoch_losses) {
    if (X.rows == 0) throw invalid_input("fit_mlp: empty training set");
    if (y.size() != X.rows) throw invalid_input("fit_mlp: row/label count mismatch");
    if (!(cfg.lr > 0.0)) throw invalid_input("fit_mlp: lr must be > 0");
    if (cfg.epochs < 1 || cfg.batch < 1) throw invalid_input("fit_mlp: epochs/batch must be >= 1");

    MlpModel m = init_mlp(static_cast<int>(X.cols), cfg);
    Rng rng(cfg.seed ^ 0x6d6c702d61646d00ULL); // separate stream from init

    const std::size_t L = m.weights.size();
    std::vector<std::vector<double>> mw(L), vw(L), mb(L), vb(L);
    for (std::size_t l = 0; l < L; ++l) {
        mw[l].assign(m.weights[l].size(), 0.0);
        vw[l].assign(m.weights[l].size(), 0.0);
        mb[l].assign(m.biases[l].size(), 0.0);
        vb[l].assign(m.biases[l].size(), 0.0);
    }
    const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    long step = 0;

    std::vector<std::vector<double>> gw, gb;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        const std::vector<std::size_t> order = rng.permutation(X.rows);
        double epoch_loss = 0.0;
        std::size_t pos = 0;
        while (pos < order.size()) {
            const std::size_t bs = std::min<std::size_t>(cfg.batch, order.size() - pos);
            Matrix Xb(bs, X.cols);
            std::vector<double> yb(bs);
            for (std::size_t k = 0; k < bs; ++k) {
                const std::size_t src = order[pos + k];
                std::copy(&X.a[src * X.cols], &X.a[src * X.cols] + X.cols, &Xb.a[k * X.cols]);
                yb[k] = y[src];
            }
            pos += bs;

            mlp_gradients(m, Xb, yb, gw, gb);
            epoch_loss += mlp_loss(m, Xb, yb) * static_cast<double>(bs);
            ++step;
            const double corr1 = 1.0 - std::pow(b1, static_cast<double>(step));
            const double corr2 = 1.0 - std::pow(b2, static_cast<double>(step));
            for (std::size_t l = 0; l < L; ++l) {
                for (std::size_t i = 0; i < m.weights[l].size(); ++i) {
                    mw[l][i] = b1 * mw[l][i] + (1.0 - b1) * gw[l][i];
                    vw[l][i] = b2 * vw[l][i] + (1.0 - b2) * gw[l][i] * gw[l][i];
                    m.weights[l][i] -=
                        cfg.lr * (mw[l][i] / corr1) / (std::sqrt(vw[l][i] / corr2) + eps);
                }
                for (std::size_t i = 0; i < m.biases[l].size(); ++i) {
                    mb[l][i] = b1 * mb[l][i] + (1.0 - b1) * gb[l][i];
                    vb[l][i] = b2 * vb[l][i] + (1.0 - b2) * gb[l][i] * gb[l][i];
                    m.biases[l][i] -=
                        cfg.lr * (mb[l][i] / corr1) / (std::sqrt(vb[l][i] / corr2) + eps);
                }
            }
        }
        epoch_loss /= static_cast<double>(X.rows);
        if (!std::isfinite(epoch_loss))
            throw invalid_input("fit_mlp: loss diverged to NaN/Inf; lower the learning rate");
        if (epoch_losses) epoch_losses->push_back(epoch_loss);
    }
    return m;
}

std::vector<double> predict(const MlpModel& m, const Matrix& X) {
    if (m.layers.empty() || X.cols != static_cast<std::size_t>(m.layers.front()))
        throw invalid_dataset("mlp predict: dimension mismatch");
    std::vector<double> y(X.rows);
    std::vector<std::vector<double>> zs(m.weights.size()), as(m.layers.size());
    for (std::size_t r = 0; r < X.rows; ++r) y[r] = mlp_forward(m, &X.a[r * X.cols], zs, as);
    return y;
}

EvalReport evaluate(const std::vector<double>& y_hat, const std::vector<double>& y) {
    if (y_hat.size() != y.size()) throw invalid_input("evaluate: size mismatch");
    if (y.empty()) throw invalid_input("evaluate: empty input");
    EvalReport rep;
    rep.n = y.size();
    rep.residuals.resize(y.size());
    double ss_res = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y_hat[i] - y[i];
        rep.residuals[i] = d;
        ss_res += d * d;
    }
    rep.mse = ss_res / static_cast<double>(y.size());
    if (y.size() >= 2) {
        double mean = 0.0;
        for (double v : y) mean += v;
        mean /= static_cast<double>(y.size());
        double ss_tot = 0.0;
        for (double v : y) ss_tot += (v - mean) * (v - mean);
        if (ss_tot > 0.0) rep.r2 = 1.0 - ss_res / ss_tot;
    }
    return rep;
}

SplitIndices split_dataset(std::size_t n, double test_fraction, double train_fraction,
                           std::uint64_t seed) {
    if (!(test_fraction >= 0.0 && test_fraction < 1.0))
        throw invalid_input("split_dataset: test_fraction must be in [0, 1)");
    if (!(train_fraction > 0.0 && train_fraction <= 1.0))
        throw invalid_input("split_dataset: train_fraction must be in (0, 1]");
    if (n == 0) throw invalid_input("split_dataset: empty dataset");

    Rng rng(seed);
    const std::vector<std::size_t> order = rng.permutation(n);
    const std::size_t n_test = static_cast<std::size_t>(std::lround(test_fraction * n));
    const std::size_t avail = n - n_test;
    const std::size_t n_train = static_cast<std::size_t>(std::lround(train_fraction * avail));
    if (n_train == 0 || (test_fraction > 0.0 && n_test == 0))
        throw invalid_input("split_dataset: a split side is empty; adjust fractions");

    SplitIndices s;
    s.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test),
                   order.begin() + static_cast<std::ptrdiff_t>(n_test + n_train));
    return s;
}

} // namespace microdepth
