#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "microdepth/grid.hpp"

namespace microdepth {

// Dense row-major matrix; just enough linear algebra for the regressors.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return a[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return a[r * cols + c]; }
};

// Concatenate [physics || embedding]; an empty embedding means physics-only.
std::vector<double> fuse(const PhysicsFeatureVector& physics,
                         const std::vector<double>& embedding = {});

struct Standardizer {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> flagged; // zero-variance columns: mean := 0, std := 1 (passthrough)
};

Standardizer fit_standardizer(const Matrix& X);
Matrix apply(const Standardizer& s, const Matrix& X);
std::vector<double> apply_row(const Standardizer& s, const std::vector<double>& row);

struct RidgeModel {
    std::vector<double> weights;
    double bias = 0.0;
    double lambda = 0.0;
};

// Minimizes ||Xw + b - y||^2 + lambda ||w||^2, bias unpenalized, via the
// bordered normal equations and a Cholesky solve.
RidgeModel fit_ridge(const Matrix& X, const std::vector<double>& y, double lambda);

std::vector<double> predict(const RidgeModel& m, const Matrix& X);

struct MlpConfig {
    std::vector<int> hidden{64, 32};
    double lr = 1e-3;
    int epochs = 200;
    int batch = 32;
    std::uint64_t seed = 1;
};

// Fully connected scalar regressor with softplus activations, trained by
// mini-batch Adam on mean squared error. Deterministic for a given seed.
struct MlpModel {
    std::vector<int> layers;                       // [in, hidden..., 1]
    std::vector<std::vector<double>> weights;      // per layer, out x in row-major
    std::vector<std::vector<double>> biases;       // per layer, out
};

MlpModel init_mlp(int input_dim, const MlpConfig& cfg);
// epoch_losses, when given, receives the average training loss per epoch.
MlpModel fit_mlp(const Matrix& X, const std::vector<double>& y, const MlpConfig& cfg,
                 std::vector<double>* epoch_losses = nullptr);
std::vector<double> predict(const MlpModel& m, const Matrix& X);

double mlp_loss(const MlpModel& m, const Matrix& X, const std::vector<double>& y);
// Gradients of mlp_loss wrt every weight and bias, same shapes as the model.
void mlp_gradients(const MlpModel& m, const Matrix& X, const std::vector<double>& y,
                   std::vector<std::vector<double>>& grad_w,
                   std::vector<std::vector<double>>& grad_b);

struct EvalReport {
    double mse = 0.0;
    std::optional<double> r2; // absent when Var(y) == 0 or n < 2
    std::size_t n = 0;
    std::vector<double> residuals; // y_hat - y
};

EvalReport evaluate(const std::vector<double>& y_hat, const std::vector<double>& y);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Seeded shuffle, then: first round(n * test_fraction) indices form the
// fixed test set; the training side keeps the first round(train_fraction *
// remaining) indices, so smaller fractions are nested inside larger ones.
SplitIndices split_dataset(std::size_t n, double test_fraction, double train_fraction,
                           std::uint64_t seed);

} // namespace microdepth
