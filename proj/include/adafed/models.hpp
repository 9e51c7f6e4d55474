#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "adafed/dataset.hpp"
#include "adafed/vec.hpp"

namespace adafed {

// Desk-scale differentiable models with closed-form gradients. Parameters are
// flattened layer-major, row-major within each layer:
//   Linear    : [w (input_dim), b]                       (output_dim == 1)
//   Logistic  : [W (output_dim x input_dim), b (output_dim)]
//   Mlp2      : [W1 (hidden x input), b1, W2 (out x hidden), b2]
//   Quadratic : [theta (input_dim)]  test model, f = mean_i 1/2 ||theta - x_i||^2
//
// Quadratic exists so that the smoothness constant is known exactly (L = 1
// with l2_reg = 0); the step-size and descent checks are built on it.
enum class ModelKind { Linear, Logistic, Mlp2, Quadratic };

struct ModelSpec {
    ModelKind kind = ModelKind::Logistic;
    int input_dim = 1;
    int output_dim = 1;
    int hidden_dim = 1;  // Mlp2 only
    double l2_reg = 0.0;
};

bool is_classifier(ModelKind kind);
int param_count(const ModelSpec& spec);

// Uniform(-s, s) entries with s = 1/sqrt(fan_in) per layer; deterministic in seed.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Mean loss over the dataset plus (l2_reg/2)*||params||^2. MSE for Linear,
// cross-entropy for Logistic/Mlp2, mean squared distance to rows for Quadratic.
double loss(const ModelSpec& spec, const ParamVector& params, const Dataset& data);

// Exact analytic gradient of loss().
ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& data);

// Loss/gradient restricted to a subset of sample indices (minibatch path).
double loss_on(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
               std::span<const int> indices);
ParamVector gradient_on(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
                        std::span<const int> indices);

// Fraction of argmax-correct predictions; ties resolve to the lowest class
// index. Classification kinds only.
double accuracy(const ModelSpec& spec, const ParamVector& params, const Dataset& data);

// Central finite differences of loss(), for gradient verification.
ParamVector fd_gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
                        double step = 1e-6);

void validate_params(const ModelSpec& spec, const ParamVector& params);

}  // namespace adafed
