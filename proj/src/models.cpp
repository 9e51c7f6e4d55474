#include "adafed/models.hpp"

#include "adafed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace adafed {
namespace {

// Block size for the deterministic sample reduction. Per-block partial sums
// are combined serially in block order, so results are bit-identical for any
// thread count. Changing this constant changes the rounding of the combine.
constexpr int kReduceBlock = 256;

struct Scratch {
    std::vector<double> logits;
    std::vector<double> hidden;
};

Scratch make_scratch(const ModelSpec& spec) {
    Scratch s;
    s.logits.resize(static_cast<std::size_t>(std::max(spec.output_dim, 1)));
    if (spec.kind == ModelKind::Mlp2)
        s.hidden.resize(static_cast<std::size_t>(spec.hidden_dim));
    return s;
}

int class_label(const Dataset& data, int i, int num_classes) {
    const double raw = data.labels[static_cast<std::size_t>(i)];
    const int c = static_cast<int>(raw);
    if (c < 0 || c >= num_classes || static_cast<double>(c) != raw)
        throw std::invalid_argument("class label out of range");
    return c;
}

// log(sum exp(z)) with max subtraction; fills p with softmax(z) when p != nullptr.
double log_sum_exp(std::span<const double> z, double* p) {
    double zmax = z[0];
    for (double v : z) zmax = std::max(zmax, v);
    double total = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) total += std::exp(z[c] - zmax);
    const double lse = zmax + std::log(total);
    if (p != nullptr)
        for (std::size_t c = 0; c < z.size(); ++c) p[c] = std::exp(z[c] - lse);
    return lse;
}

void logistic_forward(const ModelSpec& spec, const ParamVector& params,
                      std::span<const double> x, std::span<double> z) {
    const int C = spec.output_dim;
    const int D = spec.input_dim;
    const double* W = params.data();
    const double* b = params.data() + static_cast<std::size_t>(C) * D;
    for (int c = 0; c < C; ++c)
        z[static_cast<std::size_t>(c)] =
            dot({W + static_cast<std::size_t>(c) * D, static_cast<std::size_t>(D)}, x) + b[c];
}

void mlp2_forward(const ModelSpec& spec, const ParamVector& params, std::span<const double> x,
                  std::span<double> h, std::span<double> z) {
    const int D = spec.input_dim;
    const int H = spec.hidden_dim;
    const int C = spec.output_dim;
    const double* W1 = params.data();
    const double* b1 = W1 + static_cast<std::size_t>(H) * D;
    const double* W2 = b1 + H;
    const double* b2 = W2 + static_cast<std::size_t>(C) * H;
    for (int j = 0; j < H; ++j)
        h[static_cast<std::size_t>(j)] = std::tanh(
            dot({W1 + static_cast<std::size_t>(j) * D, static_cast<std::size_t>(D)}, x) + b1[j]);
    for (int c = 0; c < C; ++c)
        z[static_cast<std::size_t>(c)] =
            dot({W2 + static_cast<std::size_t>(c) * H, static_cast<std::size_t>(H)},
                std::span<const double>(h.data(), h.size())) +
            b2[c];
}

double sample_loss(const ModelSpec& spec, const ParamVector& params, const Dataset& data, int i,
                   Scratch& s) {
    const auto x = data.row(i);
    switch (spec.kind) {
        case ModelKind::Linear: {
            const double pred =
                dot({params.data(), static_cast<std::size_t>(spec.input_dim)}, x) + params.back();
            const double err = pred - data.labels[static_cast<std::size_t>(i)];
            return err * err;
        }
        case ModelKind::Logistic: {
            logistic_forward(spec, params, x, s.logits);
            const int y = class_label(data, i, spec.output_dim);
            return log_sum_exp(s.logits, nullptr) - s.logits[static_cast<std::size_t>(y)];
        }
        case ModelKind::Mlp2: {
            mlp2_forward(spec, params, x, s.hidden, s.logits);
            const int y = class_label(data, i, spec.output_dim);
            return log_sum_exp(s.logits, nullptr) - s.logits[static_cast<std::size_t>(y)];
        }
        case ModelKind::Quadratic: {
            double acc = 0.0;
            for (int j = 0; j < spec.input_dim; ++j) {
                const double diff = params[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)];
                acc += diff * diff;
            }
            return 0.5 * acc;
        }
    }
    throw std::logic_error("unreachable model kind");
}

// Adds the gradient of sample i's loss into grad.
void sample_grad(const ModelSpec& spec, const ParamVector& params, const Dataset& data, int i,
                 Scratch& s, double* grad) {
    const auto x = data.row(i);
    const int D = spec.input_dim;
    switch (spec.kind) {
        case ModelKind::Linear: {
            const double pred =
                dot({params.data(), static_cast<std::size_t>(D)}, x) + params.back();
            const double g = 2.0 * (pred - data.labels[static_cast<std::size_t>(i)]);
            for (int j = 0; j < D; ++j) grad[j] += g * x[static_cast<std::size_t>(j)];
            grad[D] += g;
            return;
        }
        case ModelKind::Logistic: {
            const int C = spec.output_dim;
            logistic_forward(spec, params, x, s.logits);
            log_sum_exp(s.logits, s.logits.data());  // logits now hold softmax probs
            const int y = class_label(data, i, C);
            s.logits[static_cast<std::size_t>(y)] -= 1.0;
            double* gW = grad;
            double* gb = grad + static_cast<std::size_t>(C) * D;
            for (int c = 0; c < C; ++c) {
                const double dz = s.logits[static_cast<std::size_t>(c)];
                for (int j = 0; j < D; ++j)
                    gW[static_cast<std::size_t>(c) * D + j] += dz * x[static_cast<std::size_t>(j)];
                gb[c] += dz;
            }
            return;
        }
        case ModelKind::Mlp2: {
            const int H = spec.hidden_dim;
            const int C = spec.output_dim;
            mlp2_forward(spec, params, x, s.hidden, s.logits);
            log_sum_exp(s.logits, s.logits.data());
            const int y = class_label(data, i, C);
            s.logits[static_cast<std::size_t>(y)] -= 1.0;
            const double* W2 = params.data() + static_cast<std::size_t>(H) * D + H;
            double* gW1 = grad;
            double* gb1 = grad + static_cast<std::size_t>(H) * D;
            double* gW2 = gb1 + H;
            double* gb2 = gW2 + static_cast<std::size_t>(C) * H;
            for (int c = 0; c < C; ++c) {
                const double dz = s.logits[static_cast<std::size_t>(c)];
                for (int j = 0; j < H; ++j)
                    gW2[static_cast<std::size_t>(c) * H + j] += dz * s.hidden[static_cast<std::size_t>(j)];
                gb2[c] += dz;
            }
            for (int j = 0; j < H; ++j) {
                double dh = 0.0;
                for (int c = 0; c < C; ++c)
                    dh += s.logits[static_cast<std::size_t>(c)] * W2[static_cast<std::size_t>(c) * H + j];
                const double hj = s.hidden[static_cast<std::size_t>(j)];
                const double da = dh * (1.0 - hj * hj);
                for (int k = 0; k < D; ++k)
                    gW1[static_cast<std::size_t>(j) * D + k] += da * x[static_cast<std::size_t>(k)];
                gb1[j] += da;
            }
            return;
        }
        case ModelKind::Quadratic: {
            for (int j = 0; j < D; ++j)
                grad[j] += params[static_cast<std::size_t>(j)] - x[static_cast<std::size_t>(j)];
            return;
        }
    }
}

void validate_data(const ModelSpec& spec, const Dataset& data) {
    if (data.size() < 1) throw std::invalid_argument("dataset is empty");
    if (data.feature_dim != spec.input_dim)
        throw std::invalid_argument("dataset feature_dim does not match model input_dim");
}

}  // namespace

bool is_classifier(ModelKind kind) {
    return kind == ModelKind::Logistic || kind == ModelKind::Mlp2;
}

int param_count(const ModelSpec& spec) {
    switch (spec.kind) {
        case ModelKind::Linear:
            return spec.input_dim + 1;
        case ModelKind::Logistic:
            return spec.output_dim * spec.input_dim + spec.output_dim;
        case ModelKind::Mlp2:
            return spec.hidden_dim * spec.input_dim + spec.hidden_dim +
                   spec.output_dim * spec.hidden_dim + spec.output_dim;
        case ModelKind::Quadratic:
            return spec.input_dim;
    }
    throw std::logic_error("unreachable model kind");
}

void validate_params(const ModelSpec& spec, const ParamVector& params) {
    if (static_cast<int>(params.size()) != param_count(spec))
        throw std::invalid_argument("parameter vector length does not match model spec");
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x1417));
    ParamVector p(static_cast<std::size_t>(param_count(spec)));
    const double s_in = 1.0 / std::sqrt(static_cast<double>(spec.input_dim));
    if (spec.kind == ModelKind::Mlp2) {
        const double s_hid = 1.0 / std::sqrt(static_cast<double>(spec.hidden_dim));
        const std::size_t layer1 = static_cast<std::size_t>(spec.hidden_dim) * spec.input_dim +
                                   static_cast<std::size_t>(spec.hidden_dim);
        for (std::size_t i = 0; i < p.size(); ++i)
            p[i] = rng.uniform(-1.0, 1.0) * (i < layer1 ? s_in : s_hid);
    } else {
        for (double& v : p) v = rng.uniform(-s_in, s_in);
    }
    return p;
}

double loss(const ModelSpec& spec, const ParamVector& params, const Dataset& data) {
    validate_params(spec, params);
    validate_data(spec, data);
    const int n = data.size();
    const int nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(static_cast<std::size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nblocks; ++b) {
        Scratch s = make_scratch(spec);
        const int lo = b * kReduceBlock;
        const int hi = std::min(n, lo + kReduceBlock);
        double acc = 0.0;
        for (int i = lo; i < hi; ++i) acc += sample_loss(spec, params, data, i, s);
        partial[static_cast<std::size_t>(b)] = acc;
    }
    double total = 0.0;
    for (double v : partial) total += v;  // fixed combine order
    return total / n + 0.5 * spec.l2_reg * squared_norm(params);
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& data) {
    validate_params(spec, params);
    validate_data(spec, data);
    const int n = data.size();
    const int d = param_count(spec);
    const int nblocks = (n + kReduceBlock - 1) / kReduceBlock;
    std::vector<double> partial(static_cast<std::size_t>(nblocks) * d, 0.0);
#pragma omp parallel for schedule(static)
    for (int b = 0; b < nblocks; ++b) {
        Scratch s = make_scratch(spec);
        const int lo = b * kReduceBlock;
        const int hi = std::min(n, lo + kReduceBlock);
        double* acc = partial.data() + static_cast<std::size_t>(b) * d;
        for (int i = lo; i < hi; ++i) sample_grad(spec, params, data, i, s, acc);
    }
    ParamVector grad(static_cast<std::size_t>(d), 0.0);
    for (int b = 0; b < nblocks; ++b)
        axpy(1.0, {partial.data() + static_cast<std::size_t>(b) * d, static_cast<std::size_t>(d)},
             grad);
    scale_inplace(grad, 1.0 / n);
    if (spec.l2_reg != 0.0) axpy(spec.l2_reg, params, grad);
    return grad;
}

double loss_on(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
               std::span<const int> indices) {
    validate_params(spec, params);
    validate_data(spec, data);
    if (indices.empty()) throw std::invalid_argument("loss_on: empty index set");
    Scratch s = make_scratch(spec);
    double acc = 0.0;
    for (int i : indices) acc += sample_loss(spec, params, data, i, s);
    return acc / static_cast<double>(indices.size()) + 0.5 * spec.l2_reg * squared_norm(params);
}

ParamVector gradient_on(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
                        std::span<const int> indices) {
    validate_params(spec, params);
    validate_data(spec, data);
    if (indices.empty()) throw std::invalid_argument("gradient_on: empty index set");
    Scratch s = make_scratch(spec);
    ParamVector grad(params.size(), 0.0);
    for (int i : indices) sample_grad(spec, params, data, i, s, grad.data());
    scale_inplace(grad, 1.0 / static_cast<double>(indices.size()));
    if (spec.l2_reg != 0.0) axpy(spec.l2_reg, params, grad);
    return grad;
}

double accuracy(const ModelSpec& spec, const ParamVector& params, const Dataset& data) {
    if (!is_classifier(spec.kind))
        throw std::invalid_argument("accuracy requires a classification model");
    validate_params(spec, params);
    validate_data(spec, data);
    const int n = data.size();
    Scratch s = make_scratch(spec);
    int correct = 0;
    for (int i = 0; i < n; ++i) {
        if (spec.kind == ModelKind::Logistic)
            logistic_forward(spec, params, data.row(i), s.logits);
        else
            mlp2_forward(spec, params, data.row(i), s.hidden, s.logits);
        int best = 0;
        for (int c = 1; c < spec.output_dim; ++c)
            if (s.logits[static_cast<std::size_t>(c)] > s.logits[static_cast<std::size_t>(best)])
                best = c;  // strict >, so ties keep the lowest index
        if (best == class_label(data, i, spec.output_dim)) ++correct;
    }
    return static_cast<double>(correct) / n;
}

ParamVector fd_gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& data,
                        double step) {
    ParamVector probe = params;
    ParamVector out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = probe[i];
        probe[i] = keep + step;
        const double up = loss(spec, probe, data);
        probe[i] = keep - step;
        const double down = loss(spec, probe, data);
        probe[i] = keep;
        out[i] = (up - down) / (2.0 * step);
    }
    return out;
}

}  // namespace adafed
