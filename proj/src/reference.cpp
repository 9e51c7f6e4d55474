#include "adafed/reference.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace adafed::ref {
namespace {

std::vector<double> forward_logits(const ModelSpec& spec, const ParamVector& params,
                                   const Dataset& data, int i) {
    std::vector<double> z(static_cast<std::size_t>(spec.output_dim), 0.0);
    if (spec.kind == ModelKind::Logistic) {
        for (int c = 0; c < spec.output_dim; ++c) {
            double acc = 0.0;
            for (int j = 0; j < spec.input_dim; ++j)
                acc += params[static_cast<std::size_t>(c * spec.input_dim + j)] *
                       data.features[static_cast<std::size_t>(i) * spec.input_dim + j];
            z[static_cast<std::size_t>(c)] =
                acc + params[static_cast<std::size_t>(spec.output_dim * spec.input_dim + c)];
        }
        return z;
    }
    if (spec.kind == ModelKind::Mlp2) {
        const int D = spec.input_dim, H = spec.hidden_dim, C = spec.output_dim;
        std::vector<double> h(static_cast<std::size_t>(H));
        for (int j = 0; j < H; ++j) {
            double acc = params[static_cast<std::size_t>(H * D + j)];
            for (int k = 0; k < D; ++k)
                acc += params[static_cast<std::size_t>(j * D + k)] *
                       data.features[static_cast<std::size_t>(i) * D + k];
            h[static_cast<std::size_t>(j)] = std::tanh(acc);
        }
        const std::size_t w2 = static_cast<std::size_t>(H * D + H);
        for (int c = 0; c < C; ++c) {
            double acc = params[w2 + static_cast<std::size_t>(C * H) + c];
            for (int j = 0; j < H; ++j)
                acc += params[w2 + static_cast<std::size_t>(c * H + j)] * h[static_cast<std::size_t>(j)];
            z[static_cast<std::size_t>(c)] = acc;
        }
        return z;
    }
    throw std::invalid_argument("forward_logits: not a classifier");
}

double cross_entropy(const std::vector<double>& z, int y) {
    double zmax = z[0];
    for (double v : z)
        if (v > zmax) zmax = v;
    double total = 0.0;
    for (double v : z) total += std::exp(v - zmax);
    return zmax + std::log(total) - z[static_cast<std::size_t>(y)];
}

}  // namespace

double loss(const ModelSpec& spec, const ParamVector& params, const Dataset& data) {
    const int n = data.size();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        switch (spec.kind) {
            case ModelKind::Linear: {
                double pred = params[static_cast<std::size_t>(spec.input_dim)];
                for (int j = 0; j < spec.input_dim; ++j)
                    pred += params[static_cast<std::size_t>(j)] *
                            data.features[static_cast<std::size_t>(i) * spec.input_dim + j];
                const double e = pred - data.labels[static_cast<std::size_t>(i)];
                acc += e * e;
                break;
            }
            case ModelKind::Logistic:
            case ModelKind::Mlp2:
                acc += cross_entropy(forward_logits(spec, params, data, i),
                                     static_cast<int>(data.labels[static_cast<std::size_t>(i)]));
                break;
            case ModelKind::Quadratic: {
                for (int j = 0; j < spec.input_dim; ++j) {
                    const double diff =
                        params[static_cast<std::size_t>(j)] -
                        data.features[static_cast<std::size_t>(i) * spec.input_dim + j];
                    acc += 0.5 * diff * diff;
                }
                break;
            }
        }
    }
    double reg = 0.0;
    for (double v : params) reg += v * v;
    return acc / n + 0.5 * spec.l2_reg * reg;
}

ParamVector gradient(const ModelSpec& spec, const ParamVector& params, const Dataset& data) {
    // Forward-difference-free analytic gradient, one sample at a time.
    const int n = data.size();
    ParamVector g(params.size(), 0.0);
    for (int i = 0; i < n; ++i) {
        switch (spec.kind) {
            case ModelKind::Linear: {
                double pred = params[static_cast<std::size_t>(spec.input_dim)];
                for (int j = 0; j < spec.input_dim; ++j)
                    pred += params[static_cast<std::size_t>(j)] *
                            data.features[static_cast<std::size_t>(i) * spec.input_dim + j];
                const double e = 2.0 * (pred - data.labels[static_cast<std::size_t>(i)]);
                for (int j = 0; j < spec.input_dim; ++j)
                    g[static_cast<std::size_t>(j)] +=
                        e * data.features[static_cast<std::size_t>(i) * spec.input_dim + j];
                g[static_cast<std::size_t>(spec.input_dim)] += e;
                break;
            }
            case ModelKind::Logistic: {
                const int C = spec.output_dim, D = spec.input_dim;
                auto z = forward_logits(spec, params, data, i);
                double zmax = z[0];
                for (double v : z)
                    if (v > zmax) zmax = v;
                double total = 0.0;
                for (double v : z) total += std::exp(v - zmax);
                const int y = static_cast<int>(data.labels[static_cast<std::size_t>(i)]);
                for (int c = 0; c < C; ++c) {
                    double dz = std::exp(z[static_cast<std::size_t>(c)] - zmax) / total;
                    if (c == y) dz -= 1.0;
                    for (int j = 0; j < D; ++j)
                        g[static_cast<std::size_t>(c * D + j)] +=
                            dz * data.features[static_cast<std::size_t>(i) * D + j];
                    g[static_cast<std::size_t>(C * D + c)] += dz;
                }
                break;
            }
            case ModelKind::Mlp2: {
                const int D = spec.input_dim, H = spec.hidden_dim, C = spec.output_dim;
                std::vector<double> h(static_cast<std::size_t>(H));
                for (int j = 0; j < H; ++j) {
                    double acc = params[static_cast<std::size_t>(H * D + j)];
                    for (int k = 0; k < D; ++k)
                        acc += params[static_cast<std::size_t>(j * D + k)] *
                               data.features[static_cast<std::size_t>(i) * D + k];
                    h[static_cast<std::size_t>(j)] = std::tanh(acc);
                }
                const std::size_t w2 = static_cast<std::size_t>(H * D + H);
                std::vector<double> z(static_cast<std::size_t>(C));
                for (int c = 0; c < C; ++c) {
                    double acc = params[w2 + static_cast<std::size_t>(C * H) + c];
                    for (int j = 0; j < H; ++j)
                        acc += params[w2 + static_cast<std::size_t>(c * H + j)] *
                               h[static_cast<std::size_t>(j)];
                    z[static_cast<std::size_t>(c)] = acc;
                }
                double zmax = z[0];
                for (double v : z)
                    if (v > zmax) zmax = v;
                double total = 0.0;
                for (double v : z) total += std::exp(v - zmax);
                const int y = static_cast<int>(data.labels[static_cast<std::size_t>(i)]);
                std::vector<double> dz(static_cast<std::size_t>(C));
                for (int c = 0; c < C; ++c) {
                    dz[static_cast<std::size_t>(c)] =
                        std::exp(z[static_cast<std::size_t>(c)] - zmax) / total;
                    if (c == y) dz[static_cast<std::size_t>(c)] -= 1.0;
                }
                for (int c = 0; c < C; ++c) {
                    for (int j = 0; j < H; ++j)
                        g[w2 + static_cast<std::size_t>(c * H + j)] +=
                            dz[static_cast<std::size_t>(c)] * h[static_cast<std::size_t>(j)];
                    g[w2 + static_cast<std::size_t>(C * H) + c] += dz[static_cast<std::size_t>(c)];
                }
                for (int j = 0; j < H; ++j) {
                    double dh = 0.0;
                    for (int c = 0; c < C; ++c)
                        dh += dz[static_cast<std::size_t>(c)] *
                              params[w2 + static_cast<std::size_t>(c * H + j)];
                    const double da =
                        dh * (1.0 - h[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)]);
                    for (int k = 0; k < D; ++k)
                        g[static_cast<std::size_t>(j * D + k)] +=
                            da * data.features[static_cast<std::size_t>(i) * D + k];
                    g[static_cast<std::size_t>(H * D + j)] += da;
                }
                break;
            }
            case ModelKind::Quadratic:
                for (int j = 0; j < spec.input_dim; ++j)
                    g[static_cast<std::size_t>(j)] +=
                        params[static_cast<std::size_t>(j)] -
                        data.features[static_cast<std::size_t>(i) * spec.input_dim + j];
                break;
        }
    }
    for (double& v : g) v /= n;
    for (std::size_t j = 0; j < g.size(); ++j) g[j] += spec.l2_reg * params[j];
    return g;
}

double accuracy(const ModelSpec& spec, const ParamVector& params, const Dataset& data) {
    const int n = data.size();
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        auto z = forward_logits(spec, params, data, i);
        int best = 0;
        for (int c = 1; c < spec.output_dim; ++c)
            if (z[static_cast<std::size_t>(c)] > z[static_cast<std::size_t>(best)]) best = c;
        if (best == static_cast<int>(data.labels[static_cast<std::size_t>(i)])) ++hits;
    }
    return static_cast<double>(hits) / n;
}

}  // namespace adafed::ref
