#include "byrdie/model.hpp"

#include <algorithm>
#include <cmath>

#include "byrdie/errors.hpp"

namespace byrdie {

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "square") return LossKind::Square;
    if (name == "square_hinge") return LossKind::SquareHinge;
    if (name == "logistic") return LossKind::Logistic;
    if (name == "mlp") return LossKind::MlpSoftmax;
    throw ConfigError("unknown loss kind: " + name);
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Square: return "square";
        case LossKind::SquareHinge: return "square_hinge";
        case LossKind::Logistic: return "logistic";
        case LossKind::MlpSoftmax: return "mlp";
    }
    return "?";
}

int MlpSpec::param_count() const {
    int total = 0;
    for (std::size_t l = 1; l < layers.size(); ++l)
        total += layers[l] * (layers[l - 1] + 1);
    return total;
}

void MlpSpec::validate() const {
    if (layers.size() < 2) throw ConfigError("MLP needs at least input and output layers");
    for (int n : layers)
        if (n < 1) throw ConfigError("MLP layer sizes must be positive");
}

int LossModel::param_dim(int feature_dim) const {
    if (kind == LossKind::MlpSoftmax) {
        mlp.validate();
        if (feature_dim != mlp.layers.front())
            throw ConfigError("feature dimension " + std::to_string(feature_dim) +
                              " does not match MLP input layer " +
                              std::to_string(mlp.layers.front()));
        return mlp.param_count();
    }
    return feature_dim;
}

namespace {

void check_dims(const LossModel& model, const std::vector<double>& w,
                std::span<const Sample> shard) {
    if (shard.empty()) throw ConfigError("empty shard");
    int fdim = static_cast<int>(shard.front().x.size());
    if (static_cast<int>(w.size()) != model.param_dim(fdim))
        throw ConfigError("parameter dimension " + std::to_string(w.size()) +
                          " does not match model dimension " +
                          std::to_string(model.param_dim(fdim)));
}

double dot(const std::vector<double>& w, const std::vector<double>& x) {
    double s = 0;
    for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * x[k];
    return s;
}

// Loss value for a linear kind at margin m = w.x.
double linear_loss(LossKind kind, double y, double m) {
    const double z = y * m;
    switch (kind) {
        case LossKind::Square: {
            double d = 1.0 - z;
            return d * d;
        }
        case LossKind::SquareHinge: {
            double d = std::max(0.0, 1.0 - z);
            return d * d;
        }
        case LossKind::Logistic:
            // log(1 + e^{-z}) computed without overflow
            return z >= 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
        default:
            throw UnsupportedKind("not a linear loss kind");
    }
}

// d loss / d margin for a linear kind; the square-hinge kink contributes 0.
double linear_dmargin(LossKind kind, double y, double m) {
    const double z = y * m;
    switch (kind) {
        case LossKind::Square:
            return -2.0 * y * (1.0 - z);
        case LossKind::SquareHinge:
            return -2.0 * y * std::max(0.0, 1.0 - z);
        case LossKind::Logistic:
            // -y * sigma(-z)
            return z >= 0 ? -y * std::exp(-z) / (1.0 + std::exp(-z)) : -y / (1.0 + std::exp(z));
        default:
            throw UnsupportedKind("not a linear loss kind");
    }
}

struct MlpWorkspace {
    std::vector<std::vector<double>> act;    // act[0] = input, act[L-1] = probabilities
    std::vector<std::vector<double>> preact; // pre-activation per non-input layer
};

// Forward pass; fills probabilities into ws.act.back(). Returns the sample loss.
double mlp_forward(const MlpSpec& spec, const std::vector<double>& w, const Sample& s,
                   MlpWorkspace& ws) {
    const std::size_t L = spec.layers.size();
    ws.act.resize(L);
    ws.preact.resize(L);
    ws.act[0] = s.x;
    std::size_t off = 0;
    for (std::size_t l = 1; l < L; ++l) {
        const int in = spec.layers[l - 1];
        const int out = spec.layers[l];
        auto& z = ws.preact[l];
        z.assign(static_cast<std::size_t>(out), 0.0);
        for (int o = 0; o < out; ++o) {
            double acc = 0;
            const std::size_t row = off + static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
            for (int i = 0; i < in; ++i)
                acc += w[row + static_cast<std::size_t>(i)] * ws.act[l - 1][static_cast<std::size_t>(i)];
            acc += w[off + static_cast<std::size_t>(out) * static_cast<std::size_t>(in) +
                     static_cast<std::size_t>(o)]; // bias
            z[static_cast<std::size_t>(o)] = acc;
        }
        off += static_cast<std::size_t>(out) * static_cast<std::size_t>(in + 1);
        auto& a = ws.act[l];
        a = z;
        if (l + 1 < L) {
            for (double& v : a) v = std::max(0.0, v); // ReLU, subgradient 0 at the kink
        } else {
            double mx = *std::max_element(a.begin(), a.end());
            double sum = 0;
            for (double& v : a) {
                v = std::exp(v - mx);
                sum += v;
            }
            for (double& v : a) v /= sum;
        }
    }
    const int cls = class_of(s.y, spec.layers.back());
    double p = ws.act[L - 1][static_cast<std::size_t>(cls)];
    return -std::log(std::max(p, 1e-300));
}

// Accumulates d loss / d w for one sample into gw (no regularizer, no mean).
void mlp_backward(const MlpSpec& spec, const std::vector<double>& w, const Sample& s,
                  MlpWorkspace& ws, std::vector<double>& gw) {
    const std::size_t L = spec.layers.size();
    const int cls = class_of(s.y, spec.layers.back());
    std::vector<double> delta = ws.act[L - 1]; // softmax + cross entropy
    delta[static_cast<std::size_t>(cls)] -= 1.0;

    // Offsets of each layer's weight block.
    std::vector<std::size_t> offs(L, 0);
    for (std::size_t l = 2; l < L; ++l)
        offs[l] = offs[l - 1] + static_cast<std::size_t>(spec.layers[l - 1]) *
                                    static_cast<std::size_t>(spec.layers[l - 2] + 1);

    for (std::size_t l = L - 1; l >= 1; --l) {
        const int in = spec.layers[l - 1];
        const int out = spec.layers[l];
        const std::size_t off = offs[l];
        for (int o = 0; o < out; ++o) {
            const double d = delta[static_cast<std::size_t>(o)];
            const std::size_t row = off + static_cast<std::size_t>(o) * static_cast<std::size_t>(in);
            for (int i = 0; i < in; ++i)
                gw[row + static_cast<std::size_t>(i)] += d * ws.act[l - 1][static_cast<std::size_t>(i)];
            gw[off + static_cast<std::size_t>(out) * static_cast<std::size_t>(in) +
               static_cast<std::size_t>(o)] += d;
        }
        if (l == 1) break;
        std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
        for (int i = 0; i < in; ++i) {
            double acc = 0;
            for (int o = 0; o < out; ++o)
                acc += delta[static_cast<std::size_t>(o)] *
                       w[off + static_cast<std::size_t>(o) * static_cast<std::size_t>(in) +
                         static_cast<std::size_t>(i)];
            // ReLU gate of the previous layer
            prev[static_cast<std::size_t>(i)] =
                ws.preact[l - 1][static_cast<std::size_t>(i)] > 0 ? acc : 0.0;
        }
        delta = std::move(prev);
    }
}

} // namespace

double risk(const LossModel& model, const std::vector<double>& w, std::span<const Sample> shard) {
    check_dims(model, w, shard);
    double acc = 0;
    if (model.kind == LossKind::MlpSoftmax) {
        MlpWorkspace ws;
        for (const auto& s : shard) acc += mlp_forward(model.mlp, w, s, ws);
    } else {
        for (const auto& s : shard) acc += linear_loss(model.kind, s.y, dot(w, s.x));
    }
    double reg = 0;
    for (double v : w) reg += v * v;
    return acc / static_cast<double>(shard.size()) + 0.5 * model.lambda * reg;
}

std::vector<double> gradient(const LossModel& model, const std::vector<double>& w,
                             std::span<const Sample> shard) {
    check_dims(model, w, shard);
    std::vector<double> g(w.size(), 0.0);
    if (model.kind == LossKind::MlpSoftmax) {
        MlpWorkspace ws;
        for (const auto& s : shard) {
            mlp_forward(model.mlp, w, s, ws);
            mlp_backward(model.mlp, w, s, ws, g);
        }
    } else {
        for (const auto& s : shard) {
            const double d = linear_dmargin(model.kind, s.y, dot(w, s.x));
            for (std::size_t k = 0; k < w.size(); ++k) g[k] += d * s.x[k];
        }
    }
    const double n = static_cast<double>(shard.size());
    for (std::size_t k = 0; k < w.size(); ++k) g[k] = g[k] / n + model.lambda * w[k];
    return g;
}

double coord_gradient(const LossModel& model, const std::vector<double>& w,
                      std::span<const Sample> shard, int k) {
    check_dims(model, w, shard);
    if (k < 0 || k >= static_cast<int>(w.size()))
        throw ConfigError("coordinate index out of range");
    if (model.kind == LossKind::MlpSoftmax)
        return gradient(model, w, shard)[static_cast<std::size_t>(k)];
    double acc = 0;
    for (const auto& s : shard)
        acc += linear_dmargin(model.kind, s.y, dot(w, s.x)) * s.x[static_cast<std::size_t>(k)];
    return acc / static_cast<double>(shard.size()) + model.lambda * w[static_cast<std::size_t>(k)];
}

double estimate_lipschitz(const LossModel& model, const Dataset& ds) {
    const double B = ds.norm_bound;
    switch (model.kind) {
        case LossKind::Square:
        case LossKind::SquareHinge:
            return 2.0 * B * B + model.lambda;
        case LossKind::Logistic:
            return B * B / 4.0 + model.lambda;
        case LossKind::MlpSoftmax:
            throw UnsupportedKind("no closed-form Lipschitz bound for the MLP");
    }
    throw UnsupportedKind("unknown loss kind");
}

double predict(const LossModel& model, const std::vector<double>& w, const Sample& s) {
    if (model.kind == LossKind::MlpSoftmax) {
        MlpWorkspace ws;
        mlp_forward(model.mlp, w, s, ws);
        const auto& p = ws.act.back();
        int best = 0;
        for (int c = 1; c < static_cast<int>(p.size()); ++c)
            if (p[static_cast<std::size_t>(c)] > p[static_cast<std::size_t>(best)]) best = c;
        return best;
    }
    return dot(w, s.x) >= 0 ? 1.0 : -1.0;
}

std::vector<double> mlp_init_vector(const MlpSpec& spec, double sigma, double hidden_bias,
                                    Rng& rng) {
    spec.validate();
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(spec.param_count()));
    const std::size_t L = spec.layers.size();
    for (std::size_t l = 1; l < L; ++l) {
        const int in = spec.layers[l - 1];
        const int out = spec.layers[l];
        for (int i = 0; i < out * in; ++i) w.push_back(sigma * rng.normal());
        const double bias = (l + 1 < L) ? hidden_bias : 0.0;
        for (int o = 0; o < out; ++o) w.push_back(bias);
    }
    return w;
}

double accuracy(const LossModel& model, const std::vector<double>& w,
                std::span<const Sample> samples) {
    if (samples.empty()) throw ConfigError("accuracy over empty sample set");
    long correct = 0;
    if (model.kind == LossKind::MlpSoftmax) {
        const int K = model.mlp.layers.back();
        for (const auto& s : samples)
            if (static_cast<int>(predict(model, w, s)) == class_of(s.y, K)) ++correct;
    } else {
        for (const auto& s : samples)
            if (predict(model, w, s) == s.y) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

} // namespace byrdie
