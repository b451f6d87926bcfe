#ifndef BYRDIE_MODEL_HPP
#define BYRDIE_MODEL_HPP

#include <span>
#include <string>
#include <vector>

#include "byrdie/dataset.hpp"

namespace byrdie {

enum class LossKind { Square, SquareHinge, Logistic, MlpSoftmax };

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

// Fully connected network: layers[0] inputs, ReLU hidden layers, softmax
// output. Parameters flatten layer-major as [W_1 row-major, b_1, W_2, b_2, ...].
struct MlpSpec {
    std::vector<int> layers;

    int param_count() const;
    void validate() const;
};

// Regularized risk f = mean loss + (lambda/2)||w||^2 over a shard.
struct LossModel {
    LossKind kind = LossKind::SquareHinge;
    double lambda = 0.01;
    MlpSpec mlp{};

    bool is_convex() const { return kind != LossKind::MlpSoftmax; }
    int param_dim(int feature_dim) const;
};

double risk(const LossModel& model, const std::vector<double>& w, std::span<const Sample> shard);

std::vector<double> gradient(const LossModel& model, const std::vector<double>& w,
                             std::span<const Sample> shard);

// k is 0-based; equals gradient(...)[k] to within 1e-12 relative (the linear
// kinds share the accumulation order with the full gradient, the MLP takes the
// k-th component of one reverse-mode pass).
double coord_gradient(const LossModel& model, const std::vector<double>& w,
                      std::span<const Sample> shard, int k);

// Data-dependent upper bound on the gradient Lipschitz constant of the risk;
// convex kinds only. Used for diagnostics and default step scaling.
double estimate_lipschitz(const LossModel& model, const Dataset& ds);

// Binary kinds: sign(w.x) with sign(0) counted as +1. MLP: argmax of the
// output layer, ties to the lowest class index.
double predict(const LossModel& model, const std::vector<double>& w, const Sample& s);
double accuracy(const LossModel& model, const std::vector<double>& w,
                std::span<const Sample> samples);

// Flattened MLP initialization: weights ~ N(0, sigma^2), hidden biases set to
// hidden_bias (keeps ReLU units alive), output biases zero.
std::vector<double> mlp_init_vector(const MlpSpec& spec, double sigma, double hidden_bias,
                                    Rng& rng);

} // namespace byrdie

#endif
