#pragma once

#include "dgdmn/rng.hpp"
#include "dgdmn/tensor.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dgdmn::num {

// Named parameter map for one network. std::map keeps iteration order
// deterministic, which the seeding and checkpoint formats rely on.
using ParamSet = std::map<std::string, Tensor>;

enum class Activation { linear, relu, sigmoid, softmax };

struct LayerSpec {
    std::size_t in = 0;
    std::size_t out = 0;
    Activation act = Activation::linear;
};

// Fully-connected feedforward stack. Parameter names are "w0","b0","w1","b1",...
// with weight i shaped (out_i, in_i) and bias i shaped (out_i).
struct MlpSpec {
    std::vector<LayerSpec> layers;

    std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().in; }
    std::size_t output_dim() const { return layers.empty() ? 0 : layers.back().out; }

    // Stack of relu hidden layers followed by one output layer.
    static MlpSpec stack(std::size_t input, const std::vector<std::size_t>& hidden,
                         std::size_t output, Activation out_act);
};

// Glorot-uniform weights, zero biases, drawn from the given stream in layer order.
ParamSet init_params(const MlpSpec& spec, Rng& rng);

// --- Forward / backward -----------------------------------------------------

// Activations of the final layer. Softmax rows sum to 1. Throws ShapeError
// naming the layer on any dimension mismatch.
Tensor forward(const ParamSet& params, const MlpSpec& spec, const Tensor& x);

// Dropout configuration used by the learner during training. rate applies to
// every hidden layer output; masks are resampled per batch by the caller.
struct DropoutPlan {
    double rate = 0.0;
    // One mask per hidden layer, shaped like that layer's activation; values
    // are 0 or 1/(1-rate) (inverted dropout).
    std::vector<Tensor> masks;
};

DropoutPlan make_dropout_masks(const MlpSpec& spec, std::size_t batch_rows, double rate,
                               Rng& rng);

// Gradient of the mean cross-entropy over the batch w.r.t. every parameter.
// The final layer must be softmax. Labels are class indices.
// Throws TrainingDiverged if the loss is non-finite.
ParamSet gradients_cross_entropy(const ParamSet& params, const MlpSpec& spec,
                                 const Tensor& x, const std::vector<std::size_t>& labels,
                                 const DropoutPlan* dropout = nullptr,
                                 double* loss_out = nullptr);

// Same, but against full target distributions (rows of `targets`), used for
// soft-label replay. Hard labels are the one-hot special case.
ParamSet gradients_soft_cross_entropy(const ParamSet& params, const MlpSpec& spec,
                                      const Tensor& x, const Tensor& targets,
                                      double* loss_out = nullptr);

// Mean cross-entropy without gradients.
double cross_entropy_loss(const ParamSet& params, const MlpSpec& spec, const Tensor& x,
                          const std::vector<std::size_t>& labels);

// --- Optimizer ---------------------------------------------------------------

struct OptimizerHp {
    double learning_rate = 1e-3;
    double rho = 0.9;
    double epsilon = 1e-8;
    std::optional<double> clipvalue; // elementwise |g| cap, applied first
    std::optional<double> clipnorm;  // global L2 cap over all components
};

struct OptimizerState {
    OptimizerHp hp;
    ParamSet accum; // per-parameter mean-square accumulators

    static OptimizerState create(const ParamSet& params, OptimizerHp hp);
};

// Elementwise clip to |g| <= clipvalue, then rescale so the global L2 norm over
// all components is <= clipnorm. Either limit may be disabled. Idempotent.
ParamSet clip_gradients(ParamSet grads, std::optional<double> clipvalue,
                        std::optional<double> clipnorm);

// v' = rho*v + (1-rho)*g^2 ; p' = p - lr*g/(sqrt(v') + eps), elementwise.
// Clipping from the hyperparameters is applied to the gradients first.
void rmsprop_step(ParamSet& params, const ParamSet& grads, OptimizerState& state);

// --- Small helpers -----------------------------------------------------------

// Throws TrainingDiverged(phase) if any parameter is non-finite.
void check_finite(const ParamSet& params, const std::string& phase);

double global_l2_norm(const ParamSet& grads);

// Low-level layer kernels, shared with the VAE's custom backward pass.
namespace kernel {

// y (n x out) = x (n x in) * W^T + b, with W stored (out, in).
void affine_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y);

// Accumulates dW, db from dpre (n x out); writes dx (n x in) when non-null.
void affine_backward(const Tensor& x, const Tensor& w, const Tensor& dpre, Tensor& dw,
                     Tensor& db, Tensor* dx);

void apply_activation(Tensor& a, Activation act);

// dpre = dact ⊙ act'(pre), expressed through the post-activation values.
// Softmax is only available fused with cross-entropy.
void activation_backward_inplace(Tensor& dact, const Tensor& post, Activation act);

} // namespace kernel

} // namespace dgdmn::num
