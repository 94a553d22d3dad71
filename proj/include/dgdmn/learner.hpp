#pragma once

#include "dgdmn/numerics.hpp"
#include "dgdmn/rng.hpp"
#include "dgdmn/tensor.hpp"

#include <vector>

namespace dgdmn {

// Feedforward softmax classifier. Doubles as the learner inside each deep
// generative memory and as the NN / DropNN baseline network.
struct LearnerParams {
    num::MlpSpec spec; // hidden relu layers + softmax output
    num::ParamSet params;
    std::size_t num_classes = 0;
    double dropout_rate = 0.0; // per hidden layer; 0 disables
};

LearnerParams learner_init(std::size_t input, const std::vector<std::size_t>& hidden,
                           std::size_t num_classes, double dropout_rate, Rng& rng);

// Mini-batch RMSProp on cross-entropy. Dropout masks are resampled per batch
// when enabled. Epochs may be zero (returns params unchanged). Throws on an
// empty batch and on non-finite parameters after any epoch.
void learner_train(LearnerParams& lp, const Tensor& x, const std::vector<std::size_t>& labels,
                   std::size_t epochs, num::OptimizerState& opt, Rng& rng,
                   std::size_t batch_size = 128);

// Soft-target variant: rows of `targets` are class distributions. Used for
// pseudopattern replay.
void learner_train_soft(LearnerParams& lp, const Tensor& x, const Tensor& targets,
                        std::size_t epochs, num::OptimizerState& opt, Rng& rng,
                        std::size_t batch_size = 128);

// Argmax of softmax per row; ties break to the lowest class index. Dropout is
// disabled at inference.
std::vector<std::size_t> learner_predict(const LearnerParams& lp, const Tensor& x);

// Softmax outputs (n x num_classes).
Tensor learner_probs(const LearnerParams& lp, const Tensor& x);

// Fraction of rows predicted correctly.
double learner_accuracy(const LearnerParams& lp, const Tensor& x,
                        const std::vector<std::size_t>& labels);

} // namespace dgdmn
