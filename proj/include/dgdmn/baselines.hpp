#pragma once

#include "dgdmn/dgm.hpp"
#include "dgdmn/learner.hpp"

#include <vector>

namespace dgdmn {

// A sequential stream of task batches.
using TaskStream = std::vector<LabeledBatch>;

// --- Pseudopattern rehearsal --------------------------------------------------

// Replay memory of random inputs and the network's soft outputs on them.
struct PprMemory {
    std::size_t capacity = 0;
    Tensor inputs{std::vector<std::size_t>{0, 0}};
    Tensor soft_labels{std::vector<std::size_t>{0, 0}};

    std::size_t size() const { return inputs.rows(); }
};

// Refills the memory remainder (capacity - |x|, when positive) with uniform
// random inputs labeled by the current network's softmax outputs, then trains
// on the task samples plus the replayed pseudopatterns.
void ppr_train_task(LearnerParams& lp, PprMemory& mem, const Tensor& x,
                    const std::vector<std::size_t>& y, std::size_t epochs,
                    const num::OptimizerHp& hp, Rng& rng, std::size_t batch_size = 128);

// --- Elastic weight consolidation ----------------------------------------------

struct EwcAnchor {
    num::ParamSet theta_star;
    num::ParamSet fisher; // diagonal estimate, componentwise >= 0
};

struct EwcState {
    double lambda = 100.0;
    std::vector<EwcAnchor> anchors; // one per completed task
};

// (lambda/2) * sum over anchors and components of F * (theta - theta*)^2.
double ewc_penalty(const num::ParamSet& params, const EwcState& ewc);
num::ParamSet ewc_penalty_gradients(const num::ParamSet& params, const EwcState& ewc);

// Trains on cross-entropy plus the quadratic penality anchored at every
// completed task, then appends a new anchor with the diagonal Fisher estimate
// (mean squared gradient of the log-probability of the predicted class).
void ewc_train_task(LearnerParams& lp, EwcState& ewc, const Tensor& x,
                    const std::vector<std::size_t>& y, std::size_t epochs,
                    const num::OptimizerHp& hp, Rng& rng, std::size_t batch_size = 128);

// --- Plain sequential drivers ---------------------------------------------------

// Trains the learner on each task in order, 6 epochs each, no mitigation.
// The reference point for catastrophic forgetting.
void nn_sequential_train(LearnerParams& lp, const TaskStream& stream,
                         std::size_t epochs_per_task, const num::OptimizerHp& hp, Rng& rng);

// One generative-replay consolidation per incoming task on a single memory.
void dgr_sequential_train(DgmState& dgm, const TaskStream& stream, Rng& rng,
                          const DgmTrainConfig& cfg);

} // namespace dgdmn
