#pragma once

#include "dgdmn/data.hpp"
#include "dgdmn/learner.hpp"
#include "dgdmn/rng.hpp"
#include "dgdmn/vae.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace dgdmn {

// Task descriptors of learnt tasks and how many times each was encountered.
using TaskDictionary = std::map<TaskDescriptor, std::uint64_t>;

// Merge by summing counts for repeated descriptors.
void merge_dictionary(TaskDictionary& into, const TaskDictionary& from);

// The (n_tasks, n_gen) split of a consolidation batch under the capacity
// budget: how many incoming samples to keep and how many samples of previous
// tasks to regenerate.
struct ReplayBudget {
    std::size_t n_tasks = 0;
    std::size_t n_gen = 0;
    std::size_t n_total = 0;
    double eta_tasks = 0.0; // realized incoming fraction n_tasks / n_total
};

// Budget arithmetic. When x_count + age fits within n_max everything is kept;
// otherwise the incoming share is eta = max(kappa, x_count/(x_count+age)) of
// n_max, rounded as floor(eta*n_max + 0.5), with the remainder generated. If
// the rounded share already covers the incoming samples, all of them are kept
// and generation fills the rest of the budget. Throws on x_count == 0.
ReplayBudget compute_budget(std::size_t x_count, std::uint64_t age, std::size_t n_max,
                            double kappa);

// Training configuration shared by every deep generative memory.
struct DgmTrainConfig {
    std::size_t gen_epochs = 25;
    std::size_t learner_epochs = 6;
    std::size_t batch_size = 128;
    num::OptimizerHp gen_opt{1e-3, 0.9, 1e-8, 0.5, 1.0}; // clipvalue 0.5, clipnorm 1.0
    num::OptimizerHp learner_opt{1e-3, 0.9, 1e-8, {}, {}};
    // Continue from previous weights at each consolidation instead of
    // reinitializing.
    bool warm_start = true;
    // Reconstruction-threshold termination for generator training: train in
    // increments of recog_epoch_step up to recog_epoch_cap, stopping early
    // once the normalized reconstruction loss on the incoming batch is below
    // gamma. Used by the descriptor-free variant.
    bool recog_termination = false;
    double recog_gamma = 1.55;
    std::size_t recog_epoch_step = 5;
    std::size_t recog_epoch_cap = 50;
};

// A deep generative memory: generator (VAE), learner (classifier), task
// dictionary, age (samples consolidated so far) and capacity.
struct DgmState {
    VaeParams generator;
    LearnerParams learner;
    TaskDictionary dictionary;
    std::uint64_t age = 0;
    std::size_t n_max = 0;
    double kappa = 0.05;
    // Cumulative samples x epochs consumed by generator training, for the
    // training-cost comparisons.
    std::uint64_t gen_sample_epochs = 0;
};

struct DgmArch {
    std::size_t input = 0;
    std::vector<std::size_t> learner_hidden{48, 48};
    std::size_t num_classes = 0;
    std::vector<std::size_t> vae_enc{128, 64};
    std::size_t vae_latent = 24;
    std::vector<std::size_t> vae_dec{64, 128};

    DgmArch scaled(double f) const; // widths and latent scaled by f, floored at 4
};

DgmState dgm_init(const DgmArch& arch, std::size_t n_max, double kappa, Rng& rng);

// One generative-replay consolidation: budget the batch, subsample incoming
// data if needed, regenerate previous tasks, merge dictionaries, advance age,
// retrain the generator on the union, then train the learner on the
// generator's reconstructions plus the generated samples.
void dgr_update(DgmState& dgm, const Tensor& x, const std::vector<std::size_t>& y,
                const TaskDictionary& d_tasks, Rng& rng, const DgmTrainConfig& cfg);

// Descriptor-free recognition: true iff the mean over the batch of
// recons_loss(x_i) / max(intensity(x_i), 1e-6) is below gamma.
bool recognize(const DgmState& dgm, const Tensor& x, double gamma);

// The mean normalized reconstruction loss used by recognize().
double recognition_loss(const DgmState& dgm, const Tensor& x);

std::vector<std::size_t> dgm_predict(const DgmState& dgm, const Tensor& x);

} // namespace dgdmn
