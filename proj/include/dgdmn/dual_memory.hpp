#pragma once

#include "dgdmn/dgm.hpp"

#include <optional>

namespace dgdmn {

// One short-term task memory: a small DGM dedicated to a single task.
struct SttmSlot {
    DgmState dgm;
    std::optional<TaskDescriptor> assigned_task;
    std::uint64_t trained_sample_count = 0;

    bool assigned() const { return assigned_task.has_value(); }
};

// Dual-memory state: a large long-term memory consolidating all tasks through
// generative replay, fed by a pool of short-term task memories that each hold
// one recent task until the next sleep.
struct DgdmnState {
    DgmState ltm;
    std::vector<SttmSlot> sttm_pool;
    std::size_t n_stm = 0;
    std::uint64_t seed = 0; // root of the init streams
    std::uint64_t sleep_count = 0;
    std::uint64_t alloc_count = 0; // fresh slot allocations, drives init streams
    std::uint64_t anon_count = 0;  // minted descriptor-free task ids
    // Generator samples x epochs spent in slots already cleared by sleep.
    std::uint64_t retired_gen_sample_epochs = 0;

    DgmArch ltm_arch;
    DgmArch sttm_arch;
    DgmTrainConfig ltm_train;
    DgmTrainConfig sttm_train;

    // Descriptor-free recognition thresholds.
    double gamma_sttm = 1.55;
    double gamma_ltm = 1.55;
};

// Pool starts empty (all slots unassigned); STTM architecture defaults to the
// LTM architecture at half width. The seed roots the weight-init streams.
DgdmnState dgdmn_init(const DgmArch& ltm_arch, std::size_t n_stm, std::size_t n_max,
                      double kappa, const DgmTrainConfig& ltm_train,
                      const DgmTrainConfig& sttm_train, std::uint64_t seed);

// Routes the task to its resident slot (retrain) or a fresh one, sleeping
// first when every slot is occupied. On allocation of a task already
// consolidated in the LTM, the batch is augmented with the LTM's
// reconstructions of x labeled by its learner.
void train_task(DgdmnState& state, const TaskDescriptor& t, const Tensor& x,
                const std::vector<std::size_t>& y, Rng& rng);

// Consolidation: every assigned slot generates trained_sample_count samples,
// labels them with its learner, and the merged batch plus merged dictionaries
// feed one generative-replay update of the LTM. All slots are then cleared.
// Throws if no slot is assigned.
void sleep(DgdmnState& state, Rng& rng);

// Slot prediction when the task is resident; LTM prediction otherwise.
// Never mutates state and never fails on unknown descriptors.
std::vector<std::size_t> predict(const DgdmnState& state, const TaskDescriptor& t,
                                 const Tensor& x);

// Descriptor-free variant of train_task: residency and prior-consolidation
// checks use the generators' normalized reconstruction loss against the
// gamma thresholds; internal descriptors "anon-<n>" are minted for
// bookkeeping.
void train_task_descriptorfree(DgdmnState& state, const Tensor& x,
                               const std::vector<std::size_t>& y, Rng& rng);

// Heuristics for the two architecture hyperparameters, given that the system
// should stay accurate on the last K tasks of a long stream: kappa = 0.5/K
// and n_stm = round(0.25/kappa), floored at 1.
struct HyperparamSuggestion {
    double kappa = 0.0;
    std::size_t n_stm = 0;
};
HyperparamSuggestion suggest_hyperparams(std::size_t k);

} // namespace dgdmn
