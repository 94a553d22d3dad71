#include "dgdmn/dual_memory.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dgdmn {

namespace {

SttmSlot* find_slot(DgdmnState& state, const TaskDescriptor& t) {
    for (auto& slot : state.sttm_pool)
        if (slot.assigned() && *slot.assigned_task == t) return &slot;
    return nullptr;
}

const SttmSlot* find_slot(const DgdmnState& state, const TaskDescriptor& t) {
    for (const auto& slot : state.sttm_pool)
        if (slot.assigned() && *slot.assigned_task == t) return &slot;
    return nullptr;
}

SttmSlot* free_slot(DgdmnState& state) {
    for (auto& slot : state.sttm_pool)
        if (!slot.assigned()) return &slot;
    return nullptr;
}

// Core routing shared by the descriptor and descriptor-free paths. resident
// is the slot holding the task, or null; ltm_knows says whether the task was
// previously consolidated.
void train_routed(DgdmnState& state, SttmSlot* resident, bool ltm_knows,
                  const TaskDescriptor& t, const Tensor& x,
                  const std::vector<std::size_t>& y, Rng& rng) {
    TaskDictionary d_tasks;
    d_tasks[t] = 1;

    if (resident) {
        Rng slot_rng = rng.substream("sttm-retrain");
        dgr_update(resident->dgm, x, y, d_tasks, slot_rng, state.sttm_train);
        resident->trained_sample_count = x.rows();
        return;
    }

    SttmSlot* slot = free_slot(state);
    if (!slot) {
        sleep(state, rng);
        slot = free_slot(state);
    }

    // Fresh small memory for this task.
    Rng init_rng = Rng(state.seed).substream("sttm-alloc", state.alloc_count);
    ++state.alloc_count;
    slot->dgm = dgm_init(state.sttm_arch, state.ltm.n_max, state.ltm.kappa, init_rng);
    slot->assigned_task = t;
    slot->trained_sample_count = x.rows();

    Tensor x_train = x;
    std::vector<std::size_t> y_train = y;
    if (ltm_knows) {
        // The LTM replays its memory of this task into the slot: incoming
        // samples reconstructed by its generator, labeled by its learner.
        Tensor x_aug = vae_reconstruct(state.ltm.generator, x);
        std::vector<std::size_t> y_aug = learner_predict(state.ltm.learner, x_aug);
        x_train = Tensor::concat_rows(x, x_aug);
        y_train.insert(y_train.end(), y_aug.begin(), y_aug.end());
    }
    Rng slot_rng = rng.substream("sttm-train");
    dgr_update(slot->dgm, x_train, y_train, d_tasks, slot_rng, state.sttm_train);
}

} // namespace

DgdmnState dgdmn_init(const DgmArch& ltm_arch, std::size_t n_stm, std::size_t n_max,
                      double kappa, const DgmTrainConfig& ltm_train,
                      const DgmTrainConfig& sttm_train, std::uint64_t seed) {
    if (n_stm == 0) throw ConfigError("n_stm", "must be at least 1");
    DgdmnState state;
    state.ltm_arch = ltm_arch;
    state.sttm_arch = ltm_arch.scaled(0.5);
    state.n_stm = n_stm;
    state.seed = seed;
    state.ltm_train = ltm_train;
    state.sttm_train = sttm_train;
    Rng ltm_rng = Rng(seed).substream("ltm-init");
    state.ltm = dgm_init(ltm_arch, n_max, kappa, ltm_rng);
    state.sttm_pool.resize(n_stm);
    for (auto& slot : state.sttm_pool)
        slot.dgm = DgmState{}; // allocated lazily per task
    return state;
}

void train_task(DgdmnState& state, const TaskDescriptor& t, const Tensor& x,
                const std::vector<std::size_t>& y, Rng& rng) {
    SttmSlot* resident = find_slot(state, t);
    const bool ltm_knows = state.ltm.dictionary.contains(t);
    train_routed(state, resident, ltm_knows, t, x, y, rng);
}

void sleep(DgdmnState& state, Rng& rng) {
    bool any = false;
    for (const auto& slot : state.sttm_pool) any = any || slot.assigned();
    if (!any) throw DataError("sleep: no short-term memory holds a task");

    Rng sleep_rng = rng.substream("sleep", state.sleep_count);
    Tensor x_all({0, static_cast<std::size_t>(state.ltm_arch.input)});
    std::vector<std::size_t> y_all;
    TaskDictionary merged;
    std::size_t slot_index = 0;
    for (auto& slot : state.sttm_pool) {
        if (!slot.assigned()) {
            ++slot_index;
            continue;
        }
        Rng gen_rng = sleep_rng.substream("slot-generate", slot_index);
        Tensor xi = vae_sample(slot.dgm.generator, slot.trained_sample_count, gen_rng);
        std::vector<std::size_t> yi = learner_predict(slot.dgm.learner, xi);
        x_all = Tensor::concat_rows(x_all, xi);
        y_all.insert(y_all.end(), yi.begin(), yi.end());
        merge_dictionary(merged, slot.dgm.dictionary);
        ++slot_index;
    }

    Rng ltm_rng = sleep_rng.substream("ltm-consolidate");
    dgr_update(state.ltm, x_all, y_all, merged, ltm_rng, state.ltm_train);

    for (auto& slot : state.sttm_pool) {
        state.retired_gen_sample_epochs += slot.dgm.gen_sample_epochs;
        slot.assigned_task.reset();
        slot.trained_sample_count = 0;
        slot.dgm = DgmState{};
    }
    ++state.sleep_count;
}

std::vector<std::size_t> predict(const DgdmnState& state, const TaskDescriptor& t,
                                 const Tensor& x) {
    if (const SttmSlot* slot = find_slot(state, t)) return dgm_predict(slot->dgm, x);
    return dgm_predict(state.ltm, x);
}

void train_task_descriptorfree(DgdmnState& state, const Tensor& x,
                               const std::vector<std::size_t>& y, Rng& rng) {
    // Residency check: the assigned slot with the lowest recognition loss
    // below the threshold claims the batch.
    SttmSlot* resident = nullptr;
    double best = state.gamma_sttm;
    for (auto& slot : state.sttm_pool) {
        if (!slot.assigned()) continue;
        const double loss = recognition_loss(slot.dgm, x);
        if (loss < best) {
            best = loss;
            resident = &slot;
        }
    }

    TaskDescriptor t;
    bool ltm_knows = false;
    if (resident) {
        t = *resident->assigned_task;
    } else {
        t.id = "anon-" + std::to_string(state.anon_count);
        ++state.anon_count;
        ltm_knows = state.ltm.age > 0 && recognize(state.ltm, x, state.gamma_ltm);
    }
    train_routed(state, resident, ltm_knows, t, x, y, rng);
}

HyperparamSuggestion suggest_hyperparams(std::size_t k) {
    if (k == 0) throw ConfigError("K", "must be at least 1");
    HyperparamSuggestion s;
    s.kappa = 0.5 / static_cast<double>(k);
    s.n_stm = static_cast<std::size_t>(std::max<long long>(1, std::llround(0.25 / s.kappa)));
    return s;
}

} // namespace dgdmn
