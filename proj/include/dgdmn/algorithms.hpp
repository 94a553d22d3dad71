#pragma once

#include "dgdmn/baselines.hpp"
#include "dgdmn/checkpoint.hpp"
#include "dgdmn/dual_memory.hpp"

#include <memory>
#include <string>

namespace dgdmn {

// Uniform sequential-learner interface: every algorithm consumes the same task
// stream and answers the same prediction queries, so one harness evaluates all
// of them.
class Algorithm {
public:
    virtual ~Algorithm() = default;
    virtual std::string name() const = 0;
    virtual void train_task(const LabeledBatch& task) = 0;
    virtual std::vector<std::size_t> predict(const TaskDescriptor& t, const Tensor& x) const = 0;
    // End-of-stream flush before the final evaluation row (terminal sleep for
    // the dual-memory system). Default: nothing.
    virtual void finish_stream() {}
    // Cumulative generator-training cost in samples x epochs.
    virtual std::uint64_t generator_sample_epochs() const { return 0; }
    // Algorithm-state section payload for checkpoints.
    virtual void save_state(ByteWriter& w) const = 0;
    virtual void load_state(ByteReader& r) = 0;
};

// Settings shared by the factory; field use depends on the algorithm.
struct AlgorithmConfig {
    std::string kind;             // nn | dropnn | ppr | ewc | dgr | dgdmn | dgdmn-recog
    std::uint64_t seed = 0;
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;
    std::vector<std::size_t> learner_hidden{48, 48};
    std::vector<std::size_t> vae_enc{128, 64};
    std::size_t vae_latent = 24;
    std::vector<std::size_t> vae_dec{64, 128};
    std::size_t learner_epochs = 6;
    std::size_t gen_epochs = 25;
    std::size_t batch_size = 128;
    double dropout_rate = 0.2;     // dropnn
    double ppr_capacity_mult = 3.0; // x largest task size
    std::size_t max_task_size = 2000;
    double ewc_lambda = 100.0;
    std::size_t n_max = 0;
    double kappa = 0.05;
    std::size_t n_stm = 2;
    double gamma_sttm = 1.55;
    double gamma_ltm = 1.55;
    bool warm_start = true;

    num::OptimizerHp learner_opt{1e-3, 0.9, 1e-8, {}, {}};
    num::OptimizerHp gen_opt{1e-3, 0.9, 1e-8, 0.5, 1.0};

    DgmArch dgm_arch() const;
    DgmTrainConfig dgm_train_config(bool recog_mode) const;
};

std::unique_ptr<Algorithm> make_algorithm(const AlgorithmConfig& cfg);

// Direct access for tests and the resilience pipeline.
class DgrAlgorithm;
class DgdmnAlgorithm;

class NnAlgorithm final : public Algorithm {
public:
    NnAlgorithm(const AlgorithmConfig& cfg, double dropout);
    std::string name() const override { return dropout_ > 0.0 ? "dropnn" : "nn"; }
    void train_task(const LabeledBatch& task) override;
    std::vector<std::size_t> predict(const TaskDescriptor&, const Tensor& x) const override;
    void save_state(ByteWriter& w) const override;
    void load_state(ByteReader& r) override;
    const LearnerParams& learner() const { return lp_; }

private:
    AlgorithmConfig cfg_;
    double dropout_;
    LearnerParams lp_;
    Rng rng_;
    std::uint64_t task_counter_ = 0;
};

class PprAlgorithm final : public Algorithm {
public:
    explicit PprAlgorithm(const AlgorithmConfig& cfg);
    std::string name() const override { return "ppr"; }
    void train_task(const LabeledBatch& task) override;
    std::vector<std::size_t> predict(const TaskDescriptor&, const Tensor& x) const override;
    void save_state(ByteWriter& w) const override;
    void load_state(ByteReader& r) override;
    const PprMemory& memory() const { return mem_; }

private:
    AlgorithmConfig cfg_;
    LearnerParams lp_;
    PprMemory mem_;
    Rng rng_;
    std::uint64_t task_counter_ = 0;
};

class EwcAlgorithm final : public Algorithm {
public:
    explicit EwcAlgorithm(const AlgorithmConfig& cfg);
    std::string name() const override { return "ewc"; }
    void train_task(const LabeledBatch& task) override;
    std::vector<std::size_t> predict(const TaskDescriptor&, const Tensor& x) const override;
    void save_state(ByteWriter& w) const override;
    void load_state(ByteReader& r) override;
    const EwcState& state() const { return ewc_; }

private:
    AlgorithmConfig cfg_;
    LearnerParams lp_;
    EwcState ewc_;
    Rng rng_;
    std::uint64_t task_counter_ = 0;
};

class DgrAlgorithm final : public Algorithm {
public:
    explicit DgrAlgorithm(const AlgorithmConfig& cfg);
    std::string name() const override { return "dgr"; }
    void train_task(const LabeledBatch& task) override;
    std::vector<std::size_t> predict(const TaskDescriptor&, const Tensor& x) const override;
    std::uint64_t generator_sample_epochs() const override { return dgm_.gen_sample_epochs; }
    void save_state(ByteWriter& w) const override;
    void load_state(ByteReader& r) override;
    const DgmState& dgm() const { return dgm_; }
    DgmState& dgm() { return dgm_; }

private:
    AlgorithmConfig cfg_;
    DgmTrainConfig train_cfg_;
    DgmState dgm_;
    Rng rng_;
    std::uint64_t task_counter_ = 0;
};

class DgdmnAlgorithm final : public Algorithm {
public:
    DgdmnAlgorithm(const AlgorithmConfig& cfg, bool descriptor_free);
    std::string name() const override { return descriptor_free_ ? "dgdmn-recog" : "dgdmn"; }
    void train_task(const LabeledBatch& task) override;
    std::vector<std::size_t> predict(const TaskDescriptor& t, const Tensor& x) const override;
    void finish_stream() override;
    std::uint64_t generator_sample_epochs() const override;
    void save_state(ByteWriter& w) const override;
    void load_state(ByteReader& r) override;
    const DgdmnState& state() const { return state_; }
    DgdmnState& state() { return state_; }

private:
    AlgorithmConfig cfg_;
    bool descriptor_free_;
    DgdmnState state_;
    Rng rng_;
    std::uint64_t task_counter_ = 0;
};

} // namespace dgdmn
