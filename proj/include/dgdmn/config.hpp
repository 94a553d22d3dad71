#pragma once

#include "dgdmn/algorithms.hpp"
#include "dgdmn/suites.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dgdmn {

// Experiment configuration: a flat key=value file with CLI-flag overrides
// (flags win). validate() throws ConfigError naming the offending field.
struct ExperimentConfig {
    std::string suite = "digits-mini"; // builtin name or path to a suite file
    std::string algo = "dgdmn";
    std::uint64_t seed = 0;
    std::size_t task_count = 0; // 0 keeps the suite's default length
    std::size_t n_max = 0;      // 0 sizes the memory to the suite's total train samples
    double kappa = 0.05;
    std::size_t n_stm = 2;
    std::optional<double> gamma_sttm; // dgdmn-recog only
    std::optional<double> gamma_ltm;
    std::size_t learner_epochs = 6;
    std::size_t gen_epochs = 25;
    std::size_t joint_epochs = 20;
    std::size_t batch_size = 128;
    // Architecture fields left empty resolve to per-suite defaults mirroring
    // the published per-dataset sizing; see resolve_architecture().
    std::vector<std::size_t> hidden;
    std::vector<std::size_t> vae_enc;
    std::size_t latent = 0;
    std::vector<std::size_t> vae_dec;
    double dropout = 0.2;
    double ewc_lambda = 100.0;
    double ppr_mult = 3.0;
    bool warm_start = true;
    bool terminal_flush = true;
    bool with_joint = false;
    bool with_resilience = false;
    std::string out_dir = "out";
    std::string mnist_dir; // empty: synthetic (or DGDMN_MNIST_DIR)

    void validate() const;

    // Fills unset architecture fields with the suite-appropriate defaults:
    // learner hidden widths 24,24 (digits-mini) / 48,48 (permnist-mini) /
    // 36,36 (tdigits-mini), VAE latent 16 / 24 / 32, encoder 128,64.
    void resolve_architecture(const std::string& suite_name);

    // Canonical snapshot: one sorted "key = value" line per field. The config
    // hash is the FNV-1a of this text.
    std::string canonical_text() const;
    std::uint64_t hash() const;

    // Keys accepted both in config files and as --flags.
    void set(const std::string& key, const std::string& value);

    AlgorithmConfig algorithm_config(std::size_t input_dim, std::size_t num_classes,
                                     std::size_t max_task_size) const;
};

ExperimentConfig load_config_file(const std::string& path);

std::uint64_t fnv1a_hash(const std::string& text);

// A validated, materialized run: the resolved config, the task data, and the
// algorithm settings derived from them. extra_tasks appends re-presentations
// of suite tasks (by index) to the stream.
struct PreparedRun {
    ExperimentConfig cfg;
    MaterializedSuite suite;
    AlgorithmConfig algo;
};

PreparedRun prepare_run(ExperimentConfig cfg, const std::vector<std::size_t>& extra_tasks = {});

} // namespace dgdmn
