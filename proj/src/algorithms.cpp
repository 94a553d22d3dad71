#include "dgdmn/algorithms.hpp"

#include "dgdmn/errors.hpp"

#include <cmath>

namespace dgdmn {

DgmArch AlgorithmConfig::dgm_arch() const {
    DgmArch arch;
    arch.input = input_dim;
    arch.learner_hidden = learner_hidden;
    arch.num_classes = num_classes;
    arch.vae_enc = vae_enc;
    arch.vae_latent = vae_latent;
    arch.vae_dec = vae_dec;
    return arch;
}

DgmTrainConfig AlgorithmConfig::dgm_train_config(bool recog_mode) const {
    DgmTrainConfig t;
    t.gen_epochs = gen_epochs;
    t.learner_epochs = learner_epochs;
    t.batch_size = batch_size;
    t.gen_opt = gen_opt;
    t.learner_opt = learner_opt;
    t.warm_start = warm_start;
    t.recog_termination = recog_mode;
    t.recog_gamma = gamma_ltm;
    return t;
}

std::unique_ptr<Algorithm> make_algorithm(const AlgorithmConfig& cfg) {
    if (cfg.kind == "nn") return std::make_unique<NnAlgorithm>(cfg, 0.0);
    if (cfg.kind == "dropnn") return std::make_unique<NnAlgorithm>(cfg, cfg.dropout_rate);
    if (cfg.kind == "ppr") return std::make_unique<PprAlgorithm>(cfg);
    if (cfg.kind == "ewc") return std::make_unique<EwcAlgorithm>(cfg);
    if (cfg.kind == "dgr") return std::make_unique<DgrAlgorithm>(cfg);
    if (cfg.kind == "dgdmn") return std::make_unique<DgdmnAlgorithm>(cfg, false);
    if (cfg.kind == "dgdmn-recog") return std::make_unique<DgdmnAlgorithm>(cfg, true);
    throw ConfigError("algo", "unknown algorithm '" + cfg.kind + "'");
}

// --- NN / DropNN ------------------------------------------------------------

NnAlgorithm::NnAlgorithm(const AlgorithmConfig& cfg, double dropout)
    : cfg_(cfg), dropout_(dropout), rng_(Rng(cfg.seed).substream(dropout > 0.0 ? "dropnn" : "nn")) {
    Rng init = rng_.substream("init");
    lp_ = learner_init(cfg.input_dim, cfg.learner_hidden, cfg.num_classes, dropout, init);
}

void NnAlgorithm::train_task(const LabeledBatch& task) {
    Rng task_rng = rng_.substream("task", task_counter_++);
    auto opt = num::OptimizerState::create(lp_.params, cfg_.learner_opt);
    learner_train(lp_, task.inputs, task.labels, cfg_.learner_epochs, opt, task_rng,
                  cfg_.batch_size);
}

std::vector<std::size_t> NnAlgorithm::predict(const TaskDescriptor&, const Tensor& x) const {
    return learner_predict(lp_, x);
}

void NnAlgorithm::save_state(ByteWriter& w) const {
    write_learner(w, lp_);
    w.u64(task_counter_);
}

void NnAlgorithm::load_state(ByteReader& r) {
    lp_ = read_learner(r);
    task_counter_ = r.u64();
}

// --- PPR ---------------------------------------------------------------------

PprAlgorithm::PprAlgorithm(const AlgorithmConfig& cfg)
    : cfg_(cfg), rng_(Rng(cfg.seed).substream("ppr")) {
    Rng init = rng_.substream("init");
    lp_ = learner_init(cfg.input_dim, cfg.learner_hidden, cfg.num_classes, 0.0, init);
    mem_.capacity = static_cast<std::size_t>(
        std::llround(cfg.ppr_capacity_mult * static_cast<double>(cfg.max_task_size)));
}

void PprAlgorithm::train_task(const LabeledBatch& task) {
    Rng task_rng = rng_.substream("task", task_counter_++);
    ppr_train_task(lp_, mem_, task.inputs, task.labels, cfg_.learner_epochs,
                   cfg_.learner_opt, task_rng, cfg_.batch_size);
}

std::vector<std::size_t> PprAlgorithm::predict(const TaskDescriptor&, const Tensor& x) const {
    return learner_predict(lp_, x);
}

void PprAlgorithm::save_state(ByteWriter& w) const {
    write_learner(w, lp_);
    write_ppr(w, mem_);
    w.u64(task_counter_);
}

void PprAlgorithm::load_state(ByteReader& r) {
    lp_ = read_learner(r);
    mem_ = read_ppr(r);
    task_counter_ = r.u64();
}

// --- EWC ---------------------------------------------------------------------

EwcAlgorithm::EwcAlgorithm(const AlgorithmConfig& cfg)
    : cfg_(cfg), rng_(Rng(cfg.seed).substream("ewc")) {
    Rng init = rng_.substream("init");
    lp_ = learner_init(cfg.input_dim, cfg.learner_hidden, cfg.num_classes, 0.0, init);
    ewc_.lambda = cfg.ewc_lambda;
}

void EwcAlgorithm::train_task(const LabeledBatch& task) {
    Rng task_rng = rng_.substream("task", task_counter_++);
    ewc_train_task(lp_, ewc_, task.inputs, task.labels, cfg_.learner_epochs,
                   cfg_.learner_opt, task_rng, cfg_.batch_size);
}

std::vector<std::size_t> EwcAlgorithm::predict(const TaskDescriptor&, const Tensor& x) const {
    return learner_predict(lp_, x);
}

void EwcAlgorithm::save_state(ByteWriter& w) const {
    write_learner(w, lp_);
    write_ewc(w, ewc_);
    w.u64(task_counter_);
}

void EwcAlgorithm::load_state(ByteReader& r) {
    lp_ = read_learner(r);
    ewc_ = read_ewc(r);
    task_counter_ = r.u64();
}

// --- DGR ---------------------------------------------------------------------

DgrAlgorithm::DgrAlgorithm(const AlgorithmConfig& cfg)
    : cfg_(cfg), train_cfg_(cfg.dgm_train_config(false)),
      rng_(Rng(cfg.seed).substream("dgr")) {
    Rng init = rng_.substream("init");
    dgm_ = dgm_init(cfg.dgm_arch(), cfg.n_max, cfg.kappa, init);
}

void DgrAlgorithm::train_task(const LabeledBatch& task) {
    Rng task_rng = rng_.substream("task", task_counter_++);
    TaskDictionary d;
    d[task.task] = 1;
    dgr_update(dgm_, task.inputs, task.labels, d, task_rng, train_cfg_);
}

std::vector<std::size_t> DgrAlgorithm::predict(const TaskDescriptor&, const Tensor& x) const {
    return dgm_predict(dgm_, x);
}

void DgrAlgorithm::save_state(ByteWriter& w) const {
    write_dgm(w, dgm_);
    w.u64(task_counter_);
}

void DgrAlgorithm::load_state(ByteReader& r) {
    dgm_ = read_dgm(r);
    task_counter_ = r.u64();
}

// --- DGDMN ---------------------------------------------------------------------

DgdmnAlgorithm::DgdmnAlgorithm(const AlgorithmConfig& cfg, bool descriptor_free)
    : cfg_(cfg), descriptor_free_(descriptor_free),
      rng_(Rng(cfg.seed).substream(descriptor_free ? "dgdmn-recog" : "dgdmn")) {
    DgmTrainConfig ltm_train = cfg.dgm_train_config(descriptor_free);
    DgmTrainConfig sttm_train = ltm_train;
    sttm_train.recog_gamma = cfg.gamma_sttm;
    state_ = dgdmn_init(cfg.dgm_arch(), cfg.n_stm, cfg.n_max, cfg.kappa, ltm_train,
                        sttm_train, rng_.substream("init").seed());
    state_.gamma_sttm = cfg.gamma_sttm;
    state_.gamma_ltm = cfg.gamma_ltm;
}

void DgdmnAlgorithm::train_task(const LabeledBatch& task) {
    Rng task_rng = rng_.substream("task", task_counter_++);
    if (descriptor_free_)
        train_task_descriptorfree(state_, task.inputs, task.labels, task_rng);
    else
        dgdmn::train_task(state_, task.task, task.inputs, task.labels, task_rng);
}

std::vector<std::size_t> DgdmnAlgorithm::predict(const TaskDescriptor& t,
                                                 const Tensor& x) const {
    return dgdmn::predict(state_, t, x);
}

void DgdmnAlgorithm::finish_stream() {
    bool any = false;
    for (const auto& slot : state_.sttm_pool) any = any || slot.assigned();
    if (!any) return;
    Rng flush_rng = rng_.substream("terminal-sleep", task_counter_);
    sleep(state_, flush_rng);
}

std::uint64_t DgdmnAlgorithm::generator_sample_epochs() const {
    std::uint64_t total = state_.ltm.gen_sample_epochs + state_.retired_gen_sample_epochs;
    for (const auto& slot : state_.sttm_pool) total += slot.dgm.gen_sample_epochs;
    return total;
}

void DgdmnAlgorithm::save_state(ByteWriter& w) const {
    write_dgdmn(w, state_);
    w.u64(task_counter_);
}

void DgdmnAlgorithm::load_state(ByteReader& r) {
    state_ = read_dgdmn(r);
    task_counter_ = r.u64();
    // Training configuration is owned by the experiment config, not the
    // checkpoint.
    state_.ltm_train = cfg_.dgm_train_config(descriptor_free_);
    state_.sttm_train = state_.ltm_train;
    state_.sttm_train.recog_gamma = cfg_.gamma_sttm;
    state_.gamma_sttm = cfg_.gamma_sttm;
    state_.gamma_ltm = cfg_.gamma_ltm;
}

} // namespace dgdmn
