#include "dgdmn/dgm.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dgdmn {

void merge_dictionary(TaskDictionary& into, const TaskDictionary& from) {
    for (const auto& [task, count] : from) into[task] += count;
}

ReplayBudget compute_budget(std::size_t x_count, std::uint64_t age, std::size_t n_max,
                            double kappa) {
    if (x_count == 0) throw DataError("compute_budget: no incoming samples");
    ReplayBudget b;
    std::size_t n_tasks = x_count;
    std::size_t n_gen = static_cast<std::size_t>(age);
    if (x_count + age > n_max) {
        const double eta = std::max(
            kappa, static_cast<double>(x_count) / static_cast<double>(x_count + age));
        n_tasks = static_cast<std::size_t>(std::floor(eta * static_cast<double>(n_max) + 0.5));
        n_gen = n_max - n_tasks;
    }
    const std::size_t n_total = n_tasks + n_gen;
    if (n_tasks >= x_count) {
        n_tasks = x_count;
        n_gen = n_total - x_count;
    }
    b.n_tasks = n_tasks;
    b.n_gen = n_gen;
    b.n_total = n_total;
    b.eta_tasks = static_cast<double>(n_tasks) / static_cast<double>(n_total);
    return b;
}

DgmArch DgmArch::scaled(double f) const {
    auto scale = [f](std::size_t v) {
        return std::max<std::size_t>(4, static_cast<std::size_t>(std::llround(f * static_cast<double>(v))));
    };
    DgmArch out = *this;
    for (auto& h : out.learner_hidden) h = scale(h);
    for (auto& h : out.vae_enc) h = scale(h);
    for (auto& h : out.vae_dec) h = scale(h);
    out.vae_latent = scale(vae_latent);
    return out;
}

DgmState dgm_init(const DgmArch& arch, std::size_t n_max, double kappa, Rng& rng) {
    DgmState dgm;
    VaeSpec vs;
    vs.input = arch.input;
    vs.enc_hidden = arch.vae_enc;
    vs.latent = arch.vae_latent;
    vs.dec_hidden = arch.vae_dec;
    Rng gen_rng = rng.substream("init-generator");
    Rng learn_rng = rng.substream("init-learner");
    dgm.generator = vae_init(vs, gen_rng);
    dgm.learner = learner_init(arch.input, arch.learner_hidden, arch.num_classes, 0.0, learn_rng);
    dgm.n_max = n_max;
    dgm.kappa = kappa;
    return dgm;
}

namespace {

// Generator training, either for a fixed epoch count or in increments until
// the incoming batch is recognized.
void train_generator(DgmState& dgm, const Tensor& x_tr, const Tensor& x_incoming,
                     Rng& rng, const DgmTrainConfig& cfg) {
    auto opt = num::OptimizerState::create(dgm.generator.params, cfg.gen_opt);
    if (!cfg.recog_termination) {
        vae_train(dgm.generator, x_tr, cfg.gen_epochs, opt, rng, cfg.batch_size);
        dgm.gen_sample_epochs += static_cast<std::uint64_t>(x_tr.rows()) * cfg.gen_epochs;
        return;
    }
    std::size_t done = 0;
    while (done < cfg.recog_epoch_cap) {
        const std::size_t step = std::min(cfg.recog_epoch_step, cfg.recog_epoch_cap - done);
        Rng epoch_rng = rng.substream("increment", done);
        vae_train(dgm.generator, x_tr, step, opt, epoch_rng, cfg.batch_size);
        dgm.gen_sample_epochs += static_cast<std::uint64_t>(x_tr.rows()) * step;
        done += step;
        if (recognition_loss(dgm, x_incoming) < cfg.recog_gamma) break;
    }
}

} // namespace

void dgr_update(DgmState& dgm, const Tensor& x, const std::vector<std::size_t>& y,
                const TaskDictionary& d_tasks, Rng& rng, const DgmTrainConfig& cfg) {
    if (x.rows() != y.size()) throw ShapeError("dgr_update: batch/label count mismatch");
    if (d_tasks.empty()) throw DataError("dgr_update: empty task dictionary");

    const ReplayBudget budget = compute_budget(x.rows(), dgm.age, dgm.n_max, dgm.kappa);

    // Subsample incoming data if the budget keeps fewer than |x|.
    Tensor x_tasks = x;
    std::vector<std::size_t> y_tasks = y;
    if (budget.n_tasks < x.rows()) {
        Rng sub = rng.substream("subsample");
        const auto idx = sub.sample_without_replacement(x.rows(), budget.n_tasks);
        x_tasks = x.gather_rows(idx);
        y_tasks.resize(budget.n_tasks);
        for (std::size_t i = 0; i < idx.size(); ++i) y_tasks[i] = y[idx[i]];
    }

    // Regenerate previous tasks. A fresh memory (age 0) has n_gen == 0 and
    // never touches the generator here.
    Tensor x_gen({0, x.cols()});
    std::vector<std::size_t> y_gen;
    if (budget.n_gen > 0) {
        Rng lat = rng.substream("latent-replay");
        x_gen = vae_sample(dgm.generator, budget.n_gen, lat);
        y_gen = learner_predict(dgm.learner, x_gen);
    }

    merge_dictionary(dgm.dictionary, d_tasks);
    dgm.age += budget.n_total;

    if (!cfg.warm_start) {
        Rng reinit = rng.substream("reinit");
        Rng gen_rng = reinit.substream("init-generator");
        Rng learn_rng = reinit.substream("init-learner");
        dgm.generator = vae_init(dgm.generator.spec, gen_rng);
        dgm.learner.params = num::init_params(dgm.learner.spec, learn_rng);
    }

    // Train generator on the union of kept and regenerated samples.
    Tensor x_tr = Tensor::concat_rows(x_tasks, x_gen);
    Rng gen_rng = rng.substream("gen-train");
    train_generator(dgm, x_tr, x_tasks, gen_rng, cfg);

    // Reconstruct the kept incoming samples and train the learner on
    // reconstructions plus generated samples.
    Tensor x_recon = vae_reconstruct(dgm.generator, x_tasks);
    Tensor x_learn = Tensor::concat_rows(x_recon, x_gen);
    std::vector<std::size_t> y_learn = y_tasks;
    y_learn.insert(y_learn.end(), y_gen.begin(), y_gen.end());
    Rng learn_rng = rng.substream("learner-train");
    auto opt = num::OptimizerState::create(dgm.learner.params, cfg.learner_opt);
    learner_train(dgm.learner, x_learn, y_learn, cfg.learner_epochs, opt, learn_rng,
                  cfg.batch_size);
}

double recognition_loss(const DgmState& dgm, const Tensor& x) {
    if (x.rows() == 0) throw DataError("recognition_loss: empty batch");
    const std::vector<double> losses = recons_losses(dgm.generator, x);
    double sum = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) {
        double intensity = 0.0;
        const double* row = x.row(r);
        for (std::size_t j = 0; j < x.cols(); ++j) intensity += row[j];
        sum += losses[r] / std::max(intensity, 1e-6);
    }
    return sum / static_cast<double>(x.rows());
}

bool recognize(const DgmState& dgm, const Tensor& x, double gamma) {
    return recognition_loss(dgm, x) < gamma;
}

std::vector<std::size_t> dgm_predict(const DgmState& dgm, const Tensor& x) {
    return learner_predict(dgm.learner, x);
}

} // namespace dgdmn
