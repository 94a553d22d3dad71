#include "dgdmn/baselines.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dgdmn {

using num::ParamSet;

void ppr_train_task(LearnerParams& lp, PprMemory& mem, const Tensor& x,
                    const std::vector<std::size_t>& y, std::size_t epochs,
                    const num::OptimizerHp& hp, Rng& rng, std::size_t batch_size) {
    const std::size_t d = x.cols();
    const std::size_t n_fill = mem.capacity > x.rows() ? mem.capacity - x.rows() : 0;

    Rng fill_rng = rng.substream("pseudopattern");
    mem.inputs = Tensor({n_fill, d});
    for (double& v : mem.inputs.values()) v = fill_rng.uniform01();
    mem.soft_labels = n_fill > 0 ? learner_probs(lp, mem.inputs)
                                 : Tensor({0, lp.num_classes});

    // Task samples as one-hot rows, pseudopatterns as soft rows.
    Tensor x_all = Tensor::concat_rows(x, mem.inputs);
    Tensor targets({x_all.rows(), lp.num_classes});
    for (std::size_t r = 0; r < x.rows(); ++r) targets.at(r, y[r]) = 1.0;
    for (std::size_t r = 0; r < n_fill; ++r)
        for (std::size_t j = 0; j < lp.num_classes; ++j)
            targets.at(x.rows() + r, j) = mem.soft_labels.at(r, j);

    // Passing rng straight through keeps the capacity-0 case on exactly the
    // same shuffle stream as plain training.
    auto opt = num::OptimizerState::create(lp.params, hp);
    learner_train_soft(lp, x_all, targets, epochs, opt, rng, batch_size);
}

double ewc_penalty(const ParamSet& params, const EwcState& ewc) {
    double p = 0.0;
    for (const auto& anchor : ewc.anchors) {
        for (const auto& [name, theta] : params) {
            const Tensor& star = anchor.theta_star.at(name);
            const Tensor& f = anchor.fisher.at(name);
            for (std::size_t i = 0; i < theta.size(); ++i) {
                const double d = theta[i] - star[i];
                p += f[i] * d * d;
            }
        }
    }
    return 0.5 * ewc.lambda * p;
}

ParamSet ewc_penalty_gradients(const ParamSet& params, const EwcState& ewc) {
    ParamSet grads;
    for (const auto& [name, t] : params) grads.emplace(name, Tensor(t.shape()));
    for (const auto& anchor : ewc.anchors) {
        for (const auto& [name, theta] : params) {
            const Tensor& star = anchor.theta_star.at(name);
            const Tensor& f = anchor.fisher.at(name);
            Tensor& g = grads.at(name);
            for (std::size_t i = 0; i < theta.size(); ++i)
                g[i] += ewc.lambda * f[i] * (theta[i] - star[i]);
        }
    }
    return grads;
}

namespace {

// Diagonal Fisher estimate at the mode: mean over samples of the squared
// gradient of log p(predicted class).
ParamSet fisher_estimate(const LearnerParams& lp, const Tensor& x) {
    ParamSet fisher;
    for (const auto& [name, t] : lp.params) fisher.emplace(name, Tensor(t.shape()));
    const std::size_t n = x.rows();
    for (std::size_t r = 0; r < n; ++r) {
        Tensor row = x.slice_rows(r, 1);
        const std::vector<std::size_t> pred = learner_predict(lp, row);
        ParamSet g = num::gradients_cross_entropy(lp.params, lp.spec, row, {pred[0]});
        for (auto& [name, f] : fisher) {
            const Tensor& gi = g.at(name);
            for (std::size_t i = 0; i < f.size(); ++i) f[i] += gi[i] * gi[i];
        }
    }
    for (auto& [name, f] : fisher)
        for (double& v : f.values()) v /= static_cast<double>(n);
    return fisher;
}

} // namespace

void ewc_train_task(LearnerParams& lp, EwcState& ewc, const Tensor& x,
                    const std::vector<std::size_t>& y, std::size_t epochs,
                    const num::OptimizerHp& hp, Rng& rng, std::size_t batch_size) {
    const std::size_t n = x.rows();
    if (n == 0) throw ShapeError("ewc_train_task: empty batch");
    Rng shuffle_rng = rng.substream("shuffle");
    auto opt = num::OptimizerState::create(lp.params, hp);
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        // Same epoch-order scheme as learner_train so a zero penalty follows
        // the plain trajectory exactly.
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(start + count));
            Tensor xb = x.gather_rows(idx);
            std::vector<std::size_t> yb(count);
            for (std::size_t i = 0; i < count; ++i) yb[i] = y[idx[i]];
            ParamSet grads = num::gradients_cross_entropy(lp.params, lp.spec, xb, yb);
            if (!ewc.anchors.empty() && ewc.lambda != 0.0) {
                ParamSet pen = ewc_penalty_gradients(lp.params, ewc);
                for (auto& [name, g] : grads) {
                    const Tensor& p = pen.at(name);
                    for (std::size_t i = 0; i < g.size(); ++i) g[i] += p[i];
                }
            }
            num::rmsprop_step(lp.params, grads, opt);
        }
        num::check_finite(lp.params, "ewc learner");
    }
    ewc.anchors.push_back(EwcAnchor{lp.params, fisher_estimate(lp, x)});
}

void nn_sequential_train(LearnerParams& lp, const TaskStream& stream,
                         std::size_t epochs_per_task, const num::OptimizerHp& hp, Rng& rng) {
    std::uint64_t i = 0;
    for (const LabeledBatch& task : stream) {
        Rng task_rng = rng.substream("task", i++);
        auto opt = num::OptimizerState::create(lp.params, hp);
        learner_train(lp, task.inputs, task.labels, epochs_per_task, opt, task_rng);
    }
}

void dgr_sequential_train(DgmState& dgm, const TaskStream& stream, Rng& rng,
                          const DgmTrainConfig& cfg) {
    std::uint64_t i = 0;
    for (const LabeledBatch& task : stream) {
        Rng task_rng = rng.substream("task", i++);
        TaskDictionary d;
        d[task.task] = 1;
        dgr_update(dgm, task.inputs, task.labels, d, task_rng, cfg);
    }
}

} // namespace dgdmn
