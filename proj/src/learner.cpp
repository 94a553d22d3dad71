#include "dgdmn/learner.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dgdmn {

using num::ParamSet;

namespace {

std::vector<std::size_t> shuffled_order(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    return order;
}

} // namespace

LearnerParams learner_init(std::size_t input, const std::vector<std::size_t>& hidden,
                           std::size_t num_classes, double dropout_rate, Rng& rng) {
    LearnerParams lp;
    lp.spec = num::MlpSpec::stack(input, hidden, num_classes, num::Activation::softmax);
    lp.params = num::init_params(lp.spec, rng);
    lp.num_classes = num_classes;
    lp.dropout_rate = dropout_rate;
    return lp;
}

void learner_train(LearnerParams& lp, const Tensor& x, const std::vector<std::size_t>& labels,
                   std::size_t epochs, num::OptimizerState& opt, Rng& rng,
                   std::size_t batch_size) {
    const std::size_t n = x.rows();
    if (n == 0) throw ShapeError("learner_train: empty batch");
    if (n != labels.size()) throw ShapeError("learner_train: batch/label count mismatch");
    for (std::size_t y : labels)
        if (y >= lp.num_classes) throw ShapeError("learner_train: label out of range");
    if (epochs == 0) return;
    Rng shuffle_rng = rng.substream("shuffle");
    Rng dropout_rng = rng.substream("dropout");
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::vector<std::size_t> order = shuffled_order(n, shuffle_rng);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(start + count));
            Tensor xb = x.gather_rows(idx);
            std::vector<std::size_t> yb(count);
            for (std::size_t i = 0; i < count; ++i) yb[i] = labels[idx[i]];
            num::DropoutPlan plan;
            const num::DropoutPlan* planp = nullptr;
            if (lp.dropout_rate > 0.0) {
                plan = num::make_dropout_masks(lp.spec, count, lp.dropout_rate, dropout_rng);
                planp = &plan;
            }
            ParamSet grads = num::gradients_cross_entropy(lp.params, lp.spec, xb, yb, planp);
            num::rmsprop_step(lp.params, grads, opt);
        }
        num::check_finite(lp.params, "learner");
    }
}

void learner_train_soft(LearnerParams& lp, const Tensor& x, const Tensor& targets,
                        std::size_t epochs, num::OptimizerState& opt, Rng& rng,
                        std::size_t batch_size) {
    const std::size_t n = x.rows();
    if (n == 0) throw ShapeError("learner_train_soft: empty batch");
    if (n != targets.rows()) throw ShapeError("learner_train_soft: batch/target mismatch");
    if (epochs == 0) return;
    Rng shuffle_rng = rng.substream("shuffle");
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        std::vector<std::size_t> order = shuffled_order(n, shuffle_rng);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(start + count));
            Tensor xb = x.gather_rows(idx);
            Tensor tb = targets.gather_rows(idx);
            ParamSet grads = num::gradients_soft_cross_entropy(lp.params, lp.spec, xb, tb);
            num::rmsprop_step(lp.params, grads, opt);
        }
        num::check_finite(lp.params, "learner");
    }
}

std::vector<std::size_t> learner_predict(const LearnerParams& lp, const Tensor& x) {
    if (x.rows() == 0) return {};
    Tensor probs = num::forward(lp.params, lp.spec, x);
    std::vector<std::size_t> labels(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const double* pr = probs.row(r);
        std::size_t best = 0;
        for (std::size_t j = 1; j < lp.num_classes; ++j)
            if (pr[j] > pr[best]) best = j;
        labels[r] = best;
    }
    return labels;
}

Tensor learner_probs(const LearnerParams& lp, const Tensor& x) {
    return num::forward(lp.params, lp.spec, x);
}

double learner_accuracy(const LearnerParams& lp, const Tensor& x,
                        const std::vector<std::size_t>& labels) {
    if (x.rows() == 0) return 0.0;
    std::vector<std::size_t> pred = learner_predict(lp, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (pred[i] == labels[i]) ++correct;
    return static_cast<double>(correct) / static_cast<double>(pred.size());
}

} // namespace dgdmn
