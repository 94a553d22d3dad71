#include "dgdmn/numerics.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dgdmn::num {

namespace kernel {

// y (n x out) = x (n x in) * W^T (in x out) + b, with W stored (out, in).
// Contiguous dot products; gcc vectorizes these loops.
void affine_forward(const Tensor& x, const Tensor& w, const Tensor& b, Tensor& y) {
    const std::size_t n = x.rows(), in = x.cols(), out = w.rows();
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = x.row(r);
        double* yr = y.row(r);
        for (std::size_t o = 0; o < out; ++o) {
            const double* wo = w.row(o);
            double acc = 0.0;
            for (std::size_t i = 0; i < in; ++i) acc += xr[i] * wo[i];
            yr[o] = acc + b[o];
        }
    }
}

// Given dpre (n x out) at the affine pre-activation, accumulate dW, db and
// produce dx (n x in).
void affine_backward(const Tensor& x, const Tensor& w, const Tensor& dpre, Tensor& dw,
                     Tensor& db, Tensor* dx) {
    const std::size_t n = x.rows(), in = x.cols(), out = w.rows();
    for (std::size_t r = 0; r < n; ++r) {
        const double* xr = x.row(r);
        const double* dr = dpre.row(r);
        for (std::size_t o = 0; o < out; ++o) {
            const double g = dr[o];
            if (g == 0.0) continue;
            double* dwo = dw.row(o);
            for (std::size_t i = 0; i < in; ++i) dwo[i] += g * xr[i];
            db[o] += g;
        }
        if (dx) {
            double* dxr = dx->row(r);
            for (std::size_t o = 0; o < out; ++o) {
                const double g = dr[o];
                if (g == 0.0) continue;
                const double* wo = w.row(o);
                for (std::size_t i = 0; i < in; ++i) dxr[i] += g * wo[i];
            }
        }
    }
}

void apply_activation(Tensor& a, Activation act) {
    switch (act) {
    case Activation::linear:
        return;
    case Activation::relu:
        for (double& v : a.values()) v = v > 0.0 ? v : 0.0;
        return;
    case Activation::sigmoid:
        for (double& v : a.values()) v = 1.0 / (1.0 + std::exp(-v));
        return;
    case Activation::softmax: {
        const std::size_t n = a.rows(), c = a.cols();
        for (std::size_t r = 0; r < n; ++r) {
            double* ar = a.row(r);
            double mx = ar[0];
            for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, ar[j]);
            double sum = 0.0;
            for (std::size_t j = 0; j < c; ++j) {
                ar[j] = std::exp(ar[j] - mx);
                sum += ar[j];
            }
            for (std::size_t j = 0; j < c; ++j) ar[j] /= sum;
        }
        return;
    }
    }
}

// dpre = dact ⊙ act'(pre), given the post-activation values.
void activation_backward_inplace(Tensor& dact, const Tensor& post, Activation act) {
    switch (act) {
    case Activation::linear:
        return;
    case Activation::relu:
        for (std::size_t i = 0; i < dact.size(); ++i)
            if (post[i] <= 0.0) dact[i] = 0.0;
        return;
    case Activation::sigmoid:
        for (std::size_t i = 0; i < dact.size(); ++i) dact[i] *= post[i] * (1.0 - post[i]);
        return;
    case Activation::softmax:
        // Handled fused with cross-entropy; never reached here.
        throw ShapeError("softmax backward must be fused with the loss");
    }
}

} // namespace kernel

namespace {

using kernel::activation_backward_inplace;
using kernel::affine_backward;
using kernel::affine_forward;
using kernel::apply_activation;

std::string wname(std::size_t i) { return "w" + std::to_string(i); }
std::string bname(std::size_t i) { return "b" + std::to_string(i); }

struct ForwardCache {
    std::vector<Tensor> post; // post-activation per layer, post[0] excludes input
};

Tensor forward_cached(const ParamSet& params, const MlpSpec& spec, const Tensor& x,
                      const DropoutPlan* dropout, ForwardCache* cache) {
    if (x.cols() != spec.input_dim())
        throw ShapeError("forward: input has " + std::to_string(x.cols()) +
                         " features, layer w0 expects " + std::to_string(spec.input_dim()));
    Tensor cur = x;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const LayerSpec& ls = spec.layers[l];
        auto wi = params.find(wname(l));
        auto bi = params.find(bname(l));
        if (wi == params.end() || bi == params.end())
            throw ShapeError("forward: missing parameters for layer " + wname(l));
        const Tensor& w = wi->second;
        const Tensor& b = bi->second;
        if (w.rows() != ls.out || w.cols() != ls.in || cur.cols() != ls.in)
            throw ShapeError("forward: shape mismatch at layer " + wname(l));
        Tensor y({cur.rows(), ls.out});
        affine_forward(cur, w, b, y);
        apply_activation(y, ls.act);
        const bool hidden = l + 1 < spec.layers.size();
        if (hidden && dropout && dropout->rate > 0.0) {
            const Tensor& mask = dropout->masks[l];
            for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
        }
        if (cache) cache->post.push_back(y);
        cur = std::move(y);
    }
    return cur;
}

ParamSet zeros_like(const ParamSet& params) {
    ParamSet out;
    for (const auto& [name, t] : params) out.emplace(name, Tensor(t.shape()));
    return out;
}

// Shared backward pass from the fused softmax+cross-entropy delta.
ParamSet backward_from_delta(const ParamSet& params, const MlpSpec& spec, const Tensor& x,
                             const ForwardCache& cache, Tensor delta,
                             const DropoutPlan* dropout) {
    ParamSet grads = zeros_like(params);
    const std::size_t L = spec.layers.size();
    for (std::size_t l = L; l-- > 0;) {
        const Tensor& input = l == 0 ? x : cache.post[l - 1];
        const Tensor& w = params.at(wname(l));
        Tensor dx;
        const bool need_dx = l > 0;
        if (need_dx) dx = Tensor({input.rows(), input.cols()});
        affine_backward(input, w, delta, grads.at(wname(l)), grads.at(bname(l)),
                        need_dx ? &dx : nullptr);
        if (need_dx) {
            // Propagate through the previous layer's dropout mask, then its
            // activation.
            if (dropout && dropout->rate > 0.0) {
                const Tensor& mask = dropout->masks[l - 1];
                for (std::size_t i = 0; i < dx.size(); ++i) dx[i] *= mask[i];
            }
            activation_backward_inplace(dx, cache.post[l - 1], spec.layers[l - 1].act);
            delta = std::move(dx);
        }
    }
    return grads;
}

} // namespace

MlpSpec MlpSpec::stack(std::size_t input, const std::vector<std::size_t>& hidden,
                       std::size_t output, Activation out_act) {
    MlpSpec spec;
    std::size_t prev = input;
    for (std::size_t h : hidden) {
        spec.layers.push_back({prev, h, Activation::relu});
        prev = h;
    }
    spec.layers.push_back({prev, output, out_act});
    return spec;
}

ParamSet init_params(const MlpSpec& spec, Rng& rng) {
    ParamSet params;
    for (std::size_t l = 0; l < spec.layers.size(); ++l) {
        const LayerSpec& ls = spec.layers[l];
        Tensor w({ls.out, ls.in});
        const double bound = std::sqrt(6.0 / static_cast<double>(ls.in + ls.out));
        for (double& v : w.values()) v = rng.uniform(-bound, bound);
        params.emplace(wname(l), std::move(w));
        params.emplace(bname(l), Tensor({ls.out}));
    }
    return params;
}

Tensor forward(const ParamSet& params, const MlpSpec& spec, const Tensor& x) {
    return forward_cached(params, spec, x, nullptr, nullptr);
}

DropoutPlan make_dropout_masks(const MlpSpec& spec, std::size_t batch_rows, double rate,
                               Rng& rng) {
    DropoutPlan plan;
    plan.rate = rate;
    if (rate <= 0.0) return plan;
    const double keep = 1.0 - rate;
    for (std::size_t l = 0; l + 1 < spec.layers.size(); ++l) {
        Tensor mask({batch_rows, spec.layers[l].out});
        for (double& v : mask.values()) v = rng.uniform01() < keep ? 1.0 / keep : 0.0;
        plan.masks.push_back(std::move(mask));
    }
    return plan;
}

ParamSet gradients_cross_entropy(const ParamSet& params, const MlpSpec& spec,
                                 const Tensor& x, const std::vector<std::size_t>& labels,
                                 const DropoutPlan* dropout, double* loss_out) {
    if (x.rows() != labels.size()) throw ShapeError("gradients: batch/label count mismatch");
    if (x.rows() == 0) throw ShapeError("gradients: empty batch");
    if (spec.layers.back().act != Activation::softmax)
        throw ShapeError("cross-entropy requires a softmax output layer");
    ForwardCache cache;
    Tensor probs = forward_cached(params, spec, x, dropout, &cache);
    const std::size_t n = x.rows(), c = probs.cols();
    const double invn = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    Tensor delta({n, c});
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t y = labels[r];
        if (y >= c) throw ShapeError("gradients: label out of range");
        const double p = std::max(probs.at(r, y), 1e-300);
        loss -= std::log(p);
        for (std::size_t j = 0; j < c; ++j)
            delta.at(r, j) = (probs.at(r, j) - (j == y ? 1.0 : 0.0)) * invn;
    }
    loss *= invn;
    if (!std::isfinite(loss))
        throw TrainingDiverged("cross-entropy at layer " + wname(spec.layers.size() - 1),
                               "non-finite loss");
    if (loss_out) *loss_out = loss;
    return backward_from_delta(params, spec, x, cache, std::move(delta), dropout);
}

ParamSet gradients_soft_cross_entropy(const ParamSet& params, const MlpSpec& spec,
                                      const Tensor& x, const Tensor& targets,
                                      double* loss_out) {
    if (x.rows() != targets.rows()) throw ShapeError("gradients: batch/target count mismatch");
    if (x.rows() == 0) throw ShapeError("gradients: empty batch");
    ForwardCache cache;
    Tensor probs = forward_cached(params, spec, x, nullptr, &cache);
    if (probs.cols() != targets.cols()) throw ShapeError("gradients: target width mismatch");
    const std::size_t n = x.rows(), c = probs.cols();
    const double invn = 1.0 / static_cast<double>(n);
    double loss = 0.0;
    Tensor delta({n, c});
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < c; ++j) {
            const double q = targets.at(r, j);
            if (q > 0.0) loss -= q * std::log(std::max(probs.at(r, j), 1e-300));
            delta.at(r, j) = (probs.at(r, j) - q) * invn;
        }
    }
    loss *= invn;
    if (!std::isfinite(loss))
        throw TrainingDiverged("soft cross-entropy at layer " + wname(spec.layers.size() - 1),
                               "non-finite loss");
    if (loss_out) *loss_out = loss;
    return backward_from_delta(params, spec, x, cache, std::move(delta), nullptr);
}

double cross_entropy_loss(const ParamSet& params, const MlpSpec& spec, const Tensor& x,
                          const std::vector<std::size_t>& labels) {
    Tensor probs = forward(params, spec, x);
    double loss = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r)
        loss -= std::log(std::max(probs.at(r, labels[r]), 1e-300));
    return loss / static_cast<double>(x.rows());
}

OptimizerState OptimizerState::create(const ParamSet& params, OptimizerHp hp) {
    OptimizerState st;
    st.hp = hp;
    st.accum = zeros_like(params);
    return st;
}

ParamSet clip_gradients(ParamSet grads, std::optional<double> clipvalue,
                        std::optional<double> clipnorm) {
    if (clipvalue) {
        const double cv = *clipvalue;
        for (auto& [name, g] : grads)
            for (double& v : g.values()) v = std::clamp(v, -cv, cv);
    }
    if (clipnorm) {
        const double norm = global_l2_norm(grads);
        if (norm > *clipnorm && norm > 0.0) {
            const double scale = *clipnorm / norm;
            for (auto& [name, g] : grads)
                for (double& v : g.values()) v *= scale;
        }
    }
    return grads;
}

void rmsprop_step(ParamSet& params, const ParamSet& grads, OptimizerState& state) {
    const OptimizerHp& hp = state.hp;
    const ParamSet* gp = &grads;
    ParamSet clipped;
    if (hp.clipvalue || hp.clipnorm) {
        clipped = clip_gradients(grads, hp.clipvalue, hp.clipnorm);
        gp = &clipped;
    }
    for (auto& [name, p] : params) {
        const Tensor& g = gp->at(name);
        Tensor& v = state.accum.at(name);
        if (!p.same_shape(g) || !p.same_shape(v))
            throw ShapeError("rmsprop_step: shape mismatch for " + name);
        for (std::size_t i = 0; i < p.size(); ++i) {
            v[i] = hp.rho * v[i] + (1.0 - hp.rho) * g[i] * g[i];
            p[i] -= hp.learning_rate * g[i] / (std::sqrt(v[i]) + hp.epsilon);
        }
    }
}

void check_finite(const ParamSet& params, const std::string& phase) {
    for (const auto& [name, t] : params)
        if (!t.all_finite())
            throw TrainingDiverged(phase, "non-finite parameter " + name);
}

double global_l2_norm(const ParamSet& grads) {
    double ss = 0.0;
    for (const auto& [name, g] : grads)
        for (double v : g.values()) ss += v * v;
    return std::sqrt(ss);
}

} // namespace dgdmn::num
