#include "dgdmn/vae.hpp"

#include "dgdmn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dgdmn {

using num::Activation;
using num::ParamSet;
namespace kn = num::kernel;

namespace {

constexpr double kBceEps = 1e-7;

std::string ew(std::size_t i) { return "ew" + std::to_string(i); }
std::string eb(std::size_t i) { return "eb" + std::to_string(i); }
std::string dw(std::size_t i) { return "dw" + std::to_string(i); }
std::string db(std::size_t i) { return "db" + std::to_string(i); }

Tensor glorot(std::size_t out, std::size_t in, Rng& rng) {
    Tensor w({out, in});
    const double bound = std::sqrt(6.0 / static_cast<double>(in + out));
    for (double& v : w.values()) v = rng.uniform(-bound, bound);
    return w;
}

struct EncCache {
    std::vector<Tensor> post; // relu activations of the encoder trunk
    Tensor mu, logvar;
};

void encode_cached(const VaeParams& vp, const Tensor& x, EncCache& c) {
    if (x.cols() != vp.spec.input)
        throw ShapeError("vae: input has " + std::to_string(x.cols()) +
                         " features, encoder expects " + std::to_string(vp.spec.input));
    const Tensor* cur = &x;
    for (std::size_t l = 0; l < vp.spec.enc_hidden.size(); ++l) {
        Tensor y({cur->rows(), vp.spec.enc_hidden[l]});
        kn::affine_forward(*cur, vp.params.at(ew(l)), vp.params.at(eb(l)), y);
        kn::apply_activation(y, Activation::relu);
        c.post.push_back(std::move(y));
        cur = &c.post.back();
    }
    c.mu = Tensor({cur->rows(), vp.spec.latent});
    c.logvar = Tensor({cur->rows(), vp.spec.latent});
    kn::affine_forward(*cur, vp.params.at("mw"), vp.params.at("mb"), c.mu);
    kn::affine_forward(*cur, vp.params.at("vw"), vp.params.at("vb"), c.logvar);
}

struct DecCache {
    std::vector<Tensor> post; // relu activations of the decoder trunk
    Tensor out;               // sigmoid output
};

void decode_cached(const VaeParams& vp, const Tensor& z, DecCache& c) {
    const Tensor* cur = &z;
    for (std::size_t l = 0; l < vp.spec.dec_hidden.size(); ++l) {
        Tensor y({cur->rows(), vp.spec.dec_hidden[l]});
        kn::affine_forward(*cur, vp.params.at(dw(l)), vp.params.at(db(l)), y);
        kn::apply_activation(y, Activation::relu);
        c.post.push_back(std::move(y));
        cur = &c.post.back();
    }
    c.out = Tensor({cur->rows(), vp.spec.input});
    kn::affine_forward(*cur, vp.params.at("ow"), vp.params.at("ob"), c.out);
    kn::apply_activation(c.out, Activation::sigmoid);
}

double bce_row(const double* x, const double* xhat, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        const double p = std::clamp(xhat[j], kBceEps, 1.0 - kBceEps);
        s -= x[j] * std::log(p) + (1.0 - x[j]) * std::log(1.0 - p);
    }
    return s;
}

double kl_row(const double* mu, const double* lv, std::size_t d) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        s += 1.0 + lv[j] - mu[j] * mu[j] - std::exp(lv[j]);
    return -0.5 * s;
}

} // namespace

VaeParams vae_init(const VaeSpec& spec, Rng& rng) {
    VaeParams vp;
    vp.spec = spec;
    std::size_t prev = spec.input;
    for (std::size_t l = 0; l < spec.enc_hidden.size(); ++l) {
        vp.params.emplace(ew(l), glorot(spec.enc_hidden[l], prev, rng));
        vp.params.emplace(eb(l), Tensor({spec.enc_hidden[l]}));
        prev = spec.enc_hidden[l];
    }
    vp.params.emplace("mw", glorot(spec.latent, prev, rng));
    vp.params.emplace("mb", Tensor({spec.latent}));
    vp.params.emplace("vw", glorot(spec.latent, prev, rng));
    vp.params.emplace("vb", Tensor({spec.latent}));
    prev = spec.latent;
    for (std::size_t l = 0; l < spec.dec_hidden.size(); ++l) {
        vp.params.emplace(dw(l), glorot(spec.dec_hidden[l], prev, rng));
        vp.params.emplace(db(l), Tensor({spec.dec_hidden[l]}));
        prev = spec.dec_hidden[l];
    }
    vp.params.emplace("ow", glorot(spec.input, prev, rng));
    vp.params.emplace("ob", Tensor({spec.input}));
    return vp;
}

void vae_encode(const VaeParams& vp, const Tensor& x, Tensor& mu, Tensor& logvar) {
    EncCache c;
    encode_cached(vp, x, c);
    mu = std::move(c.mu);
    logvar = std::move(c.logvar);
}

Tensor vae_decode(const VaeParams& vp, const Tensor& z) {
    DecCache c;
    decode_cached(vp, z, c);
    return std::move(c.out);
}

VaeLoss vae_loss(const VaeParams& vp, const Tensor& x) {
    EncCache ec;
    encode_cached(vp, x, ec);
    DecCache dc;
    decode_cached(vp, ec.mu, dc);
    const std::size_t n = x.rows();
    VaeLoss loss;
    for (std::size_t r = 0; r < n; ++r) {
        loss.recon += bce_row(x.row(r), dc.out.row(r), x.cols());
        loss.kl += kl_row(ec.mu.row(r), ec.logvar.row(r), vp.spec.latent);
    }
    loss.recon /= static_cast<double>(n);
    loss.kl /= static_cast<double>(n);
    loss.total = loss.recon + loss.kl;
    if (!std::isfinite(loss.total))
        throw TrainingDiverged("vae loss", "non-finite loss value");
    return loss;
}

Tensor vae_sample(const VaeParams& vp, std::size_t n, Rng& rng) {
    Tensor z({n, vp.spec.latent});
    for (double& v : z.values()) v = rng.normal();
    if (n == 0) return Tensor({0, vp.spec.input});
    return vae_decode(vp, z);
}

Tensor vae_reconstruct(const VaeParams& vp, const Tensor& x) {
    EncCache ec;
    encode_cached(vp, x, ec);
    return vae_decode(vp, ec.mu);
}

std::vector<double> recons_losses(const VaeParams& vp, const Tensor& x) {
    Tensor xhat = vae_reconstruct(vp, x);
    std::vector<double> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r)
        out[r] = bce_row(x.row(r), xhat.row(r), x.cols());
    return out;
}

double recons_loss(const VaeParams& vp, const Tensor& x_single) {
    Tensor x = x_single;
    if (x.rank() == 1) x = Tensor({1, x_single.size()}, x_single.values());
    return recons_losses(vp, x)[0];
}

num::ParamSet elbo_gradients(const VaeParams& vp, const Tensor& x, const Tensor& eps,
                             VaeLoss* parts) {
    const std::size_t n = x.rows();
    if (n == 0) throw ShapeError("elbo_gradients: empty batch");
    if (eps.rows() != n || eps.cols() != vp.spec.latent)
        throw ShapeError("elbo_gradients: eps shape mismatch");
    const double invn = 1.0 / static_cast<double>(n);

    EncCache ec;
    encode_cached(vp, x, ec);

    // Reparameterize: z = mu + exp(logvar/2) * eps.
    Tensor sigma({n, vp.spec.latent});
    Tensor z({n, vp.spec.latent});
    for (std::size_t i = 0; i < z.size(); ++i) {
        sigma[i] = std::exp(0.5 * ec.logvar[i]);
        z[i] = ec.mu[i] + sigma[i] * eps[i];
    }

    DecCache dc;
    decode_cached(vp, z, dc);

    VaeLoss loss;
    for (std::size_t r = 0; r < n; ++r) {
        loss.recon += bce_row(x.row(r), dc.out.row(r), x.cols());
        loss.kl += kl_row(ec.mu.row(r), ec.logvar.row(r), vp.spec.latent);
    }
    loss.recon *= invn;
    loss.kl *= invn;
    loss.total = loss.recon + loss.kl;
    if (!std::isfinite(loss.total))
        throw TrainingDiverged("generator", "non-finite ELBO");
    if (parts) *parts = loss;

    ParamSet grads;
    for (const auto& [name, t] : vp.params) grads.emplace(name, Tensor(t.shape()));

    // Decoder output: sigmoid + BCE fuse to (xhat - x)/n.
    Tensor delta({n, vp.spec.input});
    for (std::size_t i = 0; i < delta.size(); ++i)
        delta[i] = (dc.out[i] - x[i]) * invn;

    // Back through decoder trunk down to dz.
    Tensor dz({n, vp.spec.latent});
    {
        const std::size_t L = vp.spec.dec_hidden.size();
        const Tensor& last_in = L == 0 ? z : dc.post[L - 1];
        Tensor dx({last_in.rows(), last_in.cols()});
        kn::affine_backward(last_in, vp.params.at("ow"), delta, grads.at("ow"),
                            grads.at("ob"), &dx);
        for (std::size_t l = L; l-- > 0;) {
            kn::activation_backward_inplace(dx, dc.post[l], Activation::relu);
            const Tensor& input = l == 0 ? z : dc.post[l - 1];
            Tensor dprev({input.rows(), input.cols()});
            kn::affine_backward(input, vp.params.at(dw(l)), dx, grads.at(dw(l)),
                                grads.at(db(l)), &dprev);
            dx = std::move(dprev);
        }
        dz = std::move(dx);
    }

    // Heads: dmu = dz + mu/n (KL), dlogvar = 0.5*dz*eps*sigma + (exp(lv)-1)/(2n).
    Tensor dmu({n, vp.spec.latent});
    Tensor dlv({n, vp.spec.latent});
    for (std::size_t i = 0; i < dmu.size(); ++i) {
        dmu[i] = dz[i] + ec.mu[i] * invn;
        dlv[i] = 0.5 * dz[i] * eps[i] * sigma[i] + 0.5 * (std::exp(ec.logvar[i]) - 1.0) * invn;
    }

    // Back through encoder trunk.
    {
        const std::size_t L = vp.spec.enc_hidden.size();
        const Tensor& head_in = L == 0 ? x : ec.post[L - 1];
        Tensor dh({head_in.rows(), head_in.cols()});
        kn::affine_backward(head_in, vp.params.at("mw"), dmu, grads.at("mw"), grads.at("mb"),
                            &dh);
        Tensor dh2({head_in.rows(), head_in.cols()});
        kn::affine_backward(head_in, vp.params.at("vw"), dlv, grads.at("vw"), grads.at("vb"),
                            &dh2);
        for (std::size_t i = 0; i < dh.size(); ++i) dh[i] += dh2[i];
        for (std::size_t l = L; l-- > 0;) {
            kn::activation_backward_inplace(dh, ec.post[l], Activation::relu);
            const Tensor& input = l == 0 ? x : ec.post[l - 1];
            Tensor dprev;
            const bool need_prev = l > 0;
            if (need_prev) dprev = Tensor({input.rows(), input.cols()});
            kn::affine_backward(input, vp.params.at(ew(l)), dh, grads.at(ew(l)),
                                grads.at(eb(l)), need_prev ? &dprev : nullptr);
            if (need_prev) dh = std::move(dprev);
        }
    }
    return grads;
}

void vae_train(VaeParams& vp, const Tensor& x, std::size_t epochs,
               num::OptimizerState& opt, Rng& rng, std::size_t batch_size) {
    const std::size_t n = x.rows();
    if (n == 0 || epochs == 0) return;
    Rng shuffle_rng = rng.substream("shuffle");
    Rng latent_rng = rng.substream("latent");
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < n; start += batch_size) {
            const std::size_t count = std::min(batch_size, n - start);
            Tensor xb = x.gather_rows(
                std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(start),
                                         order.begin() + static_cast<std::ptrdiff_t>(start + count)));
            Tensor eps({count, vp.spec.latent});
            for (double& v : eps.values()) v = latent_rng.normal();
            ParamSet grads = elbo_gradients(vp, xb, eps);
            num::rmsprop_step(vp.params, grads, opt);
        }
        num::check_finite(vp.params, "generator");
    }
}

} // namespace dgdmn
