#pragma once

#include "dgdmn/numerics.hpp"
#include "dgdmn/rng.hpp"
#include "dgdmn/tensor.hpp"

#include <vector>

namespace dgdmn {

// Fully-connected variational autoencoder over inputs in [0,1]. The encoder
// trunk (relu) feeds mean and log-variance heads of width latent_dim; the
// decoder trunk (relu) ends in a sigmoid output of the input width.
//
// Parameter names: encoder trunk "ew<i>"/"eb<i>", heads "mw"/"mb" (mean) and
// "vw"/"vb" (log-variance), decoder trunk "dw<i>"/"db<i>", output "ow"/"ob".
struct VaeSpec {
    std::size_t input = 0;
    std::vector<std::size_t> enc_hidden;
    std::size_t latent = 0;
    std::vector<std::size_t> dec_hidden;
};

struct VaeParams {
    VaeSpec spec;
    num::ParamSet params;
};

struct VaeLoss {
    double total = 0.0;
    double recon = 0.0; // mean per-sample binary cross-entropy summed over pixels
    double kl = 0.0;    // mean per-sample -1/2 * sum(1 + logvar - mu^2 - var)
};

VaeParams vae_init(const VaeSpec& spec, Rng& rng);

// Posterior means and log-variances for a batch, (n x latent) each.
void vae_encode(const VaeParams& vp, const Tensor& x, Tensor& mu, Tensor& logvar);

// Decoder output for a batch of latent codes; values in (0,1).
Tensor vae_decode(const VaeParams& vp, const Tensor& z);

// Loss through the deterministic posterior-mean path (no latent noise).
VaeLoss vae_loss(const VaeParams& vp, const Tensor& x);

// n decoder outputs from z ~ N(0, I). n may be zero.
Tensor vae_sample(const VaeParams& vp, std::size_t n, Rng& rng);

// Deterministic reconstruction through z = mu.
Tensor vae_reconstruct(const VaeParams& vp, const Tensor& x);

// Per-sample binary cross-entropy between each row of x and its
// reconstruction; recons_loss is the single-sample form.
std::vector<double> recons_losses(const VaeParams& vp, const Tensor& x);
double recons_loss(const VaeParams& vp, const Tensor& x_single);

// Gradient of the sampled ELBO (recon through z = mu + sigma*eps, plus KL)
// w.r.t. every parameter, for a fixed noise tensor eps (n x latent).
num::ParamSet elbo_gradients(const VaeParams& vp, const Tensor& x, const Tensor& eps,
                             VaeLoss* parts = nullptr);

// Mini-batch RMSProp training of the ELBO; shuffles x each epoch and samples
// fresh latent noise per batch. Throws TrainingDiverged on non-finite state.
void vae_train(VaeParams& vp, const Tensor& x, std::size_t epochs,
               num::OptimizerState& opt, Rng& rng, std::size_t batch_size = 128);

} // namespace dgdmn
