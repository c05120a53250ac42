#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mftd/kernels.hpp"
#include "mftd/rng.hpp"

namespace mftd {

struct VaeDims {
  int input = 0;
  int hidden = 128;
  int latent = 8;
  void validate() const;
};

// Multilayer-perceptron VAE: tanh hidden layers, affine mu/logvar heads,
// sigmoid output. Weights are row-major (out x in).
struct VaeParams {
  VaeDims dims;
  std::vector<double> We, be;      // input -> hidden
  std::vector<double> Wmu, bmu;    // hidden -> latent
  std::vector<double> Wlv, blv;    // hidden -> latent (log variance)
  std::vector<double> Wd, bd;      // latent -> hidden
  std::vector<double> Wo, bo;      // hidden -> input (pre-sigmoid)

  std::size_t parameter_count() const;
  bool finite() const;
};

struct VaeTrainConfig {
  int epochs = 200;
  int batch_size = 20;
  double learning_rate = 1e-3;
  double kl_weight = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

VaeParams vae_init(const VaeDims& dims, RandomStream& rng);

// mu and sigma (not logvar) for one input vector.
void vae_encode(const VaeParams& params, std::span<const double> x, std::span<double> mu,
                std::span<double> sigma, kernels::Exec exec = kernels::Exec::Parallel);

// z = mu + sigma o eps, exactly.
std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> sigma,
                                   std::span<const double> eps);

// Decoded densities, strictly inside (0,1).
std::vector<double> vae_decode(const VaeParams& params, std::span<const double> z,
                               kernels::Exec exec = kernels::Exec::Parallel);

struct VaeLoss {
  double total = 0, reconstruction = 0, kl = 0;
};

// Mean-per-sample loss and parameter gradients for a batch with fixed noise
// (batch x latent). Exposed so tests can difference it; train() drives it.
VaeLoss vae_loss_and_grad(const VaeParams& params, std::span<const double> batch, int batch_rows,
                          std::span<const double> eps, double kl_weight, VaeParams* grad,
                          kernels::Exec exec = kernels::Exec::Parallel);

struct VaeTrainResult {
  VaeParams params;
  std::vector<VaeLoss> history;  // one entry per epoch
  bool aborted = false;          // non-finite loss encountered
};

// Trains a freshly initialized model on the elite fields (inputs = targets)
// with adaptive-moment SGD. Deterministic for a fixed config seed.
VaeTrainResult vae_train(const std::vector<std::vector<double>>& elites, const VaeDims& dims,
                         const VaeTrainConfig& config,
                         kernels::Exec exec = kernels::Exec::Parallel);

// Simplex crossover over the elites' latent means: latent+1 distinct parents,
// expanded about their centroid by sqrt(latent+2), sampled by uniform convex
// recombination, decoded and clamped to [0,1]. Falls back to pairwise
// blending with t ~ U(-0.25, 1.25) when elites <= latent.
std::vector<std::vector<double>> latent_crossover(const VaeParams& params,
                                                  const std::vector<std::vector<double>>& elites,
                                                  int offspring_count, RandomStream& rng,
                                                  kernels::Exec exec = kernels::Exec::Parallel);

// Versioned parameter blob (JSON with a dims header).
std::string vae_serialize(const VaeParams& params);
VaeParams vae_deserialize(const std::string& blob);

}  // namespace mftd
