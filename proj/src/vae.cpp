#include "mftd/vae.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace mftd {

using kernels::Exec;
using nlohmann::json;

namespace {

double stable_sigmoid(double a) {
  if (a >= 0) return 1.0 / (1.0 + std::exp(-a));
  const double e = std::exp(a);
  return e / (1.0 + e);
}

double softplus(double a) { return a > 0 ? a + std::log1p(std::exp(-a)) : std::log1p(std::exp(a)); }

void elementwise_tanh(std::span<double> a, Exec exec) {
  const long long n = static_cast<long long>(a.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) a[i] = std::tanh(a[i]);
  } else {
    for (long long i = 0; i < n; ++i) a[i] = std::tanh(a[i]);
  }
}

std::vector<std::vector<double>*> flat_views(VaeParams& p) {
  return {&p.We, &p.be, &p.Wmu, &p.bmu, &p.Wlv, &p.blv, &p.Wd, &p.bd, &p.Wo, &p.bo};
}

std::vector<const std::vector<double>*> flat_views(const VaeParams& p) {
  return {&p.We, &p.be, &p.Wmu, &p.bmu, &p.Wlv, &p.blv, &p.Wd, &p.bd, &p.Wo, &p.bo};
}

void colsum(std::span<const double> M, int rows, int cols, std::span<double> out) {
  for (int c = 0; c < cols; ++c) out[c] = 0.0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) out[c] += M[static_cast<std::size_t>(r) * cols + c];
}

}  // namespace

void VaeDims::validate() const {
  if (input <= 0 || hidden <= 0 || latent <= 0)
    throw std::invalid_argument("vae: dimensions must be positive");
}

void VaeTrainConfig::validate() const {
  if (epochs <= 0 || batch_size <= 0 || !(learning_rate > 0) || kl_weight < 0)
    throw std::invalid_argument("vae: invalid training configuration");
}

std::size_t VaeParams::parameter_count() const {
  std::size_t n = 0;
  for (const auto* t : flat_views(*this)) n += t->size();
  return n;
}

bool VaeParams::finite() const {
  for (const auto* t : flat_views(*this))
    for (double v : *t)
      if (!std::isfinite(v)) return false;
  return true;
}

VaeParams vae_init(const VaeDims& dims, RandomStream& rng) {
  dims.validate();
  VaeParams p;
  p.dims = dims;
  auto he = [&](std::vector<double>& W, int out, int in) {
    W.resize(static_cast<std::size_t>(out) * in);
    const double s = std::sqrt(2.0 / in);
    for (auto& v : W) v = s * rng.gauss();
  };
  he(p.We, dims.hidden, dims.input);
  p.be.assign(dims.hidden, 0.0);
  he(p.Wmu, dims.latent, dims.hidden);
  p.bmu.assign(dims.latent, 0.0);
  he(p.Wlv, dims.latent, dims.hidden);
  p.blv.assign(dims.latent, 0.0);
  he(p.Wd, dims.hidden, dims.latent);
  p.bd.assign(dims.hidden, 0.0);
  he(p.Wo, dims.input, dims.hidden);
  p.bo.assign(dims.input, 0.0);
  return p;
}

void vae_encode(const VaeParams& params, std::span<const double> x, std::span<double> mu,
                std::span<double> sigma, Exec exec) {
  const auto& d = params.dims;
  if (static_cast<int>(x.size()) != d.input) throw std::invalid_argument("encode: input length");
  std::vector<double> h(d.hidden);
  kernels::matmul_nt(x, params.We, params.be, h, 1, d.input, d.hidden, exec);
  elementwise_tanh(h, exec);
  kernels::matmul_nt(h, params.Wmu, params.bmu, mu, 1, d.hidden, d.latent, exec);
  std::vector<double> lv(d.latent);
  kernels::matmul_nt(h, params.Wlv, params.blv, lv, 1, d.hidden, d.latent, exec);
  for (int k = 0; k < d.latent; ++k) sigma[k] = std::exp(0.5 * lv[k]);
}

std::vector<double> reparameterize(std::span<const double> mu, std::span<const double> sigma,
                                   std::span<const double> eps) {
  if (mu.size() != sigma.size() || mu.size() != eps.size())
    throw std::invalid_argument("reparameterize: shape mismatch");
  std::vector<double> z(mu.size());
  for (std::size_t k = 0; k < z.size(); ++k) z[k] = mu[k] + sigma[k] * eps[k];
  return z;
}

std::vector<double> vae_decode(const VaeParams& params, std::span<const double> z, Exec exec) {
  const auto& d = params.dims;
  if (static_cast<int>(z.size()) != d.latent) throw std::invalid_argument("decode: latent length");
  std::vector<double> h(d.hidden);
  kernels::matmul_nt(z, params.Wd, params.bd, h, 1, d.latent, d.hidden, exec);
  elementwise_tanh(h, exec);
  std::vector<double> y(d.input);
  kernels::matmul_nt(h, params.Wo, params.bo, y, 1, d.hidden, d.input, exec);
  for (auto& v : y) v = std::clamp(stable_sigmoid(v), 1e-12, 1.0 - 1e-12);
  return y;
}

VaeLoss vae_loss_and_grad(const VaeParams& params, std::span<const double> batch, int B,
                          std::span<const double> eps, double kl_weight, VaeParams* grad,
                          Exec exec) {
  const auto& d = params.dims;
  const int n = d.input, H = d.hidden, Z = d.latent;
  if (batch.size() != static_cast<std::size_t>(B) * n)
    throw std::invalid_argument("vae loss: batch shape");
  if (eps.size() != static_cast<std::size_t>(B) * Z)
    throw std::invalid_argument("vae loss: eps shape");

  // forward
  std::vector<double> A1(static_cast<std::size_t>(B) * H);
  kernels::matmul_nt(batch, params.We, params.be, A1, B, n, H, exec);
  std::vector<double> H1 = A1;
  elementwise_tanh(H1, exec);

  std::vector<double> Mu(static_cast<std::size_t>(B) * Z), Lv(Mu.size()), Sig(Mu.size()),
      Zs(Mu.size());
  kernels::matmul_nt(H1, params.Wmu, params.bmu, Mu, B, H, Z, exec);
  kernels::matmul_nt(H1, params.Wlv, params.blv, Lv, B, H, Z, exec);
  for (std::size_t i = 0; i < Sig.size(); ++i) {
    Sig[i] = std::exp(0.5 * Lv[i]);
    Zs[i] = Mu[i] + Sig[i] * eps[i];
  }

  std::vector<double> A2(static_cast<std::size_t>(B) * H);
  kernels::matmul_nt(Zs, params.Wd, params.bd, A2, B, Z, H, exec);
  std::vector<double> H2 = A2;
  elementwise_tanh(H2, exec);

  std::vector<double> A3(static_cast<std::size_t>(B) * n);
  kernels::matmul_nt(H2, params.Wo, params.bo, A3, B, H, n, exec);

  VaeLoss loss;
  {
    double recon = 0.0, kl = 0.0;
    for (std::size_t i = 0; i < A3.size(); ++i) recon += softplus(A3[i]) - batch[i] * A3[i];
    for (std::size_t i = 0; i < Mu.size(); ++i)
      kl += -0.5 * (1.0 + Lv[i] - Mu[i] * Mu[i] - std::exp(Lv[i]));
    loss.reconstruction = recon / B;
    loss.kl = kl / B;
    loss.total = loss.reconstruction + kl_weight * loss.kl;
  }
  if (grad == nullptr) return loss;

  // backward
  VaeParams& g = *grad;
  g.dims = d;
  g.We.assign(params.We.size(), 0.0);
  g.be.assign(params.be.size(), 0.0);
  g.Wmu.assign(params.Wmu.size(), 0.0);
  g.bmu.assign(params.bmu.size(), 0.0);
  g.Wlv.assign(params.Wlv.size(), 0.0);
  g.blv.assign(params.blv.size(), 0.0);
  g.Wd.assign(params.Wd.size(), 0.0);
  g.bd.assign(params.bd.size(), 0.0);
  g.Wo.assign(params.Wo.size(), 0.0);
  g.bo.assign(params.bo.size(), 0.0);

  std::vector<double> dA3(A3.size());
  for (std::size_t i = 0; i < A3.size(); ++i)
    dA3[i] = (stable_sigmoid(A3[i]) - batch[i]) / B;

  kernels::matmul_tn(dA3, H2, g.Wo, n, B, H, exec);
  colsum(dA3, B, n, g.bo);

  std::vector<double> dH2(static_cast<std::size_t>(B) * H);
  kernels::matmul_nn(dA3, params.Wo, dH2, B, n, H, exec);
  for (std::size_t i = 0; i < dH2.size(); ++i) dH2[i] *= 1.0 - H2[i] * H2[i];  // now dA2

  kernels::matmul_tn(dH2, Zs, g.Wd, H, B, Z, exec);
  colsum(dH2, B, H, g.bd);

  std::vector<double> dZs(static_cast<std::size_t>(B) * Z);
  kernels::matmul_nn(dH2, params.Wd, dZs, B, H, Z, exec);

  std::vector<double> dMu(dZs.size()), dLv(dZs.size());
  for (std::size_t i = 0; i < dZs.size(); ++i) {
    dMu[i] = dZs[i] + kl_weight * Mu[i] / B;
    dLv[i] = 0.5 * dZs[i] * eps[i] * Sig[i] + kl_weight * (std::exp(Lv[i]) - 1.0) / (2.0 * B);
  }

  kernels::matmul_tn(dMu, H1, g.Wmu, Z, B, H, exec);
  colsum(dMu, B, Z, g.bmu);
  kernels::matmul_tn(dLv, H1, g.Wlv, Z, B, H, exec);
  colsum(dLv, B, Z, g.blv);

  std::vector<double> dH1(static_cast<std::size_t>(B) * H), tmp(dH1.size());
  kernels::matmul_nn(dMu, params.Wmu, dH1, B, Z, H, exec);
  kernels::matmul_nn(dLv, params.Wlv, tmp, B, Z, H, exec);
  for (std::size_t i = 0; i < dH1.size(); ++i) dH1[i] = (dH1[i] + tmp[i]) * (1.0 - H1[i] * H1[i]);

  kernels::matmul_tn(dH1, batch, g.We, H, B, n, exec);
  colsum(dH1, B, H, g.be);
  return loss;
}

VaeTrainResult vae_train(const std::vector<std::vector<double>>& elites, const VaeDims& dims,
                         const VaeTrainConfig& config, Exec exec) {
  dims.validate();
  config.validate();
  if (elites.size() < 2) throw std::invalid_argument("vae_train: need at least 2 elites");
  for (const auto& e : elites)
    if (static_cast<int>(e.size()) != dims.input)
      throw std::invalid_argument("vae_train: elite length mismatch");

  RandomStream rng(config.seed);
  VaeTrainResult out;
  out.params = vae_init(dims, rng);

  // Adam state
  VaeParams m, v;
  m.dims = v.dims = dims;
  m.We.assign(out.params.We.size(), 0.0);
  m.be.assign(out.params.be.size(), 0.0);
  m.Wmu.assign(out.params.Wmu.size(), 0.0);
  m.bmu.assign(out.params.bmu.size(), 0.0);
  m.Wlv.assign(out.params.Wlv.size(), 0.0);
  m.blv.assign(out.params.blv.size(), 0.0);
  m.Wd.assign(out.params.Wd.size(), 0.0);
  m.bd.assign(out.params.bd.size(), 0.0);
  m.Wo.assign(out.params.Wo.size(), 0.0);
  m.bo.assign(out.params.bo.size(), 0.0);
  v = m;

  const int N = static_cast<int>(elites.size());
  const int bs = std::min(config.batch_size, N);
  std::vector<int> order(N);
  for (int i = 0; i < N; ++i) order[i] = i;

  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  long long step = 0;
  VaeParams grad;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates with the training stream
    for (int i = N - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(i + 1)));
      std::swap(order[i], order[j]);
    }
    double epoch_total = 0, epoch_recon = 0, epoch_kl = 0;
    int batches = 0;
    for (int start = 0; start < N; start += bs) {
      const int B = std::min(bs, N - start);
      std::vector<double> batch(static_cast<std::size_t>(B) * dims.input);
      for (int b = 0; b < B; ++b)
        std::copy(elites[order[start + b]].begin(), elites[order[start + b]].end(),
                  batch.begin() + static_cast<std::size_t>(b) * dims.input);
      std::vector<double> eps(static_cast<std::size_t>(B) * dims.latent);
      for (auto& e : eps) e = rng.gauss();

      const VaeLoss loss =
          vae_loss_and_grad(out.params, batch, B, eps, config.kl_weight, &grad, exec);
      if (!std::isfinite(loss.total)) {
        out.aborted = true;
        return out;
      }
      epoch_total += loss.total;
      epoch_recon += loss.reconstruction;
      epoch_kl += loss.kl;
      ++batches;

      ++step;
      const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
      auto pv = flat_views(out.params);
      auto gv = flat_views(const_cast<const VaeParams&>(grad));
      auto mv = flat_views(m);
      auto vv = flat_views(v);
      for (std::size_t t = 0; t < pv.size(); ++t) {
        auto& P = *pv[t];
        const auto& G = *gv[t];
        auto& M = *mv[t];
        auto& V = *vv[t];
        const long long sz = static_cast<long long>(P.size());
        auto body = [&](long long i) {
          M[i] = beta1 * M[i] + (1 - beta1) * G[i];
          V[i] = beta2 * V[i] + (1 - beta2) * G[i] * G[i];
          P[i] -= config.learning_rate * (M[i] / bc1) / (std::sqrt(V[i] / bc2) + adam_eps);
        };
        if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
          for (long long i = 0; i < sz; ++i) body(i);
        } else {
          for (long long i = 0; i < sz; ++i) body(i);
        }
      }
    }
    out.history.push_back(
        {epoch_total / batches, epoch_recon / batches, epoch_kl / batches});
  }
  return out;
}

std::vector<std::vector<double>> latent_crossover(const VaeParams& params,
                                                  const std::vector<std::vector<double>>& elites,
                                                  int offspring_count, RandomStream& rng,
                                                  Exec exec) {
  const auto& d = params.dims;
  if (elites.empty()) throw std::invalid_argument("latent_crossover: no elites");
  const int N = static_cast<int>(elites.size());

  // encoder means of all elites
  std::vector<std::vector<double>> mu(N);
  std::vector<double> sigma(d.latent);
  for (int i = 0; i < N; ++i) {
    mu[i].resize(d.latent);
    vae_encode(params, elites[i], mu[i], sigma, exec);
  }

  const int k = d.latent + 1;
  const bool simplex = N >= k;
  const double expansion = std::sqrt(static_cast<double>(d.latent) + 2.0);

  std::vector<std::vector<double>> offspring;
  offspring.reserve(offspring_count);
  std::vector<int> idx(N);
  for (int i = 0; i < N; ++i) idx[i] = i;

  for (int c = 0; c < offspring_count; ++c) {
    std::vector<double> z(d.latent, 0.0);
    if (simplex) {
      // k distinct parents by partial Fisher-Yates
      for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(N - i)));
        std::swap(idx[i], idx[j]);
      }
      std::vector<double> centroid(d.latent, 0.0);
      for (int i = 0; i < k; ++i)
        for (int t = 0; t < d.latent; ++t) centroid[t] += mu[idx[i]][t] / k;
      // uniform convex weights over the expanded vertices
      std::vector<double> wts(k);
      double wsum = 0.0;
      for (int i = 0; i < k; ++i) {
        wts[i] = -std::log(1.0 - rng.uniform());
        wsum += wts[i];
      }
      if (wsum <= 0) {
        std::fill(wts.begin(), wts.end(), 1.0);
        wsum = k;
      }
      for (int i = 0; i < k; ++i) {
        const double w = wts[i] / wsum;
        for (int t = 0; t < d.latent; ++t) {
          const double vertex = centroid[t] + expansion * (mu[idx[i]][t] - centroid[t]);
          z[t] += w * vertex;
        }
      }
    } else {
      const int a = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(N)));
      int b = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(N)));
      if (N > 1)
        while (b == a) b = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(N)));
      const double t = rng.uniform(-0.25, 1.25);
      for (int q = 0; q < d.latent; ++q) z[q] = t * mu[a][q] + (1.0 - t) * mu[b][q];
    }
    std::vector<double> y = vae_decode(params, z, exec);
    for (auto& val : y) val = std::clamp(val, 0.0, 1.0);
    offspring.push_back(std::move(y));
  }
  return offspring;
}

std::string vae_serialize(const VaeParams& params) {
  json j;
  j["version"] = 1;
  j["dims"] = {{"input", params.dims.input},
               {"hidden", params.dims.hidden},
               {"latent", params.dims.latent}};
  const char* names[] = {"We", "be", "Wmu", "bmu", "Wlv", "blv", "Wd", "bd", "Wo", "bo"};
  auto views = flat_views(params);
  for (std::size_t t = 0; t < views.size(); ++t) j[names[t]] = *views[t];
  return j.dump();
}

VaeParams vae_deserialize(const std::string& blob) {
  const json j = json::parse(blob);
  if (!j.contains("version") || j["version"].get<int>() != 1)
    throw std::runtime_error("vae blob: unsupported version");
  VaeParams p;
  p.dims.input = j["dims"]["input"].get<int>();
  p.dims.hidden = j["dims"]["hidden"].get<int>();
  p.dims.latent = j["dims"]["latent"].get<int>();
  p.dims.validate();
  const char* names[] = {"We", "be", "Wmu", "bmu", "Wlv", "blv", "Wd", "bd", "Wo", "bo"};
  auto views = flat_views(p);
  for (std::size_t t = 0; t < views.size(); ++t)
    *views[t] = j[names[t]].get<std::vector<double>>();
  const auto& d = p.dims;
  const std::size_t expect[] = {static_cast<std::size_t>(d.hidden) * d.input,
                                static_cast<std::size_t>(d.hidden),
                                static_cast<std::size_t>(d.latent) * d.hidden,
                                static_cast<std::size_t>(d.latent),
                                static_cast<std::size_t>(d.latent) * d.hidden,
                                static_cast<std::size_t>(d.latent),
                                static_cast<std::size_t>(d.hidden) * d.latent,
                                static_cast<std::size_t>(d.hidden),
                                static_cast<std::size_t>(d.input) * d.hidden,
                                static_cast<std::size_t>(d.input)};
  for (std::size_t t = 0; t < views.size(); ++t)
    if (views[t]->size() != expect[t]) throw std::runtime_error("vae blob: tensor shape mismatch");
  return p;
}

}  // namespace mftd
