#include "mftd/lowfi.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mftd/rng.hpp"

namespace mftd {

using kernels::Exec;

double relaxation_eta(double rho_tilde, double q) { return std::pow(rho_tilde, q); }

double pnorm(std::span<const double> values, double P, Exec exec) {
  if (!(P >= 1)) throw std::invalid_argument("pnorm: P must be >= 1");
  const double m = kernels::max_val(values, exec);
  if (!(m > 0)) return 0.0;
  // chunked like the other reductions so thread count cannot change the sum
  const std::size_t n = values.size();
  const std::size_t nchunks = (n + kernels::kChunk - 1) / kernels::kChunk;
  std::vector<double> partial(nchunks, 0.0);
  const long long nc = static_cast<long long>(nchunks);
  auto body = [&](long long c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kernels::kChunk;
    const std::size_t hi = std::min(lo + kernels::kChunk, n);
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += std::pow(values[i] / m, P);
    partial[c] = s;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < nc; ++c) body(c);
  } else {
    for (long long c = 0; c < nc; ++c) body(c);
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return m * std::pow(total, 1.0 / P);
}

double ContinuationSchedule::value_at(int iteration) const {
  const int stage = std::min(static_cast<int>(values.size()) - 1,
                             (std::max(iteration, 1) - 1) / steps_per_stage);
  return values[stage];
}

bool ContinuationSchedule::stage_boundary(int iteration) const {
  return iteration > 1 && value_at(iteration) != value_at(iteration - 1);
}

void ContinuationSchedule::validate(int max_iterations) const {
  if (values.empty()) throw std::invalid_argument("schedule: empty P list");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 1)) throw std::invalid_argument("schedule: P values must be >= 1");
    if (i && !(values[i] > values[i - 1]))
      throw std::invalid_argument("schedule: P values must be strictly increasing");
  }
  if (steps_per_stage <= 0) throw std::invalid_argument("schedule: steps_per_stage must be > 0");
  if (static_cast<int>(values.size()) * steps_per_stage > std::max(max_iterations, 1) &&
      values.size() > 1)
    throw std::invalid_argument("schedule: stages x interval exceed max iterations");
}

void LowFiConfig::validate() const {
  if (!(volume_fraction > 0 && volume_fraction <= 1))
    throw std::invalid_argument("lowfi: volume fraction must be in (0,1]");
  if (!(move_limit > 0 && move_limit <= 1))
    throw std::invalid_argument("lowfi: move limit must be in (0,1]");
  if (max_iterations < 0) throw std::invalid_argument("lowfi: negative iteration count");
  material.validate();
  if (fixed_pnorm == 0.0) schedule.validate(max_iterations);
  if (!(filter_radius > 0)) throw std::invalid_argument("lowfi: filter radius must be positive");
}

LowFiProblem::LowFiProblem(const StructuredGrid& grid, const LowFiConfig& config)
    : grid_(&grid),
      config_(config),
      bcs_(boundary_conditions(grid)),
      filter_(grid, config.filter_radius),
      system_(grid, bcs_.fixed_dofs, config.material.nu) {
  config_.validate();
  load_ = system_.load_vector(bcs_);
  u_warm_.assign(system_.n_free(), 0.0);
  lambda_warm_.assign(system_.n_free(), 0.0);
}

ObjectiveEval LowFiProblem::evaluate(std::span<const double> x_design, double P, bool want_grad,
                                     Exec exec) {
  const auto& grid = *grid_;
  const auto& mat = config_.material;
  const int ne = grid.n_active();
  const int nd = grid.n_design();
  if (static_cast<int>(x_design.size()) != nd)
    throw std::invalid_argument("evaluate: design vector length mismatch");

  ObjectiveEval out;

  // filter; physical densities
  std::vector<double> rho = design_to_active(grid, x_design);
  std::vector<double> rho_tilde(ne);
  filter_.apply(rho, rho_tilde, exec);

  // equilibrium
  const std::vector<double> e_mod = fem::simp_modulus(rho_tilde, mat, exec);
  system_.assemble(e_mod, exec);
  out.solve_report =
      fem::pcg_solve(system_.matrix(), load_, u_warm_, config_.solver_tol,
                     config_.solver_max_iter, exec);
  const std::vector<double> u_full = system_.expand(u_warm_);

  // solid-modulus stresses, relaxed per element
  const fem::StressField stress = fem::element_stresses(grid, u_full, mat.E0, mat.nu, exec);
  std::vector<double> relaxed(ne), eta(ne);
  for (int e = 0; e < ne; ++e) {
    eta[e] = relaxation_eta(rho_tilde[e], mat.q);
    relaxed[e] = eta[e] * stress.vm[e];
  }
  out.sigma_pn = pnorm(relaxed, P, exec);
  out.max_relaxed_vm = kernels::max_val(relaxed, exec);

  // volume on physical densities (optionally on raw design densities)
  const double vmax = grid.geom.area();
  const double cell_area = grid.cell_area();
  const std::vector<double>& vol_rho = config_.volume_on_filtered ? rho_tilde : rho;
  out.volume_fraction = cell_area * kernels::sum(vol_rho, exec) / vmax;

  if (!want_grad) return out;

  // d sigma_pn / d sigma_hat_e = (sigma_hat_e / sigma_pn)^(P-1); the ratio is
  // <= 1 because the p-norm dominates the max.
  std::vector<double> w(ne, 0.0);
  if (out.sigma_pn > 0) {
    for (int e = 0; e < ne; ++e)
      if (relaxed[e] > 0) w[e] = std::pow(relaxed[e] / out.sigma_pn, P - 1.0);
  }

  // Explicit eta-term and adjoint right-hand side.
  const auto D = fem::constitutive(mat.E0, mat.nu);
  const auto B = fem::centroid_b_matrix(grid.element_size);
  std::vector<double> g_rho_tilde(ne, 0.0);
  std::vector<double> rhs_full(2 * grid.n_nodes(), 0.0);
  for (int e = 0; e < ne; ++e) {
    if (w[e] == 0.0) continue;
    // deta/drho_tilde * sigma_vm
    g_rho_tilde[e] += w[e] * mat.q * std::pow(rho_tilde[e], mat.q - 1.0) * stress.vm[e];
    if (stress.vm[e] <= 0) continue;
    // d sigma_vm / d u_e = B^T D (M sigma) / sigma_vm
    const double sx = stress.sx[e], sy = stress.sy[e], txy = stress.txy[e];
    const double ms[3] = {sx - 0.5 * sy, sy - 0.5 * sx, 3.0 * txy};
    double dm[3];
    for (int r = 0; r < 3; ++r)
      dm[r] = D[r * 3] * ms[0] + D[r * 3 + 1] * ms[1] + D[r * 3 + 2] * ms[2];
    const double coef = w[e] * eta[e] / stress.vm[e];
    for (int c = 0; c < 8; ++c) {
      const double val = coef * (B[c] * dm[0] + B[8 + c] * dm[1] + B[16 + c] * dm[2]);
      const int node = grid.conn[e][c / 2];
      rhs_full[2 * node + (c & 1)] += val;
    }
  }

  // adjoint solve K lambda = d sigma_pn / d u
  std::vector<double> rhs_free = system_.restrict_to_free(rhs_full);
  fem::pcg_solve(system_.matrix(), rhs_free, lambda_warm_, config_.solver_tol,
                 config_.solver_max_iter, exec);
  const std::vector<double> lam_full = system_.expand(lambda_warm_);

  // implicit term: - lambda^T dK/drho_tilde u = -dE/drho_tilde (lambda_e^T K0 u_e)
  const auto& ke = system_.ke_unit();
  const double dE = mat.E0 - mat.Emin;
  const long long nel = ne;
  auto implicit_body = [&](long long e) {
    double ue[8], le[8];
    for (int a = 0; a < 4; ++a) {
      const int node = grid.conn[e][a];
      ue[2 * a] = u_full[2 * node];
      ue[2 * a + 1] = u_full[2 * node + 1];
      le[2 * a] = lam_full[2 * node];
      le[2 * a + 1] = lam_full[2 * node + 1];
    }
    double lKu = 0.0;
    for (int i = 0; i < 8; ++i) {
      double s = 0.0;
      for (int j = 0; j < 8; ++j) s += ke[i * 8 + j] * ue[j];
      lKu += le[i] * s;
    }
    const double dEdrho = mat.p * std::pow(rho_tilde[e], mat.p - 1.0) * dE;
    g_rho_tilde[e] -= dEdrho * lKu;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long e = 0; e < nel; ++e) implicit_body(e);
  } else {
    for (long long e = 0; e < nel; ++e) implicit_body(e);
  }

  // chain through the filter; pinned (non-design) filtered values carry no
  // sensitivity
  for (int e = 0; e < ne; ++e)
    if (!grid.is_design[e]) g_rho_tilde[e] = 0.0;
  std::vector<double> g_rho(ne);
  filter_.apply_transpose(g_rho_tilde, g_rho, exec);
  out.grad = active_to_design_vec(grid, g_rho);

  // volume gradient
  std::vector<double> v_sens(ne, cell_area / vmax);
  if (config_.volume_on_filtered) {
    for (int e = 0; e < ne; ++e)
      if (!grid.is_design[e]) v_sens[e] = 0.0;
    std::vector<double> v_chain(ne);
    filter_.apply_transpose(v_sens, v_chain, exec);
    out.volume_grad = active_to_design_vec(grid, v_chain);
  } else {
    out.volume_grad = active_to_design_vec(grid, v_sens);
  }
  return out;
}

LowFiResult run_lowfi(const StructuredGrid& grid, const LowFiConfig& config,
                      std::span<const double> initial_design, Exec exec) {
  config.validate();
  LowFiProblem problem(grid, config);
  const int nd = grid.n_design();
  if (static_cast<int>(initial_design.size()) != nd)
    throw std::invalid_argument("run_lowfi: initial design length mismatch");

  std::vector<double> x(initial_design.begin(), initial_design.end());
  for (double& v : x) v = std::clamp(v, 0.0, 1.0);

  MmaOptions mopts;
  mopts.move_limit = config.move_limit;
  MmaSolver mma(nd, 0.0, 1.0, mopts);

  LowFiResult result;
  result.history.reserve(config.max_iterations);
  const double vf = config.volume_fraction;

  for (int it = 1; it <= config.max_iterations; ++it) {
    const double P = config.fixed_pnorm > 0 ? config.fixed_pnorm : config.schedule.value_at(it);
    if (config.fixed_pnorm == 0 && config.schedule.stage_boundary(it)) mma.reset();

    ObjectiveEval eval = problem.evaluate(x, P, /*want_grad=*/true, exec);
    result.history.push_back({it, P, eval.sigma_pn, eval.max_relaxed_vm, eval.volume_fraction});

    // constraint g = V/Vbar - 1 <= 0
    const double g = eval.volume_fraction / vf - 1.0;
    std::vector<double> dg(nd);
    for (int j = 0; j < nd; ++j) dg[j] = eval.volume_grad[j] / vf;
    x = mma.update(x, eval.grad, g, dg);
  }

  ObjectiveEval final_eval = problem.evaluate(
      x, config.fixed_pnorm > 0 ? config.fixed_pnorm : config.schedule.value_at(config.max_iterations),
      /*want_grad=*/false, exec);
  result.final_sigma_pn = final_eval.sigma_pn;
  result.final_max_relaxed_vm = final_eval.max_relaxed_vm;
  result.final_volume_fraction = final_eval.volume_fraction;
  result.rho.rho = design_to_active(grid, x);
  validate_density(grid, result.rho.rho);
  return result;
}

SeedResult seed_population(const StructuredGrid& grid, const LowFiConfig& base,
                           const SeedSpec& spec) {
  if (spec.volume_fractions.empty())
    throw std::invalid_argument("seed_population: empty fraction list");
  if (spec.seed_count <= 0) throw std::invalid_argument("seed_population: seed count must be > 0");

  const int nf = static_cast<int>(spec.volume_fractions.size());
  struct Slot {
    bool ok = false;
    LowFiResult result;
    double fraction = 0;
    std::string error;
  };
  std::vector<Slot> slots(spec.seed_count);

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < spec.seed_count; ++i) {
    const double fraction = spec.volume_fractions[i % nf];
    const int variant = i / nf;
    LowFiConfig cfg = base;
    cfg.volume_fraction = fraction;
    // homogeneous start; variants scale the start value deterministically
    double start = fraction;
    if (variant > 0) {
      RandomStream rs(split_seed(spec.master_seed, "lowfi_start", static_cast<std::uint64_t>(i)));
      start = std::clamp(fraction * rs.uniform(0.5, 1.5), 0.05, 0.95);
    }
    try {
      std::vector<double> x0(grid.n_design(), start);
      slots[i].result = run_lowfi(grid, cfg, x0);
      slots[i].fraction = fraction;
      slots[i].ok = true;
    } catch (const std::exception& e) {
      slots[i].error = "seed " + std::to_string(i) + ": " + e.what();
    }
  }

  SeedResult out;
  for (int i = 0; i < spec.seed_count; ++i) {
    if (slots[i].ok) {
      out.seeds.push_back(std::move(slots[i].result));
      out.seed_indices.push_back(i);
      out.fractions.push_back(slots[i].fraction);
    } else {
      out.failures.push_back(slots[i].error);
    }
  }
  if (out.seeds.size() * 2 < static_cast<std::size_t>(spec.seed_count))
    throw std::runtime_error("seed_population: more than half the runs failed (" +
                             std::to_string(out.failures.size()) + " of " +
                             std::to_string(spec.seed_count) + ")");
  return out;
}

}  // namespace mftd
