#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mftd/fem.hpp"
#include "mftd/filter.hpp"
#include "mftd/geometry.hpp"
#include "mftd/mma.hpp"

namespace mftd {

// Stress relaxation eta(rho) = rho^q applied to every component equally.
double relaxation_eta(double rho_tilde, double q);

// Overflow-safe p-norm of a nonnegative vector: max-factored evaluation
// m * (sum (v/m)^P)^(1/P). Returns 0 for the all-zero vector.
double pnorm(std::span<const double> values, double P,
             kernels::Exec exec = kernels::Exec::Parallel);

struct ContinuationSchedule {
  std::vector<double> values{8.0, 16.0, 32.0};
  int steps_per_stage = 30;

  // 1-based iteration; stage advances after each steps_per_stage block and
  // holds the last value afterwards.
  double value_at(int iteration) const;
  bool stage_boundary(int iteration) const;  // true when P changed at this iteration
  void validate(int max_iterations) const;
};

struct LowFiConfig {
  double volume_fraction = 0.335;  // Vbar / Vmax
  int max_iterations = 200;
  double move_limit = 0.05;
  ContinuationSchedule schedule;
  double fixed_pnorm = 0.0;  // > 0 disables continuation (comparison runs)
  MaterialModel material;
  double filter_radius = 0.05;
  double solver_tol = 1e-10;
  int solver_max_iter = 20000;
  bool volume_on_filtered = true;

  void validate() const;
};

struct LowFiHistoryRow {
  int iteration = 0;
  double P = 0, sigma_pn = 0, max_relaxed_vm = 0, volume_fraction = 0;
};

struct LowFiResult {
  DensityField rho;  // raw design densities (active layout, non-design = 1)
  std::vector<LowFiHistoryRow> history;
  double final_sigma_pn = 0, final_max_relaxed_vm = 0, final_volume_fraction = 0;
};

struct ObjectiveEval {
  double sigma_pn = 0;
  double max_relaxed_vm = 0;
  double volume_fraction = 0;             // V / Vmax on the physical densities
  std::vector<double> grad;               // d sigma_pn / d rho, design cells
  std::vector<double> volume_grad;        // d (V/Vmax) / d rho, design cells
  fem::SolveReport solve_report;
};

// Bundles grid, boundary conditions, stiffness pattern and filter for
// repeated evaluations; keeps warm-start vectors for the state and adjoint
// solves. One instance per optimization run.
class LowFiProblem {
 public:
  LowFiProblem(const StructuredGrid& grid, const LowFiConfig& config);

  // p-norm of the relaxed von Mises stresses and, optionally, its adjoint
  // gradient chained through the filter.
  ObjectiveEval evaluate(std::span<const double> x_design, double P, bool want_grad,
                         kernels::Exec exec = kernels::Exec::Parallel);

  const StructuredGrid& grid() const { return *grid_; }
  const FilterOperator& filter() const { return filter_; }
  const BCSet& bcs() const { return bcs_; }

 private:
  const StructuredGrid* grid_;
  LowFiConfig config_;
  BCSet bcs_;
  FilterOperator filter_;
  fem::LinearSystem system_;
  std::vector<double> load_;
  std::vector<double> u_warm_, lambda_warm_;
};

LowFiResult run_lowfi(const StructuredGrid& grid, const LowFiConfig& config,
                      std::span<const double> initial_design,
                      kernels::Exec exec = kernels::Exec::Parallel);

struct SeedSpec {
  std::vector<double> volume_fractions{0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50};
  int seed_count = 7;
  std::uint64_t master_seed = 0;
};

struct SeedResult {
  std::vector<LowFiResult> seeds;          // survivors, in seed-index order
  std::vector<int> seed_indices;           // original index per survivor
  std::vector<double> fractions;           // volume bound per survivor
  std::vector<std::string> failures;       // messages for dropped runs
};

// One run per seed index; fraction cycles through the list, the homogeneous
// start value is perturbed deterministically per seed index. Runs execute
// concurrently. Throws if more than half the runs fail.
SeedResult seed_population(const StructuredGrid& grid, const LowFiConfig& base,
                           const SeedSpec& spec);

}  // namespace mftd
