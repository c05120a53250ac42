#pragma once

#include <span>
#include <vector>

namespace mftd {

struct MmaOptions {
  double move_limit = 0.05;
  double asy_init = 0.5;
  double asy_shrink = 0.7;
  double asy_grow = 1.2;
  double albefa = 0.1;     // bound offset fraction toward the asymptotes
  double raa0 = 1e-5;      // objective curvature floor
  double dual_tol = 1e-9;  // KKT residual on the subproblem dual
};

// Method of Moving Asymptotes specialized to one inequality constraint
// g(x) <= 0 with box bounds. The convex separable subproblem is solved
// exactly through its scalar dual.
class MmaSolver {
 public:
  MmaSolver(int n, double xmin, double xmax, MmaOptions opts = {});

  // One update from iterate x with objective gradient df0 and constraint
  // value/gradient (g, dg). Returns the new iterate; throws on an infeasible
  // subproblem, naming the constraint.
  std::vector<double> update(std::span<const double> x, std::span<const double> df0, double g,
                             std::span<const double> dg);

  // Forgets asymptote history (used when the objective is reshaped, e.g. at
  // p-norm continuation boundaries).
  void reset();

  double multiplier() const { return lambda_; }
  int iteration() const { return iter_; }
  const MmaOptions& options() const { return opts_; }

 private:
  int n_;
  double xmin_, xmax_;
  MmaOptions opts_;
  int iter_ = 0;
  double lambda_ = 0.0;
  std::vector<double> xold1_, xold2_, low_, upp_;
};

// Projected stationarity + complementarity + feasibility norm, for
// monitoring convergence of a run at iterate x with multiplier lambda.
double kkt_residual(std::span<const double> x, std::span<const double> df0, double g,
                    std::span<const double> dg, double lambda, double xmin, double xmax);

}  // namespace mftd
