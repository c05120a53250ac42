#include "mftd/mma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mftd {

MmaSolver::MmaSolver(int n, double xmin, double xmax, MmaOptions opts)
    : n_(n), xmin_(xmin), xmax_(xmax), opts_(opts) {
  if (!(xmax > xmin)) throw std::invalid_argument("mma: xmax must exceed xmin");
  if (!(opts.move_limit > 0 && opts.move_limit <= xmax - xmin))
    throw std::invalid_argument("mma: move limit out of range");
  xold1_.assign(n, 0.0);
  xold2_.assign(n, 0.0);
  low_.assign(n, 0.0);
  upp_.assign(n, 0.0);
}

void MmaSolver::reset() { iter_ = 0; }

std::vector<double> MmaSolver::update(std::span<const double> x, std::span<const double> df0,
                                      double g, std::span<const double> dg) {
  if (static_cast<int>(x.size()) != n_ || static_cast<int>(df0.size()) != n_ ||
      static_cast<int>(dg.size()) != n_)
    throw std::invalid_argument("mma: inconsistent vector lengths");
  for (int j = 0; j < n_; ++j)
    if (!std::isfinite(x[j]) || !std::isfinite(df0[j]) || !std::isfinite(dg[j]))
      throw std::invalid_argument("mma: non-finite input at variable " + std::to_string(j));
  if (!std::isfinite(g)) throw std::invalid_argument("mma: non-finite constraint value");

  const double range = xmax_ - xmin_;
  if (iter_ < 2) {
    for (int j = 0; j < n_; ++j) {
      low_[j] = x[j] - opts_.asy_init * range;
      upp_[j] = x[j] + opts_.asy_init * range;
    }
  } else {
    for (int j = 0; j < n_; ++j) {
      const double zz = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
      const double fac = zz > 0 ? opts_.asy_grow : (zz < 0 ? opts_.asy_shrink : 1.0);
      low_[j] = x[j] - fac * (xold1_[j] - low_[j]);
      upp_[j] = x[j] + fac * (upp_[j] - xold1_[j]);
      low_[j] = std::clamp(low_[j], x[j] - 10.0 * range, x[j] - 0.01 * range);
      upp_[j] = std::clamp(upp_[j], x[j] + 0.01 * range, x[j] + 10.0 * range);
    }
  }

  std::vector<double> alpha(n_), beta(n_), p0(n_), q0(n_), p1(n_), q1(n_);
  double r1 = g;
  for (int j = 0; j < n_; ++j) {
    alpha[j] = std::max({xmin_, low_[j] + opts_.albefa * (x[j] - low_[j]),
                         x[j] - opts_.move_limit});
    beta[j] = std::min({xmax_, upp_[j] - opts_.albefa * (upp_[j] - x[j]),
                        x[j] + opts_.move_limit});
    const double ux = upp_[j] - x[j], xl = x[j] - low_[j];
    const double df = df0[j];
    const double pq = 0.001 * std::abs(df) + opts_.raa0 / range;
    p0[j] = ux * ux * (std::max(df, 0.0) + pq);
    q0[j] = xl * xl * (std::max(-df, 0.0) + pq);
    // No curvature floor on the constraint: keeps the approximation an exact
    // majorant of a linear constraint, so accepted iterates stay feasible.
    p1[j] = ux * ux * std::max(dg[j], 0.0);
    q1[j] = xl * xl * std::max(-dg[j], 0.0);
    r1 -= p1[j] / ux + q1[j] / xl;
  }

  auto primal_for = [&](double lam, std::span<double> xs) {
    for (int j = 0; j < n_; ++j) {
      const double pj = p0[j] + lam * p1[j];
      const double qj = q0[j] + lam * q1[j];
      const double sp = std::sqrt(pj), sq = std::sqrt(qj);
      double xj = (sp + sq > 0) ? (low_[j] * sp + upp_[j] * sq) / (sp + sq)
                                : 0.5 * (alpha[j] + beta[j]);
      xs[j] = std::clamp(xj, alpha[j], beta[j]);
    }
  };
  auto constraint_at = [&](std::span<const double> xs) {
    double v = r1;
    for (int j = 0; j < n_; ++j)
      v += p1[j] / (upp_[j] - xs[j]) + q1[j] / (xs[j] - low_[j]);
    return v;
  };

  std::vector<double> xnew(n_);
  primal_for(0.0, xnew);
  double lam = 0.0;
  if (constraint_at(xnew) > opts_.dual_tol) {
    // The dual constraint value decreases monotonically in lambda; bracket
    // then bisect.
    double lo = 0.0, hi = 1.0;
    primal_for(hi, xnew);
    int guard = 0;
    while (constraint_at(xnew) > 0.0) {
      lo = hi;
      hi *= 10.0;
      if (++guard > 40)
        throw std::runtime_error(
            "mma: volume constraint unreachable within move limits (infeasible subproblem)");
      primal_for(hi, xnew);
    }
    for (int it = 0; it < 200; ++it) {
      lam = 0.5 * (lo + hi);
      primal_for(lam, xnew);
      const double c = constraint_at(xnew);
      if (std::abs(c) <= opts_.dual_tol || hi - lo <= 1e-15 * std::max(1.0, hi)) break;
      (c > 0 ? lo : hi) = lam;
    }
    primal_for(lam, xnew);
    if (constraint_at(xnew) > 0) {
      // land on the feasible side of the bracket
      lam = hi;
      primal_for(lam, xnew);
    }
  }

  lambda_ = lam;
  xold2_ = xold1_;
  xold1_.assign(x.begin(), x.end());
  ++iter_;
  return xnew;
}

double kkt_residual(std::span<const double> x, std::span<const double> df0, double g,
                    std::span<const double> dg, double lambda, double xmin, double xmax) {
  const double tolb = 1e-12 * (xmax - xmin);
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    double r = df0[j] + lambda * dg[j];
    if (x[j] <= xmin + tolb) r = std::min(r, 0.0);
    if (x[j] >= xmax - tolb) r = std::max(r, 0.0);
    acc += r * r;
  }
  acc += (lambda * g) * (lambda * g);
  acc += std::max(g, 0.0) * std::max(g, 0.0);
  return std::sqrt(acc);
}

}  // namespace mftd
