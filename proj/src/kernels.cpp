#include "mftd/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace mftd::kernels {

namespace {

// Per-chunk partials combined in index order keep the float summation order
// independent of the thread count.
template <typename ChunkFn>
double chunked_reduce(std::size_t n, double init, ChunkFn&& chunk_fn, Exec exec,
                      bool add = true) {
  const std::size_t nchunks = (n + kChunk - 1) / kChunk;
  if (nchunks == 0) return init;
  std::vector<double> partial(nchunks);
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long c = 0; c < static_cast<long long>(nchunks); ++c) {
      const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
      partial[c] = chunk_fn(lo, std::min(lo + kChunk, n));
    }
  } else {
    for (std::size_t c = 0; c < nchunks; ++c) {
      const std::size_t lo = c * kChunk;
      partial[c] = chunk_fn(lo, std::min(lo + kChunk, n));
    }
  }
  double acc = init;
  for (std::size_t c = 0; c < nchunks; ++c)
    acc = add ? acc + partial[c] : std::max(acc, partial[c]);
  return acc;
}

}  // namespace

double dot(std::span<const double> a, std::span<const double> b, Exec exec) {
  assert(a.size() == b.size());
  return chunked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
        return s;
      },
      exec);
}

double sum(std::span<const double> a, Exec exec) {
  return chunked_reduce(
      a.size(), 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += a[i];
        return s;
      },
      exec);
}

double max_val(std::span<const double> a, Exec exec) {
  if (a.empty()) return -HUGE_VAL;
  return chunked_reduce(
      a.size(), -HUGE_VAL,
      [&](std::size_t lo, std::size_t hi) {
        double m = -HUGE_VAL;
        for (std::size_t i = lo; i < hi; ++i) m = std::max(m, a[i]);
        return m;
      },
      exec, /*add=*/false);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y, Exec exec) {
  assert(x.size() == y.size());
  const long long n = static_cast<long long>(x.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) y[i] += alpha * x[i];
  } else {
    for (long long i = 0; i < n; ++i) y[i] += alpha * x[i];
  }
}

void xpay(std::span<const double> x, double beta, std::span<double> y, Exec exec) {
  assert(x.size() == y.size());
  const long long n = static_cast<long long>(x.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
  } else {
    for (long long i = 0; i < n; ++i) y[i] = x[i] + beta * y[i];
  }
}

void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out,
              Exec exec) {
  assert(a.size() == b.size() && a.size() == out.size());
  const long long n = static_cast<long long>(a.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) out[i] = a[i] * b[i];
  } else {
    for (long long i = 0; i < n; ++i) out[i] = a[i] * b[i];
  }
}

void fill(std::span<double> a, double v, Exec exec) {
  const long long n = static_cast<long long>(a.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) a[i] = v;
  } else {
    for (long long i = 0; i < n; ++i) a[i] = v;
  }
}

void copy(std::span<const double> src, std::span<double> dst, Exec exec) {
  assert(src.size() == dst.size());
  const long long n = static_cast<long long>(src.size());
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < n; ++i) dst[i] = src[i];
  } else {
    for (long long i = 0; i < n; ++i) dst[i] = src[i];
  }
}

void spmv(const Csr& A, std::span<const double> x, std::span<double> y, Exec exec) {
  assert(static_cast<int>(x.size()) == A.n && static_cast<int>(y.size()) == A.n);
  const long long n = A.n;
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long r = 0; r < n; ++r) {
      double s = 0.0;
      for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k) s += A.val[k] * x[A.col[k]];
      y[r] = s;
    }
  } else {
    for (long long r = 0; r < n; ++r) {
      double s = 0.0;
      for (int k = A.rowptr[r]; k < A.rowptr[r + 1]; ++k) s += A.val[k] * x[A.col[k]];
      y[r] = s;
    }
  }
}

void matmul_nt(std::span<const double> A, std::span<const double> W, std::span<const double> bias,
               std::span<double> C, int rows, int inner, int cols, Exec exec) {
  assert(A.size() == static_cast<std::size_t>(rows) * inner);
  assert(W.size() == static_cast<std::size_t>(cols) * inner);
  assert(C.size() == static_cast<std::size_t>(rows) * cols);
  const long long total = static_cast<long long>(rows) * cols;
  auto body = [&](long long t) {
    const long long r = t / cols, c = t % cols;
    const double* a = &A[r * inner];
    const double* w = &W[c * inner];
    double s = bias.empty() ? 0.0 : bias[c];
    for (int i = 0; i < inner; ++i) s += a[i] * w[i];
    C[t] = s;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long t = 0; t < total; ++t) body(t);
  } else {
    for (long long t = 0; t < total; ++t) body(t);
  }
}

void matmul_nn(std::span<const double> A, std::span<const double> W, std::span<double> C,
               int rows, int inner, int cols, Exec exec) {
  assert(A.size() == static_cast<std::size_t>(rows) * inner);
  assert(W.size() == static_cast<std::size_t>(inner) * cols);
  assert(C.size() == static_cast<std::size_t>(rows) * cols);
  const long long total = static_cast<long long>(rows) * cols;
  auto body = [&](long long t) {
    const long long r = t / cols, c = t % cols;
    const double* a = &A[r * inner];
    double s = 0.0;
    for (int i = 0; i < inner; ++i) s += a[i] * W[static_cast<std::size_t>(i) * cols + c];
    C[t] = s;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long t = 0; t < total; ++t) body(t);
  } else {
    for (long long t = 0; t < total; ++t) body(t);
  }
}

void matmul_tn(std::span<const double> D, std::span<const double> X, std::span<double> G,
               int rows, int batch, int cols, Exec exec) {
  assert(D.size() == static_cast<std::size_t>(batch) * rows);
  assert(X.size() == static_cast<std::size_t>(batch) * cols);
  assert(G.size() == static_cast<std::size_t>(rows) * cols);
  const long long total = static_cast<long long>(rows) * cols;
  auto body = [&](long long t) {
    const long long o = t / cols, c = t % cols;
    double s = 0.0;
    for (int b = 0; b < batch; ++b)
      s += D[static_cast<std::size_t>(b) * rows + o] * X[static_cast<std::size_t>(b) * cols + c];
    G[t] = s;
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (long long t = 0; t < total; ++t) body(t);
  } else {
    for (long long t = 0; t < total; ++t) body(t);
  }
}

}  // namespace mftd::kernels
