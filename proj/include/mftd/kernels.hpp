#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mftd::kernels {

// Execution policy for the element-parallel loops. The Parallel variants use
// OpenMP, but every reduction accumulates fixed-size chunks whose partial sums
// are combined in index order, so the result is bitwise identical to Serial
// for any thread count.
enum class Exec { Serial, Parallel };

inline constexpr std::size_t kChunk = 1024;

double dot(std::span<const double> a, std::span<const double> b, Exec exec = Exec::Parallel);
double sum(std::span<const double> a, Exec exec = Exec::Parallel);
double max_val(std::span<const double> a, Exec exec = Exec::Parallel);

// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y, Exec exec = Exec::Parallel);
// y = x + beta * y
void xpay(std::span<const double> x, double beta, std::span<double> y, Exec exec = Exec::Parallel);
void hadamard(std::span<const double> a, std::span<const double> b, std::span<double> out,
              Exec exec = Exec::Parallel);
void fill(std::span<double> a, double v, Exec exec = Exec::Parallel);
void copy(std::span<const double> src, std::span<double> dst, Exec exec = Exec::Parallel);

// Square sparse matrix, compressed sparse row.
struct Csr {
  int n = 0;
  std::vector<int> rowptr;
  std::vector<int> col;
  std::vector<double> val;

  std::size_t nnz() const { return col.size(); }
};

// y = A x. Row-parallel; each row is accumulated serially.
void spmv(const Csr& A, std::span<const double> x, std::span<double> y, Exec exec = Exec::Parallel);

// Dense row-major products used by the neural-network layers.
// C[r,c] = sum_i A[r,i] * W[c,i] + bias[c]; A is rows x inner, W is cols x inner.
void matmul_nt(std::span<const double> A, std::span<const double> W, std::span<const double> bias,
               std::span<double> C, int rows, int inner, int cols, Exec exec = Exec::Parallel);
// C[r,c] = sum_i A[r,i] * W[i,c]; A is rows x inner, W is inner x cols.
void matmul_nn(std::span<const double> A, std::span<const double> W, std::span<double> C,
               int rows, int inner, int cols, Exec exec = Exec::Parallel);
// G[o,c] = sum_b D[b,o] * X[b,c]; D is batch x rows, X is batch x cols.
void matmul_tn(std::span<const double> D, std::span<const double> X, std::span<double> G,
               int rows, int batch, int cols, Exec exec = Exec::Parallel);

}  // namespace mftd::kernels
