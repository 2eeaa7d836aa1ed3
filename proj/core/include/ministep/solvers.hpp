#pragma once

#include <vector>

#include "ministep/sparse.hpp"

namespace ministep {

/// One instance of (C/dt + G) dx = i_s - F. dt is provenance metadata only.
struct LinearSystem {
    SparseMatrix a;
    std::vector<double> b;
    double dt = 0.0;
};

struct SolveResult {
    std::vector<double> x;
    int iterations = 0;  // 0 for the direct solver
    /// ||A x - b||inf / max(||b||inf, tiny)
    double residual_norm = 0.0;
    bool converged = false;
};

enum class SolverMethod { LU, Jacobi, GaussSeidel, BlockJacobi };

/// Half-open row range [begin, end).
struct RowRange {
    int begin = 0;
    int end = 0;
};

struct SolverConfig {
    SolverMethod method = SolverMethod::LU;
    double tol = 1e-10;
    int max_iters = 10000;
    /// BlockJacobi partition; must cover [0, n) without gaps or overlap.
    /// Empty means one block per row cluster from uniform_partition.
    std::vector<RowRange> partition;
    int block_count = 1;  // used when partition is empty
    /// Run block subsolves on separate threads. Results are bit-identical
    /// to the serial schedule: blocks read the previous iterate and write
    /// disjoint slices of the next one.
    bool parallel_blocks = false;
};

/// Contiguous near-equal ranges covering [0, n).
[[nodiscard]] std::vector<RowRange> uniform_partition(int n, int blocks);

/// Dense LU with partial pivoting; the ground-truth path. Throws
/// SingularMatrixError when a pivot falls below 1e-14 * max|a|.
[[nodiscard]] SolveResult solve_direct(const LinearSystem& sys);

/// x(k+1) = D^-1 (b - (A - D) x(k)) from x(0) = 0. Throws ZeroDiagonalError.
[[nodiscard]] SolveResult solve_jacobi(const LinearSystem& sys, const SolverConfig& cfg);

/// Forward-sweep in-place variant of solve_jacobi.
[[nodiscard]] SolveResult solve_gauss_seidel(const LinearSystem& sys,
                                             const SolverConfig& cfg);

/// Each outer iteration solves every diagonal block exactly against the
/// previous iterate's off-block couplings. 1x1 blocks reproduce point
/// Jacobi identically.
[[nodiscard]] SolveResult solve_block_jacobi(const LinearSystem& sys,
                                             const SolverConfig& cfg);

/// Dispatch on cfg.method.
[[nodiscard]] SolveResult solve(const LinearSystem& sys, const SolverConfig& cfg);

/// ||A x - b||inf / max(||b||inf, tiny); the convergence criterion.
[[nodiscard]] double relative_residual(const SparseMatrix& a, std::span<const double> b,
                                       std::span<const double> x);

}  // namespace ministep
