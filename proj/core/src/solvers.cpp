#include "ministep/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "ministep/errors.hpp"

namespace ministep {

namespace {

// Row-major dense LU with partial pivoting. `pivot_floor` is the absolute
// singularity threshold for pivots.
struct DenseLu {
    int n = 0;
    std::vector<double> lu;   // n*n, row-major
    std::vector<int> perm;    // row permutation

    void factor(double pivot_floor) {
        perm.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            perm[static_cast<size_t>(i)] = i;
        }
        for (int k = 0; k < n; ++k) {
            int best = k;
            double best_abs = std::abs(lu[static_cast<size_t>(k) * n + k]);
            for (int r = k + 1; r < n; ++r) {
                const double a = std::abs(lu[static_cast<size_t>(r) * n + k]);
                if (a > best_abs) {
                    best = r;
                    best_abs = a;
                }
            }
            if (best_abs <= pivot_floor) {
                throw SingularMatrixError("singular matrix: pivot " +
                                              std::to_string(best_abs) + " at column " +
                                              std::to_string(k),
                                          k);
            }
            if (best != k) {
                for (int c = 0; c < n; ++c) {
                    std::swap(lu[static_cast<size_t>(k) * n + c],
                              lu[static_cast<size_t>(best) * n + c]);
                }
                std::swap(perm[static_cast<size_t>(k)], perm[static_cast<size_t>(best)]);
            }
            const double piv = lu[static_cast<size_t>(k) * n + k];
            for (int r = k + 1; r < n; ++r) {
                const double m = lu[static_cast<size_t>(r) * n + k] / piv;
                lu[static_cast<size_t>(r) * n + k] = m;
                for (int c = k + 1; c < n; ++c) {
                    lu[static_cast<size_t>(r) * n + c] -= m * lu[static_cast<size_t>(k) * n + c];
                }
            }
        }
    }

    [[nodiscard]] std::vector<double> solve(std::span<const double> rhs) const {
        std::vector<double> x(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            x[static_cast<size_t>(i)] = rhs[static_cast<size_t>(perm[static_cast<size_t>(i)])];
        }
        for (int k = 0; k < n; ++k) {
            for (int r = k + 1; r < n; ++r) {
                x[static_cast<size_t>(r)] -= lu[static_cast<size_t>(r) * n + k] * x[static_cast<size_t>(k)];
            }
        }
        for (int k = n - 1; k >= 0; --k) {
            for (int c = k + 1; c < n; ++c) {
                x[static_cast<size_t>(k)] -= lu[static_cast<size_t>(k) * n + c] * x[static_cast<size_t>(c)];
            }
            x[static_cast<size_t>(k)] /= lu[static_cast<size_t>(k) * n + k];
        }
        return x;
    }
};

double max_abs_entry(const SparseMatrix& a) {
    double m = 0.0;
    for (double v : a.values()) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

DenseLu factor_range(const SparseMatrix& a, RowRange range, double pivot_floor) {
    DenseLu f;
    f.n = range.end - range.begin;
    f.lu.assign(static_cast<size_t>(f.n) * f.n, 0.0);
    for (int r = range.begin; r < range.end; ++r) {
        const auto cols = a.row_cols(r);
        const auto vals = a.row_vals(r);
        for (size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] >= range.begin && cols[k] < range.end) {
                f.lu[static_cast<size_t>(r - range.begin) * f.n + (cols[k] - range.begin)] =
                    vals[k];
            }
        }
    }
    f.factor(pivot_floor);
    return f;
}

void check_square(const LinearSystem& sys) {
    if (static_cast<int>(sys.b.size()) != sys.a.size()) {
        throw DimensionMismatchError("rhs dimension does not match matrix");
    }
}

void check_diagonal(const SparseMatrix& a) {
    for (int r = 0; r < a.size(); ++r) {
        if (a.at(r, r) == 0.0) {
            throw ZeroDiagonalError(r);
        }
    }
}

std::vector<RowRange> resolve_partition(const SolverConfig& cfg, int n) {
    std::vector<RowRange> part =
        cfg.partition.empty() ? uniform_partition(n, cfg.block_count) : cfg.partition;
    std::sort(part.begin(), part.end(),
              [](RowRange a, RowRange b) { return a.begin < b.begin; });
    int expect = 0;
    for (const RowRange& r : part) {
        if (r.begin != expect || r.end <= r.begin || r.end > n) {
            throw BadPartitionError("partition must cover [0, n) without gaps or overlap");
        }
        expect = r.end;
    }
    if (expect != n) {
        throw BadPartitionError("partition does not cover all rows");
    }
    return part;
}

}  // namespace

std::vector<RowRange> uniform_partition(int n, int blocks) {
    if (n < 1 || blocks < 1) {
        throw BadPartitionError("uniform_partition needs n >= 1 and blocks >= 1");
    }
    blocks = std::min(blocks, n);
    std::vector<RowRange> part;
    part.reserve(static_cast<size_t>(blocks));
    const int base = n / blocks;
    const int extra = n % blocks;
    int begin = 0;
    for (int i = 0; i < blocks; ++i) {
        const int len = base + (i < extra ? 1 : 0);
        part.push_back({begin, begin + len});
        begin += len;
    }
    return part;
}

double relative_residual(const SparseMatrix& a, std::span<const double> b,
                         std::span<const double> x) {
    const std::vector<double> ax = a.apply(x);
    double r = 0.0;
    for (size_t i = 0; i < b.size(); ++i) {
        r = std::max(r, std::abs(ax[i] - b[i]));
    }
    const double scale = std::max(inf_norm(b), std::numeric_limits<double>::min());
    return r / scale;
}

SolveResult solve_direct(const LinearSystem& sys) {
    check_square(sys);
    const int n = sys.a.size();
    DenseLu f;
    f.n = n;
    f.lu.assign(static_cast<size_t>(n) * n, 0.0);
    for (int r = 0; r < n; ++r) {
        const auto cols = sys.a.row_cols(r);
        const auto vals = sys.a.row_vals(r);
        for (size_t k = 0; k < cols.size(); ++k) {
            f.lu[static_cast<size_t>(r) * n + cols[k]] = vals[k];
        }
    }
    f.factor(1e-14 * max_abs_entry(sys.a));
    SolveResult res;
    res.x = f.solve(sys.b);
    res.iterations = 0;
    res.residual_norm = relative_residual(sys.a, sys.b, res.x);
    res.converged = true;
    return res;
}

SolveResult solve_jacobi(const LinearSystem& sys, const SolverConfig& cfg) {
    check_square(sys);
    check_diagonal(sys.a);
    const int n = sys.a.size();
    SolveResult res;
    res.x.assign(static_cast<size_t>(n), 0.0);
    res.residual_norm = relative_residual(sys.a, sys.b, res.x);
    if (res.residual_norm <= cfg.tol) {
        res.converged = true;
        return res;
    }
    std::vector<double> next(static_cast<size_t>(n));
    for (int it = 1; it <= cfg.max_iters; ++it) {
        for (int r = 0; r < n; ++r) {
            double acc = sys.b[static_cast<size_t>(r)];
            double diag = 0.0;
            const auto cols = sys.a.row_cols(r);
            const auto vals = sys.a.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] == r) {
                    diag = vals[k];
                } else {
                    acc -= vals[k] * res.x[static_cast<size_t>(cols[k])];
                }
            }
            next[static_cast<size_t>(r)] = acc / diag;
        }
        res.x.swap(next);
        res.iterations = it;
        res.residual_norm = relative_residual(sys.a, sys.b, res.x);
        if (!std::isfinite(res.residual_norm)) {
            break;  // diverged; report as non-converged
        }
        if (res.residual_norm <= cfg.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

SolveResult solve_gauss_seidel(const LinearSystem& sys, const SolverConfig& cfg) {
    check_square(sys);
    check_diagonal(sys.a);
    const int n = sys.a.size();
    SolveResult res;
    res.x.assign(static_cast<size_t>(n), 0.0);
    res.residual_norm = relative_residual(sys.a, sys.b, res.x);
    if (res.residual_norm <= cfg.tol) {
        res.converged = true;
        return res;
    }
    for (int it = 1; it <= cfg.max_iters; ++it) {
        for (int r = 0; r < n; ++r) {
            double acc = sys.b[static_cast<size_t>(r)];
            double diag = 0.0;
            const auto cols = sys.a.row_cols(r);
            const auto vals = sys.a.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] == r) {
                    diag = vals[k];
                } else {
                    acc -= vals[k] * res.x[static_cast<size_t>(cols[k])];
                }
            }
            res.x[static_cast<size_t>(r)] = acc / diag;
        }
        res.iterations = it;
        res.residual_norm = relative_residual(sys.a, sys.b, res.x);
        if (!std::isfinite(res.residual_norm)) {
            break;
        }
        if (res.residual_norm <= cfg.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

SolveResult solve_block_jacobi(const LinearSystem& sys, const SolverConfig& cfg) {
    check_square(sys);
    const int n = sys.a.size();
    const std::vector<RowRange> part = resolve_partition(cfg, n);

    const double pivot_floor = 1e-14 * max_abs_entry(sys.a);
    std::vector<DenseLu> factors;
    factors.reserve(part.size());
    for (const RowRange& range : part) {
        try {
            factors.push_back(factor_range(sys.a, range, pivot_floor));
        } catch (const SingularMatrixError& e) {
            throw SingularBlockError("block [" + std::to_string(range.begin) + ", " +
                                     std::to_string(range.end) + "): " + e.what());
        }
    }

    SolveResult res;
    res.x.assign(static_cast<size_t>(n), 0.0);
    res.residual_norm = relative_residual(sys.a, sys.b, res.x);
    if (res.residual_norm <= cfg.tol) {
        res.converged = true;
        return res;
    }

    std::vector<double> next(static_cast<size_t>(n));
    auto update_block = [&](size_t bi) {
        const RowRange range = part[bi];
        std::vector<double> rhs(static_cast<size_t>(range.end - range.begin));
        for (int r = range.begin; r < range.end; ++r) {
            double acc = sys.b[static_cast<size_t>(r)];
            const auto cols = sys.a.row_cols(r);
            const auto vals = sys.a.row_vals(r);
            for (size_t k = 0; k < cols.size(); ++k) {
                if (cols[k] < range.begin || cols[k] >= range.end) {
                    acc -= vals[k] * res.x[static_cast<size_t>(cols[k])];
                }
            }
            rhs[static_cast<size_t>(r - range.begin)] = acc;
        }
        const std::vector<double> xb = factors[bi].solve(rhs);
        std::copy(xb.begin(), xb.end(), next.begin() + range.begin);
    };

    for (int it = 1; it <= cfg.max_iters; ++it) {
        if (cfg.parallel_blocks && part.size() > 1) {
            std::vector<std::future<void>> futures;
            futures.reserve(part.size());
            for (size_t bi = 0; bi < part.size(); ++bi) {
                futures.push_back(std::async(std::launch::async, update_block, bi));
            }
            for (auto& fut : futures) {
                fut.get();
            }
        } else {
            for (size_t bi = 0; bi < part.size(); ++bi) {
                update_block(bi);
            }
        }
        res.x.swap(next);
        res.iterations = it;
        res.residual_norm = relative_residual(sys.a, sys.b, res.x);
        if (!std::isfinite(res.residual_norm)) {
            break;
        }
        if (res.residual_norm <= cfg.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

SolveResult solve(const LinearSystem& sys, const SolverConfig& cfg) {
    switch (cfg.method) {
        case SolverMethod::LU:
            return solve_direct(sys);
        case SolverMethod::Jacobi:
            return solve_jacobi(sys, cfg);
        case SolverMethod::GaussSeidel:
            return solve_gauss_seidel(sys, cfg);
        case SolverMethod::BlockJacobi:
            return solve_block_jacobi(sys, cfg);
    }
    throw SimError("unknown solver method");
}

}  // namespace ministep
