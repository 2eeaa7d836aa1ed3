#include "ministep/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ministep/errors.hpp"

namespace ministep {

SparseMatrix::SparseMatrix(int n) : n_(n), row_ptr_(static_cast<size_t>(n) + 1, 0) {
    if (n < 1) {
        throw SimError("sparse matrix dimension must be >= 1");
    }
}

SparseMatrix SparseMatrix::from_triplets(int n, std::span<const Triplet> entries) {
    SparseMatrix m(n);
    std::vector<Triplet> sorted(entries.begin(), entries.end());
    for (const Triplet& t : sorted) {
        if (t.row < 0 || t.row >= n || t.col < 0 || t.col >= n) {
            throw SimError("triplet index out of range");
        }
    }
    std::sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
    });

    m.row_ptr_.assign(static_cast<size_t>(n) + 1, 0);
    for (size_t i = 0; i < sorted.size();) {
        size_t j = i;
        double sum = 0.0;
        while (j < sorted.size() && sorted[j].row == sorted[i].row &&
               sorted[j].col == sorted[i].col) {
            sum += sorted[j].value;
            ++j;
        }
        m.col_.push_back(sorted[i].col);
        m.val_.push_back(sum);
        ++m.row_ptr_[static_cast<size_t>(sorted[i].row) + 1];
        i = j;
    }
    for (int r = 0; r < n; ++r) {
        m.row_ptr_[static_cast<size_t>(r) + 1] += m.row_ptr_[r];
    }
    m.validate();
    return m;
}

SparseMatrix SparseMatrix::identity(int n) {
    SparseMatrix m(n);
    m.col_.resize(static_cast<size_t>(n));
    m.val_.assign(static_cast<size_t>(n), 1.0);
    for (int i = 0; i < n; ++i) {
        m.col_[static_cast<size_t>(i)] = i;
        m.row_ptr_[static_cast<size_t>(i) + 1] = i + 1;
    }
    return m;
}

double SparseMatrix::at(int row, int col) const {
    const int s = slot(row, col);
    return s < 0 ? 0.0 : val_[static_cast<size_t>(s)];
}

int SparseMatrix::slot(int row, int col) const {
    if (row < 0 || row >= n_ || col < 0 || col >= n_) {
        throw SimError("sparse index out of range");
    }
    const auto begin = col_.begin() + row_ptr_[static_cast<size_t>(row)];
    const auto end = col_.begin() + row_ptr_[static_cast<size_t>(row) + 1];
    const auto it = std::lower_bound(begin, end, col);
    if (it == end || *it != col) {
        return -1;
    }
    return static_cast<int>(it - col_.begin());
}

std::span<const int> SparseMatrix::row_cols(int row) const {
    return {col_.data() + row_ptr_[static_cast<size_t>(row)],
            col_.data() + row_ptr_[static_cast<size_t>(row) + 1]};
}

std::span<const double> SparseMatrix::row_vals(int row) const {
    return {val_.data() + row_ptr_[static_cast<size_t>(row)],
            val_.data() + row_ptr_[static_cast<size_t>(row) + 1]};
}

std::span<double> SparseMatrix::row_vals(int row) {
    return {val_.data() + row_ptr_[static_cast<size_t>(row)],
            val_.data() + row_ptr_[static_cast<size_t>(row) + 1]};
}

void SparseMatrix::set_zero() { std::fill(val_.begin(), val_.end(), 0.0); }

std::vector<double> SparseMatrix::apply(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != n_) {
        throw DimensionMismatchError("matrix-vector dimension mismatch");
    }
    std::vector<double> y(static_cast<size_t>(n_), 0.0);
    for (int r = 0; r < n_; ++r) {
        double acc = 0.0;
        const auto cols = row_cols(r);
        const auto vals = row_vals(r);
        for (size_t k = 0; k < cols.size(); ++k) {
            acc += vals[k] * x[static_cast<size_t>(cols[k])];
        }
        y[static_cast<size_t>(r)] = acc;
    }
    return y;
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
    std::vector<std::vector<double>> d(static_cast<size_t>(n_),
                                       std::vector<double>(static_cast<size_t>(n_), 0.0));
    for (int r = 0; r < n_; ++r) {
        const auto cols = row_cols(r);
        const auto vals = row_vals(r);
        for (size_t k = 0; k < cols.size(); ++k) {
            d[static_cast<size_t>(r)][static_cast<size_t>(cols[k])] = vals[k];
        }
    }
    return d;
}

void SparseMatrix::validate() const {
    if (n_ < 1) {
        throw SimError("sparse matrix dimension must be >= 1");
    }
    if (row_ptr_.size() != static_cast<size_t>(n_) + 1 || row_ptr_.front() != 0 ||
        row_ptr_.back() != static_cast<int>(col_.size()) || col_.size() != val_.size()) {
        throw SimError("corrupt sparse structure");
    }
    for (int r = 0; r < n_; ++r) {
        const auto cols = row_cols(r);
        for (size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] < 0 || cols[k] >= n_) {
                throw SimError("sparse column out of range");
            }
            if (k > 0 && cols[k] <= cols[k - 1]) {
                throw SimError("sparse columns must be strictly increasing per row");
            }
        }
        for (double v : row_vals(r)) {
            if (!std::isfinite(v)) {
                throw SimError("non-finite sparse value");
            }
        }
    }
}

SparseMatrix scaled_sum(double alpha, const SparseMatrix& x, const SparseMatrix& y) {
    if (x.size() != y.size()) {
        throw DimensionMismatchError("scaled_sum dimension mismatch");
    }
    std::vector<Triplet> t;
    t.reserve(static_cast<size_t>(x.nonzeros() + y.nonzeros()));
    for (int r = 0; r < x.size(); ++r) {
        const auto xc = x.row_cols(r);
        const auto xv = x.row_vals(r);
        for (size_t k = 0; k < xc.size(); ++k) {
            t.push_back({r, xc[k], alpha * xv[k]});
        }
        const auto yc = y.row_cols(r);
        const auto yv = y.row_vals(r);
        for (size_t k = 0; k < yc.size(); ++k) {
            t.push_back({r, yc[k], yv[k]});
        }
    }
    return SparseMatrix::from_triplets(x.size(), t);
}

double inf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) {
        m = std::max(m, std::abs(x));
    }
    return m;
}

}  // namespace ministep
