#pragma once

#include <span>
#include <vector>

namespace ministep {

struct Triplet {
    int row = 0;
    int col = 0;
    double value = 0.0;
};

/// Square real sparse matrix in compressed-row form. Column indices are
/// strictly increasing within a row; duplicate triplets are summed on build.
/// Entries may hold explicit zeros (assembly keeps a fixed pattern and only
/// rewrites values between evaluations).
class SparseMatrix {
public:
    SparseMatrix() = default;

    /// n x n matrix with no stored entries.
    explicit SparseMatrix(int n);

    static SparseMatrix from_triplets(int n, std::span<const Triplet> entries);
    static SparseMatrix identity(int n);

    [[nodiscard]] int size() const { return n_; }
    [[nodiscard]] int nonzeros() const { return static_cast<int>(col_.size()); }

    /// Value at (row, col); 0 when the position is not stored.
    [[nodiscard]] double at(int row, int col) const;

    [[nodiscard]] std::span<const int> row_cols(int row) const;
    [[nodiscard]] std::span<const double> row_vals(int row) const;
    [[nodiscard]] std::span<double> row_vals(int row);

    /// Index into the value array for (row, col), or -1 when not stored.
    [[nodiscard]] int slot(int row, int col) const;
    [[nodiscard]] double& value_at_slot(int s) { return val_[s]; }
    [[nodiscard]] std::span<double> values() { return val_; }
    [[nodiscard]] std::span<const double> values() const { return val_; }

    void set_zero();

    /// y = A * x
    [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;

    [[nodiscard]] std::vector<std::vector<double>> to_dense() const;

    /// Throws SimError when an entry is non-finite or the structure is bad.
    void validate() const;

    bool operator==(const SparseMatrix&) const = default;

private:
    int n_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_;
    std::vector<double> val_;
};

/// alpha * x + y over the union pattern of both operands.
[[nodiscard]] SparseMatrix scaled_sum(double alpha, const SparseMatrix& x,
                                      const SparseMatrix& y);

[[nodiscard]] double inf_norm(std::span<const double> v);

}  // namespace ministep
