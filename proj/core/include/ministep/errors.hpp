#pragma once

#include <stdexcept>
#include <string>

namespace ministep {

/// Base class for all numerical/engine failures thrown by this library.
/// Parse problems are reported as values (see netlist.hpp), not exceptions.
class SimError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatchError : public SimError {
public:
    using SimError::SimError;
};

/// Direct factorization hit a pivot below the singularity threshold.
/// `column` is the matrix column of the dead pivot (-1 when unknown).
class SingularMatrixError : public SimError {
public:
    explicit SingularMatrixError(const std::string& what, int column = -1)
        : SimError(what), column_(column) {}
    [[nodiscard]] int column() const { return column_; }

private:
    int column_;
};

/// Jacobi/Gauss-Seidel iteration is undefined: a diagonal entry is zero.
class ZeroDiagonalError : public SimError {
public:
    explicit ZeroDiagonalError(int row)
        : SimError("zero diagonal at row " + std::to_string(row)), row_(row) {}
    [[nodiscard]] int row() const { return row_; }

private:
    int row_;
};

class SingularBlockError : public SimError {
public:
    using SimError::SimError;
};

class BadPartitionError : public SimError {
public:
    using SimError::SimError;
};

/// A node has no conductive or capacitive path that gives its row a usable
/// diagonal; detected at solve time, reported with the node name.
class SingularNodeError : public SimError {
public:
    SingularNodeError(const std::string& node, const std::string& what)
        : SimError(what), node_(node) {}
    [[nodiscard]] const std::string& node() const { return node_; }

private:
    std::string node_;
};

/// Newton refinement exhausted its iteration budget (after the dt/2 retry).
class NonConvergenceError : public SimError {
public:
    using SimError::SimError;
};

}  // namespace ministep
