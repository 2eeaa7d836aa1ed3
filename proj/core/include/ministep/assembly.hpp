#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ministep/netlist.hpp"
#include "ministep/sparse.hpp"

namespace ministep {

/// Node voltages indexed like AssembledSystem rows.
struct StateVector {
    std::vector<double> values;
    double time = 0.0;
};

/// One linearization point of the nodal equations
///   C dx/dt + f(x) = i_s
/// with g_matrix = f'(x_ref) and f_vector = f(x_ref). Rows cover non-ground
/// nodes that are not pinned by a voltage source.
struct AssembledSystem {
    SparseMatrix c_matrix;
    SparseMatrix g_matrix;
    std::vector<double> f_vector;
    std::vector<double> is_vector;
    std::vector<double> x_ref;
    std::vector<std::string> node_names;
    std::unordered_map<std::string, int> node_index;

    [[nodiscard]] int size() const { return static_cast<int>(f_vector.size()); }
};

/// Resolves node elimination and the sparsity pattern once, then restamps
/// values for each new state (the pattern is shared across time steps).
/// Holds a reference to the circuit; keep it alive for the assembler's life.
class Assembler {
public:
    explicit Assembler(const Circuit& circuit, double gmin = 0.0);

    [[nodiscard]] int unknown_count() const { return static_cast<int>(rows_.size()); }
    [[nodiscard]] const std::vector<std::string>& unknown_names() const { return names_; }

    /// Voltage pinned by a grounded source, if this node is eliminated.
    [[nodiscard]] std::optional<double> pinned_voltage(NodeId node) const;

    [[nodiscard]] AssembledSystem assemble(const StateVector& x) const;

    /// All-zero state of the right dimension.
    [[nodiscard]] StateVector zero_state() const;

private:
    [[nodiscard]] double node_voltage(NodeId node, const StateVector& x) const;
    [[nodiscard]] int row_of(NodeId node) const;

    const Circuit& circuit_;
    double gmin_ = 0.0;
    std::vector<int> rows_;                    // row -> circuit node index
    std::vector<int> node_to_row_;             // circuit node index -> row or -1
    std::vector<std::string> names_;           // row -> name
    std::unordered_map<std::string, int> node_index_;
    std::vector<std::optional<double>> pinned_;  // circuit node index -> voltage
    SparseMatrix g_pattern_;
    SparseMatrix c_pattern_;
};

/// Convenience one-shot assembly.
[[nodiscard]] AssembledSystem assemble(const Circuit& circuit, const StateVector& x,
                                       double gmin = 0.0);

/// Backward-Euler residual r = C (x_new - x_old)/dt + f(x_new) - i_s.
/// `sys` must be assembled at x_new so that f_vector = f(x_new).
[[nodiscard]] std::vector<double> kcl_residual(const AssembledSystem& sys,
                                               const StateVector& x_new,
                                               const StateVector& x_old, double dt);

}  // namespace ministep
