#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ministep/devices.hpp"

namespace ministep {

/// Node handle. Ground ("0") is kGround and never part of the unknown vector;
/// all other nodes index Circuit::node_names() in first-appearance order.
using NodeId = int;
inline constexpr NodeId kGround = -1;

struct Resistor {
    std::string name;
    NodeId n1 = kGround;
    NodeId n2 = kGround;
    double ohms = 0.0;
    bool operator==(const Resistor&) const = default;
};

struct Capacitor {
    std::string name;
    NodeId n1 = kGround;
    NodeId n2 = kGround;
    double farads = 0.0;
    bool operator==(const Capacitor&) const = default;
};

/// DC current source; positive current flows from n_plus through the source
/// to n_minus (i.e. it is pulled out of n_plus and pushed into n_minus).
struct CurrentSource {
    std::string name;
    NodeId n_plus = kGround;
    NodeId n_minus = kGround;
    double amps = 0.0;
    bool operator==(const CurrentSource&) const = default;
};

/// DC voltage source. The negative terminal is always ground; the positive
/// node is pinned to `volts` and eliminated from the unknown vector.
struct VoltageSource {
    std::string name;
    NodeId n_plus = kGround;
    NodeId n_minus = kGround;
    double volts = 0.0;
    bool operator==(const VoltageSource&) const = default;
};

struct Mos1 {
    std::string name;
    NodeId drain = kGround;
    NodeId gate = kGround;
    NodeId source = kGround;
    Mos1Params params;
    bool operator==(const Mos1&) const = default;
};

using Device = std::variant<Resistor, Capacitor, CurrentSource, VoltageSource, Mos1>;

struct TranDirective {
    double dt_request = 0.0;
    double t_stop = 0.0;
    bool operator==(const TranDirective&) const = default;
};

enum class StepMode { Fixed, Dominant };

struct StepModeDirective {
    StepMode mode = StepMode::Fixed;
    bool operator==(const StepModeDirective&) const = default;
};

using AnalysisDirective = std::variant<TranDirective, StepModeDirective>;

[[nodiscard]] const std::string& device_name(const Device& d);

/// Immutable parsed netlist. Construct through CircuitBuilder (or
/// parse_netlist); construction validates all invariants and throws
/// std::invalid_argument on violation.
class Circuit {
public:
    [[nodiscard]] const std::vector<std::string>& node_names() const { return node_names_; }
    [[nodiscard]] const std::vector<Device>& devices() const { return devices_; }
    [[nodiscard]] const std::vector<AnalysisDirective>& analyses() const { return analyses_; }

    /// "0" for ground, otherwise the preserved first-seen spelling.
    [[nodiscard]] const std::string& node_name(NodeId id) const;

    /// Case-insensitive lookup; kGround for "0", nullopt for unknown names.
    [[nodiscard]] std::optional<NodeId> find_node(std::string_view name) const;

    /// Last .TRAN / .STEPMODE directive, if any.
    [[nodiscard]] std::optional<TranDirective> tran() const;
    [[nodiscard]] std::optional<StepMode> step_mode() const;

    bool operator==(const Circuit&) const = default;

private:
    friend class CircuitBuilder;
    Circuit() = default;

    std::vector<std::string> node_names_;
    std::vector<Device> devices_;
    std::vector<AnalysisDirective> analyses_;
};

/// Incremental construction with interning of node names (case-insensitive,
/// first spelling wins). Device names are compared case-insensitively for
/// uniqueness and stored as given.
class CircuitBuilder {
public:
    /// Interns a node name; "0" (any case of nothing else) means ground.
    NodeId node(std::string_view name);

    CircuitBuilder& resistor(std::string name, NodeId n1, NodeId n2, double ohms);
    CircuitBuilder& capacitor(std::string name, NodeId n1, NodeId n2, double farads);
    CircuitBuilder& current_source(std::string name, NodeId n_plus, NodeId n_minus,
                                   double amps);
    CircuitBuilder& voltage_source(std::string name, NodeId n_plus, NodeId n_minus,
                                   double volts);
    CircuitBuilder& mos1(std::string name, NodeId drain, NodeId gate, NodeId source,
                         const Mos1Params& params);
    CircuitBuilder& tran(double dt_request, double t_stop);
    CircuitBuilder& step_mode(StepMode mode);

    /// Validates whole-circuit invariants and yields the Circuit.
    [[nodiscard]] Circuit build() const;

private:
    void check_unique_name(const std::string& name) const;

    std::vector<std::string> node_names_;
    std::vector<Device> devices_;
    std::vector<AnalysisDirective> analyses_;
};

enum class ParseErrorKind {
    UnknownCard,
    BadValue,
    DuplicateName,
    FloatingVoltageSource,
    MissingTran,
    EmptyCircuit,
};

struct ParseError {
    ParseErrorKind kind = ParseErrorKind::BadValue;
    std::string message;
    int line = 0;    // 1-based
    int column = 0;  // 1-based

    [[nodiscard]] std::string to_string() const;
};

using ParseResult = std::variant<Circuit, ParseError>;

/// Total: any input yields a Circuit or a ParseError with position.
[[nodiscard]] ParseResult parse_netlist(std::string_view text);

/// Canonical text emission; parse_netlist(serialize_netlist(c)) == c.
[[nodiscard]] std::string serialize_netlist(const Circuit& circuit);

/// Shortest scientific form that round-trips exactly, with a bare exponent
/// ("1e3", "2.5e-5").
[[nodiscard]] std::string canonical_number(double value);

/// Value token with optional engineering suffix (k, m, u, n, p, f, meg).
/// Returns nullopt for malformed or non-finite input.
[[nodiscard]] std::optional<double> parse_value(std::string_view token);

}  // namespace ministep
