#include "ministep/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ministep {

namespace {

std::string to_upper(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::toupper(static_cast<unsigned char>(a[i])) !=
            std::toupper(static_cast<unsigned char>(b[i]))) {
            return false;
        }
    }
    return true;
}

bool is_ground_name(std::string_view name) { return name == "0"; }

}  // namespace

const std::string& device_name(const Device& d) {
    return std::visit([](const auto& dev) -> const std::string& { return dev.name; }, d);
}

const std::string& Circuit::node_name(NodeId id) const {
    static const std::string ground = "0";
    if (id == kGround) {
        return ground;
    }
    return node_names_.at(static_cast<size_t>(id));
}

std::optional<NodeId> Circuit::find_node(std::string_view name) const {
    if (is_ground_name(name)) {
        return kGround;
    }
    for (size_t i = 0; i < node_names_.size(); ++i) {
        if (iequals(node_names_[i], name)) {
            return static_cast<NodeId>(i);
        }
    }
    return std::nullopt;
}

std::optional<TranDirective> Circuit::tran() const {
    std::optional<TranDirective> last;
    for (const auto& a : analyses_) {
        if (const auto* t = std::get_if<TranDirective>(&a)) {
            last = *t;
        }
    }
    return last;
}

std::optional<StepMode> Circuit::step_mode() const {
    std::optional<StepMode> last;
    for (const auto& a : analyses_) {
        if (const auto* s = std::get_if<StepModeDirective>(&a)) {
            last = s->mode;
        }
    }
    return last;
}

namespace {

// Identifiers must survive serialize -> parse unchanged.
void check_identifier(std::string_view name, const char* what) {
    if (name.empty()) {
        throw std::invalid_argument(std::string("empty ") + what);
    }
    if (name.front() == '*' || name.front() == '.') {
        throw std::invalid_argument(std::string(what) + " may not start with '" +
                                    name.front() + "'");
    }
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ';' || c == '=') {
            throw std::invalid_argument(std::string(what) + " '" + std::string(name) +
                                        "' contains a character the grammar reserves");
        }
    }
}

void check_device_name(const std::string& name, char card) {
    check_identifier(name, "device name");
    if (std::toupper(static_cast<unsigned char>(name.front())) != card) {
        throw std::invalid_argument("device name '" + name + "' must start with '" +
                                    card + "'");
    }
}

}  // namespace

NodeId CircuitBuilder::node(std::string_view name) {
    if (is_ground_name(name)) {
        return kGround;
    }
    check_identifier(name, "node name");
    for (size_t i = 0; i < node_names_.size(); ++i) {
        if (iequals(node_names_[i], name)) {
            return static_cast<NodeId>(i);
        }
    }
    node_names_.emplace_back(name);
    return static_cast<NodeId>(node_names_.size() - 1);
}

void CircuitBuilder::check_unique_name(const std::string& name) const {
    for (const auto& d : devices_) {
        if (iequals(device_name(d), name)) {
            throw std::invalid_argument("duplicate device name " + name);
        }
    }
}

namespace {

void check_node_range(NodeId n, size_t count) {
    if (n != kGround && (n < 0 || static_cast<size_t>(n) >= count)) {
        throw std::invalid_argument("node id out of range");
    }
}

void require_positive(double v, const char* what) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw std::invalid_argument(std::string(what) + " must be positive and finite");
    }
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

}  // namespace

CircuitBuilder& CircuitBuilder::resistor(std::string name, NodeId n1, NodeId n2,
                                         double ohms) {
    check_device_name(name, 'R');
    check_unique_name(name);
    check_node_range(n1, node_names_.size());
    check_node_range(n2, node_names_.size());
    require_positive(ohms, "resistance");
    devices_.push_back(Resistor{std::move(name), n1, n2, ohms});
    return *this;
}

CircuitBuilder& CircuitBuilder::capacitor(std::string name, NodeId n1, NodeId n2,
                                          double farads) {
    check_device_name(name, 'C');
    check_unique_name(name);
    check_node_range(n1, node_names_.size());
    check_node_range(n2, node_names_.size());
    require_positive(farads, "capacitance");
    devices_.push_back(Capacitor{std::move(name), n1, n2, farads});
    return *this;
}

CircuitBuilder& CircuitBuilder::current_source(std::string name, NodeId n_plus,
                                               NodeId n_minus, double amps) {
    check_device_name(name, 'I');
    check_unique_name(name);
    check_node_range(n_plus, node_names_.size());
    check_node_range(n_minus, node_names_.size());
    require_finite(amps, "current");
    devices_.push_back(CurrentSource{std::move(name), n_plus, n_minus, amps});
    return *this;
}

CircuitBuilder& CircuitBuilder::voltage_source(std::string name, NodeId n_plus,
                                               NodeId n_minus, double volts) {
    check_device_name(name, 'V');
    check_unique_name(name);
    check_node_range(n_plus, node_names_.size());
    require_finite(volts, "voltage");
    if (n_minus != kGround) {
        throw std::invalid_argument("voltage source negative terminal must be ground");
    }
    if (n_plus == kGround) {
        throw std::invalid_argument("voltage source positive terminal must not be ground");
    }
    devices_.push_back(VoltageSource{std::move(name), n_plus, n_minus, volts});
    return *this;
}

CircuitBuilder& CircuitBuilder::mos1(std::string name, NodeId drain, NodeId gate,
                                     NodeId source, const Mos1Params& params) {
    check_device_name(name, 'M');
    check_unique_name(name);
    check_node_range(drain, node_names_.size());
    check_node_range(gate, node_names_.size());
    check_node_range(source, node_names_.size());
    require_positive(params.w, "W");
    require_positive(params.l, "L");
    require_positive(params.kp, "KP");
    require_positive(params.cox, "COX");
    require_finite(params.vth, "VTO");
    devices_.push_back(Mos1{std::move(name), drain, gate, source, params});
    return *this;
}

CircuitBuilder& CircuitBuilder::tran(double dt_request, double t_stop) {
    require_positive(dt_request, ".TRAN step");
    if (!std::isfinite(t_stop) || t_stop <= dt_request) {
        throw std::invalid_argument(".TRAN stop time must exceed the step");
    }
    analyses_.push_back(TranDirective{dt_request, t_stop});
    return *this;
}

CircuitBuilder& CircuitBuilder::step_mode(StepMode mode) {
    analyses_.push_back(StepModeDirective{mode});
    return *this;
}

namespace {

// Terminals in the order the netlist grammar writes them.
template <typename Fn>
void visit_terminals(Device& d, Fn&& fn) {
    std::visit(
        [&](auto& dev) {
            using T = std::decay_t<decltype(dev)>;
            if constexpr (std::is_same_v<T, Resistor> || std::is_same_v<T, Capacitor>) {
                fn(dev.n1);
                fn(dev.n2);
            } else if constexpr (std::is_same_v<T, CurrentSource> ||
                                 std::is_same_v<T, VoltageSource>) {
                fn(dev.n_plus);
                fn(dev.n_minus);
            } else {
                fn(dev.drain);
                fn(dev.gate);
                fn(dev.source);
            }
        },
        d);
}

}  // namespace

Circuit CircuitBuilder::build() const {
    if (devices_.empty()) {
        throw std::invalid_argument("circuit declares no devices");
    }
    // Canonicalize the node table to first-use order over the device list
    // (the order serialization reproduces); interned-but-unused names drop out.
    std::vector<Device> devices = devices_;
    std::vector<int> remap(node_names_.size(), -1);
    std::vector<std::string> names;
    for (Device& d : devices) {
        visit_terminals(d, [&](NodeId& id) {
            if (id == kGround) {
                return;
            }
            auto& slot = remap[static_cast<size_t>(id)];
            if (slot < 0) {
                slot = static_cast<int>(names.size());
                names.push_back(node_names_[static_cast<size_t>(id)]);
            }
            id = slot;
        });
    }
    if (names.empty()) {
        throw std::invalid_argument("circuit has no node besides ground");
    }
    Circuit c;
    c.node_names_ = std::move(names);
    c.devices_ = std::move(devices);
    c.analyses_ = analyses_;
    return c;
}

// ---------------------------------------------------------------------------
// Number formatting / parsing
// ---------------------------------------------------------------------------

std::string canonical_number(double value) {
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific);
    std::string s(buf, res.ptr);
    // "1e+03" -> "1e3", "2.5e-05" -> "2.5e-5"
    const size_t e = s.find('e');
    if (e == std::string::npos) {
        return s;
    }
    std::string mant = s.substr(0, e);
    std::string exp = s.substr(e + 1);
    bool neg = false;
    if (!exp.empty() && (exp[0] == '+' || exp[0] == '-')) {
        neg = exp[0] == '-';
        exp.erase(0, 1);
    }
    size_t first = exp.find_first_not_of('0');
    exp = first == std::string::npos ? "0" : exp.substr(first);
    return mant + "e" + (neg ? "-" : "") + exp;
}

std::optional<double> parse_value(std::string_view token) {
    if (token.empty()) {
        return std::nullopt;
    }
    // std::from_chars accepts "inf"/"nan" spellings; values must be numeric.
    const char first = token.front();
    if (!(std::isdigit(static_cast<unsigned char>(first)) || first == '+' ||
          first == '-' || first == '.')) {
        return std::nullopt;
    }
    const char* begin = token.data();
    const char* end = token.data() + token.size();
    if (first == '+') {
        ++begin;  // from_chars rejects a leading plus
        if (begin == end) {
            return std::nullopt;
        }
    }
    double value = 0.0;
    const auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc{} || !std::isfinite(value)) {
        return std::nullopt;
    }
    std::string_view suffix(res.ptr, static_cast<size_t>(end - res.ptr));
    if (suffix.empty()) {
        return value;
    }
    static constexpr std::pair<std::string_view, int> kSuffixes[] = {
        {"meg", 6}, {"k", 3}, {"m", -3}, {"u", -6}, {"n", -9}, {"p", -12}, {"f", -15},
    };
    for (const auto& [name, power] : kSuffixes) {
        if (!iequals(suffix, name)) {
            continue;
        }
        // Recompose textually so "3n" reads exactly like "3e-9" instead of
        // picking up a rounding step from a multiply.
        std::string mantissa(begin, res.ptr);
        int exponent = power;
        const size_t e = mantissa.find_first_of("eE");
        if (e != std::string::npos) {
            int given = 0;
            std::from_chars(mantissa.data() + e + 1, mantissa.data() + mantissa.size(),
                            given);
            exponent += given;
            mantissa.erase(e);
        }
        if (!mantissa.empty() && mantissa.back() == '.') {
            mantissa.pop_back();
        }
        const std::string composed = mantissa + "e" + std::to_string(exponent);
        double scaled = 0.0;
        const auto res2 =
            std::from_chars(composed.data(), composed.data() + composed.size(), scaled);
        if (res2.ec != std::errc{} || !std::isfinite(scaled)) {
            return std::nullopt;
        }
        return scaled;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
    std::string text;
    int column = 0;  // 1-based
};

std::vector<Token> tokenize(std::string_view line) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < line.size()) {
        if (line[i] == ';') {
            break;  // inline comment
        }
        if (std::isspace(static_cast<unsigned char>(line[i]))) {
            ++i;
            continue;
        }
        const size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
               line[i] != ';') {
            ++i;
        }
        out.push_back({std::string(line.substr(start, i - start)),
                       static_cast<int>(start) + 1});
    }
    return out;
}

class LineParser {
public:
    explicit LineParser(std::string_view text) : text_(text) {}

    ParseResult run() {
        size_t pos = 0;
        int line_no = 0;
        while (pos <= text_.size()) {
            const size_t nl = text_.find('\n', pos);
            std::string_view line = text_.substr(
                pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            ++line_no;
            if (!line.empty() && line.back() == '\r') {
                line.remove_suffix(1);
            }
            if (auto err = parse_line(line, line_no)) {
                return *err;
            }
            if (nl == std::string_view::npos) {
                break;
            }
            pos = nl + 1;
        }
        try {
            return builder_.build();
        } catch (const std::invalid_argument& e) {
            return ParseError{ParseErrorKind::EmptyCircuit, e.what(), line_no, 1};
        }
    }

private:
    std::optional<ParseError> parse_line(std::string_view line, int line_no) {
        const size_t first = line.find_first_not_of(" \t");
        if (first == std::string_view::npos || line[first] == '*') {
            return std::nullopt;  // blank or comment line
        }
        const std::vector<Token> tok = tokenize(line);
        if (tok.empty()) {
            return std::nullopt;
        }
        const std::string card = to_upper(tok[0].text);
        try {
            if (card[0] == '.') {
                return parse_directive(card, tok, line_no);
            }
            switch (card[0]) {
                case 'R':
                    return parse_two_terminal(card, tok, line_no, 'R');
                case 'C':
                    return parse_two_terminal(card, tok, line_no, 'C');
                case 'I':
                    return parse_two_terminal(card, tok, line_no, 'I');
                case 'V':
                    return parse_voltage(card, tok, line_no);
                case 'M':
                    return parse_mos(card, tok, line_no);
                default:
                    return ParseError{ParseErrorKind::UnknownCard,
                                      "unknown card '" + tok[0].text + "'", line_no,
                                      tok[0].column};
            }
        } catch (const std::invalid_argument& e) {
            return ParseError{classify(e.what()), e.what(), line_no, tok[0].column};
        }
    }

    static ParseErrorKind classify(std::string_view what) {
        if (what.find("duplicate") != std::string_view::npos) {
            return ParseErrorKind::DuplicateName;
        }
        if (what.find("negative terminal") != std::string_view::npos) {
            return ParseErrorKind::FloatingVoltageSource;
        }
        return ParseErrorKind::BadValue;
    }

    std::optional<ParseError> need_args(const std::vector<Token>& tok, size_t n,
                                        int line_no) const {
        if (tok.size() != n) {
            return ParseError{ParseErrorKind::BadValue,
                              "expected " + std::to_string(n - 1) + " fields after '" +
                                  tok[0].text + "'",
                              line_no, tok[0].column};
        }
        return std::nullopt;
    }

    std::optional<ParseError> parse_two_terminal(const std::string& name,
                                                 const std::vector<Token>& tok,
                                                 int line_no, char kind) {
        if (auto err = need_args(tok, 4, line_no)) {
            return err;
        }
        const auto value = parse_value(tok[3].text);
        if (!value) {
            return ParseError{ParseErrorKind::BadValue,
                              "bad numeric value '" + tok[3].text + "'", line_no,
                              tok[3].column};
        }
        const NodeId a = builder_.node(tok[1].text);
        const NodeId b = builder_.node(tok[2].text);
        try {
            switch (kind) {
                case 'R':
                    builder_.resistor(name, a, b, *value);
                    break;
                case 'C':
                    builder_.capacitor(name, a, b, *value);
                    break;
                default:
                    builder_.current_source(name, a, b, *value);
                    break;
            }
        } catch (const std::invalid_argument& e) {
            const int col = classify(e.what()) == ParseErrorKind::BadValue
                                ? tok[3].column
                                : tok[0].column;
            return ParseError{classify(e.what()), e.what(), line_no, col};
        }
        return std::nullopt;
    }

    std::optional<ParseError> parse_voltage(const std::string& name,
                                            const std::vector<Token>& tok, int line_no) {
        if (auto err = need_args(tok, 4, line_no)) {
            return err;
        }
        const auto value = parse_value(tok[3].text);
        if (!value) {
            return ParseError{ParseErrorKind::BadValue,
                              "bad numeric value '" + tok[3].text + "'", line_no,
                              tok[3].column};
        }
        if (!is_ground_name(tok[2].text)) {
            return ParseError{ParseErrorKind::FloatingVoltageSource,
                              "voltage source negative terminal must be ground",
                              line_no, tok[2].column};
        }
        const NodeId plus = builder_.node(tok[1].text);
        if (plus == kGround) {
            return ParseError{ParseErrorKind::BadValue,
                              "voltage source positive terminal must not be ground",
                              line_no, tok[1].column};
        }
        builder_.voltage_source(name, plus, kGround, *value);
        return std::nullopt;
    }

    std::optional<ParseError> parse_mos(const std::string& name,
                                        const std::vector<Token>& tok, int line_no) {
        if (tok.size() != 10) {
            return ParseError{ParseErrorKind::BadValue,
                              "MOS card needs 3 nodes, a polarity and W= L= KP= VTO= COX=",
                              line_no, tok[0].column};
        }
        const NodeId d = builder_.node(tok[1].text);
        const NodeId g = builder_.node(tok[2].text);
        const NodeId s = builder_.node(tok[3].text);
        Mos1Params params;
        const std::string pol = to_upper(tok[4].text);
        if (pol == "NMOS") {
            params.polarity = Polarity::Nmos;
        } else if (pol == "PMOS") {
            params.polarity = Polarity::Pmos;
        } else {
            return ParseError{ParseErrorKind::BadValue,
                              "polarity must be NMOS or PMOS, got '" + tok[4].text + "'",
                              line_no, tok[4].column};
        }
        bool seen_w = false, seen_l = false, seen_kp = false, seen_vto = false,
             seen_cox = false;
        for (size_t i = 5; i < tok.size(); ++i) {
            const std::string& t = tok[i].text;
            const size_t eq = t.find('=');
            if (eq == std::string::npos) {
                return ParseError{ParseErrorKind::BadValue,
                                  "expected KEY=VALUE, got '" + t + "'", line_no,
                                  tok[i].column};
            }
            const std::string key = to_upper(t.substr(0, eq));
            const auto value = parse_value(t.substr(eq + 1));
            if (!value) {
                return ParseError{ParseErrorKind::BadValue,
                                  "bad numeric value in '" + t + "'", line_no,
                                  tok[i].column};
            }
            bool* seen = nullptr;
            double* dst = nullptr;
            if (key == "W") {
                seen = &seen_w;
                dst = &params.w;
            } else if (key == "L") {
                seen = &seen_l;
                dst = &params.l;
            } else if (key == "KP") {
                seen = &seen_kp;
                dst = &params.kp;
            } else if (key == "VTO") {
                seen = &seen_vto;
                dst = &params.vth;
            } else if (key == "COX") {
                seen = &seen_cox;
                dst = &params.cox;
            } else {
                return ParseError{ParseErrorKind::BadValue,
                                  "unknown MOS parameter '" + key + "'", line_no,
                                  tok[i].column};
            }
            if (*seen) {
                return ParseError{ParseErrorKind::BadValue,
                                  "repeated MOS parameter '" + key + "'", line_no,
                                  tok[i].column};
            }
            *seen = true;
            *dst = *value;
        }
        builder_.mos1(name, d, g, s, params);
        return std::nullopt;
    }

    std::optional<ParseError> parse_directive(const std::string& card,
                                              const std::vector<Token>& tok,
                                              int line_no) {
        if (card == ".TRAN") {
            if (auto err = need_args(tok, 3, line_no)) {
                return err;
            }
            const auto dt = parse_value(tok[1].text);
            const auto t_stop = parse_value(tok[2].text);
            if (!dt || !t_stop) {
                return ParseError{ParseErrorKind::BadValue, "bad .TRAN values", line_no,
                                  tok[1].column};
            }
            builder_.tran(*dt, *t_stop);
            return std::nullopt;
        }
        if (card == ".STEPMODE") {
            if (auto err = need_args(tok, 2, line_no)) {
                return err;
            }
            const std::string mode = to_upper(tok[1].text);
            if (mode == "FIXED") {
                builder_.step_mode(StepMode::Fixed);
            } else if (mode == "DOMINANT") {
                builder_.step_mode(StepMode::Dominant);
            } else {
                return ParseError{ParseErrorKind::BadValue,
                                  ".STEPMODE must be FIXED or DOMINANT", line_no,
                                  tok[1].column};
            }
            return std::nullopt;
        }
        return ParseError{ParseErrorKind::UnknownCard,
                          "unknown directive '" + tok[0].text + "'", line_no,
                          tok[0].column};
    }

    std::string_view text_;
    CircuitBuilder builder_;
};

}  // namespace

ParseResult parse_netlist(std::string_view text) { return LineParser(text).run(); }

std::string ParseError::to_string() const {
    std::ostringstream os;
    os << "line " << line << ", column " << column << ": " << message;
    return os.str();
}

// ---------------------------------------------------------------------------
// Serializer
// ---------------------------------------------------------------------------

namespace {

struct DeviceWriter {
    const Circuit& c;
    std::ostringstream& os;

    void operator()(const Resistor& r) const {
        os << r.name << ' ' << c.node_name(r.n1) << ' ' << c.node_name(r.n2) << ' '
           << canonical_number(r.ohms) << '\n';
    }
    void operator()(const Capacitor& d) const {
        os << d.name << ' ' << c.node_name(d.n1) << ' ' << c.node_name(d.n2) << ' '
           << canonical_number(d.farads) << '\n';
    }
    void operator()(const CurrentSource& d) const {
        os << d.name << ' ' << c.node_name(d.n_plus) << ' ' << c.node_name(d.n_minus)
           << ' ' << canonical_number(d.amps) << '\n';
    }
    void operator()(const VoltageSource& d) const {
        os << d.name << ' ' << c.node_name(d.n_plus) << " 0 "
           << canonical_number(d.volts) << '\n';
    }
    void operator()(const Mos1& d) const {
        os << d.name << ' ' << c.node_name(d.drain) << ' ' << c.node_name(d.gate) << ' '
           << c.node_name(d.source) << ' '
           << (d.params.polarity == Polarity::Nmos ? "NMOS" : "PMOS")
           << " W=" << canonical_number(d.params.w) << " L=" << canonical_number(d.params.l)
           << " KP=" << canonical_number(d.params.kp)
           << " VTO=" << canonical_number(d.params.vth)
           << " COX=" << canonical_number(d.params.cox) << '\n';
    }
};

}  // namespace

std::string serialize_netlist(const Circuit& circuit) {
    std::ostringstream os;
    for (const Device& d : circuit.devices()) {
        std::visit(DeviceWriter{circuit, os}, d);
    }
    for (const AnalysisDirective& a : circuit.analyses()) {
        if (const auto* t = std::get_if<TranDirective>(&a)) {
            os << ".TRAN " << canonical_number(t->dt_request) << ' '
               << canonical_number(t->t_stop) << '\n';
        } else {
            const auto& s = std::get<StepModeDirective>(a);
            os << ".STEPMODE " << (s.mode == StepMode::Fixed ? "FIXED" : "DOMINANT")
               << '\n';
        }
    }
    return os.str();
}

}  // namespace ministep
