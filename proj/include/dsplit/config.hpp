#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dsplit/errors.hpp"
#include "dsplit/grid.hpp"
#include "dsplit/scheme.hpp"
#include "dsplit/verification.hpp"

namespace dsplit {

enum class CaseKind { Mms2d, Mms3d, Cavity, Step, Custom };

inline std::string to_string(CaseKind k) {
    switch (k) {
        case CaseKind::Mms2d: return "mms2d";
        case CaseKind::Mms3d: return "mms3d";
        case CaseKind::Cavity: return "cavity";
        case CaseKind::Step: return "step";
        case CaseKind::Custom: return "custom";
    }
    return "?";
}

/// Everything one CLI invocation needs, validated.
struct RunConfig {
    CaseKind kind = CaseKind::Mms2d;
    SchemeConfig scheme;
    int dim = 2;
    std::array<int, 3> cells{40, 40, 1};
    double h = 0.01;             ///< step case grid spacing
    double re = 1.0;             ///< nu = 1 / re
    std::vector<double> taus;    ///< convergence study
    std::vector<double> profile_times;
    double lid = 1.0;
    double steady_tol = 1e-6;
    double t_max = 200.0;
    Point force{0.0, 0.0, 0.0};  ///< custom case body force
    std::string output_dir = ".";
    long dump_interval = 0;      ///< steps between field dumps; 0 = final only
    bool vtk = false;
    int workers = 1;

    GridSpec grid() const { return GridSpec::build(dim, std::span<const int>(cells.data(), static_cast<std::size_t>(dim))); }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string value;
    int line = 0;  ///< 0 for command-line overrides
};

inline std::string where(const Entry& e) { return e.line > 0 ? "line " + std::to_string(e.line) : "command line"; }

inline std::optional<double> parse_double(const std::string& s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) return std::nullopt;
    return v;
}

inline std::optional<long> parse_long(const std::string& s) {
    long v = 0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (r.ec != std::errc() || r.ptr != end) return std::nullopt;
    return v;
}

inline std::optional<std::vector<double>> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto v = parse_double(trim(item));
        if (!v) return std::nullopt;
        out.push_back(*v);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

inline std::optional<bool> parse_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    return std::nullopt;
}

inline void apply_case_defaults(RunConfig& c) {
    SchemeConfig& s = c.scheme;
    switch (c.kind) {
        case CaseKind::Mms2d:
            c.dim = 2;
            c.cells = {40, 40, 1};
            s.variant = Variant::PeacemanRachford;
            s.tau = 0.0125;
            s.end_time = 2.0;
            s.initial_phi = InitialPhi::Supplied;
            c.taus = {0.2, 0.1, 0.05, 0.025, 0.0125};
            break;
        case CaseKind::Mms3d:
            c.dim = 3;
            c.cells = {32, 32, 32};
            s.variant = Variant::Douglas;
            s.tau = 0.025;
            s.end_time = 2.0;
            s.initial_phi = InitialPhi::Supplied;
            c.taus = {0.2, 0.1, 0.05, 0.025};
            break;
        case CaseKind::Cavity:
            c.dim = 2;
            c.cells = {40, 40, 1};
            c.re = 100.0;
            s.tau = 0.01;
            s.end_time = 10.0;
            s.advection = true;
            c.profile_times = {10.0};
            break;
        case CaseKind::Step:
            c.dim = 2;
            c.h = 0.01;
            c.re = 100.0;
            s.tau = 0.002;
            s.advection = true;
            break;
        case CaseKind::Custom:
            c.dim = 2;
            c.cells = {32, 32, 1};
            c.lid = 0.0;
            s.tau = 0.01;
            s.end_time = 1.0;
            break;
    }
    s.nu = 1.0 / c.re;
}

} // namespace detail

/// Parses `[section]` / `key = value` text (with `#` or `;` comments) into a
/// RunConfig. `overrides` are "section.key=value" strings applied on top.
/// Every problem is collected and reported together in one ConfigError.
inline RunConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
    using detail::Entry;
    std::vector<std::string> errors;
    std::map<std::string, Entry> entries;

    std::string section;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        std::string line = raw;
        if (const auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                errors.push_back("line " + std::to_string(line_no) + ": malformed section header");
                continue;
            }
            section = detail::trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            errors.push_back("line " + std::to_string(line_no) + ": expected key = value");
            continue;
        }
        const std::string key = (section.empty() ? "" : section + ".") + detail::trim(std::string_view(line).substr(0, eq));
        const std::string value = detail::trim(std::string_view(line).substr(eq + 1));
        if (auto it = entries.find(key); it != entries.end()) {
            errors.push_back("duplicate key '" + key + "' on " + detail::where(it->second) + " and line " +
                             std::to_string(line_no));
            continue;
        }
        entries[key] = {value, line_no};
    }
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            errors.push_back("override '" + o + "': expected section.key=value");
            continue;
        }
        entries[detail::trim(std::string_view(o).substr(0, eq))] = {detail::trim(std::string_view(o).substr(eq + 1)), 0};
    }

    RunConfig cfg;
    const auto name = entries.find("case.name");
    if (name == entries.end()) {
        errors.push_back("missing required key 'case.name'");
    } else {
        const std::string& v = name->second.value;
        if (v == "mms2d") cfg.kind = CaseKind::Mms2d;
        else if (v == "mms3d") cfg.kind = CaseKind::Mms3d;
        else if (v == "cavity") cfg.kind = CaseKind::Cavity;
        else if (v == "step") cfg.kind = CaseKind::Step;
        else if (v == "custom") cfg.kind = CaseKind::Custom;
        else errors.push_back("case.name (" + detail::where(name->second) + "): unknown case '" + v + "'");
    }
    detail::apply_case_defaults(cfg);

    const auto fail = [&](const std::string& key, const Entry& e, const std::string& what) {
        errors.push_back(key + " (" + detail::where(e) + "): " + what);
    };
    const auto number = [&](const std::string& key, const Entry& e, double lo, double hi, bool open_lo,
                            double& out) {
        const auto v = detail::parse_double(e.value);
        if (!v || !std::isfinite(*v)) return fail(key, e, "expected a number, got '" + e.value + "'");
        if ((open_lo ? *v <= lo : *v < lo) || *v > hi) {
            std::ostringstream os;
            os << "value " << *v << " out of range " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
            return fail(key, e, os.str());
        }
        out = *v;
    };
    const auto integer = [&](const std::string& key, const Entry& e, long lo, long hi, auto& out) {
        const auto v = detail::parse_long(e.value);
        if (!v) return fail(key, e, "expected an integer, got '" + e.value + "'");
        if (*v < lo || *v > hi)
            return fail(key, e, "value " + std::to_string(*v) + " out of range [" + std::to_string(lo) + ", " +
                                    std::to_string(hi) + "]");
        out = static_cast<std::remove_reference_t<decltype(out)>>(*v);
    };
    const auto list = [&](const std::string& key, const Entry& e, std::vector<double>& out) {
        const auto v = detail::parse_list(e.value);
        if (!v) return fail(key, e, "expected a comma-separated list of numbers");
        out = *v;
    };
    const auto boolean = [&](const std::string& key, const Entry& e, bool& out) {
        const auto v = detail::parse_bool(e.value);
        if (!v) return fail(key, e, "expected true or false, got '" + e.value + "'");
        out = *v;
    };
    constexpr double inf = std::numeric_limits<double>::infinity();
    constexpr int max_cells = 4096;
    bool nu_set = false;
    bool variant_set = false;
    std::optional<int> n_all;

    using Setter = std::function<void(const std::string&, const Entry&)>;
    const std::map<std::string, Setter> setters{
        {"case.name", [](const std::string&, const Entry&) {}},
        {"grid.n", [&](const std::string& k, const Entry& e) {
             int n = 0;
             integer(k, e, 2, max_cells, n);
             if (n) n_all = n;
         }},
        {"grid.nx", [&](const std::string& k, const Entry& e) { integer(k, e, 2, max_cells, cfg.cells[0]); }},
        {"grid.ny", [&](const std::string& k, const Entry& e) { integer(k, e, 2, max_cells, cfg.cells[1]); }},
        {"grid.nz", [&](const std::string& k, const Entry& e) { integer(k, e, 2, max_cells, cfg.cells[2]); }},
        {"grid.h", [&](const std::string& k, const Entry& e) { number(k, e, 0.0, 0.5, true, cfg.h); }},
        {"grid.dim", [&](const std::string& k, const Entry& e) {
             if (cfg.kind != CaseKind::Custom) return fail(k, e, "only the custom case chooses its dimension");
             integer(k, e, 2, 3, cfg.dim);
         }},
        {"scheme.variant", [&](const std::string& k, const Entry& e) {
             variant_set = true;
             if (e.value == "pr2d") cfg.scheme.variant = Variant::PeacemanRachford;
             else if (e.value == "douglas") cfg.scheme.variant = Variant::Douglas;
             else if (e.value == "bdf2") cfg.scheme.variant = Variant::Bdf2;
             else fail(k, e, "expected pr2d, douglas or bdf2, got '" + e.value + "'");
         }},
        {"scheme.tau", [&](const std::string& k, const Entry& e) { number(k, e, 0.0, inf, true, cfg.scheme.tau); }},
        {"scheme.chi", [&](const std::string& k, const Entry& e) { number(k, e, 0.0, 1.0, false, cfg.scheme.chi); }},
        {"scheme.nu", [&](const std::string& k, const Entry& e) {
             number(k, e, 0.0, inf, true, cfg.scheme.nu);
             nu_set = true;
         }},
        {"scheme.re", [&](const std::string& k, const Entry& e) { number(k, e, 0.0, inf, true, cfg.re); }},
        {"scheme.end_time", [&](const std::string& k, const Entry& e) {
             number(k, e, 0.0, inf, false, cfg.scheme.end_time);
         }},
        {"scheme.advection", [&](const std::string& k, const Entry& e) { boolean(k, e, cfg.scheme.advection); }},
        {"scheme.initial_phi", [&](const std::string& k, const Entry& e) {
             if (e.value == "zero") cfg.scheme.initial_phi = InitialPhi::Zero;
             else if (e.value == "supplied") cfg.scheme.initial_phi = InitialPhi::Supplied;
             else fail(k, e, "expected zero or supplied, got '" + e.value + "'");
         }},
        {"study.taus", [&](const std::string& k, const Entry& e) { list(k, e, cfg.taus); }},
        {"cavity.lid", [&](const std::string& k, const Entry& e) { number(k, e, -inf, inf, false, cfg.lid); }},
        {"cavity.profile_times", [&](const std::string& k, const Entry& e) { list(k, e, cfg.profile_times); }},
        {"step.steady_tol", [&](const std::string& k, const Entry& e) { number(k, e, 0.0, inf, true, cfg.steady_tol); }},
        {"step.t_max", [&](const std::string& k, const Entry& e) { number(k, e, 0.0, inf, true, cfg.t_max); }},
        {"custom.lid", [&](const std::string& k, const Entry& e) { number(k, e, -inf, inf, false, cfg.lid); }},
        {"custom.force", [&](const std::string& k, const Entry& e) {
             std::vector<double> f;
             list(k, e, f);
             if (f.empty()) return;
             if (f.size() > 3) return fail(k, e, "at most three components");
             cfg.force = {0.0, 0.0, 0.0};
             std::copy(f.begin(), f.end(), cfg.force.begin());
         }},
        {"output.dir", [&](const std::string& k, const Entry& e) {
             if (e.value.empty()) return fail(k, e, "empty path");
             cfg.output_dir = e.value;
         }},
        {"output.dump_interval", [&](const std::string& k, const Entry& e) {
             integer(k, e, 0, std::numeric_limits<long>::max(), cfg.dump_interval);
         }},
        {"output.vtk", [&](const std::string& k, const Entry& e) { boolean(k, e, cfg.vtk); }},
        {"run.workers", [&](const std::string& k, const Entry& e) { integer(k, e, 1, 256, cfg.workers); }},
    };

    // grid.dim first so grid.n fills the right number of axes.
    if (auto it = entries.find("grid.dim"); it != entries.end()) setters.at("grid.dim")(it->first, it->second);
    for (const auto& [key, entry] : entries) {
        if (key == "grid.dim") continue;
        const auto s = setters.find(key);
        if (s == setters.end()) {
            errors.push_back("unknown key '" + key + "' (" + detail::where(entry) + ")");
            continue;
        }
        s->second(key, entry);
    }
    if (n_all) {
        for (int a = 0; a < 3; ++a) cfg.cells[static_cast<std::size_t>(a)] = a < cfg.dim ? *n_all : 1;
        // Explicit per-axis counts win over grid.n.
        const char* axis_keys[] = {"grid.nx", "grid.ny", "grid.nz"};
        for (int a = 0; a < cfg.dim; ++a)
            if (auto it = entries.find(axis_keys[a]); it != entries.end()) {
                int n = 0;
                integer(axis_keys[a], it->second, 2, max_cells, n);
                if (n) cfg.cells[static_cast<std::size_t>(a)] = n;
            }
    }
    if (cfg.dim == 2) cfg.cells[2] = 1;
    else if (cfg.cells[2] < 2) cfg.cells[2] = cfg.cells[0];
    if (!nu_set) cfg.scheme.nu = 1.0 / cfg.re;
    // Peaceman-Rachford is two-dimensional only; a 3D custom box defaults to Douglas.
    if (!variant_set && cfg.dim == 3) cfg.scheme.variant = Variant::Douglas;

    if (errors.empty()) {
        try {
            cfg.scheme.validate(cfg.dim);
        } catch (const ValidationError& e) {
            errors.push_back(e.what());
        }
        if (cfg.kind == CaseKind::Mms2d || cfg.kind == CaseKind::Mms3d) {
            try {
                validate_tau_list(cfg.taus);
            } catch (const ValidationError& e) {
                errors.push_back(std::string("study.taus: ") + e.what());
            }
        }
        if (cfg.kind == CaseKind::Cavity)
            for (double t : cfg.profile_times)
                if (!(t >= 0.0)) errors.push_back("cavity.profile_times: times must be nonnegative");
    }
    if (!errors.empty()) throw ConfigError(std::move(errors));
    return cfg;
}

} // namespace dsplit
