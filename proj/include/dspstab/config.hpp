#pragma once

#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dspstab {

/// Effective run configuration with defaults matching the reference setup:
/// modified Lax-Friedrichs / Burgers, nu = 0.5, D = 0.8, shock states +-1.
struct RunConfig {
    // scheme block
    std::string scheme = "mlf";
    double nu = 0.5;
    double D = 0.8;
    std::string flux = "burgers";
    double state_lo = -1.5;
    double state_hi = 1.5;
    // shock block
    double u_minus = 1.0;
    double u_plus = -1.0;
    // profile block
    int half_width = 60;
    double tol = 1e-13;
    int delta_grid = 17;
    double delta_min = -0.5;
    double delta_max = 0.5;
    // experiment block
    int choice = 1;
    double p = 1.0;
    std::int64_t j_max = 50;
    std::int64_t n_max = 2000;
    std::uint64_t seed = 0x5EED;
    std::int64_t fit_lo = 0; // 0 = automatic arrival window
    std::int64_t fit_hi = 0;
    // output block
    std::string out_dir = "out";
    std::string formats = "csv,svg";
};

struct ConfigError : std::runtime_error {
    int line;
    ConfigError(int line_no, const std::string& what)
        : std::runtime_error("config line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
        return v.substr(1, v.size() - 2);
    return v;
}

} // namespace detail

/// Flat `key = value` format with optional [section] headers. Unknown keys and
/// out-of-range values are rejected with their line number.
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    static const std::vector<std::string> sections = {"scheme", "shock", "profile", "experiment",
                                                      "output"};
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        std::string line = detail::trim(raw);
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = detail::trim(line.substr(0, hash));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(line_no, "unterminated section header");
            const std::string name = detail::trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const auto& s : sections) known |= s == name;
            if (!known) throw ConfigError(line_no, "unknown section '" + name + "'");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::unquote(detail::trim(line.substr(eq + 1)));
        auto as_real = [&](double lo, double hi) {
            std::size_t pos = 0;
            double v = 0;
            try {
                v = std::stod(val, &pos);
            } catch (...) {
                throw ConfigError(line_no, "expected a number for '" + key + "'");
            }
            if (pos != val.size()) throw ConfigError(line_no, "trailing characters after number");
            if (v < lo || v > hi)
                throw ConfigError(line_no, "'" + key + "' out of range [" + std::to_string(lo) + ", " +
                                               std::to_string(hi) + "]");
            return v;
        };
        auto as_int = [&](std::int64_t lo, std::int64_t hi) {
            const double v = as_real(static_cast<double>(lo), static_cast<double>(hi));
            if (v != static_cast<double>(static_cast<std::int64_t>(v)))
                throw ConfigError(line_no, "expected an integer for '" + key + "'");
            return static_cast<std::int64_t>(v);
        };

        if (key == "scheme") {
            if (val != "mlf") throw ConfigError(line_no, "unknown scheme '" + val + "'");
            cfg.scheme = val;
        } else if (key == "nu") {
            cfg.nu = as_real(1e-12, 1e6);
        } else if (key == "D") {
            cfg.D = as_real(1e-12, 1e6);
        } else if (key == "flux") {
            if (val != "burgers") throw ConfigError(line_no, "unknown flux '" + val + "'");
            cfg.flux = val;
        } else if (key == "state_lo") {
            cfg.state_lo = as_real(-1e9, 1e9);
        } else if (key == "state_hi") {
            cfg.state_hi = as_real(-1e9, 1e9);
        } else if (key == "u_minus") {
            cfg.u_minus = as_real(-1e9, 1e9);
        } else if (key == "u_plus") {
            cfg.u_plus = as_real(-1e9, 1e9);
        } else if (key == "half_width") {
            cfg.half_width = static_cast<int>(as_int(8, 100000));
        } else if (key == "tol") {
            cfg.tol = as_real(1e-16, 1e-3);
        } else if (key == "delta_grid") {
            cfg.delta_grid = static_cast<int>(as_int(3, 10001));
        } else if (key == "delta_min") {
            cfg.delta_min = as_real(-1e6, 0.0);
        } else if (key == "delta_max") {
            cfg.delta_max = as_real(0.0, 1e6);
        } else if (key == "choice") {
            cfg.choice = static_cast<int>(as_int(1, 2));
        } else if (key == "p") {
            cfg.p = as_real(0.0, 100.0);
        } else if (key == "j_max") {
            cfg.j_max = as_int(1, 100000);
        } else if (key == "n_max") {
            cfg.n_max = as_int(8, 10000000);
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(as_int(0, 1000000000000000LL));
        } else if (key == "fit_lo") {
            cfg.fit_lo = as_int(0, 10000000);
        } else if (key == "fit_hi") {
            cfg.fit_hi = as_int(0, 10000000);
        } else if (key == "out_dir") {
            if (val.empty()) throw ConfigError(line_no, "out_dir must not be empty");
            cfg.out_dir = val;
        } else if (key == "formats") {
            if (val != "csv" && val != "csv,svg" && val != "svg,csv")
                throw ConfigError(line_no, "formats must be 'csv' or 'csv,svg'");
            cfg.formats = val;
        } else {
            throw ConfigError(line_no, "unknown key '" + key + "'");
        }
    }
    if (!(cfg.state_lo < cfg.state_hi))
        throw ConfigError(line_no, "state interval is empty");
    if (!(cfg.delta_min < cfg.delta_max))
        throw ConfigError(line_no, "delta range is empty");
    return cfg;
}

inline std::string render_config(const RunConfig& c) {
    std::ostringstream os;
    char buf[64];
    auto real = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    os << "[scheme]\n";
    os << "scheme = " << c.scheme << "\n";
    os << "nu = " << real(c.nu) << "\n";
    os << "D = " << real(c.D) << "\n";
    os << "flux = " << c.flux << "\n";
    os << "state_lo = " << real(c.state_lo) << "\n";
    os << "state_hi = " << real(c.state_hi) << "\n";
    os << "[shock]\n";
    os << "u_minus = " << real(c.u_minus) << "\n";
    os << "u_plus = " << real(c.u_plus) << "\n";
    os << "[profile]\n";
    os << "half_width = " << c.half_width << "\n";
    os << "tol = " << real(c.tol) << "\n";
    os << "delta_grid = " << c.delta_grid << "\n";
    os << "delta_min = " << real(c.delta_min) << "\n";
    os << "delta_max = " << real(c.delta_max) << "\n";
    os << "[experiment]\n";
    os << "choice = " << c.choice << "\n";
    os << "p = " << real(c.p) << "\n";
    os << "j_max = " << c.j_max << "\n";
    os << "n_max = " << c.n_max << "\n";
    os << "seed = " << c.seed << "\n";
    os << "fit_lo = " << c.fit_lo << "\n";
    os << "fit_hi = " << c.fit_hi << "\n";
    os << "[output]\n";
    os << "out_dir = " << c.out_dir << "\n";
    os << "formats = " << c.formats << "\n";
    return os.str();
}

} // namespace dspstab
