#include "vbl/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vbl {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

IniFile IniFile::parse_text(const std::string& text, const std::string& origin) {
    IniFile ini;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == ';') continue;
        if (t.front() == '[') {
            if (t.back() != ']') {
                ini.errors_.push_back(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
                continue;
            }
            section = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const std::size_t eq = t.find('=');
        if (eq == std::string::npos) {
            ini.errors_.push_back(origin + ":" + std::to_string(lineno) +
                                  ": expected key = value");
            continue;
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            ini.errors_.push_back(origin + ":" + std::to_string(lineno) + ": empty key");
            continue;
        }
        ini.data_[section][key] = value;
    }
    return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str(), path);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    const auto s = data_.find(section);
    return s != data_.end() && s->second.count(key) > 0;
}

std::string IniFile::get_string(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    const auto s = data_.find(section);
    if (s == data_.end()) return fallback;
    const auto k = s->second.find(key);
    return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key, "");
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw std::invalid_argument("[" + section + "] " + key + ": not a number: '" + v + "'");
    }
}

int IniFile::get_int(const std::string& section, const std::string& key, int fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = get_string(section, key, "");
    try {
        std::size_t pos = 0;
        const int d = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (...) {
        throw std::invalid_argument("[" + section + "] " + key + ": not an integer: '" + v + "'");
    }
}

double IniFile::get_exponent(const std::string& section, const std::string& key,
                             double fallback) const {
    if (!has(section, key)) return fallback;
    if (lower(get_string(section, key, "")) == "inf") return kInf;
    return get_double(section, key, fallback);
}

LoadResult load_config_text(const std::string& text, const std::string& origin) {
    LoadResult out;
    IniFile ini = IniFile::parse_text(text, origin);
    for (const auto& e : ini.parse_errors()) out.errors.push_back(e);
    if (!out.errors.empty()) return out;

    ExperimentConfig c;
    try {
        c.dim = ini.get_int("grid", "dim", c.dim);
        c.n = ini.get_int("grid", "n", c.n);
        c.length = ini.get_double("grid", "length", c.length);

        c.T = ini.get_double("time", "T", c.T);
        c.cfl = ini.get_double("time", "cfl", c.cfl);
        c.max_dt = ini.get_double("time", "max_dt", c.max_dt);
        c.snapshot_every = ini.get_int("time", "snapshot_every", c.snapshot_every);

        c.scenario = ini.get_string("scenario", "name", "");
        c.gamma = ini.get_double("scenario", "gamma", c.gamma);
        c.forcing_alpha = ini.get_double("scenario", "forcing_alpha", c.forcing_alpha);
        c.forcing_amp = ini.get_double("scenario", "forcing_amp", c.forcing_amp);
        c.forcing_threshold = ini.get_double("scenario", "forcing_threshold", c.forcing_threshold);
        c.density_floor = ini.get_double("scenario", "density_floor", c.density_floor);
        c.theta_amp = ini.get_double("scenario", "theta_amp", c.theta_amp);
        c.u_amp = ini.get_double("scenario", "u_amp", c.u_amp);
        c.blob_width = ini.get_double("scenario", "blob_width", c.blob_width);
        c.blob_center = ini.get_double("scenario", "blob_center", c.blob_center);
        c.velocity = ini.get_double("scenario", "velocity", c.velocity);
        c.rho_base = ini.get_double("scenario", "rho_base", c.rho_base);
        c.mu_high = ini.get_double("scenario", "mu_high", c.mu_high);
        c.mu_stripes = ini.get_int("scenario", "mu_stripes", c.mu_stripes);

        c.mu = ini.get_double("coefficients", "mu", c.mu);
        c.mu_kind = ini.get_string("coefficients", "mu_kind", c.mu_kind);
        c.lambda = ini.get_double("coefficients", "lambda", c.lambda);
        c.kappa = ini.get_double("coefficients", "kappa", c.kappa);

        const std::string kind =
            ini.get_string("degiorgi", "kind", schedule_kind_name(c.schedule_kind));
        if (auto k = parse_schedule_kind(kind)) {
            c.schedule_kind = *k;
        } else {
            out.errors.push_back("[degiorgi] kind: unknown schedule '" + kind + "'");
        }
        const std::string kval = lower(ini.get_string("degiorgi", "K", "auto"));
        if (kval != "auto") c.K = ini.get_double("degiorgi", "K", 1.0);
        c.t0 = ini.get_double("degiorgi", "t0", c.t0);
        c.eta = ini.get_double("degiorgi", "eta", c.eta);
        c.kmax = ini.get_int("degiorgi", "kmax", c.kmax);

        c.exponents.alpha = ini.get_double("exponents", "alpha", c.exponents.alpha);
        c.exponents.p = ini.get_exponent("exponents", "p", c.exponents.p);
        c.exponents.q = ini.get_exponent("exponents", "q", c.exponents.q);
        c.exponents.r = ini.get_double("exponents", "r", c.exponents.r);

        c.output_dir = ini.get_string("output", "directory", c.output_dir);
        c.csv_precision = ini.get_int("output", "csv_precision", c.csv_precision);
    } catch (const std::exception& e) {
        out.errors.push_back(e.what());
        return out;
    }

    // Constraint validation: collect everything.
    if (c.dim != 1 && c.dim != 2) out.errors.push_back("[grid] dim must be 1 or 2");
    if (c.n < 4) out.errors.push_back("[grid] n must be >= 4");
    if (!(c.length > 0.0)) out.errors.push_back("[grid] length must be positive");
    if (!(c.T >= 0.0)) out.errors.push_back("[time] T must be >= 0");
    if (!(c.cfl > 0.0) || c.cfl > 1.0) out.errors.push_back("[time] need 0 < cfl <= 1");
    if (!(c.max_dt > 0.0)) out.errors.push_back("[time] max_dt must be positive");
    if (c.snapshot_every < 1) out.errors.push_back("[time] snapshot_every must be >= 1");
    if (c.scenario.empty()) out.errors.push_back("[scenario] name is required");
    if (c.density_floor < 0.0) out.errors.push_back("[scenario] density_floor must be >= 0");

    if (c.mu_kind != "const" && c.mu_kind != "stripes")
        out.errors.push_back("[coefficients] mu_kind must be 'const' or 'stripes'");
    if (c.mu < 1.0)
        out.errors.push_back("viscosity floor condition mu >= 1 fails at mu=" +
                             std::to_string(c.mu));
    if (c.mu_kind == "stripes" && c.mu_high < 1.0)
        out.errors.push_back("viscosity floor condition mu >= 1 fails at mu_high=" +
                             std::to_string(c.mu_high));
    const bool system_kind = c.schedule_kind == ScheduleKind::system_bounded ||
                             c.schedule_kind == ScheduleKind::system_layer;
    if (system_kind || c.lambda != 0.0) {
        const double nu = 2.0 * c.mu + 3.0 * c.lambda;
        if (nu < 1.0)
            out.errors.push_back("coefficient condition nu = 2 mu + 3 lambda >= 1 fails: nu=" +
                                 std::to_string(nu));
        if (!(c.kappa > 0.0) || !(c.kappa < 0.5))
            out.errors.push_back(
                "viscosity ratio condition 0 < kappa < 1/2 fails at kappa=" +
                std::to_string(c.kappa));
        else if (3.0 * std::fabs(c.lambda) > c.kappa * nu)
            out.errors.push_back("viscosity ratio condition 3|lambda| <= kappa nu fails: 3|l|=" +
                                 std::to_string(3.0 * std::fabs(c.lambda)) +
                                 " > kappa nu=" + std::to_string(c.kappa * nu));
    }

    if (c.K && !(*c.K > 0.0)) out.errors.push_back("[degiorgi] K must be positive (or 'auto')");
    if (c.kmax < 1) out.errors.push_back("[degiorgi] kmax must be >= 1");
    const bool layer = c.schedule_kind == ScheduleKind::scalar_layer ||
                       c.schedule_kind == ScheduleKind::system_layer;
    if (layer) {
        if (!(c.t0 > 0.0)) out.errors.push_back("[degiorgi] layer schedules need t0 > 0");
        if (!(c.eta > 0.0) || !(c.eta < 1.0))
            out.errors.push_back("[degiorgi] eta must lie in (0,1)");
        if (!(c.t0 < c.T)) out.errors.push_back("[degiorgi] need t0 < T for a nonempty window");
    }
    for (const auto& e : c.exponents.validate(layer)) out.errors.push_back(e);

    if (c.csv_precision < 1 || c.csv_precision > 17)
        out.errors.push_back("[output] csv_precision must lie in [1, 17]");

    if (out.errors.empty()) out.config = std::move(c);
    return out;
}

LoadResult load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        LoadResult out;
        out.errors.push_back("config file not found: " + path);
        return out;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str(), path);
}

}  // namespace vbl
