#pragma once
// Flat INI-style configuration (sections of key = value) and its validation.
// Every violated constraint is reported, not just the first; messages name
// the mathematical condition they break.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vbl/degiorgi.hpp"
#include "vbl/grid.hpp"

namespace vbl {

class IniFile {
public:
    // Throws std::invalid_argument with a line number on parse errors.
    static IniFile parse_text(const std::string& text, const std::string& origin);
    static IniFile parse_file(const std::string& path);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    int get_int(const std::string& section, const std::string& key, int fallback) const;
    // "inf" (any case) parses to kInf.
    double get_exponent(const std::string& section, const std::string& key,
                        double fallback) const;

    const std::vector<std::string>& parse_errors() const { return errors_; }

private:
    std::map<std::string, std::map<std::string, std::string>> data_;
    std::vector<std::string> errors_;
};

struct ExperimentConfig {
    // [grid]
    int dim = 1;
    int n = 256;
    double length = 1.0;
    // [time]
    double T = 0.1;
    double cfl = 0.45;
    double max_dt = 1e-3;
    int snapshot_every = 1;
    // [scenario]
    std::string scenario;
    double gamma = 2.0;          // barotropic exponent
    double forcing_alpha = 0.5;  // F ~ rho^{-alpha}
    double forcing_amp = 0.0;
    double forcing_threshold = 0.0;
    double density_floor = 0.0;
    double theta_amp = 1.0;
    double u_amp = 1.0;
    double blob_width = 0.15;
    double blob_center = 0.3;
    double velocity = 0.0;
    double rho_base = 0.0;
    double mu_high = 10.0;  // rough-coefficient scenarios
    int mu_stripes = 4;
    // [coefficients]
    double mu = 1.0;
    std::string mu_kind = "const";  // const | stripes
    double lambda = 0.0;
    double kappa = 0.25;
    // [degiorgi]
    ScheduleKind schedule_kind = ScheduleKind::scalar_bounded;
    std::optional<double> K;  // nullopt = auto (from data / trajectory sup)
    double t0 = 0.05;
    double eta = 0.5;
    int kmax = 10;
    // [exponents]
    SourceExponents exponents;
    // [output]
    std::string output_dir = "out";
    int csv_precision = 17;
};

struct LoadResult {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;  // every violated constraint, not first-only
    bool ok() const { return config.has_value() && errors.empty(); }
};

LoadResult load_config_text(const std::string& text, const std::string& origin);
LoadResult load_config(const std::string& path);

}  // namespace vbl
