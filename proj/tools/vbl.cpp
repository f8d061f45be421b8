// vbl: vacuum-bounds lab. Runs the registered advection-diffusion scenarios,
// replays the level-set cascade on the stored trajectory, and reports every
// inequality check. Exit codes: 0 all checks pass, 2 config error,
// 3 numerical failure, 4 check failure.

#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vbl/config.hpp"
#include "vbl/csv.hpp"
#include "vbl/harness.hpp"
#include "vbl/recursion.hpp"
#include "vbl/scenarios.hpp"

namespace {

int report(const vbl::RunOutcome& out) {
    for (const auto& ch : out.checks)
        std::cout << (ch.pass ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
    if (!out.error.empty()) std::cerr << "error: " << out.error << "\n";
    if (!out.out_dir.empty()) std::cout << "results in " << out.out_dir << "\n";
    return out.exit_code;
}

std::vector<double> parse_floors(const std::string& spec) {
    std::vector<double> floors;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) floors.push_back(std::stod(item));
    }
    return floors;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vacuum-bounds lab: density-uniform bounds for advected-diffused quantities"};
    app.require_subcommand(1);

    std::string config_path;
    std::string floors_spec = "0,1e-3,1e-1";
    std::string out_dir;

    auto* run = app.add_subcommand("run", "run one scenario from a config file");
    run->add_option("config", config_path, "INI config file")->required();
    run->add_option("--output", out_dir, "output directory override");

    auto* sweep = app.add_subcommand("sweep", "density-floor uniformity sweep");
    sweep->add_option("config", config_path, "INI config file")->required();
    sweep->add_option("--floors", floors_spec, "comma-separated density floors");
    sweep->add_option("--output", out_dir, "output directory override");

    app.add_subcommand("scenarios", "list registered scenarios");

    auto* rec = app.add_subcommand("recursion", "run the abstract decay recursions");
    std::string preset = "model";
    double rK = 10.0, rA = 2.0, rb1 = 1.5, rb2 = 2.0, rC = 1.0, rU0 = 1.0;
    rec->add_option("--preset", preset, "model | scalar | none");
    rec->add_option("--K", rK, "ladder constant");
    rec->add_option("--A", rA, "growth factor (scalar variant)");
    rec->add_option("--beta1", rb1, "lower exponent");
    rec->add_option("--beta2", rb2, "upper exponent");
    rec->add_option("--C", rC, "bound on U_0");
    rec->add_option("--U0", rU0, "initial value");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("scenarios")) {
            std::cout << vbl::list_scenarios_text();
            return 0;
        }
        if (app.got_subcommand("recursion")) {
            vbl::RecursionParams p;
            if (preset == "model") {
                p = vbl::model_recursion_preset(rK);
            } else {
                p.variant = vbl::RecursionVariant::scalar;
                p.A = rA;
                p.beta1 = rb1;
                p.beta2 = rb2;
                p.C = rC;
                p.K = rK;
            }
            const vbl::RecursionTrace tr = vbl::iterate(p, rU0);
            std::cout << "k,U_k\n";
            for (std::size_t k = 0; k < tr.U.size(); ++k)
                std::cout << k << "," << vbl::csv_num(tr.U[k]) << "\n";
            std::cout << (tr.converged ? "converged" : tr.diverged ? "diverged" : "undecided")
                      << "\n";
            return 0;
        }

        const vbl::LoadResult lr = vbl::load_config(config_path);
        if (!lr.ok()) {
            std::cerr << "config errors:\n";
            for (const auto& e : lr.errors) std::cerr << "  " << e << "\n";
            return 2;
        }
        if (app.got_subcommand("run")) return report(vbl::run_experiment(*lr.config, out_dir));
        if (app.got_subcommand("sweep"))
            return report(vbl::run_sweep(*lr.config, parse_floors(floors_spec), out_dir));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
