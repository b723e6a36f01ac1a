// Command-line experiment runner.
//
//   starnoma run --config exp.cfg --out curves.csv
//   starnoma figure fig2 --trials 200000 --out fig2.csv
//   starnoma dump-rule laguerre 300
//   starnoma selftest
//
// Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
// 1 anything else (I/O).

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "starnoma/errors.hpp"
#include "starnoma/experiment.hpp"
#include "starnoma/quadrature.hpp"
#include "starnoma/specfun.hpp"

namespace ex = starnoma::experiment;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out;
    std::string format;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int threads = 0;
    bool analytic_only = false;
};

void add_common(CLI::App* sub, CommonFlags& f) {
    sub->add_option("--config", f.config_path, "key = value experiment file")->check(CLI::ExistingFile);
    sub->add_option("--out", f.out, "output file (stdout when omitted)");
    sub->add_option("--format", f.format, "csv or json");
    sub->add_option("--trials", f.trials, "Monte Carlo trials per SNR point");
    sub->add_option("--seed", f.seed, "Monte Carlo seed")->each([&f](const std::string&) { f.seed_set = true; });
    sub->add_option("--threads", f.threads, "worker threads (overrides STARNOMA_THREADS)")->check(CLI::NonNegativeNumber);
    sub->add_flag("--analytic-only", f.analytic_only, "skip the Monte Carlo curves");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot read '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// file values first, then flags
ex::ExperimentSpec finish_spec(ex::ExperimentSpec spec, const CommonFlags& f) {
    if (!f.config_path.empty()) {
        spec = ex::parse_config(slurp(f.config_path), std::move(spec));
    }
    if (!f.format.empty()) {
        spec.format = ex::format_from_string(f.format);
    }
    if (!f.out.empty()) {
        spec.output_path = f.out;
    }
    if (f.threads > 0) {
        spec.threads = f.threads;
        if (spec.mc) {
            spec.mc->threads = f.threads;
        }
    }
    if (f.trials > 0 || f.seed_set) {
        if (!spec.mc) {
            spec.mc = ex::McSettings{};
        }
        if (f.trials > 0) {
            spec.mc->trials = f.trials;
        }
        if (f.seed_set) {
            spec.mc->seed = f.seed;
        }
    }
    if (f.analytic_only) {
        spec.mc.reset();
    }
    return spec;
}

int execute(const ex::ExperimentSpec& spec) {
    const auto curves = ex::run(spec);
    if (spec.output_path.empty()) {
        std::cout << (spec.format == ex::Format::CSV ? ex::to_csv(curves) : ex::to_json(curves, spec));
    } else {
        std::size_t rows = 0;
        for (const auto& s : curves.series) {
            rows += s.points.size();
        }
        std::cerr << "wrote " << curves.series.size() << " series, " << rows << " rows to " << spec.output_path
                  << "\n";
    }
    return 0;
}

int dump_rule(const std::string& family, int order, const std::string& out) {
    namespace q = starnoma::quadrature;
    q::QuadratureRule rule;
    if (family == "chebyshev") {
        rule = q::chebyshev_rule(order);
    } else if (family == "laguerre") {
        rule = q::laguerre_rule(order);
    } else {
        throw starnoma::ConfigError("dump-rule: family must be chebyshev or laguerre");
    }
    std::ostringstream ss;
    ss << "index,node,weight\n";
    char buf[96];
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, rule.nodes[i], rule.weights[i]);
        ss << buf;
    }
    if (out.empty()) {
        std::cout << ss.str();
    } else {
        std::ofstream f(out, std::ios::binary);
        if (!(f << ss.str())) {
            throw std::runtime_error("cannot write '" + out + "'");
        }
    }
    return 0;
}

// A few seconds of smoke checks across the stack.
int selftest() {
    namespace q = starnoma::quadrature;
    namespace sf = starnoma::specfun;
    namespace an = starnoma::analysis;
    int failures = 0;
    auto report = [&failures](const char* what, bool ok, double detail) {
        std::printf("%s %-40s %.3e\n", ok ? "PASS" : "FAIL", what, detail);
        failures += ok ? 0 : 1;
    };

    const auto lag = q::cached_rule(q::Family::Laguerre, 300);
    double m10 = 0.0;
    for (std::size_t i = 0; i < lag->nodes.size(); ++i) {
        m10 += lag->weights[i] * std::pow(lag->nodes[i], 10);
    }
    const double rel10 = std::abs(m10 / 3628800.0 - 1.0);
    report("laguerre P=300 tenth moment", rel10 < 1e-8, rel10);

    const double mq = sf::marcum_q(0.0, 1.7);
    const double mq_err = std::abs(mq - std::exp(-1.7 * 1.7 / 2.0));
    report("marcum Q(0, b) = exp(-b^2/2)", mq_err < 1e-14, mq_err);

    const double gp = sf::gamma_p(1.0, 0.8);
    const double gp_err = std::abs(gp - (1.0 - std::exp(-0.8)));
    report("gamma P(1, x) = 1 - exp(-x)", gp_err < 1e-14, gp_err);

    ex::ExperimentSpec spec;
    spec.schemes = {"op_n_psic", "op_m"};
    spec.snr_grid_db = {20.0};
    spec.mc = ex::McSettings{};
    spec.mc->trials = 200000;
    const auto curves = ex::run(spec);
    for (const char* s : {"op_n_psic", "op_m"}) {
        const auto* a = curves.find(s, ex::Provenance::Analytical);
        const auto* m = curves.find(s, ex::Provenance::MonteCarlo);
        const double va = a->points[0].value;
        const double vm = m->points[0].value;
        const double tol = std::max(3.0 * m->points[0].half_width, 0.05 * va);
        const std::string what = std::string(s) + " analytic vs simulation at 20 dB";
        report(what.c_str(), std::abs(va - vm) <= tol, std::abs(va - vm));
    }
    return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"STAR-RIS NOMA outage, rate and throughput experiments"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    auto* run = app.add_subcommand("run", "run the experiment described by --config");
    add_common(run, run_flags);

    CommonFlags fig_flags;
    std::string fig_name;
    auto* fig = app.add_subcommand("figure", "reproduce one figure's dataset");
    fig->add_option("name", fig_name, "fig2 ... fig12")->required();
    add_common(fig, fig_flags);

    std::string rule_family;
    int rule_order = 0;
    std::string rule_out;
    auto* rule = app.add_subcommand("dump-rule", "write a quadrature rule as index,node,weight");
    rule->add_option("family", rule_family, "chebyshev or laguerre")->required();
    rule->add_option("order", rule_order, "number of nodes")->required()->check(CLI::PositiveNumber);
    rule->add_option("--out", rule_out, "output file (stdout when omitted)");

    auto* self = app.add_subcommand("selftest", "quick consistency checks");

    auto* list = app.add_subcommand("list", "print scheme identifiers and figure presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*run) {
            if (run_flags.config_path.empty()) {
                throw starnoma::ConfigError("run: --config is required");
            }
            // defaults a config file may override: 0-40 dB grid, simulation on
            ex::ExperimentSpec base;
            base.snr_grid_db = ex::db_grid(0.0, 40.0, 2.0);
            base.mc = ex::McSettings{};
            return execute(finish_spec(std::move(base), run_flags));
        }
        if (*fig) {
            return execute(finish_spec(ex::figure_preset(fig_name), fig_flags));
        }
        if (*rule) {
            return dump_rule(rule_family, rule_order, rule_out);
        }
        if (*self) {
            return selftest();
        }
        if (*list) {
            for (const auto& s : ex::scheme_catalog()) {
                std::printf("%-14s %s%s%s  %s\n", s.name, s.analytical ? "A" : "-", s.asymptotic ? "S" : "-",
                            s.montecarlo ? "M" : "-", s.description);
            }
            for (const auto& n : ex::preset_names()) {
                std::printf("%s ", n.c_str());
            }
            std::printf("\n");
            return 0;
        }
    } catch (const starnoma::ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const starnoma::ConvergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const starnoma::DomainError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const starnoma::OverflowError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
