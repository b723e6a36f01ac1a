#include "starnoma/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "starnoma/errors.hpp"

namespace starnoma::experiment {

namespace an = starnoma::analysis;
namespace mc = starnoma::montecarlo;

namespace {

using AnalyticFn = std::function<double(const SystemConfig&, double rho, int P, int U)>;

struct SchemeEntry {
    SchemeInfo info;
    AnalyticFn analytic;  // analytical or asymptotic, per info
    std::optional<mc::Metric> metric;
};

const std::vector<SchemeEntry>& entries() {
    using mc::Metric;
    using mc::OutageScheme;
    using mc::RateScheme;
    using MT = mc::ThroughputMode;
    static const std::vector<SchemeEntry> table = [] {
        std::vector<SchemeEntry> t;
        auto add = [&t](const char* name, const char* desc, bool asym, AnalyticFn fn, std::optional<Metric> m) {
            const bool has_fn = static_cast<bool>(fn);
            t.push_back({{name, desc, has_fn && !asym, has_fn && asym, m.has_value()}, std::move(fn), m});
        };
        // outage
        add("op_n_ipsic", "outage, user n, imperfect SIC", false,
            [](const SystemConfig& c, double r, int P, int U) { return an::op_user_n_ipsic(c, r, P, U).value; },
            Metric::outage(OutageScheme::NomaUserN_ipSIC));
        add("op_n_psic", "outage, user n, perfect SIC", false,
            [](const SystemConfig& c, double r, int, int U) { return an::op_user_n_psic(c, r, U).value; },
            Metric::outage(OutageScheme::NomaUserN_pSIC));
        add("op_m", "outage, user m", false,
            [](const SystemConfig& c, double r, int, int) { return an::op_user_m(c, r).value; },
            Metric::outage(OutageScheme::NomaUserM));
        add("op_oma_n", "outage, user n, OMA", false,
            [](const SystemConfig& c, double r, int, int U) { return an::op_oma(c, r, an::User::N, U).value; },
            Metric::outage(OutageScheme::OmaUserN));
        add("op_oma_m", "outage, user m, OMA", false,
            [](const SystemConfig& c, double r, int, int U) { return an::op_oma(c, r, an::User::M, U).value; },
            Metric::outage(OutageScheme::OmaUserM));
        add("op_sys_ipsic", "system outage, NOMA, imperfect SIC", false,
            [](const SystemConfig& c, double r, int P, int U) {
                return an::op_system(an::op_user_n_ipsic(c, r, P, U).value, an::op_user_m(c, r).value);
            },
            Metric::outage(OutageScheme::SystemNoma_ipSIC));
        add("op_sys_psic", "system outage, NOMA, perfect SIC", false,
            [](const SystemConfig& c, double r, int, int U) {
                return an::op_system(an::op_user_n_psic(c, r, U).value, an::op_user_m(c, r).value);
            },
            Metric::outage(OutageScheme::SystemNoma_pSIC));
        add("op_sys_oma", "system outage, OMA", false,
            [](const SystemConfig& c, double r, int, int U) {
                return an::op_system(an::op_oma(c, r, an::User::N, U).value, an::op_oma(c, r, an::User::M, U).value);
            },
            Metric::outage(OutageScheme::SystemOma));
        // high-SNR
        add("asym_n_ipsic", "error floor, user n, imperfect SIC", true,
            [](const SystemConfig& c, double r, int P, int U) {
                return an::op_asym(c, r, an::AsymKind::IpSicFloor, 1.0 - 1e-6, P, U).value;
            },
            std::nullopt);
        add("asym_n_psic", "asymptotic outage, user n, perfect SIC", true,
            [](const SystemConfig& c, double r, int P, int U) {
                return an::op_asym(c, r, an::AsymKind::PSicUserN, 1.0 - 1e-6, P, U).value;
            },
            std::nullopt);
        add("asym_m", "asymptotic outage, user m", true,
            [](const SystemConfig& c, double r, int P, int U) {
                return an::op_asym(c, r, an::AsymKind::UserM, 1.0 - 1e-6, P, U).value;
            },
            std::nullopt);
        // ergodic rates
        add("rate_n_psic", "ergodic rate, user n, perfect SIC", false,
            [](const SystemConfig& c, double r, int, int U) { return an::rate_user_n_psic(c, r, U); },
            Metric::rate(RateScheme::NomaUserN_pSIC));
        add("rate_n_ipsic", "ergodic rate, user n, imperfect SIC (simulation only)", false, nullptr,
            Metric::rate(RateScheme::NomaUserN_ipSIC));
        add("rate_m", "ergodic rate, user m", false,
            [](const SystemConfig& c, double r, int, int U) { return an::rate_user_m(c, r, U); },
            Metric::rate(RateScheme::NomaUserM));
        add("rate_oma_n", "ergodic rate, user n, OMA", false,
            [](const SystemConfig& c, double r, int, int U) { return an::rate_oma(c, r, an::User::N, U); },
            Metric::rate(RateScheme::OmaUserN));
        add("rate_oma_m", "ergodic rate, user m, OMA", false,
            [](const SystemConfig& c, double r, int, int U) { return an::rate_oma(c, r, an::User::M, U); },
            Metric::rate(RateScheme::OmaUserM));
        add("bound_n", "Jensen upper bound, user n, NOMA", false,
            [](const SystemConfig& c, double r, int, int) { return an::rate_upper_bound(c, r, an::Bound::NomaN); },
            std::nullopt);
        add("bound_oma_n", "Jensen upper bound, user n, OMA", false,
            [](const SystemConfig& c, double r, int, int) { return an::rate_upper_bound(c, r, an::Bound::OmaN); },
            std::nullopt);
        add("bound_oma_m", "Jensen upper bound, user m, OMA", false,
            [](const SystemConfig& c, double r, int, int) { return an::rate_upper_bound(c, r, an::Bound::OmaM); },
            std::nullopt);
        // throughput
        add("tput_dl_ipsic", "delay-limited throughput, imperfect SIC", false,
            [](const SystemConfig& c, double r, int P, int U) {
                const double pn = an::op_user_n_ipsic(c, r, P, U).value;
                const double pm = an::op_user_m(c, r).value;
                return (1.0 - pn) * c.R_n + (1.0 - pm) * c.R_m;
            },
            Metric::throughput(MT::DelayLimited_ipSIC));
        add("tput_dl_psic", "delay-limited throughput, perfect SIC", false,
            [](const SystemConfig& c, double r, int, int U) {
                const double pn = an::op_user_n_psic(c, r, U).value;
                const double pm = an::op_user_m(c, r).value;
                return (1.0 - pn) * c.R_n + (1.0 - pm) * c.R_m;
            },
            Metric::throughput(MT::DelayLimited_pSIC));
        add("tput_dl_oma", "delay-limited throughput, OMA", false,
            [](const SystemConfig& c, double r, int, int U) {
                const double pn = an::op_oma(c, r, an::User::N, U).value;
                const double pm = an::op_oma(c, r, an::User::M, U).value;
                return (1.0 - pn) * c.R_n + (1.0 - pm) * c.R_m;
            },
            Metric::throughput(MT::DelayLimited_OMA));
        add("tput_dt_psic", "delay-tolerant throughput, perfect SIC", false,
            [](const SystemConfig& c, double r, int, int U) {
                return an::rate_user_n_psic(c, r, U) + an::rate_user_m(c, r, U);
            },
            Metric::throughput(MT::DelayTolerant_pSIC));
        add("tput_dt_ipsic", "delay-tolerant throughput, imperfect SIC (simulation only)", false, nullptr,
            Metric::throughput(MT::DelayTolerant_ipSIC));
        add("tput_dt_oma", "delay-tolerant throughput, OMA", false,
            [](const SystemConfig& c, double r, int, int U) {
                return an::rate_oma(c, r, an::User::N, U) + an::rate_oma(c, r, an::User::M, U);
            },
            Metric::throughput(MT::DelayTolerant_OMA));
        return t;
    }();
    return table;
}

const SchemeEntry* lookup(const std::string& name) {
    for (const auto& e : entries()) {
        if (name == e.info.name) {
            return &e;
        }
    }
    return nullptr;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) {
        out.push_back(trim(cur));
    }
    if (!s.empty() && s.back() == sep) {
        out.emplace_back();
    }
    return out;
}

double to_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size()) {
        throw ConfigError("config: '" + key + "' expects a number, got '" + text + "'");
    }
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const double v = to_number(key, text);
    if (v != std::floor(v) || std::abs(v) > 1e9) {
        throw ConfigError("config: '" + key + "' expects an integer, got '" + text + "'");
    }
    return static_cast<int>(v);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Sets one scenario key. Returns false when the key is not a scenario key.
bool apply_system_key(SystemConfig& c, const std::string& key, const std::string& value) {
    auto num = [&] { return to_number(key, value); };
    if (key == "d_sn") {
        c.d_sn = num();
    } else if (key == "d_sr") {
        c.d_sr = num();
    } else if (key == "d_rn") {
        c.d_rn = num();
    } else if (key == "d_rm") {
        c.d_rm = num();
    } else if (key == "alpha") {
        c.alpha = num();
    } else if (key == "kappa") {
        c.kappa = num();
    } else if (key == "kappa_db") {
        c.kappa = an::db_to_linear(num());
    } else if (key == "K") {
        c.K = to_int(key, value);
    } else if (key == "a_n") {
        c.a_n = num();
    } else if (key == "a_m") {
        c.a_m = num();
    } else if (key == "a_tilde") {
        // power-split sweep: a_n = a~, a_m = 1 - a~, ordering not enforced
        c.a_n = num();
        c.a_m = 1.0 - c.a_n;
        c.require_power_order = false;
    } else if (key == "R_n") {
        c.R_n = num();
    } else if (key == "R_m") {
        c.R_m = num();
    } else if (key == "R") {
        c.R_n = c.R_m = num();
    } else if (key == "omega_I") {
        c.omega_I = num();
    } else if (key == "omega_I_db") {
        c.omega_I = an::db_to_linear(num());
    } else if (key == "ipsic") {
        c.ipsic = to_int(key, value);
    } else if (key == "require_power_order") {
        c.require_power_order = to_int(key, value) != 0;
    } else {
        return false;
    }
    return true;
}

std::vector<Variant> make_sweep(const SystemConfig& base, const std::string& key,
                                const std::vector<std::string>& values) {
    std::vector<Variant> out;
    for (const auto& v : values) {
        Variant var{key + "=" + v, base};
        if (!apply_system_key(var.config, key, v)) {
            throw ConfigError("config: cannot sweep unknown key '" + key + "'");
        }
        out.push_back(std::move(var));
    }
    return out;
}

int grid_threads(int requested) {
    if (requested > 0) {
        return requested;
    }
    mc::McSettings s;
    return mc::resolve_threads(s);
}

std::string label_for(const std::string& scheme, const std::string& tag) {
    return tag.empty() ? scheme : scheme + "[" + tag + "]";
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write to '" + path + "' failed");
    }
}

SystemConfig table2() {
    return SystemConfig{};
}

ExperimentSpec base_spec(const std::string& name) {
    ExperimentSpec s;
    s.name = name;
    s.config = table2();
    s.snr_grid_db = db_grid(0.0, 40.0, 2.0);
    s.mc = McSettings{};
    return s;
}

}  // namespace

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Analytical:
            return "analytical";
        case Provenance::Asymptotic:
            return "asymptotic";
        case Provenance::MonteCarlo:
            return "montecarlo";
    }
    return "?";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "analytical") {
        return Provenance::Analytical;
    }
    if (s == "asymptotic") {
        return Provenance::Asymptotic;
    }
    if (s == "montecarlo") {
        return Provenance::MonteCarlo;
    }
    throw ConfigError("unknown provenance '" + s + "'");
}

Format format_from_string(const std::string& s) {
    if (s == "csv" || s == "CSV") {
        return Format::CSV;
    }
    if (s == "json" || s == "JSON") {
        return Format::JSON;
    }
    throw ConfigError("unknown format '" + s + "' (csv or json)");
}

const Series* CurveSet::find(const std::string& label, Provenance p) const {
    for (const auto& s : series) {
        if (s.label == label && s.provenance == p) {
            return &s;
        }
    }
    return nullptr;
}

void ExperimentSpec::validate() const {
    if (schemes.empty()) {
        throw ConfigError("experiment: schemes must not be empty");
    }
    for (const auto& s : schemes) {
        if (!lookup(s)) {
            throw ConfigError("experiment: unknown scheme '" + s + "'");
        }
    }
    if (snr_grid_db.empty()) {
        throw ConfigError("experiment: SNR grid must not be empty");
    }
    for (std::size_t i = 0; i < snr_grid_db.size(); ++i) {
        if (!std::isfinite(snr_grid_db[i])) {
            throw ConfigError("experiment: SNR grid values must be finite");
        }
        if (i > 0 && !(snr_grid_db[i] > snr_grid_db[i - 1])) {
            throw ConfigError("experiment: SNR grid must be strictly increasing");
        }
    }
    if (laguerre_order < 1 || chebyshev_order < 1) {
        throw ConfigError("experiment: quadrature orders must be >= 1");
    }
    if (threads < 0) {
        throw ConfigError("experiment: threads must be >= 0");
    }
    if (sweep.empty()) {
        config.validate();
    }
    for (const auto& v : sweep) {
        if (v.tag.empty() || v.tag.find_first_of(",\n\"") != std::string::npos) {
            throw ConfigError("experiment: sweep tags must be non-empty and free of commas and quotes");
        }
        v.config.validate();
    }
    if (mc) {
        mc->validate();
    }
}

const std::vector<SchemeInfo>& scheme_catalog() {
    static const std::vector<SchemeInfo> infos = [] {
        std::vector<SchemeInfo> v;
        for (const auto& e : entries()) {
            v.push_back(e.info);
        }
        return v;
    }();
    return infos;
}

std::vector<std::string> preset_names() {
    return {"fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12"};
}

ExperimentSpec figure_preset(const std::string& name) {
    ExperimentSpec s = base_spec(name);
    const std::vector<std::string> user_outage = {"op_n_ipsic", "op_n_psic", "op_m"};
    if (name == "fig2") {
        // floors and asymptotes need the longer axis
        s.snr_grid_db = db_grid(0.0, 60.0, 2.0);
        s.schemes = {"op_n_ipsic", "op_n_psic", "op_m",        "op_oma_n",
                     "op_oma_m",   "asym_n_ipsic", "asym_n_psic", "asym_m"};
    } else if (name == "fig3") {
        s.schemes = {"op_sys_ipsic", "op_sys_psic", "op_sys_oma"};
    } else if (name == "fig4") {
        // at R = 2 the length-50 rule overshoots 1 by ~3e-5 for K = 3
        s.config.R_n = s.config.R_m = 2.0;
        s.chebyshev_order = 100;
        s.sweep = make_sweep(s.config, "K", {"3", "5", "7"});
        s.schemes = user_outage;
    } else if (name == "fig5") {
        s.sweep = make_sweep(s.config, "kappa_db", {"-40", "0", "5"});
        s.schemes = user_outage;
    } else if (name == "fig6") {
        s.config.R_n = s.config.R_m = 0.1;
        s.sweep = make_sweep(s.config, "alpha", {"2", "2.5", "3"});
        s.schemes = user_outage;
    } else if (name == "fig7") {
        s.sweep = make_sweep(s.config, "R", {"0.1", "0.5", "1.5"});
        s.schemes = user_outage;
    } else if (name == "fig8") {
        // power-split surface; analytical only
        s.sweep = make_sweep(s.config, "a_tilde", {"0.1", "0.2", "0.3", "0.4", "0.5", "0.6", "0.7"});
        s.schemes = {"op_n_psic", "op_m"};
        s.mc.reset();
    } else if (name == "fig9") {
        // 2.5 dB steps put both ends of the 30-45 dB slope window on the grid
        s.config.K = 20;
        s.snr_grid_db = db_grid(0.0, 50.0, 2.5);
        s.schemes = {"rate_n_psic", "rate_n_ipsic", "rate_m",      "rate_oma_n",
                     "rate_oma_m",  "bound_n",      "bound_oma_n", "bound_oma_m"};
    } else if (name == "fig10") {
        s.sweep = make_sweep(s.config, "K", {"5", "10", "20"});
        s.schemes = {"rate_n_psic", "rate_n_ipsic", "rate_m"};
    } else if (name == "fig11") {
        s.sweep = make_sweep(s.config, "K", {"5", "10"});
        s.schemes = {"tput_dl_ipsic", "tput_dl_psic", "tput_dl_oma"};
    } else if (name == "fig12") {
        s.sweep = make_sweep(s.config, "K", {"5", "10"});
        s.schemes = {"tput_dt_psic", "tput_dt_ipsic", "tput_dt_oma"};
    } else {
        throw ConfigError("unknown figure preset '" + name + "'");
    }
    return s;
}

CurveSet run(const ExperimentSpec& spec) {
    spec.validate();

    std::vector<Variant> variants = spec.sweep;
    if (variants.empty()) {
        variants.push_back({"", spec.config});
    }
    const std::size_t nv = variants.size();
    const std::size_t ns = spec.schemes.size();
    const std::size_t nr = spec.snr_grid_db.size();

    std::vector<double> rhos(nr);
    for (std::size_t r = 0; r < nr; ++r) {
        rhos[r] = an::db_to_linear(spec.snr_grid_db[r]);
    }
    std::vector<const SchemeEntry*> sch(ns);
    for (std::size_t s = 0; s < ns; ++s) {
        sch[s] = lookup(spec.schemes[s]);
    }

    // closed-form points, one task each, written into fixed slots
    std::vector<double> values(nv * ns * nr, 0.0);
    std::vector<std::size_t> tasks;
    for (std::size_t v = 0; v < nv; ++v) {
        for (std::size_t s = 0; s < ns; ++s) {
            if (!sch[s]->analytic) {
                continue;
            }
            for (std::size_t r = 0; r < nr; ++r) {
                tasks.push_back((v * ns + s) * nr + r);
            }
        }
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) {
                return;
            }
            const std::size_t slot = tasks[i];
            const std::size_t r = slot % nr;
            const std::size_t s = (slot / nr) % ns;
            const std::size_t v = slot / (nr * ns);
            try {
                values[slot] = sch[s]->analytic(variants[v].config, rhos[r], spec.laguerre_order, spec.chebyshev_order);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure) {
                    failure = std::current_exception();
                }
                next.store(tasks.size());
                return;
            }
        }
    };
    const int nt = std::max(1, std::min<int>(grid_threads(spec.threads), static_cast<int>(tasks.size())));
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    // simulation: one pass per variant covers every requested metric
    std::vector<std::vector<std::vector<mc::McEstimate>>> sim(nv);
    std::vector<std::vector<int>> metric_index(nv, std::vector<int>(ns, -1));
    if (spec.mc) {
        McSettings settings = *spec.mc;
        if (settings.threads == 0 && spec.threads > 0) {
            settings.threads = spec.threads;
        }
        for (std::size_t v = 0; v < nv; ++v) {
            std::vector<mc::Metric> metrics;
            for (std::size_t s = 0; s < ns; ++s) {
                if (sch[s]->metric) {
                    metric_index[v][s] = static_cast<int>(metrics.size());
                    metrics.push_back(*sch[s]->metric);
                }
            }
            if (!metrics.empty()) {
                sim[v] = mc::simulate(variants[v].config, rhos, metrics, settings);
            }
        }
    }

    CurveSet out;
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t v = 0; v < nv; ++v) {
            const std::string label = label_for(spec.schemes[s], variants[v].tag);
            if (sch[s]->analytic) {
                const Provenance p = sch[s]->info.asymptotic ? Provenance::Asymptotic : Provenance::Analytical;
                Series ser{label, p, {}};
                for (std::size_t r = 0; r < nr; ++r) {
                    ser.points.push_back({spec.snr_grid_db[r], values[(v * ns + s) * nr + r], 0.0, p});
                }
                out.series.push_back(std::move(ser));
            }
            if (metric_index[v][s] >= 0) {
                Series ser{label, Provenance::MonteCarlo, {}};
                const auto& est = sim[v][static_cast<std::size_t>(metric_index[v][s])];
                for (std::size_t r = 0; r < nr; ++r) {
                    ser.points.push_back({spec.snr_grid_db[r], est[r].value, est[r].half_width, Provenance::MonteCarlo});
                }
                out.series.push_back(std::move(ser));
            }
        }
    }

    if (!spec.output_path.empty()) {
        write_file(spec.output_path, spec.format == Format::CSV ? to_csv(out) : to_json(out, spec));
    }
    return out;
}

std::string to_csv(const CurveSet& curves) {
    std::string out = "scheme,rho_db,value,ci_halfwidth,provenance\n";
    for (const auto& s : curves.series) {
        for (const auto& p : s.points) {
            out += s.label;
            out += ',';
            out += fmt(p.rho_db);
            out += ',';
            out += fmt(p.value);
            out += ',';
            out += fmt(p.half_width);
            out += ',';
            out += to_string(p.provenance);
            out += '\n';
        }
    }
    return out;
}

CurveSet parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != "scheme,rho_db,value,ci_halfwidth,provenance") {
        throw ConfigError("csv: header must be 'scheme,rho_db,value,ci_halfwidth,provenance'");
    }
    CurveSet out;
    std::map<std::pair<std::string, Provenance>, std::size_t> where;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 5) {
            throw ConfigError("csv: line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                              " fields, expected 5");
        }
        const Provenance p = provenance_from_string(f[4]);
        PerfPoint pt{to_number("rho_db", f[1]), to_number("value", f[2]), to_number("ci_halfwidth", f[3]), p};
        const auto key = std::make_pair(f[0], p);
        auto it = where.find(key);
        if (it == where.end()) {
            it = where.emplace(key, out.series.size()).first;
            out.series.push_back({f[0], p, {}});
        }
        auto& pts = out.series[it->second].points;
        if (!pts.empty() && !(pt.rho_db > pts.back().rho_db)) {
            throw ConfigError("csv: line " + std::to_string(lineno) + ": rho_db not increasing within '" + f[0] + "'");
        }
        pts.push_back(pt);
    }
    return out;
}

std::string to_json(const CurveSet& curves, const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    j["experiment"] = spec.name;
    nlohmann::ordered_json cfg;
    for (const auto& [k, v] : describe(spec.config)) {
        cfg[k] = v;
    }
    j["config"] = cfg;
    nlohmann::ordered_json sweep = nlohmann::ordered_json::array();
    for (const auto& v : spec.sweep) {
        sweep.push_back(v.tag);
    }
    j["sweep"] = sweep;
    if (spec.mc) {
        j["montecarlo"] = {{"trials", spec.mc->trials}, {"seed", spec.mc->seed}, {"confidence", spec.mc->confidence}};
    } else {
        j["montecarlo"] = nullptr;
    }
    nlohmann::ordered_json series = nlohmann::ordered_json::array();
    for (const auto& s : curves.series) {
        nlohmann::ordered_json js;
        js["scheme"] = s.label;
        js["provenance"] = to_string(s.provenance);
        nlohmann::ordered_json rho = nlohmann::ordered_json::array();
        nlohmann::ordered_json val = nlohmann::ordered_json::array();
        nlohmann::ordered_json ci = nlohmann::ordered_json::array();
        for (const auto& p : s.points) {
            rho.push_back(p.rho_db);
            val.push_back(p.value);
            ci.push_back(p.half_width);
        }
        js["rho_db"] = rho;
        js["value"] = val;
        js["ci_halfwidth"] = ci;
        series.push_back(js);
    }
    j["series"] = series;
    return j.dump(1) + "\n";
}

CurveSet parse_json(const std::string& text) {
    CurveSet out;
    try {
        const auto j = nlohmann::json::parse(text);
        for (const auto& js : j.at("series")) {
            Series s;
            s.label = js.at("scheme").get<std::string>();
            s.provenance = provenance_from_string(js.at("provenance").get<std::string>());
            const auto& rho = js.at("rho_db");
            const auto& val = js.at("value");
            const auto& ci = js.at("ci_halfwidth");
            if (rho.size() != val.size() || rho.size() != ci.size()) {
                throw ConfigError("json: ragged series '" + s.label + "'");
            }
            for (std::size_t i = 0; i < rho.size(); ++i) {
                s.points.push_back({rho[i].get<double>(), val[i].get<double>(), ci[i].get<double>(), s.provenance});
            }
            out.series.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("json: ") + e.what());
    }
    return out;
}

ExperimentSpec parse_config(const std::string& text, ExperimentSpec base) {
    ExperimentSpec s = std::move(base);
    std::optional<std::pair<std::string, std::vector<std::string>>> sweep;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (apply_system_key(s.config, key, value)) {
            continue;
        }
        if (key == "name") {
            s.name = value;
        } else if (key == "schemes") {
            s.schemes.clear();
            for (const auto& x : split(value, ',')) {
                if (!x.empty()) {
                    s.schemes.push_back(x);
                }
            }
        } else if (key == "snr_db") {
            // lo:hi:step or an explicit list
            if (value.find(':') != std::string::npos) {
                const auto f = split(value, ':');
                if (f.size() != 3) {
                    throw ConfigError("config: snr_db range must be lo:hi:step");
                }
                s.snr_grid_db = db_grid(to_number(key, f[0]), to_number(key, f[1]), to_number(key, f[2]));
            } else {
                s.snr_grid_db.clear();
                for (const auto& x : split(value, ',')) {
                    s.snr_grid_db.push_back(to_number(key, x));
                }
            }
        } else if (key == "sweep") {
            // param: v1, v2, ...
            const auto colon = value.find(':');
            if (colon == std::string::npos) {
                throw ConfigError("config: sweep must be 'param: v1, v2, ...'");
            }
            sweep = std::make_pair(trim(value.substr(0, colon)), split(value.substr(colon + 1), ','));
        } else if (key == "trials" || key == "seed" || key == "confidence") {
            if (!s.mc) {
                s.mc = McSettings{};
            }
            if (key == "confidence") {
                s.mc->confidence = to_number(key, value);
            } else {
                const double v = to_number(key, value);
                if (v < 0 || v != std::floor(v)) {
                    throw ConfigError("config: '" + key + "' expects a non-negative integer");
                }
                (key == "trials" ? s.mc->trials : s.mc->seed) = static_cast<std::uint64_t>(v);
            }
        } else if (key == "montecarlo") {
            if (to_int(key, value) != 0) {
                if (!s.mc) {
                    s.mc = McSettings{};
                }
            } else {
                s.mc.reset();
            }
        } else if (key == "laguerre_order") {
            s.laguerre_order = to_int(key, value);
        } else if (key == "chebyshev_order") {
            s.chebyshev_order = to_int(key, value);
        } else if (key == "threads") {
            s.threads = to_int(key, value);
        } else if (key == "format") {
            s.format = format_from_string(value);
        } else if (key == "output") {
            s.output_path = value;
        } else {
            throw ConfigError("config: unknown key '" + key + "'");
        }
    }
    if (sweep) {
        s.sweep = make_sweep(s.config, sweep->first, sweep->second);
    } else if (!s.sweep.empty()) {
        // re-derive an inherited sweep from the updated base
        std::vector<Variant> rebuilt;
        for (const auto& v : s.sweep) {
            const auto eq = v.tag.find('=');
            if (eq == std::string::npos) {
                rebuilt.push_back(v);
                continue;
            }
            auto one = make_sweep(s.config, v.tag.substr(0, eq), {v.tag.substr(eq + 1)});
            rebuilt.push_back(std::move(one.front()));
        }
        s.sweep = std::move(rebuilt);
    }
    return s;
}

std::vector<std::pair<std::string, std::string>> describe(const SystemConfig& c) {
    return {
        {"d_sn", fmt(c.d_sn)},
        {"d_sr", fmt(c.d_sr)},
        {"d_rn", fmt(c.d_rn)},
        {"d_rm", fmt(c.d_rm)},
        {"alpha", fmt(c.alpha)},
        {"kappa", fmt(c.kappa)},
        {"K", std::to_string(c.K)},
        {"a_n", fmt(c.a_n)},
        {"a_m", fmt(c.a_m)},
        {"R_n", fmt(c.R_n)},
        {"R_m", fmt(c.R_m)},
        {"omega_I", fmt(c.omega_I)},
        {"ipsic", std::to_string(c.ipsic)},
        {"require_power_order", c.require_power_order ? "1" : "0"},
    };
}

std::vector<double> db_grid(double lo, double hi, double step) {
    if (!(step > 0.0) || !std::isfinite(lo) || !std::isfinite(hi) || hi < lo) {
        throw ConfigError("db_grid: need finite lo <= hi and step > 0");
    }
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
    std::vector<double> g;
    g.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        g.push_back(lo + static_cast<double>(i) * step);
    }
    return g;
}

}  // namespace starnoma::experiment
