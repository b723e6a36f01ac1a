#include "starnoma/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "starnoma/errors.hpp"

namespace starnoma::montecarlo {

namespace {

constexpr std::uint64_t kChunk = 4096;

// Running mean and centred second moment; merged with Chan's update.
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }

    static Moments merge(const Moments& a, const Moments& b) {
        if (a.n == 0.0) {
            return b;
        }
        if (b.n == 0.0) {
            return a;
        }
        Moments r;
        r.n = a.n + b.n;
        const double d = b.mean - a.mean;
        r.mean = a.mean + d * (b.n / r.n);
        r.m2 = a.m2 + b.m2 + d * d * (a.n * b.n / r.n);
        return r;
    }
};

// Pairwise merge of per-chunk moments in chunk order.
Moments reduce(const std::vector<const Moments*>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) {
        return *parts[lo];
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return Moments::merge(reduce(parts, lo, mid), reduce(parts, mid, hi));
}

struct Targets {
    double th_n = 0.0;
    double th_m = 0.0;
    double th_n_oma = 0.0;
    double th_m_oma = 0.0;
};

// Per-trial quantities at one SNR.
struct PointState {
    bool out_n_ipsic = false;
    bool out_n_psic = false;
    bool out_m = false;
    bool out_n_oma = false;
    bool out_m_oma = false;
    double rate_n_ipsic = 0.0;
    double rate_n_psic = 0.0;
    double rate_m = 0.0;
    double rate_n_oma = 0.0;
    double rate_m_oma = 0.0;
};

PointState evaluate(const ChannelRealization& h, const SystemConfig& cfg, double rho, const Targets& t,
                    bool need_rates) {
    const double a = h.h_sn_amp + h.cascade_n;
    const double a2 = a * a * rho;
    const double c2 = h.cascade_m * h.cascade_m * rho;
    const double n_to_m = a2 * cfg.a_m / (a2 * cfg.a_n + 1.0);
    const double gamma_n_psic = a2 * cfg.a_n;
    const double gamma_n_ipsic = gamma_n_psic / (h.h_I_sq * rho + 1.0);
    const double gamma_m = c2 * cfg.a_m / (c2 * cfg.a_n + 1.0);
    const double oma_n = a2 * cfg.a_n;
    const double oma_m = c2 * cfg.a_m;

    PointState s;
    const bool sic_fails = n_to_m < t.th_m;
    s.out_n_ipsic = sic_fails || gamma_n_ipsic < t.th_n;
    s.out_n_psic = sic_fails || gamma_n_psic < t.th_n;
    s.out_m = gamma_m < t.th_m;
    s.out_n_oma = oma_n < t.th_n_oma;
    s.out_m_oma = oma_m < t.th_m_oma;
    if (need_rates) {
        s.rate_n_ipsic = std::log2(1.0 + gamma_n_ipsic);
        s.rate_n_psic = std::log2(1.0 + gamma_n_psic);
        s.rate_m = std::log2(1.0 + gamma_m);
        s.rate_n_oma = 0.5 * std::log2(1.0 + oma_n);
        s.rate_m_oma = 0.5 * std::log2(1.0 + oma_m);
    }
    return s;
}

double metric_value(const Metric& metric, const PointState& s, const SystemConfig& cfg) {
    const auto ind = [](bool b) { return b ? 1.0 : 0.0; };
    switch (metric.kind) {
        case MetricKind::Outage:
            switch (static_cast<OutageScheme>(metric.scheme)) {
                case OutageScheme::NomaUserN_ipSIC:
                    return ind(s.out_n_ipsic);
                case OutageScheme::NomaUserN_pSIC:
                    return ind(s.out_n_psic);
                case OutageScheme::NomaUserM:
                    return ind(s.out_m);
                case OutageScheme::OmaUserN:
                    return ind(s.out_n_oma);
                case OutageScheme::OmaUserM:
                    return ind(s.out_m_oma);
                case OutageScheme::SystemNoma_ipSIC:
                    return ind(s.out_n_ipsic || s.out_m);
                case OutageScheme::SystemNoma_pSIC:
                    return ind(s.out_n_psic || s.out_m);
                case OutageScheme::SystemOma:
                    return ind(s.out_n_oma || s.out_m_oma);
            }
            break;
        case MetricKind::Rate:
            switch (static_cast<RateScheme>(metric.scheme)) {
                case RateScheme::NomaUserN_ipSIC:
                    return s.rate_n_ipsic;
                case RateScheme::NomaUserN_pSIC:
                    return s.rate_n_psic;
                case RateScheme::NomaUserM:
                    return s.rate_m;
                case RateScheme::OmaUserN:
                    return s.rate_n_oma;
                case RateScheme::OmaUserM:
                    return s.rate_m_oma;
            }
            break;
        case MetricKind::Throughput:
            switch (static_cast<ThroughputMode>(metric.scheme)) {
                case ThroughputMode::DelayLimited_ipSIC:
                    return (1.0 - ind(s.out_n_ipsic)) * cfg.R_n + (1.0 - ind(s.out_m)) * cfg.R_m;
                case ThroughputMode::DelayLimited_pSIC:
                    return (1.0 - ind(s.out_n_psic)) * cfg.R_n + (1.0 - ind(s.out_m)) * cfg.R_m;
                case ThroughputMode::DelayTolerant_pSIC:
                    return s.rate_n_psic + s.rate_m;
                case ThroughputMode::DelayTolerant_ipSIC:
                    return s.rate_n_ipsic + s.rate_m;
                case ThroughputMode::DelayLimited_OMA:
                    return (1.0 - ind(s.out_n_oma)) * cfg.R_n + (1.0 - ind(s.out_m_oma)) * cfg.R_m;
                case ThroughputMode::DelayTolerant_OMA:
                    return s.rate_n_oma + s.rate_m_oma;
            }
            break;
    }
    throw DomainError("montecarlo: unknown metric");
}

bool is_indicator(const Metric& m) {
    return m.kind == MetricKind::Outage;
}

bool needs_rates(const Metric& m) {
    if (m.kind == MetricKind::Rate) {
        return true;
    }
    if (m.kind == MetricKind::Throughput) {
        const auto mode = static_cast<ThroughputMode>(m.scheme);
        return mode == ThroughputMode::DelayTolerant_pSIC || mode == ThroughputMode::DelayTolerant_ipSIC ||
               mode == ThroughputMode::DelayTolerant_OMA;
    }
    return false;
}

bool needs_user_m_decoding(const Metric& m) {
    if (m.kind != MetricKind::Outage) {
        return false;
    }
    const auto s = static_cast<OutageScheme>(m.scheme);
    return s == OutageScheme::NomaUserM || s == OutageScheme::SystemNoma_ipSIC || s == OutageScheme::SystemNoma_pSIC;
}

}  // namespace

void McSettings::validate() const {
    if (trials < 1) {
        throw ConfigError("McSettings: trials must be >= 1");
    }
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ConfigError("McSettings: confidence must lie in (0, 1)");
    }
    if (threads < 0) {
        throw ConfigError("McSettings: threads must be >= 0");
    }
}

int resolve_threads(const McSettings& mc) {
    if (mc.threads > 0) {
        return mc.threads;
    }
    if (const char* env = std::getenv("STARNOMA_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) {
            return n;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

NomaSinr sinr_noma(const ChannelRealization& h, const SystemConfig& cfg, double rho) {
    const double a = h.h_sn_amp + h.cascade_n;
    const double a2 = a * a * rho;
    const double c2 = h.cascade_m * h.cascade_m * rho;
    NomaSinr s;
    s.n_to_m = a2 * cfg.a_m / (a2 * cfg.a_n + 1.0);
    s.n = a2 * cfg.a_n / (cfg.ipsic * h.h_I_sq * rho + 1.0);
    s.m = c2 * cfg.a_m / (c2 * cfg.a_n + 1.0);
    return s;
}

OmaSnr snr_oma(const ChannelRealization& h, const SystemConfig& cfg, double rho) {
    const double a = h.h_sn_amp + h.cascade_n;
    return {a * a * rho * cfg.a_n, h.cascade_m * h.cascade_m * rho * cfg.a_m};
}

std::vector<std::vector<McEstimate>> simulate(const SystemConfig& cfg, const std::vector<double>& rhos,
                                              const std::vector<Metric>& metrics, const McSettings& mc) {
    cfg.validate();
    mc.validate();
    if (metrics.empty() || rhos.empty()) {
        throw ConfigError("simulate: need at least one metric and one SNR point");
    }
    for (double rho : rhos) {
        if (!(rho > 0.0) || !std::isfinite(rho)) {
            throw ConfigError("simulate: SNR values must be positive and finite");
        }
    }
    Targets t;
    t.th_n = std::exp2(cfg.R_n) - 1.0;
    t.th_m = std::exp2(cfg.R_m) - 1.0;
    t.th_n_oma = std::exp2(2.0 * cfg.R_n) - 1.0;
    t.th_m_oma = std::exp2(2.0 * cfg.R_m) - 1.0;
    bool need_rates = false;
    for (const Metric& m : metrics) {
        need_rates = need_rates || needs_rates(m);
        if (needs_user_m_decoding(m) && !(cfg.a_m > t.th_m * cfg.a_n)) {
            throw ConfigError("simulate: a_m <= gamma_th_m * a_n, user m is in outage with certainty");
        }
    }

    const std::size_t cells = metrics.size() * rhos.size();
    const std::uint64_t n_chunks = (mc.trials + kChunk - 1) / kChunk;
    std::vector<std::vector<Moments>> chunk_stats(n_chunks);

    std::atomic<std::uint64_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        try {
            for (;;) {
                const std::uint64_t c = next.fetch_add(1);
                if (c >= n_chunks) {
                    return;
                }
                std::vector<Moments> stats(cells);
                const std::uint64_t begin = c * kChunk;
                const std::uint64_t end = std::min(mc.trials, begin + kChunk);
                for (std::uint64_t trial = begin; trial < end; ++trial) {
                    const ChannelRealization h = channel::sample_realization(cfg, mc.seed, trial);
                    for (std::size_t r = 0; r < rhos.size(); ++r) {
                        const PointState s = evaluate(h, cfg, rhos[r], t, need_rates);
                        for (std::size_t k = 0; k < metrics.size(); ++k) {
                            stats[k * rhos.size() + r].add(metric_value(metrics[k], s, cfg));
                        }
                    }
                }
                chunk_stats[c] = std::move(stats);
            }
        } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
                failure = std::current_exception();
            }
            next.store(n_chunks);
        }
    };

    const int n_threads = std::max(1, std::min<int>(resolve_threads(mc), static_cast<int>(n_chunks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (int i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }

    const boost::math::normal_distribution<double> normal;
    const double z = boost::math::quantile(normal, 0.5 * (1.0 + mc.confidence));
    std::vector<std::vector<McEstimate>> out(metrics.size(), std::vector<McEstimate>(rhos.size()));
    std::vector<const Moments*> parts(n_chunks);
    for (std::size_t k = 0; k < metrics.size(); ++k) {
        for (std::size_t r = 0; r < rhos.size(); ++r) {
            for (std::uint64_t c = 0; c < n_chunks; ++c) {
                parts[c] = &chunk_stats[c][k * rhos.size() + r];
            }
            const Moments total = reduce(parts, 0, parts.size());
            McEstimate e;
            e.value = total.mean;
            e.trials_used = mc.trials;
            const double n = total.n;
            double var = 0.0;
            if (is_indicator(metrics[k])) {
                var = total.mean * (1.0 - total.mean);
            } else if (n > 1.0) {
                var = total.m2 / (n - 1.0);
            }
            e.half_width = z * std::sqrt(std::max(var, 0.0) / n);
            out[k][r] = e;
        }
    }
    return out;
}

McEstimate estimate_outage(const SystemConfig& cfg, double rho, OutageScheme scheme, const McSettings& mc) {
    return simulate(cfg, {rho}, {Metric::outage(scheme)}, mc)[0][0];
}

McEstimate estimate_rate(const SystemConfig& cfg, double rho, RateScheme scheme, const McSettings& mc) {
    return simulate(cfg, {rho}, {Metric::rate(scheme)}, mc)[0][0];
}

McEstimate estimate_throughput(const SystemConfig& cfg, double rho, ThroughputMode mode, const McSettings& mc) {
    return simulate(cfg, {rho}, {Metric::throughput(mode)}, mc)[0][0];
}

}  // namespace starnoma::montecarlo
