#pragma once

// Monte Carlo ground truth for outage, ergodic rate and throughput.
//
// One channel realization per trial is shared by every SNR point and every
// requested metric (common random numbers). Trials are grouped in fixed-size
// chunks; chunk sums are reduced pairwise in chunk order, so the estimate is
// bit-identical for any number of worker threads.

#include <cstdint>
#include <vector>

#include "starnoma/channel.hpp"

namespace starnoma::montecarlo {

using channel::ChannelRealization;
using channel::SystemConfig;

struct McSettings {
    std::uint64_t trials = 1'000'000;
    std::uint64_t seed = 20220101;
    double confidence = 0.95;
    // worker threads; 0 means STARNOMA_THREADS or the hardware count
    int threads = 0;

    void validate() const;
};

struct McEstimate {
    double value = 0.0;
    double half_width = 0.0;
    std::uint64_t trials_used = 0;
};

struct NomaSinr {
    double n_to_m = 0.0;  // user n decoding x_m
    double n = 0.0;       // user n decoding x_n after SIC
    double m = 0.0;       // user m decoding x_m
};

struct OmaSnr {
    double n = 0.0;
    double m = 0.0;
};

/// SINRs at linear SNR rho. The residual-interference term uses cfg.ipsic.
NomaSinr sinr_noma(const ChannelRealization& h, const SystemConfig& cfg, double rho);

OmaSnr snr_oma(const ChannelRealization& h, const SystemConfig& cfg, double rho);

enum class OutageScheme {
    NomaUserN_ipSIC,
    NomaUserN_pSIC,
    NomaUserM,
    OmaUserN,
    OmaUserM,
    SystemNoma_ipSIC,
    SystemNoma_pSIC,
    SystemOma,
};

enum class RateScheme { NomaUserN_ipSIC, NomaUserN_pSIC, NomaUserM, OmaUserN, OmaUserM };

enum class ThroughputMode {
    DelayLimited_ipSIC,
    DelayLimited_pSIC,
    DelayTolerant_pSIC,
    DelayTolerant_ipSIC,
    DelayLimited_OMA,
    DelayTolerant_OMA,
};

enum class MetricKind { Outage, Rate, Throughput };

struct Metric {
    MetricKind kind = MetricKind::Outage;
    int scheme = 0;  // value of the OutageScheme / RateScheme / ThroughputMode enum

    static Metric outage(OutageScheme s) { return {MetricKind::Outage, static_cast<int>(s)}; }
    static Metric rate(RateScheme s) { return {MetricKind::Rate, static_cast<int>(s)}; }
    static Metric throughput(ThroughputMode m) { return {MetricKind::Throughput, static_cast<int>(m)}; }
};

/// Estimates for every (metric, rho) pair, indexed [metric][rho].
/// Throws ConfigError when a metric needs user m to decode but
/// a_m <= gamma_th_m a_n makes that impossible.
std::vector<std::vector<McEstimate>> simulate(const SystemConfig& cfg, const std::vector<double>& rhos,
                                              const std::vector<Metric>& metrics, const McSettings& mc);

McEstimate estimate_outage(const SystemConfig& cfg, double rho, OutageScheme scheme, const McSettings& mc);
McEstimate estimate_rate(const SystemConfig& cfg, double rho, RateScheme scheme, const McSettings& mc);
McEstimate estimate_throughput(const SystemConfig& cfg, double rho, ThroughputMode mode, const McSettings& mc);

/// Worker count actually used for a settings object.
int resolve_threads(const McSettings& mc);

}  // namespace starnoma::montecarlo
