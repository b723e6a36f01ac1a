#pragma once

// Experiment description, figure presets, curve containers and their CSV /
// JSON forms. The CLI is a thin shell over this header.

#include <optional>
#include <string>
#include <vector>

#include "starnoma/analysis.hpp"
#include "starnoma/montecarlo.hpp"

namespace starnoma::experiment {

using channel::SystemConfig;
using montecarlo::McSettings;

enum class Format { CSV, JSON };
enum class Provenance { Analytical, Asymptotic, MonteCarlo };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);
Format format_from_string(const std::string& s);

struct PerfPoint {
    double rho_db = 0.0;
    double value = 0.0;
    double half_width = 0.0;
    Provenance provenance = Provenance::Analytical;

    bool operator==(const PerfPoint&) const = default;
};

struct Series {
    std::string label;
    Provenance provenance = Provenance::Analytical;
    std::vector<PerfPoint> points;  // sorted by rho_db

    bool operator==(const Series&) const = default;
};

struct CurveSet {
    std::vector<Series> series;

    const Series* find(const std::string& label, Provenance p) const;
    bool operator==(const CurveSet&) const = default;
};

/// One member of a parameter sweep; its tag is appended to every label.
struct Variant {
    std::string tag;
    SystemConfig config;
};

struct ExperimentSpec {
    std::string name = "custom";
    SystemConfig config;
    std::vector<Variant> sweep;  // empty: run config alone, labels untagged
    std::vector<double> snr_grid_db;
    std::vector<std::string> schemes;
    std::optional<McSettings> mc;  // absent: analytical curves only
    std::string output_path;
    Format format = Format::CSV;
    int laguerre_order = analysis::kDefaultLaguerreOrder;
    int chebyshev_order = analysis::kDefaultChebyshevOrder;
    int threads = 0;  // grid workers; 0 means STARNOMA_THREADS or hardware count

    /// Throws ConfigError.
    void validate() const;
};

struct SchemeInfo {
    const char* name;
    const char* description;
    bool analytical;
    bool asymptotic;
    bool montecarlo;
};

/// Every scheme identifier understood by run().
const std::vector<SchemeInfo>& scheme_catalog();

/// Figure names fig2 ... fig12.
std::vector<std::string> preset_names();

/// Fully populated spec for a figure; throws ConfigError for unknown names.
ExperimentSpec figure_preset(const std::string& name);

/// Evaluates every (variant, scheme, SNR) point; writes output_path if set.
CurveSet run(const ExperimentSpec& spec);

std::string to_csv(const CurveSet& curves);
CurveSet parse_csv(const std::string& text);
std::string to_json(const CurveSet& curves, const ExperimentSpec& spec);
CurveSet parse_json(const std::string& text);

/// Flat "key = value" configuration; '#' starts a comment. Keys ending in
/// _db are converted from decibels. Later keys override earlier ones.
ExperimentSpec parse_config(const std::string& text, ExperimentSpec base = {});

/// The SystemConfig fields as (key, value) text pairs, for snapshots and JSON.
std::vector<std::pair<std::string, std::string>> describe(const SystemConfig& cfg);

/// Evenly spaced grid lo, lo + step, ..., hi (inclusive up to rounding).
std::vector<double> db_grid(double lo, double hi, double step);

}  // namespace starnoma::experiment
