#pragma once
/**
 * @file lab.hpp
 * @brief Experiment orchestration: typed configurations, deterministic
 * initial-data presets, the experiment drivers, and report emission
 * (diagnostics.csv, report.json, plotdata_*.csv, optional field snapshots).
 */

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kg2d/config.hpp"
#include "kg2d/grid.hpp"
#include "kg2d/ground_state.hpp"
#include "kg2d/kg_dynamics.hpp"

namespace kg2d {

inline constexpr const char* kg2d_version = "kg2d 1.0.0";

enum class ExperimentKind {
    ground_state,
    dichotomy,
    boost_check,
    bridge,
    decay_fit,
    decoupling,
    custom_evolve,
};
const char* to_string(ExperimentKind k);
ExperimentKind experiment_kind_from(const std::string& name);

enum class DataPreset { scaled_q, gaussian, wave_packet };
const char* to_string(DataPreset p);
DataPreset preset_from(const std::string& name);

/// Recipe for the initial state.  scaled-Q: amplitude * Q(|x - x0|), zero
/// velocity.  gaussian: amplitude * exp(-|x - x0|^2 / (2 width^2)) plus
/// optional band-limited noise, zero velocity.  wave-packet: the
/// concentrating data family over a gaussian profile, converted to (u, u_t).
struct InitialDataRecipe {
    DataPreset preset = DataPreset::gaussian;
    double amplitude = 1.0;
    double width = 1.4;
    std::array<double, 2> x0{0.0, 0.0};
    double noise = 0.0;        ///< relative noise amplitude (gaussian preset)
    std::uint64_t seed = 0;    ///< counter-based generator key
    double lambda = 4.0;       ///< wave-packet scale
    std::array<double, 2> nu{0.0, 0.0};  ///< wave-packet frame parameter
    double t0 = 0.0;           ///< wave-packet free-flow offset (fast units)
    double theta = 0.01;       ///< wave-packet low-pass exponent

    bool operator==(const InitialDataRecipe&) const = default;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::custom_evolve;
    int n = 256;
    double box_length = 96.0;
    double mu = -1.0;
    double dt = 1e-3;
    double T = 30.0;
    InitialDataRecipe data;

    std::vector<double> epsilon_list{0.05, 0.1, 0.2, -0.05, -0.1, -0.2};
    std::vector<double> nu_x_list{0.0, 0.2, 0.5};  ///< boost-check x-boosts
    std::vector<double> lambda_list{4.0, 8.0, 16.0};

    double ground_state_tol = 1e-12;
    int snapshot_every = 0;      ///< KGF1 cadence for custom-evolve (0 = none)
    double drift_tol = 1e-6;     ///< custom-evolve energy-drift verdict
    double sample_dt = 0.05;     ///< monitor cadence (dichotomy, decoupling)
    double slow_T = 0.5;         ///< bridge slow half-window
    double dt_nls = 5e-4;        ///< bridge slow step
    double node_dt = 5e-3;       ///< bridge slow node cadence
    double radius = 20.0;        ///< virial cutoff radius R
    double weight_eps = 0.1;     ///< virial weight epsilon
    std::string out_dir = "out";
    int threads = 0;             ///< 0 = read KG2D_THREADS (default 1)

    bool operator==(const ExperimentConfig&) const = default;
};

/// Typed view of a parsed config; unknown keys and out-of-range values are
/// usage errors.  Inverse of config_from_experiment (lossless round trip).
ExperimentConfig experiment_from_config(const ConfigMap& cfg);
ConfigMap config_from_experiment(const ExperimentConfig& e);
ExperimentConfig load_experiment_config(const std::string& path);

/// One named check with the threshold it cited.
struct Verdict {
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string relation;  ///< e.g. "<" : pass means measured < threshold
};

struct HealthMetrics {
    double boundary_mass = 0.0;  ///< worst outer-annulus L2 mass fraction
    double aliasing = 0.0;       ///< worst spectral tail fraction
    double drift = 0.0;          ///< worst relative energy drift
};

struct RunReport {
    ExperimentConfig config;
    std::string version = kg2d_version;
    std::string status = "completed";  ///< or "failed: ..." / "underresolved: ..."
    std::vector<Verdict> verdicts;
    HealthMetrics health;
    double wall_seconds = 0.0;
    std::map<std::string, double> metrics;  ///< named scalar results
    std::vector<std::string> artifacts;     ///< files written under out_dir

    bool passed() const;
};

/// Runs one experiment: builds data, drives the solver/diagnostics,
/// writes artifacts into config.out_dir, and returns the report (also
/// written as report.json).  Deterministic for a fixed config + seed.
RunReport run(const ExperimentConfig& cfg);

/// Center-of-energy / truncated-virial time series over a short evolution;
/// backs the `virial` CLI subcommand.
RunReport virial_run(const ExperimentConfig& cfg);

/// Deterministic band-limited gaussian noise, unit L2 norm: splitmix64
/// counter stream keyed by seed, Box-Muller, then a low-pass at half the
/// Nyquist frequency.
RealField2D noise_field(const Grid2D& g, std::uint64_t seed);

/// Builds (u, u_t) from a recipe.  Qp is required for scaled-Q and may be
/// null otherwise.
KGState build_initial_state(const InitialDataRecipe& r, const Grid2D& g,
                            double mu, const GroundStateProfile* Qp);

/// Worker-thread count: explicit value, else the KG2D_THREADS environment
/// variable, else 1.
int thread_count(int requested);

}  // namespace kg2d
