#include "kg2d/lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <optional>
#include <thread>

#include "json.hpp"
#include "kg2d/boost_ops.hpp"
#include "kg2d/diagnostics.hpp"
#include "kg2d/io.hpp"
#include "kg2d/nr_limit.hpp"
#include "kg2d/symbols.hpp"
#include "kg2d/transform.hpp"

namespace fs = std::filesystem;

namespace kg2d {
namespace {

// ---------------------------------------------------------------------------
// small utilities
// ---------------------------------------------------------------------------

std::string fmt17(double d) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", d);
    return buf;
}

std::string eps_label(double eps) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%+.2f", eps);
    return buf;
}

/// Deterministic CSV emission: fixed column order, %.17g values.
class CsvFile {
public:
    CsvFile(const fs::path& path, const std::vector<std::string>& cols)
        : path_(path.string()), out_(path) {
        require(out_.good(), "cannot open " + path_);
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) out_ << ',';
            out_ << cols[i];
        }
        out_ << '\n';
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) {
            if (i) out_ << ',';
            out_ << fmt17(vals[i]);
        }
        out_ << '\n';
    }
    void close() {
        out_.close();
        require(out_.good(), "failed writing " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

void check(RunReport& rep, const std::string& name, double measured,
           const std::string& relation, double threshold) {
    bool pass = false;
    if (relation == "<") pass = measured < threshold;
    else if (relation == "<=") pass = measured <= threshold;
    else if (relation == ">") pass = measured > threshold;
    else if (relation == ">=") pass = measured >= threshold;
    else fail("unknown verdict relation " + relation);
    rep.verdicts.push_back(Verdict{name, pass, measured, threshold, relation});
}

void check_flag(RunReport& rep, const std::string& name, bool ok) {
    rep.verdicts.push_back(Verdict{name, ok, ok ? 1.0 : 0.0, 1.0, ">="});
}

fs::path art(RunReport& rep, const fs::path& dir, const std::string& name) {
    fs::path p = dir / name;
    rep.artifacts.push_back(p.string());
    return p;
}

double grad_sq_of(const RealField2D& u) {
    const double s1 = sobolev_norm(u, 1.0);
    const double l2 = lp_norm(u, 2);
    return std::max(0.0, s1 * s1 - l2 * l2);
}

void observe_health(HealthMetrics& h, const RealField2D& u) {
    h.boundary_mass = std::max(h.boundary_mass, boundary_mass_fraction(u));
    h.aliasing = std::max(h.aliasing, spectral_tail_fraction(u));
}

void observe_health(HealthMetrics& h, const ComplexField2D& f) {
    h.boundary_mass = std::max(h.boundary_mass, boundary_mass_fraction(f));
    h.aliasing = std::max(h.aliasing, spectral_tail_fraction(f));
}

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y,
                 double* intercept = nullptr) {
    require(x.size() == y.size() && x.size() >= 2, "need two points to fit");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = m * sxx - sx * sx;
    require(denom > 0.0, "degenerate abscissae in fit");
    const double slope = (m * sxy - sx * sy) / denom;
    if (intercept) *intercept = (sy - slope * sx) / m;
    return slope;
}

ComplexField2D gaussian_complex(const Grid2D& g, double amp, double width,
                                std::array<double, 2> x0) {
    require(width > 0.0, "gaussian width must be positive");
    ComplexField2D f(g, Space::physical);
    const double inv = 1.0 / (2.0 * width * width);
    for (int i = 0; i < g.n; ++i) {
        const double dx = g.coord(i) - x0[0];
        for (int j = 0; j < g.n; ++j) {
            const double dy = g.coord(j) - x0[1];
            f.at(i, j) = cplx(amp * std::exp(-(dx * dx + dy * dy) * inv), 0.0);
        }
    }
    return f;
}

// ---------------------------------------------------------------------------
// config plumbing
// ---------------------------------------------------------------------------

const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "experiment", "n", "box_length", "mu", "dt", "T",
        "data.preset", "data.amplitude", "data.width", "data.x0",
        "data.noise", "data.seed", "data.lambda", "data.nu", "data.t0",
        "data.theta",
        "epsilon_list", "nu_x_list", "lambda_list",
        "ground_state_tol", "snapshot_every", "drift_tol", "sample_dt",
        "slow_T", "dt_nls", "node_dt", "radius", "weight_eps", "out_dir",
        "threads"};
    return keys;
}

std::array<double, 2> pair_of(const std::vector<double>& v,
                              const std::string& key) {
    require(v.size() == 2, "config key " + key + ": expected two entries");
    return {v[0], v[1]};
}

}  // namespace

const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::ground_state: return "ground-state";
        case ExperimentKind::dichotomy: return "dichotomy";
        case ExperimentKind::boost_check: return "boost-check";
        case ExperimentKind::bridge: return "bridge";
        case ExperimentKind::decay_fit: return "decay-fit";
        case ExperimentKind::decoupling: return "decoupling";
        case ExperimentKind::custom_evolve: return "custom-evolve";
    }
    return "?";
}

ExperimentKind experiment_kind_from(const std::string& name) {
    for (ExperimentKind k :
         {ExperimentKind::ground_state, ExperimentKind::dichotomy,
          ExperimentKind::boost_check, ExperimentKind::bridge,
          ExperimentKind::decay_fit, ExperimentKind::decoupling,
          ExperimentKind::custom_evolve}) {
        if (name == to_string(k)) return k;
    }
    fail("unknown experiment '" + name + "'");
}

const char* to_string(DataPreset p) {
    switch (p) {
        case DataPreset::scaled_q: return "scaled-Q";
        case DataPreset::gaussian: return "gaussian";
        case DataPreset::wave_packet: return "wave-packet";
    }
    return "?";
}

DataPreset preset_from(const std::string& name) {
    for (DataPreset p : {DataPreset::scaled_q, DataPreset::gaussian,
                         DataPreset::wave_packet}) {
        if (name == to_string(p)) return p;
    }
    fail("unknown data preset '" + name + "'");
}

ExperimentConfig experiment_from_config(const ConfigMap& cfg) {
    cfg.require_known(known_keys());
    ExperimentConfig e;
    e.kind = experiment_kind_from(cfg.get_string("experiment", to_string(e.kind)));
    e.n = cfg.get_int("n", e.n);
    e.box_length = cfg.get_double("box_length", e.box_length);
    e.mu = cfg.get_double("mu", e.mu);
    e.dt = cfg.get_double("dt", e.dt);
    e.T = cfg.get_double("T", e.T);

    e.data.preset = preset_from(cfg.get_string("data.preset", to_string(e.data.preset)));
    e.data.amplitude = cfg.get_double("data.amplitude", e.data.amplitude);
    e.data.width = cfg.get_double("data.width", e.data.width);
    e.data.x0 = pair_of(cfg.get_list("data.x0", {e.data.x0[0], e.data.x0[1]}), "data.x0");
    e.data.noise = cfg.get_double("data.noise", e.data.noise);
    const double seed = cfg.get_double("data.seed", static_cast<double>(e.data.seed));
    require(seed >= 0.0 && seed == std::floor(seed) && seed < 9.007199254740992e15,
            "data.seed must be a nonnegative integer");
    e.data.seed = static_cast<std::uint64_t>(seed);
    e.data.lambda = cfg.get_double("data.lambda", e.data.lambda);
    e.data.nu = pair_of(cfg.get_list("data.nu", {e.data.nu[0], e.data.nu[1]}), "data.nu");
    e.data.t0 = cfg.get_double("data.t0", e.data.t0);
    e.data.theta = cfg.get_double("data.theta", e.data.theta);

    e.epsilon_list = cfg.get_list("epsilon_list", e.epsilon_list);
    e.nu_x_list = cfg.get_list("nu_x_list", e.nu_x_list);
    e.lambda_list = cfg.get_list("lambda_list", e.lambda_list);

    e.ground_state_tol = cfg.get_double("ground_state_tol", e.ground_state_tol);
    e.snapshot_every = cfg.get_int("snapshot_every", e.snapshot_every);
    e.drift_tol = cfg.get_double("drift_tol", e.drift_tol);
    e.sample_dt = cfg.get_double("sample_dt", e.sample_dt);
    e.slow_T = cfg.get_double("slow_T", e.slow_T);
    e.dt_nls = cfg.get_double("dt_nls", e.dt_nls);
    e.node_dt = cfg.get_double("node_dt", e.node_dt);
    e.radius = cfg.get_double("radius", e.radius);
    e.weight_eps = cfg.get_double("weight_eps", e.weight_eps);
    e.out_dir = cfg.get_string("out_dir", e.out_dir);
    e.threads = cfg.get_int("threads", e.threads);

    require(e.n >= 8 && e.n <= 4096 && (e.n & (e.n - 1)) == 0,
            "n must be a power of two in [8, 4096]");
    require(e.box_length > 0.0, "box_length must be positive");
    require(e.mu == 1.0 || e.mu == -1.0, "mu must be +1 or -1");
    require(e.dt > 0.0 && e.T > 0.0, "dt and T must be positive");
    require(e.data.width > 0.0, "data.width must be positive");
    require(e.data.noise >= 0.0, "data.noise must be nonnegative");
    require(e.data.lambda >= 1.0, "data.lambda must be >= 1");
    require(e.data.theta > 0.0 && e.data.theta < 1.0,
            "data.theta must lie in (0, 1)");
    require(e.ground_state_tol >= 1e-12 && e.ground_state_tol <= 1e-6,
            "ground_state_tol must lie in [1e-12, 1e-6]");
    require(e.snapshot_every >= 0, "snapshot_every must be nonnegative");
    require(e.drift_tol > 0.0, "drift_tol must be positive");
    require(e.sample_dt > 0.0, "sample_dt must be positive");
    require(e.slow_T > 0.0 && e.dt_nls > 0.0 && e.node_dt > 0.0,
            "bridge time parameters must be positive");
    require(e.radius > 0.0, "radius must be positive");
    require(e.weight_eps >= 0.0 && e.weight_eps < 1.0,
            "weight_eps must lie in [0, 1)");
    require(!e.out_dir.empty(), "out_dir must be set");
    require(e.threads >= 0, "threads must be nonnegative");
    return e;
}

ConfigMap config_from_experiment(const ExperimentConfig& e) {
    ConfigMap cfg;
    cfg.set("experiment", std::string(to_string(e.kind)));
    cfg.set("n", static_cast<double>(e.n));
    cfg.set("box_length", e.box_length);
    cfg.set("mu", e.mu);
    cfg.set("dt", e.dt);
    cfg.set("T", e.T);
    cfg.set("data.preset", std::string(to_string(e.data.preset)));
    cfg.set("data.amplitude", e.data.amplitude);
    cfg.set("data.width", e.data.width);
    cfg.set("data.x0", std::vector<double>{e.data.x0[0], e.data.x0[1]});
    cfg.set("data.noise", e.data.noise);
    cfg.set("data.seed", static_cast<double>(e.data.seed));
    cfg.set("data.lambda", e.data.lambda);
    cfg.set("data.nu", std::vector<double>{e.data.nu[0], e.data.nu[1]});
    cfg.set("data.t0", e.data.t0);
    cfg.set("data.theta", e.data.theta);
    cfg.set("epsilon_list", e.epsilon_list);
    cfg.set("nu_x_list", e.nu_x_list);
    cfg.set("lambda_list", e.lambda_list);
    cfg.set("ground_state_tol", e.ground_state_tol);
    cfg.set("snapshot_every", static_cast<double>(e.snapshot_every));
    cfg.set("drift_tol", e.drift_tol);
    cfg.set("sample_dt", e.sample_dt);
    cfg.set("slow_T", e.slow_T);
    cfg.set("dt_nls", e.dt_nls);
    cfg.set("node_dt", e.node_dt);
    cfg.set("radius", e.radius);
    cfg.set("weight_eps", e.weight_eps);
    cfg.set("out_dir", e.out_dir);
    cfg.set("threads", static_cast<double>(e.threads));
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_from_config(ConfigMap::load_file(path));
}

bool RunReport::passed() const {
    if (status != "completed") return false;
    for (const Verdict& v : verdicts) {
        if (!v.pass) return false;
    }
    return true;
}

int thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("KG2D_THREADS")) {
        const int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 1;
}

// ---------------------------------------------------------------------------
// initial data
// ---------------------------------------------------------------------------

namespace {
std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}
}  // namespace

RealField2D noise_field(const Grid2D& g, std::uint64_t seed) {
    RealField2D f(g);
    const std::uint64_t key = splitmix64(seed ^ 0x6b79326473696dULL);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double u1 = uniform01(splitmix64(key + 2 * i));
        const double u2 = uniform01(splitmix64(key + 2 * i + 1));
        f.data()[i] =
            std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
    }
    // The cutoff's shoulder spans an octave, so support ends at half Nyquist
    // and the noise stays clear of both dealiasing and quadrature limits.
    f = apply_multiplier(lowpass_symbol(0.25 * g.nyquist()), f);
    const double norm = lp_norm(f, 2);
    require(norm > 0.0, "degenerate noise field");
    for (std::size_t i = 0; i < f.size(); ++i) f.data()[i] /= norm;
    return f;
}

KGState build_initial_state(const InitialDataRecipe& r, const Grid2D& g,
                            double mu, const GroundStateProfile* Qp) {
    switch (r.preset) {
        case DataPreset::scaled_q: {
            require(Qp != nullptr, "scaled-Q preset needs the ground state");
            RealField2D u = sample_on_grid(*Qp, g, r.x0);
            for (std::size_t i = 0; i < u.size(); ++i) {
                u.data()[i] *= r.amplitude;
            }
            return make_kg_state(std::move(u), RealField2D(g),
                                 0.0, mu);
        }
        case DataPreset::gaussian: {
            const ComplexField2D base =
                gaussian_complex(g, r.amplitude, r.width, r.x0);
            RealField2D u(g);
            for (std::size_t i = 0; i < u.size(); ++i) {
                u.data()[i] = base.data()[i].real();
            }
            if (r.noise > 0.0) {
                const RealField2D eta = noise_field(g, r.seed);
                for (std::size_t i = 0; i < u.size(); ++i) {
                    u.data()[i] += r.amplitude * r.noise * eta.data()[i];
                }
            }
            return make_kg_state(std::move(u), RealField2D(g),
                                 0.0, mu);
        }
        case DataPreset::wave_packet: {
            WavePacketParams p{r.lambda, BoostParams{{r.nu[0], r.nu[1]}},
                               r.t0,    r.x0,
                               r.theta, gaussian_complex(g, r.amplitude,
                                                         r.width, {0.0, 0.0})};
            WavePacket packet = build_wave_packet(p, g);
            return from_first_order(packet.data, 0.0, mu);
        }
    }
    fail("unhandled preset");
}

// ---------------------------------------------------------------------------
// report emission
// ---------------------------------------------------------------------------

namespace {

void write_report_json(const RunReport& rep, const fs::path& dir) {
    nlohmann::json j;
    j["config"] =
        nlohmann::json::parse(config_from_experiment(rep.config).to_json());
    j["version"] = rep.version;
    j["status"] = rep.status;
    j["passed"] = rep.passed();
    j["wall_seconds"] = rep.wall_seconds;
    j["health"] = {{"boundary_mass", rep.health.boundary_mass},
                   {"aliasing", rep.health.aliasing},
                   {"drift", rep.health.drift}};
    j["verdicts"] = nlohmann::json::array();
    for (const Verdict& v : rep.verdicts) {
        j["verdicts"].push_back({{"name", v.name},
                                 {"pass", v.pass},
                                 {"measured", v.measured},
                                 {"relation", v.relation},
                                 {"threshold", v.threshold}});
    }
    j["metrics"] = rep.metrics;
    j["artifacts"] = rep.artifacts;
    std::ofstream out(dir / "report.json");
    require(out.good(), "cannot open report.json");
    out << j.dump(2) << '\n';
    require(out.good(), "failed writing report.json");
}

// ---------------------------------------------------------------------------
// ground-state experiment
// ---------------------------------------------------------------------------

void run_ground_state(const ExperimentConfig& cfg, RunReport& rep,
                      const fs::path& dir) {
    const GroundStateProfile Qp = solve_ground_state(cfg.ground_state_tol);
    const double residual = ode_residual_sup(Qp);
    const double poh =
        std::abs(Qp.energy() - 0.5 * Qp.mass()) / Qp.mass();

    const fs::path csv = art(rep, dir, "profile.csv");
    const fs::path constants = art(rep, dir, "constants.json");
    save_profile(Qp, csv.string(), constants.string());

    check(rep, "ode-residual", residual, "<", 1e-8);
    check(rep, "pohozaev-relative", poh, "<", 1e-6);
    rep.metrics["b"] = Qp.b();
    rep.metrics["mass"] = Qp.mass();
    rep.metrics["energy"] = Qp.energy();
    rep.metrics["gn_constant"] = Qp.gn_constant();
    rep.metrics["decay_radius"] = Qp.decay_radius();

    const Grid2D g = Grid2D::make(cfg.n, cfg.box_length);
    observe_health(rep.health, sample_on_grid(Qp, g));
}

// ---------------------------------------------------------------------------
// dichotomy experiment
// ---------------------------------------------------------------------------

struct ArmOutput {
    double eps = 0.0;
    Prediction prediction = Prediction::outside_theory;
    RunStatus status = RunStatus::completed;
    double detected_time = 0.0;
    bool agreement = false;
    ConcavityReport concavity;
    double lo_min = 0.0, up_min = 0.0;        ///< per-step sandwich margins
    double grad_min = 0.0, vex_min = 0.0;     ///< resolved-window minima
    double drift_max = 0.0;                   ///< relative energy drift
    std::vector<std::vector<double>> diag_rows;     ///< sampled (t, E, M, P1, P2, Q4, sup)
    std::vector<std::vector<double>> monitor_rows;  ///< blowup: (t, M^{-1/2}); global: (t, lo, up)
};

ArmOutput run_dichotomy_arm(const ExperimentConfig& cfg, const Grid2D& g,
                            const GroundStateProfile& Qp, double eps,
                            HealthMetrics& health) {
    ArmOutput out;
    out.eps = eps;

    InitialDataRecipe r;
    r.preset = DataPreset::scaled_q;
    r.amplitude = 1.0 + eps;
    KGState s0 = build_initial_state(r, g, cfg.mu, &Qp);
    observe_health(health, s0.u);

    const DichotomyVerdict v = classify_dichotomy(s0, Qp);
    out.prediction = v.prediction;
    const bool expect_blowup = v.prediction == Prediction::blowup;

    KGStepper st(g, cfg.mu, cfg.dt);
    RealField2D u = std::move(s0.u), ut = std::move(s0.ut);
    const long long nsteps = std::llround(cfg.T / cfg.dt);
    require(std::abs(static_cast<double>(nsteps) * cfg.dt - cfg.T) <= 1e-9,
            "horizon must be an integer number of steps");
    const long long stride = std::llround(cfg.sample_dt / cfg.dt);
    require(stride >= 1 &&
                std::abs(static_cast<double>(stride) * cfg.dt - cfg.sample_dt) <= 1e-9,
            "sample cadence must be a multiple of dt");

    const EvolveOptions halt{};  // thresholds shared with the plain evolver
    std::vector<DiagRow> rows;
    rows.reserve(static_cast<std::size_t>(nsteps) + 1);
    rows.push_back(st.diagnostics(u, ut, 0.0));
    const double e0 = rows[0].energy;
    const double esc = std::max(std::abs(e0), 1.0);

    out.lo_min = out.up_min = std::numeric_limits<double>::infinity();
    out.grad_min = out.vex_min = std::numeric_limits<double>::infinity();

    auto sandwich = [&](const DiagRow& row) {
        // For mu = -1: ||u||_{H^1}^2 + ||ut||_2^2 = 2E + quartic / 2.
        const double lo = 0.5 * row.quartic;
        const double up = 2.0 * row.energy - 0.5 * row.quartic;
        out.lo_min = std::min(out.lo_min, lo);
        out.up_min = std::min(out.up_min, up);
    };
    auto monitor = [&](const DiagRow& row) {
        const bool resolved = std::abs(row.energy - e0) / esc <= halt.drift_halt;
        out.diag_rows.push_back({row.t, row.energy, row.mass, row.p1, row.p2,
                                 row.quartic, row.sup});
        if (expect_blowup) {
            if (row.mass > 0.0) {
                out.monitor_rows.push_back({row.t, 1.0 / std::sqrt(row.mass)});
            }
            if (resolved) {
                const double grad = grad_sq_of(u);
                const double vex =
                    2.0 * (grad + row.mass) - 8.0 * row.energy;
                out.grad_min = std::min(out.grad_min, grad);
                out.vex_min = std::min(out.vex_min, vex);
            }
        } else {
            const double lo = 0.5 * row.quartic;
            const double up = 2.0 * row.energy - 0.5 * row.quartic;
            out.monitor_rows.push_back({row.t, lo, up});
        }
    };

    sandwich(rows[0]);
    monitor(rows[0]);
    out.status = RunStatus::completed;
    for (long long k = 1; k <= nsteps; ++k) {
        st.step(u, ut);
        const double t = static_cast<double>(k) * cfg.dt;
        const DiagRow row = st.diagnostics(u, ut, t);
        if (!std::isfinite(row.sup) || !std::isfinite(row.energy) ||
            !(row.mass > 0.0)) {
            out.status = RunStatus::underresolved;
            out.detected_time = t;
            break;
        }
        rows.push_back(row);
        if (!expect_blowup) sandwich(row);
        if (k % stride == 0) monitor(row);
        if (row.sup > halt.blowup_sup) {
            out.status = RunStatus::blowup_detected;
            out.detected_time = t;
            break;
        }
        const double drift = std::abs(row.energy - e0) / esc;
        out.drift_max = std::max(out.drift_max, drift);
        // Predicted-blowup arms keep marching through the drifting endgame:
        // the blowup halt above decides them, and stopping on drift first
        // would misreport the spike as underresolved.
        if (!expect_blowup && drift > halt.drift_halt && row.sup < halt.grace_sup) {
            out.status = RunStatus::underresolved;
            out.detected_time = t;
            break;
        }
    }
    if (expect_blowup) {
        out.agreement = out.status == RunStatus::blowup_detected;
    } else if (v.prediction == Prediction::global_existence) {
        out.agreement = out.status == RunStatus::completed;
    }

    Trajectory traj;
    traj.dt = cfg.dt;
    traj.mu = cfg.mu;
    traj.status = out.status;
    traj.detected_time = out.detected_time;
    traj.rows = std::move(rows);
    out.concavity = concavity_monitor(traj, out.prediction, cfg.sample_dt);
    observe_health(health, u);
    return out;
}

void run_dichotomy(const ExperimentConfig& cfg, RunReport& rep,
                   const fs::path& dir) {
    require(cfg.mu == -1.0, "the dichotomy experiment is focusing-only");
    require(!cfg.epsilon_list.empty(), "epsilon_list must not be empty");
    const GroundStateProfile Qp = solve_ground_state(cfg.ground_state_tol);
    const Grid2D g = Grid2D::make(cfg.n, cfg.box_length);

    std::vector<ArmOutput> arms(cfg.epsilon_list.size());
    std::vector<HealthMetrics> arm_health(cfg.epsilon_list.size());
    const int nth = std::min<int>(thread_count(cfg.threads),
                                  static_cast<int>(arms.size()));
    std::atomic<std::size_t> next{0};
    std::atomic<bool> died{false};
    std::string death_note;
    std::mutex death_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= arms.size()) return;
            try {
                arms[i] = run_dichotomy_arm(cfg, g, Qp, cfg.epsilon_list[i],
                                            arm_health[i]);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(death_mutex);
                died = true;
                if (death_note.empty()) death_note = e.what();
            }
        }
    };
    if (nth <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nth; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    require(!died, "dichotomy arm failed: " + death_note);

    CsvFile diag(art(rep, dir, "diagnostics.csv"),
                 {"eps", "t", "energy", "mass", "p1", "p2", "quartic", "sup"});
    int agreements = 0;
    for (std::size_t i = 0; i < arms.size(); ++i) {
        const ArmOutput& a = arms[i];
        const std::string label = eps_label(a.eps);
        for (const auto& r : a.diag_rows) {
            std::vector<double> row{a.eps};
            row.insert(row.end(), r.begin(), r.end());
            diag.row(row);
        }
        const bool blowup_arm = a.prediction == Prediction::blowup;
        CsvFile mon(art(rep, dir,
                        std::string("plotdata_") +
                            (blowup_arm ? "concavity_eps" : "margins_eps") +
                            label + ".csv"),
                    blowup_arm ? std::vector<std::string>{"t", "inv_sqrt_mass"}
                               : std::vector<std::string>{"t", "sandwich_lo",
                                                          "sandwich_up"});
        for (const auto& r : a.monitor_rows) mon.row(r);
        mon.close();

        check_flag(rep, "agreement eps" + label, a.agreement);
        if (a.agreement) ++agreements;
        rep.metrics["eps" + label + ".detected_time"] = a.detected_time;
        rep.metrics["eps" + label + ".drift_max"] = a.drift_max;
        if (blowup_arm) {
            check_flag(rep, "concavity eps" + label,
                       a.concavity.result == ConcavityReport::Result::confirmed);
            check(rep, "virial-excess-min eps" + label, a.vex_min, ">", 0.0);
            check(rep, "gradient-threshold-min eps" + label, a.grad_min, ">",
                  Qp.mass());
            rep.metrics["eps" + label + ".concavity_violations"] =
                a.concavity.violations;
        } else if (a.prediction == Prediction::global_existence) {
            check(rep, "sandwich-lower-min eps" + label, a.lo_min, ">", 0.0);
            check(rep, "sandwich-upper-min eps" + label, a.up_min, ">", 0.0);
        }
        rep.health.drift = std::max(rep.health.drift, a.drift_max);
        rep.health.boundary_mass =
            std::max(rep.health.boundary_mass, arm_health[i].boundary_mass);
        rep.health.aliasing =
            std::max(rep.health.aliasing, arm_health[i].aliasing);
    }
    diag.close();
    check(rep, "dichotomy-agreement", static_cast<double>(agreements), ">=",
          static_cast<double>(arms.size()));
}

// ---------------------------------------------------------------------------
// boost-check experiment
// ---------------------------------------------------------------------------

void run_boost_check(const ExperimentConfig& cfg, RunReport& rep,
                     const fs::path& dir) {
    require(cfg.mu == -1.0, "boost-check rides the static ground state");
    require(!cfg.nu_x_list.empty(), "nu_x_list must not be empty");
    const GroundStateProfile Qp = solve_ground_state(cfg.ground_state_tol);
    const Grid2D g = Grid2D::make(cfg.n, cfg.box_length);
    const RealField2D q = sample_on_grid(Qp, g);
    observe_health(rep.health, q);
    const KGState rest{q, RealField2D(g), 0.0, cfg.mu};
    const ConservedRecord base = conserved(rest);

    double vmax = 0.0;
    for (double nx : cfg.nu_x_list) vmax = std::max(vmax, std::abs(nx));
    const double vratio = vmax / std::sqrt(1.0 + vmax * vmax);
    // Slice reconstruction needs |t| up to (|nu|/<nu>) L/2 plus one snapshot
    // spacing; round the span up to a whole number of spacings so t = 0 is
    // stored (the nu = 0 slice reads it directly).
    const double need = vratio * 0.5 * cfg.box_length + 2.0 * cfg.sample_dt;
    const double span =
        std::ceil(need / cfg.sample_dt) * cfg.sample_dt;
    const Trajectory traj = static_trajectory(rest, -span, span, cfg.sample_dt);

    CsvFile diag(art(rep, dir, "diagnostics.csv"),
                 {"nu_x", "energy", "mass", "p1", "p2", "rest_mass_sq"});
    std::vector<BoostParams> nus;
    ConservedRecord fastest = base;
    double fastest_nu = 0.0;
    for (double nx : cfg.nu_x_list) {
        const BoostParams nu{{nx, 0.0}};
        nus.push_back(nu);
        const KGState slice =
            nx == 0.0 ? rest : boost_spacetime(traj, nu);
        const ConservedRecord c = conserved(slice);
        diag.row({nx, c.energy, c.mass, c.p[0], c.p[1], c.rest_mass_sq});
        const std::string label = eps_label(nx);
        if (nx != 0.0) {
            const double gamma = std::sqrt(1.0 + nx * nx);
            check(rep, "boosted-mass nu" + label,
                  std::abs(c.mass * gamma / base.mass - 1.0), "<", 0.01);
            check(rep, "boosted-energy nu" + label,
                  std::abs(c.energy / (gamma * base.energy) - 1.0), "<", 0.01);
            check(rep, "boosted-momentum nu" + label,
                  std::abs(c.p[0] / (nx * base.energy) - 1.0), "<", 0.01);
            if (std::abs(nx) > std::abs(fastest_nu)) {
                fastest = c;
                fastest_nu = nx;
            }
        }
    }
    diag.close();

    check(rep, "einstein-invariance", einstein_invariance(traj, nus), "<", 1e-2);
    if (fastest_nu != 0.0) {
        const BoostParams back = zero_momentum_boost(fastest);
        check(rep, "zero-momentum-recovery",
              std::hypot(back.nu[0] + fastest_nu, back.nu[1]) /
                  std::abs(fastest_nu),
              "<", 0.01);
        rep.metrics["recovered_nu_x"] = back.nu[0];
    }

    // Data-boost H^{1/2} unitarity on a modulated gaussian.
    ComplexField2D f = gaussian_complex(g, 1.0, 1.4, {0.0, 0.0});
    for (int i = 0; i < g.n; ++i) {
        for (int j = 0; j < g.n; ++j) {
            f.at(i, j) *= std::polar(1.0, 0.7 * g.coord(i) - 0.3 * g.coord(j));
        }
    }
    const BoostParams nu_half{{vmax == 0.0 ? 0.5 : vmax, 0.0}};
    const ComplexField2D bf = boost_data(nu_half, f, BoostDirection::forward);
    const double h0 = sobolev_norm(f, 0.5);
    check(rep, "boost-h12-unitarity",
          std::abs(sobolev_norm(bf, 0.5) / h0 - 1.0), "<", 1e-6);

    rep.metrics["base_mass"] = base.mass;
    rep.metrics["base_energy"] = base.energy;
}

// ---------------------------------------------------------------------------
// bridge experiment
// ---------------------------------------------------------------------------

SweepPoint calibrated_point(double lambda, double slow_T) {
    SweepPoint pt;
    pt.lambda = lambda;
    // box_fast = lambda * box_slow makes the dilated data exactly the
    // dilation of the slow torus, so the lift and the fast march share one
    // periodization and no spurious wrap enters the discrepancies.
    pt.box_fast = lambda * 16.0;
    int n = 32;
    while (n < 2.0 * pt.box_fast) n *= 2;  // h <= 1/2; data spectrum < 2
    pt.n_fast = n;
    pt.dt_kg = 0.01 * std::pow(lambda / 4.0, -std::log2(2.5));
    const double w = lambda * lambda * slow_T;
    const long long steps = std::max<long long>(1, std::llround(w / pt.dt_kg));
    pt.dt_kg = w / static_cast<double>(steps);
    return pt;
}

void run_bridge(const ExperimentConfig& cfg, RunReport& rep,
                const fs::path& dir) {
    require(!cfg.lambda_list.empty(), "lambda_list must not be empty");
    SweepPlan plan = default_sweep_plan();
    plan.T = cfg.slow_T;
    plan.mu = cfg.mu;
    plan.dt_nls = cfg.dt_nls;
    plan.node_dt = cfg.node_dt;
    plan.nu = BoostParams{{cfg.data.nu[0], cfg.data.nu[1]}};
    plan.t0_slow = cfg.data.t0;
    plan.x0 = cfg.data.x0;
    plan.threads = thread_count(cfg.threads);
    if (cfg.mu == -1.0) {
        plan.mass_q = solve_ground_state(cfg.ground_state_tol).mass();
    }
    plan.points.clear();
    for (double lam : cfg.lambda_list) {
        require(lam >= 1.0, "lambda entries must be >= 1");
        plan.points.push_back(calibrated_point(lam, plan.T));
    }

    const double amp = cfg.data.amplitude;
    const double width = cfg.data.width;
    const auto phi = [amp, width](double x, double y) {
        return cplx(amp * std::exp(-(x * x + y * y) / (2.0 * width * width)),
                    0.0);
    };
    const SweepReport sweep = convergence_sweep(phi, plan);

    const fs::path csv = art(rep, dir, "sweep.csv");
    const fs::path json = art(rep, dir, "sweep.json");
    write_sweep_csv(sweep, csv.string());
    write_sweep_json(sweep, json.string());

    check_flag(rep, "l4-discrepancy-monotone", sweep.monotone_l4);
    check_flag(rep, "h12-discrepancy-monotone", sweep.monotone_h12);

    const SweepRow* prev = nullptr;
    for (const SweepRow& r : sweep.rows) {
        const std::string label = "lambda" + eps_label(r.lambda);
        if (r.skipped) {
            rep.metrics[label + ".skipped"] = 1.0;
            continue;
        }
        rep.metrics[label + ".disc_l4"] = r.budget.discrepancy_l4;
        rep.metrics[label + ".disc_h12"] = r.budget.discrepancy_h12;
        rep.metrics[label + ".e1"] = r.budget.e1;
        rep.metrics[label + ".e2"] = r.budget.e2;
        rep.metrics[label + ".e3"] = r.budget.e3;
        rep.metrics[label + ".e4"] = r.budget.e4;
        rep.metrics[label + ".f3"] = r.budget.f3;
        rep.metrics[label + ".f4"] = r.budget.f4;
        if (prev != nullptr && prev->lambda > 0.0) {
            const double dl = std::log(r.lambda / prev->lambda);
            auto slope_of = [dl](double hi, double lo) {
                return (hi > 0.0 && lo > 0.0) ? std::log(hi / lo) / dl : 0.0;
            };
            const std::string pl =
                "slope_" + eps_label(prev->lambda) + "_to" + eps_label(r.lambda);
            rep.metrics[pl + ".e1"] = slope_of(r.budget.e1, prev->budget.e1);
            rep.metrics[pl + ".e2"] = slope_of(r.budget.e2, prev->budget.e2);
            rep.metrics[pl + ".f3"] = slope_of(r.budget.f3, prev->budget.f3);
            rep.metrics[pl + ".f4"] = slope_of(r.budget.f4, prev->budget.f4);
            rep.metrics[pl + ".disc_l4"] =
                slope_of(r.budget.discrepancy_l4, prev->budget.discrepancy_l4);
        }
        prev = &r;
    }

    // Health from the largest packet the sweep could actually build.
    const SweepPoint* big = nullptr;
    for (const SweepPoint& pt : plan.points) {
        if (pt.n_fast > plan.n_cap) continue;
        if (big == nullptr || pt.lambda > big->lambda) big = &pt;
    }
    if (big != nullptr) {
        const Grid2D gf = Grid2D::make(big->n_fast, big->box_fast);
        WavePacket packet = build_wave_packet(
            WavePacketParams{big->lambda, BoostParams{}, 0.0, plan.x0, 0.01,
                             gaussian_complex(gf, amp, width, {0.0, 0.0})},
            gf);
        observe_health(rep.health, packet.data);
    }
}

// ---------------------------------------------------------------------------
// decay-fit experiment
// ---------------------------------------------------------------------------

void run_decay_fit(const ExperimentConfig& cfg, RunReport& rep,
                   const fs::path& dir) {
    const Grid2D g = Grid2D::make(cfg.n, cfg.box_length);
    const ComplexField2D f =
        gaussian_complex(g, cfg.data.amplitude, cfg.data.width, cfg.data.x0);
    const ComplexField2D piece = littlewood_paley(2.0, f);
    const double h0 = sobolev_norm(piece, 0.5);
    require(h0 > 0.0, "the N = 2 band of the data is empty");

    const int npts = 25;
    std::vector<double> logt, logs;
    CsvFile plot(art(rep, dir, "plotdata_decay.csv"), {"t", "sup_norm"});
    double hdrift = 0.0;
    ComplexField2D last(g, Space::physical);
    for (int k = 0; k < npts; ++k) {
        const double t =
            5.0 * std::pow(10.0, static_cast<double>(k) /
                                     static_cast<double>(npts - 1));
        const ComplexField2D wt = free_propagate_kg(t, piece);
        const double sup = lp_norm(wt, 0);
        plot.row({t, sup});
        logt.push_back(std::log(t));
        logs.push_back(std::log(sup));
        hdrift = std::max(hdrift, std::abs(sobolev_norm(wt, 0.5) / h0 - 1.0));
        if (k == npts - 1) last = wt;
    }
    plot.close();

    double intercept = 0.0;
    const double slope = fit_slope(logt, logs, &intercept);
    check(rep, "decay-slope-deviation", std::abs(slope + 1.0), "<", 0.1);
    rep.metrics["slope"] = slope;
    rep.metrics["intercept"] = intercept;

    observe_health(rep.health, last);
    rep.health.drift = hdrift;
}

// ---------------------------------------------------------------------------
// decoupling experiment
// ---------------------------------------------------------------------------

void run_decoupling(const ExperimentConfig& cfg, RunReport& rep,
                    const fs::path& dir) {
    const Grid2D g = Grid2D::make(cfg.n, cfg.box_length);
    const ComplexField2D f =
        gaussian_complex(g, cfg.data.amplitude, cfg.data.width, cfg.data.x0);
    observe_health(rep.health, f);
    const double h12 = sobolev_norm(f, 0.5);
    require(h12 > 0.0, "empty data");

    const std::vector<double> levels = resolved_dyadic_levels(g);
    const long long m = std::max<long long>(2, std::llround(cfg.T / cfg.sample_dt));
    const double cad = cfg.T / static_cast<double>(m);

    double acc_full = 0.0;
    std::vector<double> acc_piece(levels.size(), 0.0);
    ComplexField2D last(g, Space::physical);
    for (long long k = 0; k <= m; ++k) {
        const double t = cad * static_cast<double>(k);
        const double wt = (k == 0 || k == m) ? 0.5 * cad : cad;
        const ComplexField2D w = free_propagate_kg(t, f);
        const double l4 = lp_norm(w, 4);
        acc_full += wt * l4 * l4 * l4 * l4;
        for (std::size_t li = 0; li < levels.size(); ++li) {
            const double p4 = lp_norm(littlewood_paley(levels[li], w), 4);
            acc_piece[li] += wt * p4 * p4 * p4 * p4;
        }
        if (k == m) last = w;
    }

    const double full = std::pow(acc_full, 0.25);
    double sup_piece = 0.0;
    CsvFile plot(art(rep, dir, "plotdata_decoupling.csv"), {"level", "piece_l4"});
    for (std::size_t li = 0; li < levels.size(); ++li) {
        const double piece = std::pow(acc_piece[li], 0.25);
        plot.row({levels[li], piece});
        sup_piece = std::max(sup_piece, piece);
    }
    plot.close();
    require(sup_piece > 0.0, "all dyadic pieces vanish");

    const double c_measured = full * full / (sup_piece * h12);
    check(rep, "annular-decoupling-constant", c_measured, "<", 10.0);
    rep.metrics["c_measured"] = c_measured;
    rep.metrics["full_l4"] = full;
    rep.metrics["sup_piece_l4"] = sup_piece;
    observe_health(rep.health, last);
}

// ---------------------------------------------------------------------------
// custom-evolve experiment (also the base of virial_run)
// ---------------------------------------------------------------------------

Trajectory run_custom_evolve(const ExperimentConfig& cfg, RunReport& rep,
                             const fs::path& dir, int snapshot_every) {
    const Grid2D g = Grid2D::make(cfg.n, cfg.box_length);
    std::optional<GroundStateProfile> qp;
    if (cfg.data.preset == DataPreset::scaled_q) {
        qp = solve_ground_state(cfg.ground_state_tol);
    }
    const KGState s0 =
        build_initial_state(cfg.data, g, cfg.mu, qp ? &*qp : nullptr);
    observe_health(rep.health, s0.u);

    EvolveOptions opt;
    opt.snapshot_every = snapshot_every;
    Trajectory traj = evolve(s0, cfg.T, cfg.dt, opt);

    CsvFile diag(art(rep, dir, "diagnostics.csv"),
                 {"t", "energy", "mass", "p1", "p2", "quartic", "sup"});
    const double e0 = traj.rows[0].energy;
    const double esc = std::max(std::abs(e0), 1.0);
    double drift = 0.0;
    for (const DiagRow& r : traj.rows) {
        diag.row({r.t, r.energy, r.mass, r.p1, r.p2, r.quartic, r.sup});
        if (std::isfinite(r.energy)) {
            drift = std::max(drift, std::abs(r.energy - e0) / esc);
        }
    }
    diag.close();
    rep.health.drift = drift;
    rep.metrics["energy_drift"] = drift;
    rep.metrics["detected_time"] = traj.detected_time;

    const KGState end = traj.final_state();
    observe_health(rep.health, end.u);
    return traj;
}

void run_custom(const ExperimentConfig& cfg, RunReport& rep,
                const fs::path& dir) {
    Trajectory traj = run_custom_evolve(cfg, rep, dir, cfg.snapshot_every);
    check_flag(rep, "run-completed", traj.status == RunStatus::completed);
    check(rep, "energy-drift", rep.metrics["energy_drift"], "<", cfg.drift_tol);
    if (cfg.snapshot_every > 0) {
        int idx = 0;
        for (const Snapshot& snap : traj.snapshots) {
            char name[32];
            std::snprintf(name, sizeof(name), "snap_%04d.kgf1", idx++);
            save_snapshot(KGState{snap.u, snap.ut, snap.t, cfg.mu},
                          art(rep, dir, name).string());
        }
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// entry points
// ---------------------------------------------------------------------------

namespace {

RunReport run_impl(const ExperimentConfig& cfg, bool virial_mode) {
    RunReport rep;
    rep.config = cfg;
    const auto t_start = std::chrono::steady_clock::now();
    const fs::path dir(cfg.out_dir);
    try {
        fs::create_directories(dir);
        if (virial_mode) {
            const long long stride = std::llround(cfg.sample_dt / cfg.dt);
            require(stride >= 1 && std::abs(static_cast<double>(stride) * cfg.dt -
                                            cfg.sample_dt) <= 1e-9,
                    "sample cadence must be a multiple of dt");
            Trajectory traj =
                run_custom_evolve(cfg, rep, dir, static_cast<int>(stride));
            check_flag(rep, "run-completed", traj.status == RunStatus::completed);
            const std::vector<CenterVirialRow> rows =
                center_and_virial(traj, cfg.radius, cfg.weight_eps);
            CsvFile plot(art(rep, dir, "plotdata_virial.csv"),
                         {"t", "x1", "x2", "z"});
            const double energy = conserved(KGState{traj.snapshots.front().u,
                                                    traj.snapshots.front().ut,
                                                    traj.snapshots.front().t,
                                                    cfg.mu})
                                      .energy;
            double zmax = 0.0;
            for (const CenterVirialRow& r : rows) {
                plot.row({r.t, r.x[0], r.x[1], r.z});
                zmax = std::max(zmax, std::abs(r.z));
            }
            plot.close();
            const double c = zmax / (cfg.radius * std::abs(energy));
            check(rep, "virial-bound-constant", c, "<", 10.0);
            rep.metrics["c_measured"] = c;
            rep.metrics["z_max"] = zmax;
            if (rows.size() >= 3 && traj.snapshots.size() >= 3) {
                const std::size_t k = rows.size() / 2;
                const double spacing = rows[k + 1].t - rows[k].t;
                const std::array<double, 2> flux = center_flux(
                    KGState{traj.snapshots[k].u, traj.snapshots[k].ut,
                            traj.snapshots[k].t, cfg.mu},
                    cfg.radius);
                const double fd0 =
                    (rows[k + 1].x[0] - rows[k - 1].x[0]) / (2.0 * spacing);
                const double fd1 =
                    (rows[k + 1].x[1] - rows[k - 1].x[1]) / (2.0 * spacing);
                rep.metrics["flux_mismatch"] =
                    std::hypot(fd0 - flux[0], fd1 - flux[1]);
            }
        } else {
            switch (cfg.kind) {
                case ExperimentKind::ground_state:
                    run_ground_state(cfg, rep, dir);
                    break;
                case ExperimentKind::dichotomy:
                    run_dichotomy(cfg, rep, dir);
                    break;
                case ExperimentKind::boost_check:
                    run_boost_check(cfg, rep, dir);
                    break;
                case ExperimentKind::bridge:
                    run_bridge(cfg, rep, dir);
                    break;
                case ExperimentKind::decay_fit:
                    run_decay_fit(cfg, rep, dir);
                    break;
                case ExperimentKind::decoupling:
                    run_decoupling(cfg, rep, dir);
                    break;
                case ExperimentKind::custom_evolve:
                    run_custom(cfg, rep, dir);
                    break;
            }
        }
    } catch (const std::exception& e) {
        rep.status = std::string("failed: ") + e.what();
    }
    // A wave packet cut at lambda^{1/100} owns an irreducible ~2e-4 frame
    // tail (the near-unit-cutoff kernel decays slowly), shared by both sides
    // of every lift comparison; only the bridge gets that allowance.
    const double frame_tol =
        cfg.kind == ExperimentKind::bridge ? 1e-3 : 1e-4;
    if (rep.status == "completed" && rep.health.boundary_mass > frame_tol) {
        rep.status = "underresolved: boundary mass " +
                     fmt17(rep.health.boundary_mass) + " exceeds " +
                     fmt17(frame_tol);
    }
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    try {
        write_report_json(rep, dir);
        rep.artifacts.push_back((dir / "report.json").string());
    } catch (const std::exception& e) {
        if (rep.status == "completed") {
            rep.status = std::string("failed: ") + e.what();
        }
    }
    return rep;
}

}  // namespace

RunReport run(const ExperimentConfig& cfg) { return run_impl(cfg, false); }

RunReport virial_run(const ExperimentConfig& cfg) { return run_impl(cfg, true); }

}  // namespace kg2d
