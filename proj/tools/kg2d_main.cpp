// kg2d: command-line harness around the experiment drivers in kg2d/lab.hpp
// plus a few one-shot operators on saved KGF1 fields.
//
// Exit codes: 0 when the run completed and every verdict passed, 1 when the
// run finished but failed a verdict (details in report.json), 2 for usage or
// input errors.

#include <cstdio>
#include <deque>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kg2d/boost_ops.hpp"
#include "kg2d/io.hpp"
#include "kg2d/lab.hpp"
#include "kg2d/symbols.hpp"

namespace {

using namespace kg2d;

struct ExperimentCli {
    std::string config;
    std::string out;
    int threads = -1;
    double tol = 0.0;
    std::vector<double> lambdas;
};

ExperimentConfig load_for(ExperimentKind kind, const ExperimentCli& cli) {
    ExperimentConfig cfg;
    if (!cli.config.empty()) {
        const ConfigMap m = ConfigMap::load_file(cli.config);
        if (m.has("experiment")) {
            const std::string named = m.get_string("experiment", "");
            require(named == to_string(kind),
                    "config file selects experiment '" + named +
                        "' but the '" + to_string(kind) +
                        "' subcommand was invoked");
        }
        cfg = experiment_from_config(m);
    }
    cfg.kind = kind;
    if (!cli.out.empty()) cfg.out_dir = cli.out;
    if (cli.threads >= 0) cfg.threads = cli.threads;
    if (cli.tol > 0.0) cfg.ground_state_tol = cli.tol;
    if (!cli.lambdas.empty()) cfg.lambda_list = cli.lambdas;
    return cfg;
}

int report_and_exit_code(const RunReport& rep) {
    std::printf("status: %s\n", rep.status.c_str());
    for (const Verdict& v : rep.verdicts) {
        std::printf("  [%s] %-36s %.6g %s %.6g\n", v.pass ? "PASS" : "FAIL",
                    v.name.c_str(), v.measured, v.relation.c_str(),
                    v.threshold);
    }
    std::printf("health: boundary_mass=%.3g aliasing=%.3g drift=%.3g\n",
                rep.health.boundary_mass, rep.health.aliasing,
                rep.health.drift);
    std::printf("wall: %.1f s   report: %s/report.json\n", rep.wall_seconds,
                rep.config.out_dir.c_str());
    return rep.passed() ? 0 : 1;
}

int run_experiment(ExperimentKind kind, const ExperimentCli& cli,
                   bool virial_mode) {
    const ExperimentConfig cfg = load_for(kind, cli);
    const RunReport rep = virial_mode ? virial_run(cfg) : run(cfg);
    return report_and_exit_code(rep);
}

struct OperatorCli {
    std::string in;
    std::string out;
    double level = 2.0;
    int sector = 0;
    std::vector<double> nu;
    bool inverse = false;
    double time = 0.0;
};

ComplexField2D expect_complex(const LoadedField& lf, const char* what) {
    require(lf.complex_valued,
            std::string(what) + " expects a complex field (kind 1)");
    return lf.cplx;
}

int op_lp(const OperatorCli& cli) {
    const LoadedField lf = load_field(cli.in);
    if (lf.complex_valued) {
        save_field(littlewood_paley(cli.level, lf.cplx), lf.t, cli.out);
    } else {
        save_field(littlewood_paley(cli.level, lf.real), lf.t, cli.out);
    }
    std::printf("wrote %s (dyadic level %g)\n", cli.out.c_str(), cli.level);
    return 0;
}

int op_tube(const OperatorCli& cli) {
    const LoadedField lf = load_field(cli.in);
    const ComplexField2D f = expect_complex(lf, "tube projection");
    const TubeIndex idx{cli.level, cli.sector};
    require(cli.sector >= 0 && cli.sector < tube_count(cli.level),
            "sector index out of range for this level");
    save_field(tube_projection(idx, f), lf.t, cli.out);
    std::printf("wrote %s (level %g, sector %d of %d)\n", cli.out.c_str(),
                cli.level, cli.sector, tube_count(cli.level));
    return 0;
}

int op_boost(const OperatorCli& cli) {
    require(cli.nu.size() == 2, "--nu wants two components");
    const LoadedField lf = load_field(cli.in);
    const ComplexField2D f = expect_complex(lf, "the data boost");
    const BoostParams nu{{cli.nu[0], cli.nu[1]}};
    const BoostDirection dir =
        cli.inverse ? BoostDirection::inverse : BoostDirection::forward;
    save_field(boost_data(nu, f, dir), lf.t, cli.out);
    std::printf("wrote %s (nu = (%g, %g)%s)\n", cli.out.c_str(), cli.nu[0],
                cli.nu[1], cli.inverse ? ", inverse" : "");
    return 0;
}

int op_propagate(const OperatorCli& cli) {
    const LoadedField lf = load_field(cli.in);
    const ComplexField2D f = expect_complex(lf, "the free propagator");
    save_field(free_propagate_kg(cli.time, f), lf.t + cli.time, cli.out);
    std::printf("wrote %s (advanced by t = %g)\n", cli.out.c_str(), cli.time);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "kg2d: a pseudo-spectral laboratory for the 2d cubic Klein-Gordon "
        "equation and its Schrodinger limit"};
    app.set_version_flag("--version", kg2d::kg2d_version);
    app.require_subcommand(1);

    int exit_code = 2;
    std::deque<ExperimentCli> states;

    auto add_experiment = [&](ExperimentKind kind, const char* blurb,
                              bool virial_mode = false,
                              const char* name = nullptr) {
        states.emplace_back();
        ExperimentCli& st = states.back();
        CLI::App* sub =
            app.add_subcommand(name ? name : to_string(kind), blurb);
        sub->add_option("--config", st.config,
                        "experiment file (TOML-style or JSON)")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", st.out, "output directory override");
        sub->add_option("--threads", st.threads,
                        "worker threads (default: KG2D_THREADS, else 1)");
        if (kind == ExperimentKind::ground_state) {
            sub->add_option("--tol", st.tol,
                            "shooting tolerance override, in [1e-12, 1e-6]");
        }
        if (kind == ExperimentKind::bridge) {
            sub->add_option("--lambda-list", st.lambdas,
                            "frequencies to sweep, e.g. 4,8,16")
                ->delimiter(',');
        }
        sub->callback([&st, kind, virial_mode, &exit_code] {
            exit_code = run_experiment(kind, st, virial_mode);
        });
    };

    add_experiment(ExperimentKind::ground_state,
                   "solve the radial ground state and verify its identities");
    add_experiment(ExperimentKind::dichotomy,
                   "evolve (1+eps)Q arms and test the blowup/dispersal split");
    add_experiment(ExperimentKind::boost_check,
                   "boost the static solution and verify relativistic bookkeeping");
    add_experiment(ExperimentKind::bridge,
                   "high-frequency sweep against the Schrodinger description");
    add_experiment(ExperimentKind::decay_fit,
                   "fit the free-flow sup-norm decay rate on a dyadic band");
    add_experiment(ExperimentKind::decoupling,
                   "measure the square-function constant for free evolution");
    add_experiment(ExperimentKind::custom_evolve,
                   "evolve configured data and record diagnostics");
    add_experiment(ExperimentKind::custom_evolve,
                   "custom evolution plus energy-center and virial tracking",
                   /*virial_mode=*/true, "virial");

    CLI::App* op =
        app.add_subcommand("op", "apply one operator to a saved KGF1 field");
    op->require_subcommand(1);
    OperatorCli oc;
    auto add_op = [&](const char* name, const char* blurb, auto fn) {
        CLI::App* sub = op->add_subcommand(name, blurb);
        sub->add_option("input", oc.in, "input .kgf1 file")
            ->required()
            ->check(CLI::ExistingFile);
        sub->add_option("output", oc.out, "output .kgf1 file")->required();
        sub->callback([&oc, fn, &exit_code] { exit_code = fn(oc); });
        return sub;
    };
    add_op("lp", "keep one dyadic frequency band", op_lp)
        ->add_option("--level", oc.level, "dyadic level N (default 2)");
    {
        CLI::App* sub =
            add_op("tube", "project onto one angular sector of a band", op_tube);
        sub->add_option("--level", oc.level, "dyadic level N (default 2)");
        sub->add_option("--sector", oc.sector, "sector index (default 0)");
    }
    {
        CLI::App* sub = add_op(
            "boost", "apply the relativistic data boost (an H^1/2 isometry)",
            op_boost);
        sub->add_option("--nu", oc.nu, "boost parameter, e.g. 0.5,0")
            ->delimiter(',')
            ->required();
        sub->add_flag("--inverse", oc.inverse, "apply the inverse boost");
    }
    add_op("propagate", "advance under the free flow", op_propagate)
        ->add_option("--time", oc.time, "time to advance by")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return exit_code;
}
