#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sparselift/certify.hpp"
#include "sparselift/experiments.hpp"
#include "sparselift/measure.hpp"
#include "sparselift/rng.hpp"
#include "sparselift/signal.hpp"
#include "sparselift/solver.hpp"

using namespace sparselift;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void add_solver_flags(CLI::App* app, SolverOptions& opt) {
    app->add_option("--rho", opt.rho, "penalty parameter");
    app->add_option("--max-iters", opt.max_iters, "iteration cap");
    app->add_option("--tol-abs", opt.tol_abs, "absolute tolerance");
    app->add_option("--tol-rel", opt.tol_rel, "relative tolerance");
    app->add_option("--alpha", opt.alpha, "over-relaxation factor");
}

int run_experiment(const std::string& config_path, const std::string& out_prefix,
                   bool grid_only) {
    experiments::GridConfig cfg = experiments::GridConfig::from_json_text(read_file(config_path));
    experiments::GridResult result;
    if (cfg.experiment == "recovery_curve")
        result = experiments::run_recovery_curve(cfg);
    else if (cfg.experiment == "coherence_sweep")
        result = experiments::run_coherence_sweep(cfg);
    else if (cfg.experiment == "trace_ablation")
        result = experiments::run_trace_ablation(cfg);
    else if (cfg.experiment == "lambda_sweep")
        result = experiments::run_lambda_sweep_large_m(cfg);
    else if (cfg.experiment == "phase_grid")
        result = experiments::run_phase_grid(cfg);
    else if (cfg.experiment == "grid")
        result = experiments::run_grid(cfg);
    else
        throw std::runtime_error("unknown experiment '" + cfg.experiment + "'");
    if (grid_only && cfg.experiment != "phase_grid" && cfg.experiment != "grid")
        std::cerr << "note: '" << cfg.experiment << "' config run through the grid command\n";

    experiments::emit_csv(result, out_prefix + ".csv");
    experiments::emit_json_sidecar(result, out_prefix + ".json");
    auto agg = result.aggregates();
    std::cout << "wrote " << out_prefix << ".csv (" << result.records.size() << " trials, "
              << agg.size() << " cells)\n";
    return 0;
}

void print_report(const certify::CertificateReport& rep) {
    std::printf("%-32s stat=%-12.4g thr=%-10.4g trials=%-3d pass_frac=%-5.2f  %s\n",
                rep.name.c_str(), rep.statistic, rep.threshold, rep.trials,
                rep.pass_fraction, rep.pass ? "PASS" : "FAIL");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sparse lifted-SDP recovery toolkit"};
    app.require_subcommand(1);

    // ---- solve ----
    auto* sc_solve = app.add_subcommand("solve", "solve one instance and print the result");
    int n = 30, k = 4, m = 30;
    double lambda = 1.0, w = 0.0;
    std::uint64_t seed = 1;
    std::string program = "sdp2";
    bool no_trace = false;
    SolverOptions sopt;
    sc_solve->add_option("--n", n)->required();
    sc_solve->add_option("--k", k)->required();
    sc_solve->add_option("--m", m)->required();
    sc_solve->add_option("--lambda", lambda, "interpolation weight in [0,1]");
    sc_solve->add_option("--program", program, "sdp1|sdp2");
    sc_solve->add_option("--seed", seed);
    sc_solve->add_option("--w", w, "coherence weight (switches to the coherence signal model)");
    sc_solve->add_flag("--no-trace", no_trace, "drop the trace row");
    add_solver_flags(sc_solve, sopt);

    // ---- sweep / grid ----
    auto* sc_sweep = app.add_subcommand("sweep", "run a curve/sweep config, emit CSV + JSON");
    std::string cfg_path, out_prefix = "sweep_out";
    sc_sweep->add_option("--config", cfg_path, "JSON config")->required();
    sc_sweep->add_option("--out", out_prefix, "output path prefix");

    auto* sc_grid = app.add_subcommand("grid", "run a phase-grid config, emit CSV + JSON");
    std::string gcfg_path, gout_prefix = "grid_out";
    sc_grid->add_option("--config", gcfg_path, "JSON config")->required();
    sc_grid->add_option("--out", gout_prefix, "output path prefix");

    // ---- verify ----
    auto* sc_verify = app.add_subcommand("verify", "run a structural check, print pass/fail");
    std::string check;
    int vn = 40, vk = 4, vm = 800, vtrials = 10;
    double vdelta = 0.5;
    std::uint64_t vseed = 1;
    sc_verify->add_option("--check", check, "prop3|prop4|prop5|cross|psd-complete|cmatrix")
        ->required();
    sc_verify->add_option("--n", vn);
    sc_verify->add_option("--k", vk);
    sc_verify->add_option("--m", vm);
    sc_verify->add_option("--trials", vtrials);
    sc_verify->add_option("--delta", vdelta);
    sc_verify->add_option("--seed", vseed);

    // ---- certify ----
    auto* sc_cert = app.add_subcommand("certify", "build the dual certificate for one instance");
    int cn = 100, ck = 5, cm = 250;
    std::uint64_t cseed = 1;
    sc_cert->add_option("--n", cn);
    sc_cert->add_option("--k", ck);
    sc_cert->add_option("--m", cm);
    sc_cert->add_option("--seed", cseed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sc_solve->parsed()) {
            SignalModel model = sc_solve->count("--w") ? SignalModel::CoherenceW
                                                       : SignalModel::UniformSphere;
            SignalSpec spec = gen_signal(n, k, model, w, rng::derive(seed, 0x534947u));
            SdpProblem prob;
            prob.program = (program == "sdp1") ? Program::Sdp1ColumnL1 : Program::Sdp2EntrywiseL1;
            prob.ms = MeasurementSet::generate(n, m, lambda, rng::derive(seed, 0x4d4541u));
            prob.b = observe(prob.ms, spec);
            prob.enforce_trace = !no_trace;
            prob.options = sopt;
            SolveResult res = solve(prob, spec);
            std::cout << res.to_json() << "\n";
            return res.status == SolveStatus::Converged ? 0 : 2;
        }
        if (sc_sweep->parsed()) return run_experiment(cfg_path, out_prefix, false);
        if (sc_grid->parsed()) return run_experiment(gcfg_path, gout_prefix, true);
        if (sc_verify->parsed()) {
            certify::CertificateReport rep;
            if (check == "prop3")
                rep = certify::check_prop3(vn, vk, vm, vtrials, vdelta, vseed);
            else if (check == "prop4")
                rep = certify::check_prop4(vn, vk, vm, vtrials, vdelta, vseed);
            else if (check == "prop5")
                rep = certify::check_prop5(vn, vk, vm, vtrials, vdelta, vseed);
            else if (check == "cross")
                rep = certify::check_cross_lemma(vn, vk, vm, vtrials, vdelta, vseed);
            else if (check == "cmatrix")
                rep = certify::check_C_concentration(vn, vk, vm, vtrials, vdelta, vseed);
            else if (check == "psd-complete") {
                SignalSpec spec = gen_signal(vn, vk, SignalModel::UniformSphere,
                                             rng::derive(vseed, 0x534947u));
                rep = certify::psd_completion_unique(spec, vtrials, vseed);
            } else {
                std::cerr << "unknown check '" << check << "'\n";
                return 1;
            }
            print_report(rep);
            std::cout << rep.to_json() << "\n";
            return rep.pass ? 0 : 2;
        }
        if (sc_cert->parsed()) {
            SignalSpec spec = gen_signal(cn, ck, SignalModel::UniformSphere,
                                         rng::derive(cseed, 0x534947u));
            MeasurementSet ms = MeasurementSet::generate(cn, cm, 1.0, rng::derive(cseed, 0x4d4541u));
            certify::CertificatePair pair = certify::build_certificate_Y(ms, spec);
            SymMatrix cdev = pair.C;
            cdev -= SymMatrix::identity(ck);
            EigDecomp e = eig_sym(cdev);
            double cnorm = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
            nlohmann::json j;
            j["on_support_deviation"] = pair.on_support_deviation;
            j["off_support_max"] = pair.off_support_max;
            j["C_minus_I_norm"] = cnorm;
            std::cout << j.dump() << "\n";
            return 0;
        }
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 0;
}
