#include "sparselift/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sparselift/rng.hpp"

namespace sparselift::experiments {

namespace {

constexpr const char* kCodeVersion = "sparselift 0.1.0";

constexpr std::uint64_t kTagCell = 0x43454c4cu;
constexpr std::uint64_t kTagSignal = 0x534947u;
constexpr std::uint64_t kTagMeasure = 0x4d4541u;

void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                    const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* key : allowed)
            if (it.key() == key) {
                ok = true;
                break;
            }
        if (!ok) throw std::invalid_argument("config: unknown key '" + it.key() + "' in " + where);
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

bool CellKey::operator<(const CellKey& o) const {
    if (program != o.program) return program < o.program;
    if (k != o.k) return k < o.k;
    if (w != o.w) return w < o.w;
    if (lambda != o.lambda) return lambda < o.lambda;
    return m < o.m;
}

bool CellKey::operator==(const CellKey& o) const {
    return program == o.program && k == o.k && w == o.w && lambda == o.lambda && m == o.m;
}

std::uint64_t cell_trial_seed(std::uint64_t base_seed, const CellKey& cell, int trial) {
    std::uint64_t s = rng::derive(base_seed, kTagCell, static_cast<std::uint64_t>(cell.program));
    s = rng::derive(s, static_cast<std::uint64_t>(cell.k), rng::key_of(cell.w));
    s = rng::derive(s, rng::key_of(cell.lambda), static_cast<std::uint64_t>(cell.m));
    return rng::derive(s, static_cast<std::uint64_t>(trial));
}

GridResult run_grid(const GridConfig& cfg) {
    if (cfg.m_values.empty()) throw std::invalid_argument("run_grid: m axis is empty");
    if (cfg.k_values.empty()) throw std::invalid_argument("run_grid: k axis is empty");
    if (cfg.lambda_values.empty()) throw std::invalid_argument("run_grid: lambda axis is empty");
    if (!(cfg.success_threshold > 0)) throw std::invalid_argument("run_grid: threshold must be > 0");

    std::vector<int> programs;
    if (cfg.program == ProgramSelect::Sdp1)
        programs = {1};
    else if (cfg.program == ProgramSelect::Sdp2)
        programs = {2};
    else
        programs = {1, 2};

    std::vector<double> ws = cfg.w_values.empty() ? std::vector<double>{0.0} : cfg.w_values;

    struct Task {
        CellKey cell;
        int trial;
    };
    std::vector<Task> tasks;
    for (int prog : programs)
        for (int k : cfg.k_values)
            for (double w : ws)
                for (double lam : cfg.lambda_values)
                    for (int m : cfg.m_values)
                        for (int t = 0; t < cfg.trials_per_cell; ++t)
                            tasks.push_back({CellKey{prog, k, w, lam, m}, t});

    std::vector<TrialRecord> records(tasks.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) return;
            const Task& task = tasks[idx];
            TrialRecord rec;
            rec.cell = task.cell;
            rec.trial = task.trial;
            rec.seed = cell_trial_seed(cfg.base_seed, task.cell, task.trial);

            SignalModel model =
                cfg.w_values.empty() ? SignalModel::UniformSphere : SignalModel::CoherenceW;
            SignalSpec spec = gen_signal(cfg.n, task.cell.k, model, task.cell.w,
                                         rng::derive(rec.seed, kTagSignal));
            SdpProblem prob;
            prob.program = (task.cell.program == 1) ? Program::Sdp1ColumnL1
                                                    : Program::Sdp2EntrywiseL1;
            prob.ms = MeasurementSet::generate(cfg.n, task.cell.m, task.cell.lambda,
                                               rng::derive(rec.seed, kTagMeasure));
            prob.b = observe(prob.ms, spec);
            prob.enforce_trace = cfg.enforce_trace;
            prob.options = cfg.solver;

            auto t0 = std::chrono::steady_clock::now();
            try {
                SolveResult sol = solve(prob, spec);
                rec.status = sol.status;
                rec.iters = sol.iters;
                rec.objective = sol.objective;
                rec.rel_err_full = sol.rel_err_full;
                rec.rel_err_central = sol.rel_err_central;
                double err = (cfg.metric == Metric::Full) ? sol.rel_err_full : sol.rel_err_central;
                // a trial that hits the iteration cap counts as failed
                rec.success = sol.status == SolveStatus::Converged && err < cfg.success_threshold;
            } catch (const SolverDiverged&) {
                rec.status = SolveStatus::MaxIters;
                rec.rel_err_full = std::numeric_limits<double>::infinity();
                rec.rel_err_central = std::numeric_limits<double>::infinity();
                rec.success = false;
            }
            auto t1 = std::chrono::steady_clock::now();
            rec.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            records[idx] = rec;
        }
    };

    int nthreads = cfg.threads > 0 ? cfg.threads
                                   : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    nthreads = std::min<int>(nthreads, static_cast<int>(tasks.size()) > 0 ? static_cast<int>(tasks.size()) : 1);
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // records were written by task index; tasks are already in lexicographic
    // cell-then-trial order by construction
    GridResult out;
    out.config = cfg;
    out.records = std::move(records);
    out.code_version = kCodeVersion;
    return out;
}

std::map<CellKey, CellAggregate> GridResult::aggregates() const {
    std::map<CellKey, CellAggregate> agg;
    for (const TrialRecord& r : records) {
        CellAggregate& a = agg[r.cell];
        a.trials += 1;
        a.success_rate += r.success ? 1.0 : 0.0;
        a.mean_rel_err_full += r.rel_err_full;
        a.mean_rel_err_central += r.rel_err_central;
        a.mean_objective += r.objective;
        a.total_iters += r.iters;
        a.total_runtime_ms += r.runtime_ms;
    }
    for (auto& [key, a] : agg) {
        if (a.trials > 0) {
            a.success_rate /= a.trials;
            a.mean_rel_err_full /= a.trials;
            a.mean_rel_err_central /= a.trials;
            a.mean_objective /= a.trials;
        }
    }
    return agg;
}

GridResult run_recovery_curve(GridConfig cfg) {
    cfg.experiment = "recovery_curve";
    if (cfg.lambda_values.size() != 1)
        throw std::invalid_argument("recovery_curve: requires a single lambda");
    if (!cfg.w_values.empty())
        throw std::invalid_argument("recovery_curve: uses uniform-sphere signals (no w axis)");
    return run_grid(cfg);
}

GridResult run_coherence_sweep(GridConfig cfg) {
    cfg.experiment = "coherence_sweep";
    if (cfg.w_values.empty()) throw std::invalid_argument("coherence_sweep: w axis is empty");
    return run_grid(cfg);
}

GridResult run_trace_ablation(GridConfig cfg) {
    cfg.experiment = "trace_ablation";
    cfg.enforce_trace = false;
    return run_grid(cfg);
}

GridResult run_phase_grid(GridConfig cfg) {
    cfg.experiment = "phase_grid";
    bool lam_m = cfg.lambda_values.size() > 1 && cfg.m_values.size() > 1;
    bool lam_k = cfg.lambda_values.size() > 1 && cfg.k_values.size() > 1;
    if (!lam_m && !lam_k)
        throw std::invalid_argument("phase_grid: needs two populated axes (lambda x m or lambda x k)");
    return run_grid(cfg);
}

GridResult run_lambda_sweep_large_m(GridConfig cfg) {
    cfg.experiment = "lambda_sweep";
    cfg.metric = Metric::Central;
    if (cfg.m_values.size() != 1)
        throw std::invalid_argument("lambda_sweep: requires a single m");
    return run_grid(cfg);
}

std::string csv_text(const GridResult& result) {
    const GridConfig& cfg = result.config;
    bool lam_k_grid = cfg.lambda_values.size() > 1 && cfg.k_values.size() > 1;

    std::ostringstream os;
    os << "program,k,w,lambda,m,trial,seed,status,iters,objective,rel_err_full,"
          "rel_err_central,success";
    if (lam_k_grid) os << ",boundary_k_interp,boundary_k_linear";
    os << "\n";

    auto boundary_cols = [&](const CellKey& c) {
        if (!lam_k_grid) return std::string();
        double denom = (1.0 - c.lambda) * (1.0 - c.lambda);
        double b1 = denom > 0 ? cfg.boundary_c1 * c.m * c.lambda * c.lambda / denom
                              : std::numeric_limits<double>::infinity();
        double b2 = cfg.boundary_c2 * c.m;
        return "," + fmt17(b1) + "," + fmt17(b2);
    };

    auto agg = result.aggregates();
    std::size_t i = 0;
    while (i < result.records.size()) {
        const CellKey cell = result.records[i].cell;
        std::size_t j = i;
        for (; j < result.records.size() && result.records[j].cell == cell; ++j) {
            const TrialRecord& r = result.records[j];
            os << r.cell.program << ',' << r.cell.k << ',' << fmt17(r.cell.w) << ','
               << fmt17(r.cell.lambda) << ',' << r.cell.m << ',' << r.trial << ',' << r.seed << ','
               << (r.status == SolveStatus::Converged ? "converged" : "max_iters") << ','
               << r.iters << ',' << fmt17(r.objective) << ',' << fmt17(r.rel_err_full) << ','
               << fmt17(r.rel_err_central) << ',' << (r.success ? 1 : 0) << boundary_cols(r.cell)
               << "\n";
        }
        const CellAggregate& a = agg.at(cell);
        os << cell.program << ',' << cell.k << ',' << fmt17(cell.w) << ',' << fmt17(cell.lambda)
           << ',' << cell.m << ",agg," << 0 << ",," << a.total_iters << ','
           << fmt17(a.mean_objective) << ',' << fmt17(a.mean_rel_err_full) << ','
           << fmt17(a.mean_rel_err_central) << ',' << fmt17(a.success_rate)
           << boundary_cols(cell) << "\n";
        i = j;
    }
    return os.str();
}

void emit_csv(const GridResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
    f << csv_text(result);
}

void emit_json_sidecar(const GridResult& result, const std::string& path) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(result.config.to_json_text());
    j["code_version"] = result.code_version;
    j["environment"] = {
#if defined(__GNUC__) && !defined(__clang__)
        {"compiler", "gcc " + std::to_string(__GNUC__) + "." + std::to_string(__GNUC_MINOR__)},
#elif defined(__clang__)
        {"compiler", "clang " + std::to_string(__clang_major__)},
#else
        {"compiler", "unknown"},
#endif
        {"pointer_bits", static_cast<int>(sizeof(void*) * 8)},
        {"hardware_threads", static_cast<int>(std::thread::hardware_concurrency())},
    };
    nlohmann::json cells = nlohmann::json::array();
    for (const auto& [key, a] : result.aggregates()) {
        cells.push_back({{"program", key.program},
                         {"k", key.k},
                         {"w", key.w},
                         {"lambda", key.lambda},
                         {"m", key.m},
                         {"trials", a.trials},
                         {"success_rate", a.success_rate},
                         {"mean_rel_err_full", a.mean_rel_err_full},
                         {"mean_rel_err_central", a.mean_rel_err_central},
                         {"total_iters", a.total_iters},
                         {"total_runtime_ms", a.total_runtime_ms}});
    }
    j["cells"] = cells;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("emit_json_sidecar: cannot open " + path);
    f << j.dump(2) << "\n";
}

GridConfig GridConfig::from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    reject_unknown(j,
                   {"experiment", "n", "axes", "trials_per_cell", "success_threshold", "program",
                    "metric", "base_seed", "enforce_trace", "solver", "threads", "boundary_c1",
                    "boundary_c2"},
                   "top level");
    GridConfig cfg;
    if (j.contains("experiment")) cfg.experiment = j["experiment"].get<std::string>();
    if (j.contains("n")) cfg.n = j["n"].get<int>();
    if (j.contains("axes")) {
        const nlohmann::json& ax = j["axes"];
        reject_unknown(ax, {"m", "lambda", "k", "w"}, "axes");
        if (ax.contains("m")) cfg.m_values = ax["m"].get<std::vector<int>>();
        if (ax.contains("lambda")) cfg.lambda_values = ax["lambda"].get<std::vector<double>>();
        if (ax.contains("k")) cfg.k_values = ax["k"].get<std::vector<int>>();
        if (ax.contains("w")) cfg.w_values = ax["w"].get<std::vector<double>>();
    }
    if (j.contains("trials_per_cell")) cfg.trials_per_cell = j["trials_per_cell"].get<int>();
    if (j.contains("success_threshold"))
        cfg.success_threshold = j["success_threshold"].get<double>();
    if (j.contains("program")) {
        std::string p = j["program"].get<std::string>();
        if (p == "sdp1")
            cfg.program = ProgramSelect::Sdp1;
        else if (p == "sdp2")
            cfg.program = ProgramSelect::Sdp2;
        else if (p == "both")
            cfg.program = ProgramSelect::Both;
        else
            throw std::invalid_argument("config: program must be sdp1|sdp2|both");
    }
    if (j.contains("metric")) {
        std::string mt = j["metric"].get<std::string>();
        if (mt == "full")
            cfg.metric = Metric::Full;
        else if (mt == "central")
            cfg.metric = Metric::Central;
        else
            throw std::invalid_argument("config: metric must be full|central");
    }
    if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("enforce_trace")) cfg.enforce_trace = j["enforce_trace"].get<bool>();
    if (j.contains("solver")) {
        const nlohmann::json& s = j["solver"];
        reject_unknown(s, {"rho", "max_iters", "tol_abs", "tol_rel", "alpha", "residual_balancing"},
                       "solver");
        if (s.contains("rho")) cfg.solver.rho = s["rho"].get<double>();
        if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<int>();
        if (s.contains("tol_abs")) cfg.solver.tol_abs = s["tol_abs"].get<double>();
        if (s.contains("tol_rel")) cfg.solver.tol_rel = s["tol_rel"].get<double>();
        if (s.contains("alpha")) cfg.solver.alpha = s["alpha"].get<double>();
        if (s.contains("residual_balancing"))
            cfg.solver.residual_balancing = s["residual_balancing"].get<bool>();
    }
    if (j.contains("threads")) cfg.threads = j["threads"].get<int>();
    if (j.contains("boundary_c1")) cfg.boundary_c1 = j["boundary_c1"].get<double>();
    if (j.contains("boundary_c2")) cfg.boundary_c2 = j["boundary_c2"].get<double>();
    return cfg;
}

std::string GridConfig::to_json_text() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    j["n"] = n;
    j["axes"] = {{"m", m_values}, {"lambda", lambda_values}, {"k", k_values}};
    if (!w_values.empty()) j["axes"]["w"] = w_values;
    j["trials_per_cell"] = trials_per_cell;
    j["success_threshold"] = success_threshold;
    j["program"] = program == ProgramSelect::Sdp1 ? "sdp1"
                 : program == ProgramSelect::Sdp2 ? "sdp2"
                                                  : "both";
    j["metric"] = metric == Metric::Full ? "full" : "central";
    j["base_seed"] = base_seed;
    j["enforce_trace"] = enforce_trace;
    j["solver"] = {{"rho", solver.rho},
                   {"max_iters", solver.max_iters},
                   {"tol_abs", solver.tol_abs},
                   {"tol_rel", solver.tol_rel},
                   {"alpha", solver.alpha},
                   {"residual_balancing", solver.residual_balancing}};
    j["threads"] = threads;
    j["boundary_c1"] = boundary_c1;
    j["boundary_c2"] = boundary_c2;
    return j.dump();
}

} // namespace sparselift::experiments
