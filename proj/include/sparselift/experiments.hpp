#ifndef SPARSELIFT_EXPERIMENTS_HPP
#define SPARSELIFT_EXPERIMENTS_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sparselift/solver.hpp"

namespace sparselift::experiments {

enum class ProgramSelect { Sdp1, Sdp2, Both };
enum class Metric { Full, Central };

// Declarative experiment description. Axes with a single value are fixed
// parameters; w_values switches the signal model to the coherence family.
struct GridConfig {
    std::string experiment = "grid"; // recovery_curve | coherence_sweep |
                                     // trace_ablation | phase_grid | lambda_sweep | grid
    int n = 30;
    std::vector<int> k_values{4};
    std::vector<int> m_values;
    std::vector<double> lambda_values{1.0};
    std::vector<double> w_values; // empty => uniform-sphere signals
    int trials_per_cell = 10;
    double success_threshold = 0.01;
    ProgramSelect program = ProgramSelect::Sdp2;
    Metric metric = Metric::Full;
    std::uint64_t base_seed = 1;
    bool enforce_trace = true;
    SolverOptions solver;
    int threads = 0; // 0 = hardware concurrency
    // boundary overlay constants for (lambda, k) grids: k <= c1*m*lambda^2/(1-lambda)^2, k <= c2*m
    double boundary_c1 = 0.2;
    double boundary_c2 = 1.0 / 4.8;

    static GridConfig from_json_text(const std::string& text); // unknown keys rejected
    std::string to_json_text() const;
};

struct CellKey {
    int program; // 1 or 2
    int k;
    double w;      // 0 when uniform-sphere
    double lambda;
    int m;

    bool operator<(const CellKey& o) const;
    bool operator==(const CellKey& o) const;
};

struct TrialRecord {
    CellKey cell;
    int trial = 0;
    std::uint64_t seed = 0;
    SolveStatus status = SolveStatus::MaxIters;
    int iters = 0;
    double objective = 0.0;
    double rel_err_full = 0.0;
    double rel_err_central = 0.0;
    bool success = false;
    double runtime_ms = 0.0; // excluded from the CSV (kept reproducible byte-for-byte)
};

struct CellAggregate {
    int trials = 0;
    double success_rate = 0.0;
    double mean_rel_err_full = 0.0;
    double mean_rel_err_central = 0.0;
    double mean_objective = 0.0;
    long total_iters = 0;
    double total_runtime_ms = 0.0;
};

struct GridResult {
    GridConfig config;
    std::vector<TrialRecord> records; // sorted by (cell, trial)
    std::string code_version;

    std::map<CellKey, CellAggregate> aggregates() const;
};

// Deterministic per-cell trial seed; stable under axis extension.
std::uint64_t cell_trial_seed(std::uint64_t base_seed, const CellKey& cell, int trial);

GridResult run_grid(const GridConfig& cfg);

// Named runners: validate axes per experiment and delegate to run_grid.
GridResult run_recovery_curve(GridConfig cfg);
GridResult run_coherence_sweep(GridConfig cfg);
GridResult run_trace_ablation(GridConfig cfg);
GridResult run_phase_grid(GridConfig cfg);
GridResult run_lambda_sweep_large_m(GridConfig cfg);

// UTF-8 CSV, header row, one row per (cell, trial) plus an aggregate row per
// cell; floats printed with 17 significant digits; byte-identical across
// re-runs of the same config regardless of worker count.
void emit_csv(const GridResult& result, const std::string& path);

// Config echo, environment fingerprint, per-cell runtimes.
void emit_json_sidecar(const GridResult& result, const std::string& path);

std::string csv_text(const GridResult& result);

} // namespace sparselift::experiments

#endif
