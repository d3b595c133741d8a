#ifndef SPARSELIFT_SOLVER_HPP
#define SPARSELIFT_SOLVER_HPP

#include <optional>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "sparselift/measure.hpp"
#include "sparselift/signal.hpp"
#include "sparselift/symmat.hpp"

namespace sparselift {

enum class Program { Sdp1ColumnL1, Sdp2EntrywiseL1 };

struct SolverOptions {
    double rho = 1.0;
    int max_iters = 50000;
    double tol_abs = 1e-9;
    double tol_rel = 1e-7;
    double alpha = 1.6;              // over-relaxation, in (0,2)
    bool residual_balancing = true;  // factor-2 rule, checked every 50 iterations
};

enum class SolveStatus { Converged, MaxIters };

struct SolveResult {
    SymMatrix X;
    double objective = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iters = 0;
    SolveStatus status = SolveStatus::MaxIters;
    std::vector<double> x_hat_first_col;
    std::vector<double> x_hat_central;
    double rel_err_full = -1.0;    // populated when ground truth supplied
    double rel_err_central = -1.0;
    std::vector<std::pair<int, double>> objective_checkpoints; // best-so-far, every 100 iters

    std::string to_json() const;
};

struct SdpProblem {
    Program program = Program::Sdp2EntrywiseL1;
    MeasurementSet ms;
    std::vector<double> b;
    bool enforce_trace = true;
    SolverOptions options;
};

struct SolverDiverged : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Frobenius projection onto {X : <K_j, X> = rhs_j}. The Gram of the stack is
// factorized once; redundant-but-consistent stacks are handled by a spectral
// pseudo-inverse (at lambda=1 the measurement kernels span at most n
// dimensions, so m > n is routinely redundant). An inconsistent stack throws.
class AffineProjector {
public:
    AffineProjector(std::vector<SymMatrix> kernels, std::vector<double> rhs);

    void apply_inplace(SymMatrix& x) const;
    SymMatrix apply(SymMatrix x) const {
        apply_inplace(x);
        return x;
    }

    int dropped_directions() const { return dropped_; }
    double max_violation(const SymMatrix& x) const;

private:
    std::vector<SymMatrix> kernels_;
    std::vector<double> rhs_;
    std::vector<double> pinv_; // p x p pseudo-inverse of the Gram
    int p_ = 0;
    int dropped_ = 0;
};

// Objective blocks the consensus scheme can carry.
struct L1Entrywise {};
struct L1FirstColumn {};
struct LinearObjective {
    SymMatrix g;
};
using Objective = std::variant<L1Entrywise, L1FirstColumn, LinearObjective>;

struct ConsensusProblem {
    int dim = 0;
    Objective objective;
    std::vector<SymMatrix> kernels;
    std::vector<double> rhs;
    SolverOptions options;
};

struct ConsensusResult {
    SymMatrix X;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iters = 0;
    SolveStatus status = SolveStatus::MaxIters;
    std::vector<std::pair<int, double>> objective_checkpoints;
};

// Three-block consensus splitting over {objective prox, affine set, PSD cone}.
ConsensusResult solve_consensus(const ConsensusProblem& problem);

// Proximal map of the program objective at step t (soft-thresholding).
SymMatrix prox_objective(Program program, const SymMatrix& x, double t);

// The literal objective values used for reporting and certificates.
double objective_value(Program program, const SymMatrix& x);
double objective_value(const Objective& obj, const SymMatrix& x);

// Constraint stack of an SdpProblem: X11 = 1, optionally Tr = 2, then the
// measurement rows.
std::pair<std::vector<SymMatrix>, std::vector<double>> constraint_stack(const SdpProblem& p);

// Frobenius projection onto the problem's equality constraints.
SymMatrix project_affine(const SdpProblem& p, const SymMatrix& x);

SolveResult solve(const SdpProblem& problem,
                  const std::optional<SignalSpec>& truth = std::nullopt);

// first column below the corner, and sqrt(mu)*v from the leading eigenpair of
// the trailing block (sign fixed so the largest-magnitude entry is >= 0).
std::pair<std::vector<double>, std::vector<double>> extract_signal(const SymMatrix& x);

// (rel_err_full, rel_err_central) against the lifted truth.
std::pair<double, double> rel_errors(const SymMatrix& x, const SignalSpec& truth);

} // namespace sparselift

#endif
