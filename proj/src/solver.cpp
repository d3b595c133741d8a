#include "sparselift/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <tuple>

#include <json.hpp>

namespace sparselift {

AffineProjector::AffineProjector(std::vector<SymMatrix> kernels, std::vector<double> rhs)
    : kernels_(std::move(kernels)), rhs_(std::move(rhs)) {
    p_ = static_cast<int>(kernels_.size());
    if (static_cast<int>(rhs_.size()) != p_)
        throw std::invalid_argument("AffineProjector: kernels/rhs size mismatch");
    if (p_ == 0) return;

    SymMatrix gram(p_);
    for (int i = 0; i < p_; ++i)
        for (int j = i; j < p_; ++j) gram.set(i, j, frobenius_inner(kernels_[i], kernels_[j]));
    EigDecomp e = eig_sym(gram);
    double top = std::max(e.values.front(), 0.0);
    double thr = 1e-12 * (top > 0 ? top : 1.0);

    pinv_.assign(static_cast<std::size_t>(p_) * p_, 0.0);
    for (int k = 0; k < p_; ++k) {
        if (e.values[k] <= thr) {
            ++dropped_;
            continue;
        }
        double inv = 1.0 / e.values[k];
        for (int i = 0; i < p_; ++i) {
            double wi = inv * e.vec(i, k);
            for (int j = 0; j < p_; ++j)
                pinv_[static_cast<std::size_t>(i) * p_ + j] += wi * e.vec(j, k);
        }
    }

    // Redundant rows are fine only when they are consistent.
    SymMatrix origin(kernels_[0].dim());
    apply_inplace(origin);
    double viol = max_violation(origin);
    double scale = 1.0;
    for (double r : rhs_) scale = std::max(scale, std::abs(r));
    if (!(viol <= 1e-8 * scale))
        throw std::invalid_argument(
            "AffineProjector: constraint stack is rank-deficient and inconsistent (" +
            std::to_string(dropped_) + " dependent rows, residual " + std::to_string(viol) +
            "); duplicate kernels with conflicting right-hand sides?");
}

void AffineProjector::apply_inplace(SymMatrix& x) const {
    if (p_ == 0) return;
    std::vector<double> v(p_);
    for (int j = 0; j < p_; ++j) v[j] = frobenius_inner(kernels_[j], x) - rhs_[j];
    std::vector<double> w(p_, 0.0);
    for (int i = 0; i < p_; ++i) {
        double s = 0.0;
        for (int j = 0; j < p_; ++j) s += pinv_[static_cast<std::size_t>(i) * p_ + j] * v[j];
        w[i] = s;
    }
    for (int j = 0; j < p_; ++j)
        if (w[j] != 0.0) x.axpy(-w[j], kernels_[j]);
}

double AffineProjector::max_violation(const SymMatrix& x) const {
    double worst = 0.0;
    for (int j = 0; j < p_; ++j)
        worst = std::max(worst, std::abs(frobenius_inner(kernels_[j], x) - rhs_[j]));
    return worst;
}

namespace {

void soft_threshold_all(SymMatrix& x, double t) {
    double* a = x.data();
    std::size_t nn = static_cast<std::size_t>(x.dim()) * x.dim();
    for (std::size_t i = 0; i < nn; ++i) {
        double v = a[i];
        a[i] = (v > t) ? v - t : (v < -t ? v + t : 0.0);
    }
}

void soft_threshold_first_col(SymMatrix& x, double t) {
    int d = x.dim();
    for (int j = 1; j < d; ++j) {
        double v = x(0, j);
        v = (v > t) ? v - t : (v < -t ? v + t : 0.0);
        x.set(0, j, v);
    }
}

struct ProxVisitor {
    SymMatrix& x;
    double t;
    void operator()(const L1Entrywise&) { soft_threshold_all(x, t); }
    void operator()(const L1FirstColumn&) { soft_threshold_first_col(x, t); }
    void operator()(const LinearObjective& lo) { x.axpy(-t, lo.g); }
};

} // namespace

SymMatrix prox_objective(Program program, const SymMatrix& x, double t) {
    SymMatrix out = x;
    if (program == Program::Sdp2EntrywiseL1)
        soft_threshold_all(out, t);
    else
        soft_threshold_first_col(out, t);
    return out;
}

double objective_value(Program program, const SymMatrix& x) {
    if (program == Program::Sdp2EntrywiseL1)
        return objective_value(Objective{L1Entrywise{}}, x);
    return objective_value(Objective{L1FirstColumn{}}, x);
}

double objective_value(const Objective& obj, const SymMatrix& x) {
    struct V {
        const SymMatrix& x;
        double operator()(const L1Entrywise&) const {
            const double* a = x.data();
            std::size_t nn = static_cast<std::size_t>(x.dim()) * x.dim();
            double s = 0.0;
            for (std::size_t i = 0; i < nn; ++i) s += std::abs(a[i]);
            return s;
        }
        double operator()(const L1FirstColumn&) const {
            double s = 0.0;
            for (int j = 1; j < x.dim(); ++j) s += std::abs(x(j, 0));
            return s;
        }
        double operator()(const LinearObjective& lo) const { return frobenius_inner(lo.g, x); }
    };
    return std::visit(V{x}, obj);
}

ConsensusResult solve_consensus(const ConsensusProblem& problem) {
    const int d = problem.dim;
    const SolverOptions& opt = problem.options;
    AffineProjector affine(problem.kernels, problem.rhs);

    double rho = opt.rho;
    constexpr int kBlocks = 3;
    const double sqn = std::sqrt(static_cast<double>(kBlocks));

    std::vector<SymMatrix> z(kBlocks, SymMatrix(d));
    std::vector<SymMatrix> u(kBlocks, SymMatrix(d));
    SymMatrix consensus(d), prev(d), work(d);

    double rhs_scale = 1.0;
    for (double r : problem.rhs) rhs_scale = std::max(rhs_scale, std::abs(r));

    ConsensusResult res;
    double best_obj = std::numeric_limits<double>::infinity();

    for (int it = 1; it <= opt.max_iters; ++it) {
        prev = consensus;

        for (int i = 0; i < kBlocks; ++i) {
            z[i] = consensus;
            z[i] -= u[i];
        }
        ProxVisitor pv{z[0], 1.0 / rho};
        std::visit(pv, problem.objective);
        affine.apply_inplace(z[1]);
        z[2] = project_psd(z[2]);

        // over-relaxed copies feed the consensus and dual updates
        consensus = SymMatrix(d);
        for (int i = 0; i < kBlocks; ++i) {
            work = z[i];
            work *= opt.alpha;
            work.axpy(1.0 - opt.alpha, prev);
            z[i] = work;
            consensus += work;
            consensus += u[i];
        }
        consensus *= 1.0 / kBlocks;
        for (int i = 0; i < kBlocks; ++i) {
            u[i] += z[i];
            u[i] -= consensus;
        }

        double r2 = 0.0, znorm2 = 0.0, unorm2 = 0.0;
        for (int i = 0; i < kBlocks; ++i) {
            work = z[i];
            work -= consensus;
            r2 += frobenius_inner(work, work);
            znorm2 += frobenius_inner(z[i], z[i]);
            unorm2 += frobenius_inner(u[i], u[i]);
        }
        work = consensus;
        work -= prev;
        double r = std::sqrt(r2);
        double s = rho * sqn * frobenius_norm(work);
        double cnorm = frobenius_norm(consensus);

        if (!std::isfinite(cnorm) || cnorm > 1e10 * (1.0 + rhs_scale))
            throw SolverDiverged("solve_consensus: iterate diverged at iteration " +
                                 std::to_string(it) + "; consider rescaling rho");

        if (it % 100 == 0) {
            best_obj = std::min(best_obj, objective_value(problem.objective, consensus));
            res.objective_checkpoints.emplace_back(it, best_obj);
        }

        double eps_pri = sqn * d * opt.tol_abs +
                         opt.tol_rel * std::max(std::sqrt(znorm2), sqn * cnorm);
        double eps_dua = sqn * d * opt.tol_abs + opt.tol_rel * rho * std::sqrt(unorm2);
        res.primal_residual = r;
        res.dual_residual = s;
        res.iters = it;
        if (r <= eps_pri && s <= eps_dua) {
            res.status = SolveStatus::Converged;
            break;
        }

        if (opt.residual_balancing && it % 50 == 0) {
            if (r > 10.0 * s && rho < 1e6) {
                rho *= 2.0;
                for (auto& ui : u) ui *= 0.5;
            } else if (s > 10.0 * r && rho > 1e-6) {
                rho *= 0.5;
                for (auto& ui : u) ui *= 2.0;
            }
        }
    }

    consensus.symmetrize();
    res.X = consensus;
    return res;
}

std::pair<std::vector<SymMatrix>, std::vector<double>> constraint_stack(const SdpProblem& p) {
    const int d = p.ms.n + 1;
    if (static_cast<int>(p.b.size()) != p.ms.m)
        throw std::invalid_argument("SdpProblem: length(b) != m");
    std::vector<SymMatrix> ker;
    std::vector<double> rhs;
    SymMatrix e11(d);
    e11.set(0, 0, 1.0);
    ker.push_back(std::move(e11));
    rhs.push_back(1.0);
    if (p.enforce_trace) {
        ker.push_back(SymMatrix::identity(d));
        rhs.push_back(2.0);
    }
    for (int i = 0; i < p.ms.m; ++i) {
        ker.push_back(kernel(p.ms, i));
        rhs.push_back(p.b[i]);
    }
    return {std::move(ker), std::move(rhs)};
}

SymMatrix project_affine(const SdpProblem& p, const SymMatrix& x) {
    auto [ker, rhs] = constraint_stack(p);
    AffineProjector proj(std::move(ker), std::move(rhs));
    return proj.apply(x);
}

SolveResult solve(const SdpProblem& problem, const std::optional<SignalSpec>& truth) {
    ConsensusProblem cp;
    cp.dim = problem.ms.n + 1;
    if (problem.program == Program::Sdp2EntrywiseL1)
        cp.objective = L1Entrywise{};
    else
        cp.objective = L1FirstColumn{};
    std::tie(cp.kernels, cp.rhs) = constraint_stack(problem);
    cp.options = problem.options;

    ConsensusResult cr = solve_consensus(cp);

    SolveResult out;
    out.X = std::move(cr.X);
    out.objective = objective_value(problem.program, out.X);
    out.primal_residual = cr.primal_residual;
    out.dual_residual = cr.dual_residual;
    out.iters = cr.iters;
    out.status = cr.status;
    out.objective_checkpoints = std::move(cr.objective_checkpoints);
    std::tie(out.x_hat_first_col, out.x_hat_central) = extract_signal(out.X);
    if (truth) std::tie(out.rel_err_full, out.rel_err_central) = rel_errors(out.X, *truth);
    return out;
}

std::pair<std::vector<double>, std::vector<double>> extract_signal(const SymMatrix& x) {
    const int d = x.dim();
    if (d < 2) throw std::invalid_argument("extract_signal: dim must be >= 2");
    const int n = d - 1;
    std::vector<double> first(n);
    for (int j = 0; j < n; ++j) first[j] = x(j + 1, 0);

    SymMatrix central(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) central.set(i, j, x(i + 1, j + 1));
    EigDecomp e = eig_sym(central);
    double mu = std::max(e.values.front(), 0.0);
    std::vector<double> lead(n, 0.0);
    if (mu > 0.0) {
        double scale = std::sqrt(mu);
        int arg = 0;
        double big = 0.0;
        for (int i = 0; i < n; ++i) {
            double a = std::abs(e.vec(i, 0));
            if (a > big) {
                big = a;
                arg = i;
            }
        }
        double sgn = (e.vec(arg, 0) >= 0.0) ? 1.0 : -1.0;
        for (int i = 0; i < n; ++i) lead[i] = scale * sgn * e.vec(i, 0);
    }
    return {std::move(first), std::move(lead)};
}

std::pair<double, double> rel_errors(const SymMatrix& x, const SignalSpec& truth) {
    SymMatrix x0 = lift(truth);
    x.check_same_dim(x0);
    const int d = x.dim();
    double num_full = 0.0, den_full = 0.0, num_cen = 0.0, den_cen = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            double dv = x(i, j) - x0(i, j);
            num_full += dv * dv;
            den_full += x0(i, j) * x0(i, j);
            if (i >= 1 && j >= 1) {
                num_cen += dv * dv;
                den_cen += x0(i, j) * x0(i, j);
            }
        }
    return {std::sqrt(num_full / den_full), std::sqrt(num_cen / den_cen)};
}

std::string SolveResult::to_json() const {
    nlohmann::json j;
    j["status"] = (status == SolveStatus::Converged) ? "converged" : "max_iters";
    j["iters"] = iters;
    j["objective"] = objective;
    j["primal_residual"] = primal_residual;
    j["dual_residual"] = dual_residual;
    if (rel_err_full >= 0.0) j["rel_err_full"] = rel_err_full;
    if (rel_err_central >= 0.0) j["rel_err_central"] = rel_err_central;
    return j.dump();
}

} // namespace sparselift
