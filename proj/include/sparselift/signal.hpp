#ifndef SPARSELIFT_SIGNAL_HPP
#define SPARSELIFT_SIGNAL_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sparselift/symmat.hpp"

namespace sparselift {

enum class SignalModel { UniformSphere, CoherenceW };

// A k-sparse unit vector plus the data needed to regenerate it.
struct SignalSpec {
    int n = 0;
    int k = 0;
    std::vector<int> support;    // sorted, 0-based ambient indices
    std::vector<double> values;  // values on the support, unit 2-norm
    SignalModel model = SignalModel::UniformSphere;
    double w = 0.0;              // only meaningful for CoherenceW
    std::uint64_t seed = 0;

    std::vector<double> dense() const;
    std::string to_json() const;
    static SignalSpec from_json(const std::string& text);
};

SignalSpec gen_signal(int n, int k, SignalModel model, double w, std::uint64_t seed);
inline SignalSpec gen_signal(int n, int k, SignalModel model, std::uint64_t seed) {
    return gen_signal(n, k, model, 0.0, seed);
}

// mu0 = ||x||_inf / ||x||_2 and mu0_tilde = sqrt(k) * mu0.
std::pair<double, double> coherence(const SignalSpec& x);

// Lifted rank-one matrix [1, x][1, x]^T, dimension n+1, trace 2.
SymMatrix lift(const SignalSpec& x);

// Index sets of the lifted support geometry. Internally 0-based with index 0
// the appended coordinate; emitted artifacts use 1-based lifted indexing.
struct SupportGeometry {
    int n = 0;
    std::vector<int> lifted_support;              // {0} followed by support+1
    std::vector<std::pair<int, int>> omega;       // lifted support x lifted support
    std::vector<std::pair<int, int>> omega_prime; // first row/col on the ambient support
    std::vector<std::pair<int, int>> b_diag;      // (j,j) for lifted j outside the support
    std::vector<double> x0_lifted;                // [1, x], squared norm 2

    std::string to_json() const; // 1-based indices
};

SupportGeometry geometry(const SignalSpec& x);

// Orthonormal basis of T ∩ Omega = span{ u e_j^T + e_j u^T : j in lifted support },
// u the unit lifted direction. Built once per spec; dimension k+1.
std::vector<SymMatrix> tcap_omega_basis(const SignalSpec& x);

// Tangent-space projectors at the lifted truth. h must have dim n+1.
SymMatrix project_T(const SymMatrix& h, const SignalSpec& x);
SymMatrix project_Tperp(const SymMatrix& h, const SignalSpec& x);
SymMatrix project_TcapOmega(const SymMatrix& h, const std::vector<SymMatrix>& basis);
SymMatrix project_TcapOmega(const SymMatrix& h, const SignalSpec& x);
SymMatrix project_OmegaC(const SymMatrix& h, const SignalSpec& x);

// Entrywise restriction to a pair set (helper shared with certify checks).
SymMatrix mask_to(const SymMatrix& h, const std::vector<std::pair<int, int>>& pairs);

} // namespace sparselift

#endif
