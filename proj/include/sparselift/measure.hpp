#ifndef SPARSELIFT_MEASURE_HPP
#define SPARSELIFT_MEASURE_HPP

#include <cstdint>
#include <vector>

#include "sparselift/signal.hpp"
#include "sparselift/symmat.hpp"

namespace sparselift {

// Gaussian measurement kernels: linear parts c_i (length n) and quadratic
// parts A_i (n x n, unsymmetrized), blended by lambda in [0,1]. Regeneration
// from (n, m, lambda, seed) is bit-identical; only the tuple gets persisted.
struct MeasurementSet {
    int n = 0;
    int m = 0;
    double lambda = 1.0;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> c; // m vectors of length n
    std::vector<std::vector<double>> A; // m matrices, row-major n*n

    static MeasurementSet generate(int n, int m, double lambda, std::uint64_t seed);
};

// Component i: 2*lambda*c_i^T x + (1-lambda)*<A_i, Xc>, where x is the first
// column of X below the corner and Xc the trailing n x n block.
std::vector<double> forward(const MeasurementSet& ms, const SymMatrix& X);

// Noiseless observations of the lifted truth.
std::vector<double> observe(const MeasurementSet& ms, const SignalSpec& x);

// Adjoint w.r.t. the Frobenius inner product: sum_i y_i sym(K_i) with
// lambda*c_i on the first row/column and (1-lambda)(A_i+A_i^T)/2 inside.
SymMatrix adjoint(const MeasurementSet& ms, const std::vector<double>& y);

// Symmetrized kernel of measurement i (the matrix K_i with <K_i,X> = forward_i(X)).
SymMatrix kernel(const MeasurementSet& ms, int i);

enum class InjectivitySubspace { CentralBlock, FirstRowCol };

struct InjectivityReport {
    int rank = 0;
    int dim_subspace = 0;
    bool injective() const { return rank == dim_subspace; }
};

// Numerical rank (sigma > 1e-8 * sigma_max) of forward restricted to the
// symmetric matrices supported on the chosen index set.
InjectivityReport injectivity_rank(const MeasurementSet& ms, const SupportGeometry& geom,
                                   InjectivitySubspace subspace = InjectivitySubspace::CentralBlock);

} // namespace sparselift

#endif
