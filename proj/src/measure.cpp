#include "sparselift/measure.hpp"

#include <cmath>
#include <stdexcept>

#include "sparselift/rng.hpp"

namespace sparselift {

namespace {
constexpr std::uint64_t kTagLinear = 0x434cu;
constexpr std::uint64_t kTagQuad = 0x4151u;
} // namespace

MeasurementSet MeasurementSet::generate(int n, int m, double lambda, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("MeasurementSet: n must be >= 1");
    if (m < 0) throw std::invalid_argument("MeasurementSet: m must be >= 0");
    if (!(lambda >= 0.0 && lambda <= 1.0))
        throw std::invalid_argument("MeasurementSet: lambda must lie in [0,1]");
    MeasurementSet ms;
    ms.n = n;
    ms.m = m;
    ms.lambda = lambda;
    ms.seed = seed;
    ms.c.resize(m);
    ms.A.resize(m);
    for (int i = 0; i < m; ++i) {
        rng::Stream sc(rng::derive(seed, kTagLinear, static_cast<std::uint64_t>(i)));
        ms.c[i].resize(n);
        for (int j = 0; j < n; ++j) ms.c[i][j] = sc.next_normal();
        rng::Stream sa(rng::derive(seed, kTagQuad, static_cast<std::uint64_t>(i)));
        ms.A[i].resize(static_cast<std::size_t>(n) * n);
        for (auto& v : ms.A[i]) v = sa.next_normal();
    }
    return ms;
}

std::vector<double> forward(const MeasurementSet& ms, const SymMatrix& X) {
    const int n = ms.n;
    X.check_same_dim(SymMatrix(n + 1));
    std::vector<double> out(ms.m, 0.0);
    const double lam = ms.lambda;
    for (int i = 0; i < ms.m; ++i) {
        double lin = 0.0;
        for (int j = 0; j < n; ++j) lin += ms.c[i][j] * X(j + 1, 0);
        double quad = 0.0;
        if (lam < 1.0) {
            const std::vector<double>& Ai = ms.A[i];
            for (int r = 0; r < n; ++r)
                for (int s = 0; s < n; ++s)
                    quad += Ai[static_cast<std::size_t>(r) * n + s] * X(r + 1, s + 1);
        }
        out[i] = 2.0 * lam * lin + (1.0 - lam) * quad;
    }
    return out;
}

std::vector<double> observe(const MeasurementSet& ms, const SignalSpec& x) {
    if (ms.n != x.n) throw std::invalid_argument("observe: signal/measurement dimension mismatch");
    return forward(ms, lift(x));
}

SymMatrix kernel(const MeasurementSet& ms, int i) {
    const int n = ms.n;
    SymMatrix K(n + 1);
    const double lam = ms.lambda;
    for (int j = 0; j < n; ++j) K.set(0, j + 1, lam * ms.c[i][j]);
    if (lam < 1.0) {
        const std::vector<double>& Ai = ms.A[i];
        for (int r = 0; r < n; ++r)
            for (int s = r; s < n; ++s) {
                double v = 0.5 * (Ai[static_cast<std::size_t>(r) * n + s] +
                                  Ai[static_cast<std::size_t>(s) * n + r]);
                K.set(r + 1, s + 1, (1.0 - lam) * v);
            }
    }
    return K;
}

SymMatrix adjoint(const MeasurementSet& ms, const std::vector<double>& y) {
    if (static_cast<int>(y.size()) != ms.m)
        throw std::invalid_argument("adjoint: length(y) != m");
    const int n = ms.n;
    SymMatrix out(n + 1);
    for (int i = 0; i < ms.m; ++i) {
        if (y[i] == 0.0) continue;
        const double wl = y[i] * ms.lambda;
        for (int j = 0; j < n; ++j) out.add(0, j + 1, wl * ms.c[i][j]);
        if (ms.lambda < 1.0) {
            const double wq = y[i] * (1.0 - ms.lambda);
            const std::vector<double>& Ai = ms.A[i];
            for (int r = 0; r < n; ++r)
                for (int s = r; s < n; ++s) {
                    double v = 0.5 * (Ai[static_cast<std::size_t>(r) * n + s] +
                                      Ai[static_cast<std::size_t>(s) * n + r]);
                    out.add(r + 1, s + 1, wq * v);
                }
        }
    }
    return out;
}

InjectivityReport injectivity_rank(const MeasurementSet& ms, const SupportGeometry& geom,
                                   InjectivitySubspace subspace) {
    // Orthonormal basis of the restricted symmetric subspace.
    const int d = ms.n + 1;
    std::vector<SymMatrix> basis;
    const double inv_sq2 = 1.0 / std::sqrt(2.0);
    if (subspace == InjectivitySubspace::CentralBlock) {
        // trailing-block entries over the ambient support (pairs (i,j), i<=j)
        std::vector<int> sup;
        for (int j : geom.lifted_support)
            if (j != 0) sup.push_back(j);
        for (std::size_t a = 0; a < sup.size(); ++a)
            for (std::size_t b = a; b < sup.size(); ++b) {
                SymMatrix e(d);
                e.set(sup[a], sup[b], sup[a] == sup[b] ? 1.0 : inv_sq2);
                basis.push_back(std::move(e));
            }
    } else {
        for (int j : geom.lifted_support)
            if (j != 0) {
                SymMatrix e(d);
                e.set(0, j, inv_sq2);
                basis.push_back(std::move(e));
            }
    }

    InjectivityReport rep;
    rep.dim_subspace = static_cast<int>(basis.size());
    if (ms.m == 0 || basis.empty()) return rep;

    // Gram of the restricted forward map; rank via eigenvalues.
    const int p = rep.dim_subspace;
    std::vector<std::vector<double>> img(p);
    for (int a = 0; a < p; ++a) img[a] = forward(ms, basis[a]);
    SymMatrix G(p);
    for (int a = 0; a < p; ++a)
        for (int b = a; b < p; ++b) {
            double s = 0.0;
            for (int i = 0; i < ms.m; ++i) s += img[a][i] * img[b][i];
            G.set(a, b, s);
        }
    EigDecomp e = eig_sym(G);
    double top = std::max(e.values.front(), 0.0);
    // singular-value threshold 1e-8 relative -> eigenvalue threshold squared
    double thr = 1e-16 * top;
    int r = 0;
    for (double w : e.values)
        if (w > thr && w > 0.0) ++r;
    rep.rank = r;
    return rep;
}

} // namespace sparselift
