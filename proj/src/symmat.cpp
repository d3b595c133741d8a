#include "sparselift/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sparselift {

double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
    a.check_same_dim(b);
    const double* pa = a.data();
    const double* pb = b.data();
    std::size_t nn = static_cast<std::size_t>(a.dim()) * a.dim();
    double s = 0.0;
    for (std::size_t t = 0; t < nn; ++t) s += pa[t] * pb[t];
    return s;
}

double frobenius_norm(const SymMatrix& a) {
    return std::sqrt(frobenius_inner(a, a));
}

namespace {

double offdiag_frob(const double* a, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double v = a[static_cast<std::size_t>(i) * n + j];
            s += 2.0 * v * v;
        }
    return std::sqrt(s);
}

} // namespace

EigDecomp eig_sym(const SymMatrix& input) {
    const int n = input.dim();
    std::vector<double> a(input.data(), input.data() + static_cast<std::size_t>(n) * n);
    std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0;

    auto at = [&](std::vector<double>& m, int i, int j) -> double& {
        return m[static_cast<std::size_t>(i) * n + j];
    };

    double norm0 = 0.0;
    for (double x : a) norm0 += x * x;
    norm0 = std::sqrt(norm0);
    const double tol = 1e-12 * (norm0 > 0 ? norm0 : 1.0);
    const int max_sweeps = 100;

    double off = offdiag_frob(a.data(), n);
    int sweep = 0;
    while (off > tol) {
        if (sweep++ >= max_sweeps) throw EigFailure(off);
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = at(a, p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = at(a, p, p);
                double aqq = at(a, q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                double tau = s / (1.0 + c);

                at(a, p, p) = app - t * apq;
                at(a, q, q) = aqq + t * apq;
                at(a, p, q) = 0.0;
                at(a, q, p) = 0.0;
                for (int r = 0; r < n; ++r) {
                    if (r != p && r != q) {
                        double arp = at(a, r, p);
                        double arq = at(a, r, q);
                        at(a, r, p) = at(a, p, r) = arp - s * (arq + tau * arp);
                        at(a, r, q) = at(a, q, r) = arq + s * (arp - tau * arq);
                    }
                    double vrp = at(v, r, p);
                    double vrq = at(v, r, q);
                    at(v, r, p) = vrp - s * (vrq + tau * vrp);
                    at(v, r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        off = offdiag_frob(a.data(), n);
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
        return at(a, i, i) > at(a, j, j);
    });

    EigDecomp e;
    e.dim = n;
    e.values.resize(n);
    e.vectors.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        e.values[j] = at(a, order[j], order[j]);
        for (int i = 0; i < n; ++i)
            e.vectors[static_cast<std::size_t>(i) * n + j] = at(v, i, order[j]);
    }
    return e;
}

SymMatrix reconstruct(const EigDecomp& e) {
    const int n = e.dim;
    SymMatrix m(n);
    double* out = m.data();
    for (int k = 0; k < n; ++k) {
        double w = e.values[k];
        if (w == 0.0) continue;
        for (int i = 0; i < n; ++i) {
            double wi = w * e.vec(i, k);
            for (int j = 0; j < n; ++j)
                out[SymMatrix::idx(n, i, j)] += wi * e.vec(j, k);
        }
    }
    m.symmetrize();
    return m;
}

SymMatrix project_psd(const SymMatrix& a) {
    EigDecomp e = eig_sym(a);
    for (double& w : e.values) w = std::max(w, 0.0);
    return reconstruct(e);
}

} // namespace sparselift
