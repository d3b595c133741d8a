#ifndef SPARSELIFT_SYMMAT_HPP
#define SPARSELIFT_SYMMAT_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace sparselift {

// Dense symmetric matrix stored as a full square, row-major. Mutation goes
// through set()/at() which keep both triangles equal; hot loops may write the
// raw buffer and call symmetrize().
class SymMatrix {
public:
    SymMatrix() : dim_(0) {}
    explicit SymMatrix(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim) * dim, 0.0) {
        if (dim < 1) throw std::invalid_argument("SymMatrix: dim must be >= 1");
    }

    static SymMatrix identity(int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.a_[idx(m.dim_, i, i)] = 1.0;
        return m;
    }

    int dim() const { return dim_; }

    double operator()(int i, int j) const { return a_[idx(dim_, i, j)]; }

    void set(int i, int j, double v) {
        a_[idx(dim_, i, j)] = v;
        a_[idx(dim_, j, i)] = v;
    }

    void add(int i, int j, double v) {
        a_[idx(dim_, i, j)] += v;
        if (i != j) a_[idx(dim_, j, i)] += v;
    }

    double* data() { return a_.data(); }
    const double* data() const { return a_.data(); }

    void symmetrize() {
        for (int i = 0; i < dim_; ++i)
            for (int j = i + 1; j < dim_; ++j) {
                double v = 0.5 * (a_[idx(dim_, i, j)] + a_[idx(dim_, j, i)]);
                a_[idx(dim_, i, j)] = v;
                a_[idx(dim_, j, i)] = v;
            }
    }

    SymMatrix& operator+=(const SymMatrix& o) { axpy(1.0, o); return *this; }
    SymMatrix& operator-=(const SymMatrix& o) { axpy(-1.0, o); return *this; }
    SymMatrix& operator*=(double s) {
        for (double& v : a_) v *= s;
        return *this;
    }

    void axpy(double s, const SymMatrix& o) {
        check_same_dim(o);
        for (std::size_t t = 0; t < a_.size(); ++t) a_[t] += s * o.a_[t];
    }

    void check_same_dim(const SymMatrix& o) const {
        if (o.dim_ != dim_)
            throw std::invalid_argument("SymMatrix: dimension mismatch (" +
                                        std::to_string(dim_) + " vs " + std::to_string(o.dim_) + ")");
    }

    static std::size_t idx(int dim, int i, int j) {
        return static_cast<std::size_t>(i) * dim + j;
    }

private:
    int dim_;
    std::vector<double> a_;
};

inline SymMatrix operator+(SymMatrix a, const SymMatrix& b) { a += b; return a; }
inline SymMatrix operator-(SymMatrix a, const SymMatrix& b) { a -= b; return a; }
inline SymMatrix operator*(double s, SymMatrix a) { a *= s; return a; }

// Frobenius inner product sum_ij a_ij b_ij.
double frobenius_inner(const SymMatrix& a, const SymMatrix& b);
double frobenius_norm(const SymMatrix& a);

// Full spectral decomposition. Eigenvalues sorted descending, eigenvectors
// column-orthonormal in the same order (vector j lives at vectors[i*dim+j]).
struct EigDecomp {
    int dim = 0;
    std::vector<double> values;
    std::vector<double> vectors;

    double vec(int i, int j) const { return vectors[static_cast<std::size_t>(i) * dim + j]; }
};

struct EigFailure : std::runtime_error {
    double offdiag_residual;
    explicit EigFailure(double resid)
        : std::runtime_error("eig_sym: Jacobi sweeps did not converge, off-diagonal residual " +
                             std::to_string(resid)),
          offdiag_residual(resid) {}
};

// Cyclic Jacobi. Off-diagonal Frobenius tolerance 1e-12 (relative), 100 sweep cap.
EigDecomp eig_sym(const SymMatrix& a);

// Reconstruction V diag(w) V^T (test helper and rank-one assembly).
SymMatrix reconstruct(const EigDecomp& e);

// Frobenius-nearest PSD matrix: clip negative eigenvalues at exactly 0.
SymMatrix project_psd(const SymMatrix& a);

} // namespace sparselift

#endif
