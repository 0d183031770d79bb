#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

namespace eigenlab::linalg {

/// Symmetric dense matrix with finite entries.
class DenseSymMatrix {
public:
    /// Throws InputError unless `m` is square, finite and exactly symmetric.
    explicit DenseSymMatrix(Eigen::MatrixXd m);

    std::size_t n() const noexcept { return static_cast<std::size_t>(m_.rows()); }
    const Eigen::MatrixXd& entries() const noexcept { return m_; }

private:
    Eigen::MatrixXd m_;
};

/// One undirected weighted edge; used to assemble operators.
struct Edge {
    std::size_t i;
    std::size_t j;
    double w;
};

/// Averaging-convention Laplacian L = D^-1 W - I built from a symmetric
/// nonnegative weight matrix W without self loops.
///
/// Row i of L averages f over the neighbours of i with weights w_ij / d_i and
/// subtracts f(i), so L1 = 0 and the spectrum lies in [-2, 0]. Rows of isolated
/// vertices (d_i = 0) are identically zero. The PSD form used elsewhere in the
/// literature is -L.
class SparseSymOperator {
public:
    SparseSymOperator() = default;

    /// Each unordered pair must appear at most once; i != j, w > 0.
    static SparseSymOperator from_edges(std::size_t n, std::vector<Edge> edges);

    std::size_t n() const noexcept { return degree_.size(); }
    /// Number of stored off-diagonal entries of W (both triangles).
    std::size_t nnz_offdiag() const noexcept { return col_.size(); }
    double degree(std::size_t i) const { return degree_[i]; }
    bool isolated(std::size_t i) const { return degree_[i] == 0.0; }
    std::size_t isolated_count() const noexcept;

    /// Neighbours and symmetric weights of row i (ascending column).
    std::size_t row_begin(std::size_t i) const { return row_ptr_[i]; }
    std::size_t row_end(std::size_t i) const { return row_ptr_[i + 1]; }
    std::size_t col(std::size_t p) const { return col_[p]; }
    double weight(std::size_t p) const { return w_[p]; }

    /// y = L x.
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    /// y = (D^-1/2 W D^-1/2 - I) x restricted to non-isolated vertices;
    /// isolated entries of y are zero.
    Eigen::VectorXd apply_symmetric(const Eigen::VectorXd& x) const;

    /// Dense copy of L (for small n and tests).
    Eigen::MatrixXd dense() const;
    /// Dense copy of the symmetric similarity transform.
    Eigen::MatrixXd dense_symmetric() const;

    /// Writes `n nnz convention=averaging` then `i j w` lines of L, row-major
    /// with ascending columns (diagonal included where nonzero).
    void write_coo(std::ostream& os) const;

private:
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_;
    std::vector<double> w_;
    std::vector<double> degree_;
};

/// Eigenpairs with per-pair residual norms ||M v - lambda v||_2.
struct Spectrum {
    std::vector<double> values;
    Eigen::MatrixXd vectors;  // n x k, unit Euclidean norm columns
    std::vector<double> residuals;

    std::size_t size() const noexcept { return values.size(); }
};

/// Full spectrum ascending by value with orthonormal eigenvectors.
/// Throws NumericError if the reconstruction misses 1e-10 relative accuracy.
Spectrum eigh_dense(const DenseSymMatrix& m, double reconstruction_tol = 1e-10);

struct EigsOptions {
    double tol = 1e-8;
    std::uint64_t seed = 0;
    std::size_t basis_size = 0;  // 0 picks max(2k + 40, 120), capped by n
    std::size_t max_matvecs = 0;  // 0 picks max(20000, 40 n)
};

/// The k eigenpairs of L closest to zero (algebraically largest), ordered by
/// ascending magnitude with ties kept in discovery order.
///
/// Works on the symmetric similarity transform with Krylov-Schur restarts and
/// full reorthogonalisation, then runs single-vector deflated passes until no
/// further eigenvalue above the k-th is found, which recovers repeated
/// eigenvalues. Returned vectors are D^-1/2-mapped back, unit-normalised and
/// sign-fixed so the first entry of largest magnitude is positive. They are
/// orthogonal in the degree-weighted inner product, and Euclidean-orthogonal
/// when the graph is regular. Isolated vertices carry zero entries.
///
/// Throws NumericError (with the achieved residuals) if the budget runs out.
Spectrum eigs_smallest_magnitude(const SparseSymOperator& op, std::size_t k, const EigsOptions& opts = {});

/// Full spectrum of L via a dense solve of the symmetric similarity transform,
/// ascending by value, vectors mapped back as in eigs_smallest_magnitude.
Spectrum eigh_operator(const SparseSymOperator& op);

struct PolyFit {
    std::vector<double> coeffs;  // highest degree first
    double residual = 0.0;        // ||V c - y||_2
};

/// Least-squares polynomial fit. Throws InputError on length mismatch or when
/// xs has fewer than degree + 1 distinct values.
PolyFit polyfit_ls(const std::vector<double>& xs, const std::vector<double>& ys, std::size_t degree);

/// Evaluates a highest-first coefficient list at x.
double polyval(const std::vector<double>& coeffs, double x);

/// Orthogonal R minimising ||A R - B||_F (polar factor of A^T B).
/// Throws InputError on shape mismatch or zero A, NumericError when A^T B is
/// rank deficient.
Eigen::MatrixXd orthogonal_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Fixes the sign of v so its first entry of (near) maximal magnitude is positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v);

}  // namespace eigenlab::linalg
