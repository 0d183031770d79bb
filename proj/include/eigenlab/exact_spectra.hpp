#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace eigenlab::exact {

/// Self-adjoint boundary conditions for -d^2/dx^2 on [-1, 1].
/// Robin means f'(-1) = a f(-1) and f'(1) = b f(1); infinite a or b stands
/// for a Dirichlet condition at that end.
struct BoundaryCondition {
    enum class Tag { Neumann, Dirichlet, Periodic, Robin };
    Tag tag = Tag::Neumann;
    double a = 0.0;
    double b = 0.0;

    static BoundaryCondition neumann() { return {}; }
    static BoundaryCondition dirichlet() { return {Tag::Dirichlet, 0.0, 0.0}; }
    static BoundaryCondition periodic() { return {Tag::Periodic, 0.0, 0.0}; }
    static BoundaryCondition robin(double a, double b) { return {Tag::Robin, a, b}; }
};

/// phi(x) = A cos(omega x) + B sin(omega x), or A + B x when omega = 0,
/// scaled to unit L^2([-1, 1]) norm. lambda = omega^2 is the eigenvalue of
/// -d^2/dx^2.
struct EigenPair {
    int k = 0;
    double omega = 0.0;
    double lambda = 0.0;
    double A = 0.0;
    double B = 0.0;
    double l2_norm = 1.0;  // norm after scaling; the raw norm is not kept

    double value(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;
};

/// Neumann: k = 0..kmax. Dirichlet: k = 1..kmax. Periodic: the constant and,
/// for k = 1..kmax, the pair sin(k pi x), cos(k pi x) (both with index k).
/// Robin: the first kmax modes, with k counting from 0.
std::vector<EigenPair> interval_eigenpairs(const BoundaryCondition& bc, int kmax);

/// Nonnegative frequencies omega (eigenvalue omega^2) of the Robin problem,
/// ascending. A root at omega = 0 is included when b - a + 2ab = 0. Modes
/// with negative eigenvalue are not reported. Every positive root satisfies
/// |exp(4 i omega) - (a - i omega)(b + i omega) / ((a + i omega)(b - i omega))|
/// <= 1e-10; a NumericError naming the bracket is raised otherwise.
std::vector<double> robin_eigenvalues(double a, double b, int count);

/// The characteristic function whose positive zeros are the Robin frequencies:
/// sin(2w)(w^2 ca cb + sa sb) + w cos(2w)(ca sb - sa cb) with a = tan(alpha),
/// b = tan(beta).
double robin_characteristic(double a, double b, double omega);

double chebyshev_T(int j, double x);
double chebyshev_U(int j, double x);

/// Sign s_k with phi_k = s_k T_k(phi_1) for the max-abs-normalised Neumann
/// modes phi_1 = sin(pi x / 2), phi_k = cos or sin(k pi x / 2).
int chebyshev_sign(int k);

struct GridMode {
    int k = 0;
    double lambda = 0.0;
    Eigen::VectorXd vector;  // sampled mode, not normalised
};

/// Eigenpairs of the averaging Laplacian on the n-point uniform grid of
/// [-1, 1] with nearest-neighbour edges, k = 0..n-1.
std::vector<GridMode> grid_graph_eigenpairs(std::size_t n);

/// |lambda_exact - (n-1)^2/4 lambda_grid| / (k^4 / (n-1)^2) with
/// lambda_exact = -(k pi / 2)^2 / 2, the k-th eigenvalue of (1/2) d^2/dx^2
/// with Neumann conditions, in the same nonpositive convention as the grid.
double grid_gap_ratio(std::size_t n, int k);

struct ProductMode {
    int k1 = 0, k2 = 0;
    double lambda = 0.0;
    EigenPair fx, fy;
    double value(double x, double y) const { return fx.value(x) * fy.value(y); }
};

enum class ProductSpace { NeumannSquare, FlatTorus };

/// Tensor-product modes with indices up to kmax in each factor, sorted by
/// eigenvalue (stable in enumeration order).
std::vector<ProductMode> product_eigenpairs(ProductSpace space, int kmax);

/// Groups a sorted eigenvalue list into eigenspaces: consecutive values within
/// `rel` relative distance share a group. Returns group sizes in order.
std::vector<std::size_t> group_multiplicities(const std::vector<double>& values, double rel = 1e-9);

}  // namespace eigenlab::exact
