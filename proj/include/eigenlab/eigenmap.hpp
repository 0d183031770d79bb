#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "eigenlab/linalg.hpp"
#include "eigenlab/spaces.hpp"

namespace eigenlab::emap {

/// Columns phi_1..phi_D (1-based in the API, 0-based in `coords`), each scaled
/// to max-abs 1. `l2_maxabs[d]` is the max-abs entry of the unit-L2 vector, so
/// coords.col(d) * l2_maxabs[d] restores the unit-norm eigenvector.
struct Eigenmap {
    Eigen::MatrixXd coords;
    std::vector<double> eigenvalues;
    std::vector<double> l2_maxabs;
    std::size_t skipped_zero_modes = 0;
    std::vector<std::string> warnings;

    std::size_t size() const { return static_cast<std::size_t>(coords.rows()); }
    std::size_t dims() const { return static_cast<std::size_t>(coords.cols()); }
    Eigen::MatrixXd unit_l2() const;
};

struct EigenmapOptions {
    double tol = 1e-8;
    std::uint64_t seed = 0;
    /// When set, each column is signed so this row is positive, unless its
    /// magnitude is below 1e-3 of the column max (then the largest-magnitude
    /// rule applies).
    std::optional<std::size_t> anchor;
};

/// Eigenvectors of the D smallest-magnitude nonzero eigenvalues of op. Zero
/// modes (|lambda| < 1e-10) are skipped; more than one is reported as a
/// warning (disconnected components).
Eigenmap build_eigenmap(const linalg::SparseSymOperator& op, std::size_t dims, const EigenmapOptions& opts = {});

/// Row with the largest value of the first ambient coordinate.
std::size_t rightmost_point(const spaces::PointSet& pts);

/// Least-squares fit of column col_y against powers of column col_x (1-based).
linalg::PolyFit fit_polynomial_image(const Eigenmap& map, std::size_t col_x, std::size_t col_y, std::size_t degree);

struct Alignment {
    Eigen::MatrixXd aligned;                 // b with every group rotated onto a
    std::vector<Eigen::MatrixXd> transforms;  // one orthogonal matrix per group
    std::vector<double> angles;               // rotation angle for 2-column groups, in (-pi, pi]
    std::vector<bool> reflections;            // transform has determinant -1
    double rms_before = 0.0;
    double rms_after = 0.0;
};

/// Per-group Procrustes alignment of b's columns onto a's. Groups hold 1-based
/// column indices and must be disjoint. Columns outside every group are left
/// unchanged and excluded from the RMS values.
Alignment align_columns(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, const std::vector<std::vector<std::size_t>>& groups);

/// align_columns after checking that, in each group, matching eigenvalues agree
/// within 5% relative.
Alignment align_eigenmaps(const Eigenmap& a, const Eigenmap& b, const std::vector<std::vector<std::size_t>>& groups);

/// CSV: point_index, x1..x_dim, phi_1..phi_D, lambda_1..lambda_D (eigenvalues
/// repeated on every row), 17 significant digits.
void write_csv(std::ostream& os, const Eigenmap& map, const spaces::PointSet& pts);

struct EigenmapTable {
    Eigenmap map;
    spaces::PointSet points;
};
EigenmapTable read_csv(std::istream& is);

}  // namespace eigenlab::emap
