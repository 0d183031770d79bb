#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eigenlab/kernel.hpp"
#include "eigenlab/linalg.hpp"
#include "eigenlab/spaces.hpp"

namespace eigenlab::lap {

using Func1 = std::function<double(double)>;
using FuncN = std::function<double(std::span<const double>)>;

struct AveragingConfig {
    double eps = 0.1;
    /// Relative accuracy target for the quadrature.
    double rel_tol = 1e-10;
};

/// Mean of f(y) - f(x) over the ball of radius eps around x intersected with
/// the space. Supports the interval (truncated ball), the line and the
/// square; use sg_cell_averaging_lap for the gasket.
double averaging_lap(const spaces::Space& space, const FuncN& f, std::span<const double> x, const AveragingConfig& cfg);
double averaging_lap(const spaces::Space& space, const Func1& f, double x, const AveragingConfig& cfg);

/// Kernel-weighted mean of f(y) - f(x) with weights k(|y - x| / eps) restricted
/// to the space (interval, line or square).
double averaging_lap_kernel(const spaces::Space& space, const FuncN& f, std::span<const double> x,
                            const kern::Kernel& k, double eps);
double averaging_lap_kernel(const spaces::Space& space, const Func1& f, double x, const kern::Kernel& k, double eps);

/// int_{x-eps}^{x+eps} f g / int g - f(x).
double weighted_averaging_lap(const Func1& f, const Func1& g, double x, double eps);

enum class Metric { Euclidean, DCell };
Metric parse_metric(std::string_view name);

/// Uniform weights on pairs within eps (self excluded). With Metric::DCell the
/// point set must carry gasket addresses.
linalg::SparseSymOperator graph_lap_eps(const spaces::PointSet& pts, double eps, Metric metric = Metric::Euclidean);

/// Weights k(d / eps) on pairs inside the kernel support, self term excluded.
/// Weights below 1e-14 k(0) are dropped.
linalg::SparseSymOperator graph_lap_kernel(const spaces::PointSet& pts, const kern::Kernel& k, double eps);

struct EquipartitionGraph {
    linalg::SparseSymOperator op;
    spaces::Equipartition partition;
    double eps = 0.0;
    std::size_t min_cells = 0;         // requested cells per neighbourhood
    std::size_t fewest_neighbors = 0;  // smallest neighbourhood actually found
    double max_cell_diameter = 0.0;
};

/// One vertex per cell (its representative). Vertex rows average the cells
/// whose representatives lie within eps. With level < 0 the coarsest level at
/// which every neighbourhood holds at least min_cells cells is chosen.
EquipartitionGraph graph_lap_equipartition(const spaces::Space& space, double eps, std::size_t min_cells, int level = -1);

struct EquipartitionReport {
    double bound = 0.0;           // modulus(max cell diameter)
    double measured = 0.0;        // max over vertices of |L_N f - L_n f|
    double measured_ball = -1.0;  // max over vertices of |L_eps f - L_n f|, interval/square only
    std::size_t worst_vertex = 0;
};

/// Compares the graph operator with the averaging operator over the union of
/// each vertex's neighbour cells (cell integrals by quadrature).
EquipartitionReport equipartition_report(const EquipartitionGraph& g, const FuncN& f, const Func1& modulus);

/// Average of f over the union of level-m cells touching the level-m cell of
/// x_addr, minus f(F_{x_addr}(c)). Cell means use the 27 level-(m+3)
/// subcell representatives.
double sg_cell_averaging_lap(const FuncN& f, std::string_view x_addr, int m);
/// 5^m sg_cell_averaging_lap.
double sg_cell_averaging_lap_rescaled(const FuncN& f, std::string_view x_addr, int m);

/// Vertex graph of the level-m gasket approximation: corners of the 3^m cells,
/// with each cell contributing its three edges. Coordinates are row-major xy.
struct SgVertexGraph {
    linalg::SparseSymOperator op;
    std::vector<double> coords;
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> index;  // lattice point -> vertex
    int level = 0;
};
SgVertexGraph sg_vertex_graph(int m);

/// Piecewise-linear interpolation of vertex values of sg_vertex_graph(level)
/// at a gasket address of length >= level.
double sg_interpolate(const SgVertexGraph& g, std::span<const double> values, std::string_view addr);

struct KernelStatistic {
    double d_eps_n = 0.0;
    double d_eps = 0.0;
};

/// D_{eps,n} f(p) = (1/(n eps^{d+2})) sum_j K((p - X_j)/eps)(f(X_j) - f(p)) and
/// its expectation D_eps f(p) under the density g, for d = 1, 2, 3. K is used
/// radially.
KernelStatistic appendix_D(const spaces::PointSet& pts, const FuncN& f, std::span<const double> p, double eps,
                           const kern::Kernel& k, const FuncN& g);
double appendix_D_expectation(int d, const FuncN& f, std::span<const double> p, double eps, const kern::Kernel& k,
                              const FuncN& g);
double appendix_D_sum(const spaces::PointSet& pts, const FuncN& f, std::span<const double> p, double eps,
                      const kern::Kernel& k);

}  // namespace eigenlab::lap
