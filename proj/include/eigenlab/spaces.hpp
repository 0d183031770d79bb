#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace eigenlab::spaces {

/// One-dimensional sampling density on the real line.
struct Density {
    enum class Kind { Gaussian, Exponential };
    Kind kind = Kind::Gaussian;
    double mu = 0.0;
    double sigma = 1.0;
    double lambda = 1.0;

    static Density gaussian(double mu, double sigma);
    static Density exponential(double lambda);

    double pdf(double x) const;
    double dpdf(double x) const;
    /// Inverse CDF; u must lie in (0, 1).
    double quantile(double u) const;
    std::string describe() const;
};

enum class SpaceKind { Interval, Square, Torus, Sphere, Line, Gasket };

/// Model space. The interval is [-1, 1], the square [-1, 1]^2, the torus has
/// major radius R and tube radius r embedded in R^3, the sphere is the unit
/// sphere in R^3, the line carries a density, and the gasket is the
/// Sierpinski gasket with vertices (0,0), (1,0), (1/2, sqrt(3)/2).
struct Space {
    SpaceKind kind = SpaceKind::Interval;
    double major_radius = 1.0;
    double minor_radius = 0.4;
    Density density{};
    int address_length = 15;

    static Space interval() { return {}; }
    static Space square();
    static Space torus(double major, double minor);
    static Space sphere();
    static Space line(Density g);
    static Space gasket(int address_length = 15);

    /// Accepts interval, square, torus, sphere, line, sg.
    static Space parse(std::string_view name);
    std::string name() const;
    int ambient_dim() const;
    double diameter() const;
    /// Throws InputError when parameters break the invariants.
    void validate() const;
};

/// Sampled points stored row-major with `dim` coordinates per point.
struct PointSet {
    int dim = 1;
    std::vector<double> coords;
    std::vector<std::string> addresses;  // gasket words over {1,2,3}, or empty
    std::uint64_t seed = 0;
    std::string distribution;

    std::size_t size() const { return coords.size() / static_cast<std::size_t>(dim); }
    std::span<const double> point(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    double at(std::size_t i, int c) const { return coords[i * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)]; }
    bool has_addresses() const { return !addresses.empty(); }

    /// CSV with header x[,y[,z]][,address] and 17 significant digits.
    void write_csv(std::ostream& os) const;
    static PointSet read_csv(std::istream& is);
};

PointSet sample_uniform(const Space& space, std::size_t n, std::uint64_t seed);

/// x_j = -1 + 2(j-1)/(n-1), j = 1..n.
PointSet sample_grid(std::size_t n);

PointSet sample_density_1d(const Density& g, std::size_t n, std::uint64_t seed);

/// Gasket vertices p1, p2, p3.
const std::array<std::array<double, 2>, 3>& gasket_vertices();

/// F_w(c) for the centroid c of the outer triangle, F_w = F_{w1} o ... o F_{wm}.
std::array<double, 2> sg_point_of_address(std::string_view word);

/// Cellular semimetric: 2^-m for the largest m at which the length-m prefix
/// cells share a point. Both words must have equal length M <= 60; the value
/// for coinciding or touching full-length cells is 2^-M.
double d_cell(std::string_view wx, std::string_view wy);

/// Same-cell variant: 2^-m for the largest m with equal length-m prefixes.
double d_same_cell(std::string_view wx, std::string_view wy);

/// Whether the cells F_u and F_v (|u| = |v|) share a point.
bool cells_touch(std::string_view u, std::string_view v);

struct Cell {
    std::size_t id = 0;
    double measure = 0.0;
    double diameter = 0.0;
    std::vector<double> representative;
    std::vector<double> lo, hi;  // bounding box for interval and square cells
    std::string address;        // gasket cells
};

struct Equipartition {
    SpaceKind kind = SpaceKind::Interval;
    int level = 0;
    std::vector<Cell> cells;

    /// Index of the cell containing the point (interval/square half-open
    /// except at the upper boundary; gasket via the given address).
    std::size_t locate(std::span<const double> x) const;
};

/// Level-m equipartition of the interval (2^m dyadic halves), the square
/// (4^m subsquares) or the gasket (3^m cells).
Equipartition equipartition(const Space& space, int m);

}  // namespace eigenlab::spaces
