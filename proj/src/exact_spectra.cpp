#include "eigenlab/exact_spectra.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "eigenlab/error.hpp"

namespace eigenlab::exact {

namespace {

constexpr double pi = std::numbers::pi;

struct Angle {
    double c, s;
};

// (cos, sin) of atan(a), with a = +-inf mapped to the Dirichlet end (0, 1).
Angle angle_of(double a) {
    if (std::isinf(a)) return {0.0, 1.0};
    const double r = std::hypot(1.0, a);
    return {1.0 / r, a / r};
}

EigenPair make_pair(int k, double omega, double a_coef, double b_coef) {
    EigenPair p;
    p.k = k;
    p.omega = omega;
    p.lambda = omega * omega;
    double n2;
    if (omega == 0.0) {
        n2 = 2.0 * a_coef * a_coef + 2.0 / 3.0 * b_coef * b_coef;
    } else {
        const double q = std::sin(2.0 * omega) / (2.0 * omega);
        n2 = a_coef * a_coef * (1.0 + q) + b_coef * b_coef * (1.0 - q);
    }
    const double nrm = std::sqrt(n2);
    p.A = a_coef / nrm;
    p.B = b_coef / nrm;
    p.l2_norm = 1.0;
    return p;
}

}  // namespace

double EigenPair::value(double x) const {
    if (omega == 0.0) return A + B * x;
    return A * std::cos(omega * x) + B * std::sin(omega * x);
}

double EigenPair::derivative(double x) const {
    if (omega == 0.0) return B;
    return omega * (-A * std::sin(omega * x) + B * std::cos(omega * x));
}

double EigenPair::second_derivative(double x) const { return -lambda * value(x); }

double robin_characteristic(double a, double b, double omega) {
    const Angle al = angle_of(a), be = angle_of(b);
    return std::sin(2.0 * omega) * (omega * omega * al.c * be.c + al.s * be.s) +
           omega * std::cos(2.0 * omega) * (al.c * be.s - al.s * be.c);
}

std::vector<double> robin_eigenvalues(double a, double b, int count) {
    if (count < 1) throw InputError("robin_eigenvalues: count must be at least 1");
    if (std::isnan(a) || std::isnan(b)) throw InputError("robin_eigenvalues: parameters must not be NaN");
    const Angle al = angle_of(a), be = angle_of(b);
    std::vector<double> roots;

    // omega = 0: f = A + Bx solves the problem iff this determinant vanishes.
    const double det0 = be.s * al.c - al.s * be.c + 2.0 * al.s * be.s;
    if (std::abs(det0) <= 1e-14) roots.push_back(0.0);

    // G = F / omega removes the trivial zero at the origin.
    auto g = [&](double w) {
        return std::sin(2.0 * w) / w * (w * w * al.c * be.c + al.s * be.s) + std::cos(2.0 * w) * (al.c * be.s - al.s * be.c);
    };
    auto residual = [&](double w) {
        using C = std::complex<double>;
        const C za(al.s, w * al.c), zb(be.s, w * be.c);
        const C rhs = std::conj(za) * zb / (za * std::conj(zb));
        return std::abs(std::exp(C(0.0, 4.0 * w)) - rhs);
    };

    const double step = pi / 400.0;
    double lo = 1e-6;
    double glo = g(lo);
    while (static_cast<int>(roots.size()) < count) {
        const double hi = lo + step;
        const double ghi = g(hi);
        double root = -1.0;
        if (glo == 0.0) {
            root = lo;
        } else if ((glo < 0.0) != (ghi < 0.0)) {
            if (ghi == 0.0) {
                root = hi;
            } else {
                std::uintmax_t iters = 200;
                auto r = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(52), iters);
                root = 0.5 * (r.first + r.second);
            }
        }
        if (root > 0.0) {
            if (residual(root) > 1e-10) {
                std::ostringstream msg;
                msg << "robin_eigenvalues: root in bracket (" << lo << ", " << hi << ") fails the exponential-form residual";
                throw NumericError(msg.str(), {residual(root)});
            }
            if (roots.empty() || root > roots.back() + 1e-12) roots.push_back(root);
        }
        lo = hi;
        glo = ghi;
    }
    roots.resize(static_cast<std::size_t>(count));
    return roots;
}

std::vector<EigenPair> interval_eigenpairs(const BoundaryCondition& bc, int kmax) {
    if (kmax < 1) throw InputError("interval_eigenpairs: kmax must be at least 1");
    std::vector<EigenPair> out;
    switch (bc.tag) {
        case BoundaryCondition::Tag::Neumann:
            for (int k = 0; k <= kmax; ++k) {
                const double w = k * pi / 2.0;
                out.push_back(k % 2 == 0 ? make_pair(k, w, 1.0, 0.0) : make_pair(k, w, 0.0, 1.0));
            }
            break;
        case BoundaryCondition::Tag::Dirichlet:
            for (int k = 1; k <= kmax; ++k) {
                const double w = k * pi / 2.0;
                out.push_back(k % 2 == 0 ? make_pair(k, w, 0.0, 1.0) : make_pair(k, w, 1.0, 0.0));
            }
            break;
        case BoundaryCondition::Tag::Periodic:
            out.push_back(make_pair(0, 0.0, 1.0, 0.0));
            for (int k = 1; k <= kmax; ++k) {
                out.push_back(make_pair(k, k * pi, 0.0, 1.0));
                out.push_back(make_pair(k, k * pi, 1.0, 0.0));
            }
            break;
        case BoundaryCondition::Tag::Robin: {
            const Angle al = angle_of(bc.a);
            const auto ws = robin_eigenvalues(bc.a, bc.b, kmax);
            for (int k = 0; k < kmax; ++k) {
                const double w = ws[static_cast<std::size_t>(k)];
                double ac, bc_;
                if (w == 0.0) {
                    // -sa A + (ca + sa) B = 0
                    ac = al.c + al.s;
                    bc_ = al.s;
                    if (std::abs(ac) + std::abs(bc_) < 1e-14) {
                        const Angle be = angle_of(bc.b);
                        ac = be.c - be.s;
                        bc_ = be.s;
                    }
                } else {
                    // null vector of the x = -1 row: A (w ca s - sa c) + B (w ca c + sa s) = 0
                    const double c = std::cos(w), s = std::sin(w);
                    const double r1 = w * al.c * s - al.s * c;
                    const double r2 = w * al.c * c + al.s * s;
                    ac = r2;
                    bc_ = -r1;
                }
                out.push_back(make_pair(k, w, ac, bc_));
            }
            break;
        }
    }
    return out;
}

double chebyshev_T(int j, double x) {
    if (j < 0) throw InputError("chebyshev_T: degree must be nonnegative");
    if (!(std::abs(x) <= 1.0 + 1e-12)) throw InputError("chebyshev_T: x must lie in [-1, 1]");
    if (j == 0) return 1.0;
    double t0 = 1.0, t1 = x;
    for (int i = 1; i < j; ++i) {
        const double t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    return t1;
}

double chebyshev_U(int j, double x) {
    if (j < 0) throw InputError("chebyshev_U: degree must be nonnegative");
    if (!(std::abs(x) <= 1.0 + 1e-12)) throw InputError("chebyshev_U: x must lie in [-1, 1]");
    if (j == 0) return 1.0;
    double u0 = 1.0, u1 = 2.0 * x;
    for (int i = 1; i < j; ++i) {
        const double u2 = 2.0 * x * u1 - u0;
        u0 = u1;
        u1 = u2;
    }
    return u1;
}

int chebyshev_sign(int k) { return (k / 2) % 2 == 0 ? 1 : -1; }

std::vector<GridMode> grid_graph_eigenpairs(std::size_t n) {
    if (n < 3) throw InputError("grid_graph_eigenpairs: n must be at least 3");
    std::vector<GridMode> out;
    const double nm1 = static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        GridMode g;
        g.k = static_cast<int>(k);
        g.lambda = std::cos(static_cast<double>(k) * pi / nm1) - 1.0;
        g.vector.resize(static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < n; ++j) {
            const double x = -1.0 + 2.0 * static_cast<double>(j) / nm1;
            const double t = static_cast<double>(k) * pi * x / 2.0;
            g.vector[static_cast<Eigen::Index>(j)] = k % 2 == 0 ? std::cos(t) : std::sin(t);
        }
        out.push_back(std::move(g));
    }
    return out;
}

double grid_gap_ratio(std::size_t n, int k) {
    if (n < 3 || k < 1) throw InputError("grid_gap_ratio: need n >= 3 and k >= 1");
    const double nm1 = static_cast<double>(n - 1);
    const double exact = -0.5 * std::pow(k * pi / 2.0, 2);
    const double grid = 0.25 * nm1 * nm1 * (std::cos(k * pi / nm1) - 1.0);
    return std::abs(exact - grid) / (std::pow(static_cast<double>(k), 4) / (nm1 * nm1));
}

std::vector<ProductMode> product_eigenpairs(ProductSpace space, int kmax) {
    if (kmax < 1) throw InputError("product_eigenpairs: kmax must be at least 1");
    const auto one_d = interval_eigenpairs(space == ProductSpace::NeumannSquare ? BoundaryCondition::neumann()
                                                                                : BoundaryCondition::periodic(),
                                           kmax);
    std::vector<ProductMode> out;
    for (const EigenPair& a : one_d) {
        for (const EigenPair& b : one_d) {
            ProductMode m;
            m.k1 = a.k;
            m.k2 = b.k;
            m.fx = a;
            m.fy = b;
            m.lambda = a.lambda + b.lambda;
            out.push_back(m);
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ProductMode& x, const ProductMode& y) { return x.lambda < y.lambda; });
    return out;
}

std::vector<std::size_t> group_multiplicities(const std::vector<double>& values, double rel) {
    std::vector<std::size_t> groups;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const bool join = i > 0 && std::abs(values[i] - values[i - 1]) <=
                                       rel * std::max({std::abs(values[i]), std::abs(values[i - 1]), 1e-300});
        if (join || (i > 0 && values[i] == values[i - 1])) {
            ++groups.back();
        } else {
            groups.push_back(1);
        }
    }
    return groups;
}

}  // namespace eigenlab::exact
