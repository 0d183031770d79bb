#include "eigenlab/kernel.hpp"

#include <cmath>
#include <numbers>

#include "eigenlab/error.hpp"
#include "eigenlab/quadrature.hpp"

namespace eigenlab::kern {

Kernel::Kernel(Profile p) : profile_(p) {
    support_ = p == Profile::Gaussian ? 6.0 : 1.0;
    scale_ = 1.0;
    auto integrate = [&](auto g) { return quad::simpson(g, -support_, support_, 1e-14, 64).value; };
    const double raw_mass = integrate([&](double t) { return raw(t); });
    scale_ = 1.0 / raw_mass;
    m0_ = integrate([&](double t) { return (*this)(t); });
    m2_ = integrate([&](double t) { return (*this)(t) * t * t; });
    k2_ = integrate([&](double t) { return std::pow((*this)(t), 2); });
    k2t2_ = integrate([&](double t) { return std::pow((*this)(t), 2) * t * t; });
    k2t4_ = integrate([&](double t) { return std::pow((*this)(t), 2) * std::pow(t, 4); });
    integrability_ = integrate([&](double t) {
        const double k = (*this)(t);
        return (std::pow(t, 4) + t * t) * (std::pow(k, 4) + k * k);
    });
    if (!std::isfinite(integrability_)) throw NumericError("Kernel: integrability integral diverges");
    // Radial normalisation c_d = 1 / (|S^{d-1}| int_0^R k(r) r^{d-1} dr).
    const double sphere_area[4] = {0.0, 2.0, 2.0 * std::numbers::pi, 4.0 * std::numbers::pi};
    for (int d = 1; d <= 3; ++d) {
        const double radial_mass =
            sphere_area[d] * quad::simpson([&](double r) { return raw(r) * std::pow(r, d - 1); }, 0.0, support_, 1e-14, 64).value;
        radial_c_[d] = 1.0 / radial_mass;
    }
}

double Kernel::raw(double t) const {
    const double a = std::abs(t);
    if (a > support_) return 0.0;
    switch (profile_) {
        case Profile::Indicator: return 0.5;
        case Profile::Gaussian: return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
        case Profile::Epanechnikov: return 0.75 * (1.0 - t * t);
        case Profile::Triangle: return 1.0 - a;
    }
    return 0.0;
}

double Kernel::operator()(double t) const { return scale_ * raw(t); }

double Kernel::radial(double r, int d) const {
    if (d < 1 || d > 3) throw InputError("Kernel::radial: dimension must be 1, 2 or 3");
    return radial_c_[d] * raw(r);
}

Kernel Kernel::indicator() { return Kernel(Profile::Indicator); }
Kernel Kernel::gaussian() { return Kernel(Profile::Gaussian); }
Kernel Kernel::epanechnikov() { return Kernel(Profile::Epanechnikov); }
Kernel Kernel::triangle() { return Kernel(Profile::Triangle); }

Kernel Kernel::parse(std::string_view name) {
    if (name == "indicator") return indicator();
    if (name == "gaussian") return gaussian();
    if (name == "epanechnikov") return epanechnikov();
    if (name == "triangle") return triangle();
    throw InputError("unknown kernel '" + std::string(name) + "' (expected indicator, gaussian, epanechnikov or triangle)");
}

std::string Kernel::name() const {
    switch (profile_) {
        case Profile::Indicator: return "indicator";
        case Profile::Gaussian: return "gaussian";
        case Profile::Epanechnikov: return "epanechnikov";
        case Profile::Triangle: return "triangle";
    }
    return "?";
}

std::string Kernel::tail_class() const { return compact() ? "compact" : "gaussian-truncated-6"; }

}  // namespace eigenlab::kern
