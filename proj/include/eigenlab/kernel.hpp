#pragma once

#include <string>
#include <string_view>

namespace eigenlab::kern {

/// Even, nonnegative kernel profile k on the real line normalised to unit
/// mass, used radially in higher dimension. Moments are computed once by
/// adaptive quadrature.
class Kernel {
public:
    enum class Profile { Indicator, Gaussian, Epanechnikov, Triangle };

    /// k = (1/2) 1_[-1,1].
    static Kernel indicator();
    /// Standard normal density truncated at |t| = 6 (mass defect about 2e-9).
    static Kernel gaussian();
    static Kernel epanechnikov();
    static Kernel triangle();
    /// Accepts indicator, gaussian, epanechnikov, triangle.
    static Kernel parse(std::string_view name);

    double operator()(double t) const;
    /// Radial kernel on R^d with unit mass: c_d k(|t|).
    double radial(double r, int d) const;

    Profile profile() const { return profile_; }
    std::string name() const;
    /// Support radius; evaluation returns zero beyond it.
    double support() const { return support_; }
    bool compact() const { return profile_ != Profile::Gaussian; }
    /// Tail class string: "compact" or "gaussian-truncated-6".
    std::string tail_class() const;

    double mass() const { return m0_; }
    double second_moment() const { return m2_; }  // int k t^2
    double k2_t2() const { return k2t2_; }         // int k^2 t^2
    double k2_t4() const { return k2t4_; }         // int k^2 t^4
    double k2() const { return k2_; }              // int k^2
    /// int (t^4 + t^2)(k^4 + k^2), finite for every profile here.
    double integrability() const { return integrability_; }

private:
    explicit Kernel(Profile p);
    double raw(double t) const;

    Profile profile_;
    double support_ = 1.0;
    double scale_ = 1.0;
    double m0_ = 0, m2_ = 0, k2t2_ = 0, k2t4_ = 0, k2_ = 0, integrability_ = 0;
    double radial_c_[4] = {0, 0, 0, 0};
};

}  // namespace eigenlab::kern
