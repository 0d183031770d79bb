#include "eigenlab/rng.hpp"

#include <boost/math/distributions/normal.hpp>

namespace eigenlab {

double standard_normal(CounterRng& rng) {
    static const boost::math::normal_distribution<double> unit;
    return boost::math::quantile(unit, rng.uniform_open());
}

}  // namespace eigenlab
