#include "mi/combiner.hpp"
#include "mi/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

namespace mi {

double student_t_quantile(double upper_tail, double df) {
  if (!(upper_tail > 0.0 && upper_tail < 1.0)) {
    throw ValidationError("student_t_quantile: tail probability must lie in (0, 1)");
  }
  if (!(df > 0.0)) throw ValidationError("student_t_quantile: df must be > 0");
  if (upper_tail == 0.5) return 0.0;
  try {
    const boost::math::students_t dist(df);
    return boost::math::quantile(boost::math::complement(dist, upper_tail));
  } catch (const std::exception& ex) {
    throw NumericalError(std::string("student_t_quantile: ") + ex.what());
  }
}

}  // namespace mi
