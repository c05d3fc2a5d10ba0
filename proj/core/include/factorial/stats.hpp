#ifndef FACTORIAL_STATS_HPP
#define FACTORIAL_STATS_HPP

namespace factorial {

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile, accurate to well below 1e-9 absolute: a rational
// approximation followed by one Halley refinement step. Throws
// std::invalid_argument outside (0, 1).
double normal_quantile(double p);

}  // namespace factorial

#endif
