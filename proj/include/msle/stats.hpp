#pragma once

#include <cstddef>
#include <vector>

namespace msle::stats {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);       // unbiased
double std_error(const std::vector<double>& v);      // sqrt(var/n)

struct KsResult {
  double statistic = 0.0;   // sup |F1 - F2|
  double p_value = 1.0;     // asymptotic, Stephens-corrected
  std::size_t n1 = 0, n2 = 0;
};

// two-sample Kolmogorov-Smirnov; inputs need not be sorted
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// P(K > lambda) for the Kolmogorov distribution
double kolmogorov_q(double lambda);

} // namespace msle::stats
