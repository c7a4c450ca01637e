#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spikechain {

// Compensated (Neumaier) summation.
class NeumaierSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double neumaier_sum(std::span<const double> xs);

// ζ(s, a) = Σ_{n≥0} (n + a)^{-s}, s > 1, a > 0.
double hurwitz_zeta(double s, double a);

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Binomial proportion with its standard error.
Estimate proportion(std::uint64_t hits, std::uint64_t trials);

// Upper quantile of the chi-square law: P(X > q) = level.
double chi_square_upper_quantile(double dof, double level);

double median(std::vector<double> xs);

}  // namespace spikechain
