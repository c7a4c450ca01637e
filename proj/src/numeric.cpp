#include "spikechain/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace spikechain {

void NeumaierSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

double neumaier_sum(std::span<const double> xs) {
  NeumaierSum acc;
  for (double x : xs) acc.add(x);
  return acc.value();
}

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) throw std::domain_error("hurwitz_zeta needs s > 1, a > 0");
  // Direct terms followed by Euler-Maclaurin with Bernoulli corrections.
  constexpr int kDirect = 24;
  NeumaierSum acc;
  for (int n = 0; n < kDirect; ++n) acc.add(std::pow(n + a, -s));
  const double x = a + kDirect;
  acc.add(std::pow(x, 1.0 - s) / (s - 1.0));
  acc.add(0.5 * std::pow(x, -s));
  static constexpr double kB2k[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                    5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
  double fact = 1.0;     // (2k)!
  double rising = s;     // s (s+1) ... (s+2k-2)
  double xpow = std::pow(x, -s - 1.0);
  for (int k = 1; k <= 7; ++k) {
    fact *= (2.0 * k - 1.0) * (2.0 * k);
    acc.add(kB2k[k - 1] / fact * rising * xpow);
    rising *= (s + 2.0 * k - 1.0) * (s + 2.0 * k);
    xpow /= x * x;
  }
  return acc.value();
}

Estimate proportion(std::uint64_t hits, std::uint64_t trials) {
  if (trials == 0) return {0.0, 0.0};
  const double p = static_cast<double>(hits) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))};
}

double chi_square_upper_quantile(double dof, double level) {
  boost::math::chi_squared dist(dof);
  return boost::math::quantile(boost::math::complement(dist, level));
}

double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace spikechain
