#include "aiqm/bessel.hpp"

#include <cmath>
#include <numbers>

namespace aiqm {
namespace {

double j0_series(double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-18 * std::abs(sum)) break;
  }
  return sum;
}

// Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1}, normalised by J0 + 2 sum J_{2k} = 1.
double j0_miller(double x) {
  int start = static_cast<int>(x + 10.0 * std::cbrt(x) + 30.0);
  if (start % 2 != 0) ++start;

  double next = 0.0;  // J_{k+1}
  double cur = 1e-30; // J_k
  double even_sum = 0.0;
  for (int k = start; k > 0; --k) {
    const double prev = (2.0 * k / x) * cur - next;
    next = cur;
    cur = prev;
    if (std::abs(cur) > 1e250) {
      cur *= 1e-250;
      next *= 1e-250;
      even_sum *= 1e-250;
    }
    if ((k - 1) % 2 == 0 && k - 1 > 0) even_sum += cur;
  }
  return cur / (cur + 2.0 * even_sum);
}

double j0_asymptotic(double x) {
  // a_k = prod_{j<=k} (-(2j-1)^2) / (k! 8^k); P collects even k, Q odd k.
  double p = 0.0;
  double q = 0.0;
  double a = 1.0;
  for (int k = 0; k < 100; ++k) {
    const double term = a / std::pow(x, k);
    if ((k % 4) == 0) p += term;
    else if ((k % 4) == 1) q += term;
    else if ((k % 4) == 2) p -= term;
    else q -= term;
    const double odd = 2.0 * (k + 1) - 1.0;
    const double next = a * (-(odd * odd)) / ((k + 1) * 8.0);
    if (std::abs(next / std::pow(x, k + 1)) < 1e-18 || std::abs(next) / std::pow(x, k + 1) > std::abs(term)) break;
    a = next;
  }
  const double phase = x - 0.25 * std::numbers::pi;
  return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(phase) - q * std::sin(phase));
}

}  // namespace

double bessel_j0(double x) {
  x = std::abs(x);
  if (x <= 4.0) return j0_series(x);
  if (x <= 60.0) return j0_miller(x);
  return j0_asymptotic(x);
}

}  // namespace aiqm
