#pragma once

namespace aiqm {

/// Zeroth-order Bessel function of the first kind, accurate to ~1e-15 absolute.
///
/// Power series for |x| <= 4, Miller backward recurrence (normalised with
/// J0 + 2*sum J_2k = 1) up to |x| = 60, Hankel asymptotic expansion beyond.
double bessel_j0(double x);

}  // namespace aiqm
