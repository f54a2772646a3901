#pragma once

#include "latmscale/rational.hpp"

namespace latms::exact {

/// Signed Stirling number of the first kind s(i,k); zero for k > i, s(0,0) = 1.
BigInt stirling_first(int i, int k);

/// Stirling number of the second kind S(k,j); zero for j > k, S(0,0) = 1.
BigInt stirling_second(int k, int j);

/// Value of the i-th Legendre polynomial at the origin; zero for odd i.
Rational legendre_at_zero(int i);

/// Lattice-change coefficient P_{i,j}(omega) = sum_{k=j}^{i} omega^k s(i,k) S(k,j).
/// Returns zero for j > i.
Rational lattice_coeff_P(int i, int j, const Rational& omega);

/// Inverse-lattice coefficient Q_{i,j}(omega) = P_{i,j}(1/omega). Throws on omega == 0.
Rational lattice_coeff_Q(int i, int j, const Rational& omega);

}  // namespace latms::exact
