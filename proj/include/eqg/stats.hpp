#pragma once

namespace eqg {

/// P(Z >= z) for standard normal Z.
double normal_sf(double z);

/// Two-sided normal tail, P(|Z| >= |z|).
double normal_sf_two_sided(double z);

/// Upper regularized incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// P(X >= x) for chi-square with k degrees of freedom.
double chi_square_sf(double x, int k);

}  // namespace eqg
