#pragma once

// Wigner 3j symbols from the Racah formula, in long double. Test-only.

#include <cmath>
#include <cstdlib>

namespace oracle {

inline long double factorial(int n) {
  long double f = 1.0L;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// (j1 j2 j3; m1 m2 m3) for integer angular momenta.
inline double wigner_3j(int j1, int j2, int j3, int m1, int m2, int m3) {
  if (m1 + m2 + m3 != 0) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;
  if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
  const long double delta = factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) * factorial(-j1 + j2 + j3) /
                            factorial(j1 + j2 + j3 + 1);
  const long double pre = std::sqrt(delta * factorial(j1 + m1) * factorial(j1 - m1) * factorial(j2 + m2) *
                                    factorial(j2 - m2) * factorial(j3 + m3) * factorial(j3 - m3));
  long double sum = 0.0L;
  for (int k = 0; k <= j1 + j2 + j3; ++k) {
    const int d[5] = {j1 + j2 - j3 - k, j1 - m1 - k, j2 + m2 - k, j3 - j2 + m1 + k, j3 - j1 - m2 + k};
    bool ok = true;
    for (int v : d) ok = ok && v >= 0;
    if (!ok) continue;
    long double term = 1.0L / (factorial(k) * factorial(d[0]) * factorial(d[1]) * factorial(d[2]) *
                               factorial(d[3]) * factorial(d[4]));
    sum += (k % 2 ? -term : term);
  }
  const int phase = j1 - j2 - m3;
  return static_cast<double>((phase % 2 ? -1.0L : 1.0L) * pre * sum);
}

/// |<J' m-q; 1 q | J m>|^2 through the 3j symbol.
inline double clebsch_squared(int J, int m, int q, int Jp) {
  const double w = wigner_3j(Jp, 1, J, m - q, q, -m);
  return (2.0 * J + 1.0) * w * w;
}

}  // namespace oracle
