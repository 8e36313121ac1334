#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mshape/error.hpp"

namespace mshape {

/// Thomas algorithm for sub[j] x[j-1] + diag[j] x[j] + sup[j] x[j+1] = rhs[j].
/// sub[0] and sup[n-1] are ignored. The solution overwrites rhs. No pivoting:
/// callers pass diagonally dominant systems.
inline void solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                              std::span<const double> sup, std::span<double> rhs, std::vector<double>& scratch) {
  const std::size_t n = diag.size();
  if (n == 0 || sub.size() != n || sup.size() != n || rhs.size() != n)
    throw InvalidArgument("solve_tridiagonal: inconsistent sizes");
  scratch.resize(n);
  double pivot = diag[0];
  if (pivot == 0.0) throw InvalidArgument("solve_tridiagonal: zero pivot");
  scratch[0] = sup[0] / pivot;
  rhs[0] /= pivot;
  for (std::size_t j = 1; j < n; ++j) {
    pivot = diag[j] - sub[j] * scratch[j - 1];
    if (pivot == 0.0) throw InvalidArgument("solve_tridiagonal: zero pivot");
    scratch[j] = sup[j] / pivot;
    rhs[j] = (rhs[j] - sub[j] * rhs[j - 1]) / pivot;
  }
  for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= scratch[j] * rhs[j + 1];
}

inline std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                             std::span<const double> sup, std::vector<double> rhs) {
  std::vector<double> scratch;
  solve_tridiagonal(sub, diag, sup, rhs, scratch);
  return rhs;
}

}  // namespace mshape
