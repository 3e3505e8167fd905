#include "gridres/linalg.hpp"

#include <cmath>
#include <cstring>

namespace gridres {

bool DenseLu::factor(const double* a, int n) {
  n_ = n;
  ok_ = false;
  lu_.assign(a, a + static_cast<std::size_t>(n) * n);
  piv_.resize(n);

  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(lu_[static_cast<std::size_t>(col) * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(lu_[static_cast<std::size_t>(r) * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < 1e-12) return false;
    piv_[col] = pivot;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(lu_[static_cast<std::size_t>(col) * n + c],
                  lu_[static_cast<std::size_t>(pivot) * n + c]);
      }
    }
    const double inv = 1.0 / lu_[static_cast<std::size_t>(col) * n + col];
    for (int r = col + 1; r < n; ++r) {
      double& m = lu_[static_cast<std::size_t>(r) * n + col];
      m *= inv;
      if (m != 0.0) {
        const double factor = m;
        const double* src = &lu_[static_cast<std::size_t>(col) * n];
        double* dst = &lu_[static_cast<std::size_t>(r) * n];
        for (int c = col + 1; c < n; ++c) dst[c] -= factor * src[c];
      }
    }
  }
  ok_ = true;
  return true;
}

void DenseLu::solve(const double* b, double* x) const {
  const int n = n_;
  if (x != b) std::memcpy(x, b, sizeof(double) * n);
  for (int col = 0; col < n; ++col) {
    if (piv_[col] != col) std::swap(x[col], x[piv_[col]]);
    for (int r = col + 1; r < n; ++r) {
      x[r] -= lu_[static_cast<std::size_t>(r) * n + col] * x[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    const double* row = &lu_[static_cast<std::size_t>(r) * n];
    double s = x[r];
    for (int c = r + 1; c < n; ++c) s -= row[c] * x[c];
    x[r] = s / row[r];
  }
}

}  // namespace gridres
