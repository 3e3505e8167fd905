#pragma once

#include <vector>

namespace gridres {

/// Dense LU with partial pivoting for the small systems that show up in
/// power-flow work (tens of rows). Factor once, solve many right-hand sides.
class DenseLu {
 public:
  /// a is row-major n*n; copied and factored in place. Returns false when
  /// the matrix is numerically singular.
  bool factor(const double* a, int n);

  /// Solves A x = b. Requires a successful factor().
  void solve(const double* b, double* x) const;

  bool ok() const { return ok_; }
  int size() const { return n_; }

 private:
  int n_ = 0;
  bool ok_ = false;
  std::vector<double> lu_;
  std::vector<int> piv_;
};

}  // namespace gridres
