#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace fpr {

/// One refinement level of a convergence study. `order` is log2 of the error
/// ratio against the previous level of the same sweep (0 on the first level).
struct ConvergenceRow {
  std::string sweep;  // "space" or "time"
  int level = 0;
  double h = 0.0;
  double k = 0.0;
  double error = 0.0;
  double order = 0.0;
};

struct ConvergenceTable {
  std::string problem;
  std::vector<ConvergenceRow> rows;

  /// Least-squares slope of log(error) against log(step) over a sweep.
  double fitted_order(std::string_view sweep) const;
};

/// Known ids: cn1d-mms, adi2d-heat, adi2d-mms. Throws InvalidParameter otherwise.
ConvergenceTable convergence_study(std::string_view problem);
std::vector<std::string> convergence_problems();

/// Header `sweep,level,h,k,error,order`.
void write_convergence_csv(const ConvergenceTable& table, std::ostream& out);

/// Max difference between the second-order ADI solve of the heat equation and
/// the product of two 1D Crank-Nicolson solves on separable data.
double adi_vs_cn_separable_difference(int M = 40, int N = 40);

}  // namespace fpr
