#ifndef STABCAP_AMS_HPP
#define STABCAP_AMS_HPP

#include <span>
#include <vector>

#include "stabcap/models.hpp"

namespace stabcap {

// Axis-aligned closed box in R^N.
struct Box {
  VectorXd lo;
  VectorXd hi;

  static Box interval(double a, double b);

  bool contains(const VectorXd& x) const {
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    }
    return true;
  }
};

// Deterministic pairwise tree sum; reduction order is independent of any
// chunking a parallel caller might apply.
double pairwise_sum(std::span<const double> values);

// Empirical Cesaro measure: mean over trajectories of
// (1/T) #{ t in [0;T-1] : x_t in B }.
double cesaro_measure(const TrajectoryEnsemble& ensemble, const Box& set, int horizon);

struct MomentEstimate {
  double value = 0.0;
  bool diverged = false;  // non-finite states observed
};

// Cesaro-time and ensemble average of |x_t|^p over t in [0;T-1].
MomentEstimate empirical_moment(const TrajectoryEnsemble& ensemble, double p, int horizon);

// Half-open time window [begin, end).
struct TimeWindow {
  int begin = 0;
  int end = 0;
};

struct ConvergenceReport {
  bool converged = false;
  std::vector<double> window_values;
  double max_gap = 0.0;
  double epsilon = 0.0;
};

// Finite-horizon surrogate for the Cesaro limit: windowed averages of the
// occupation frequency of B must agree pairwise within epsilon. Requires at
// least two pairwise disjoint windows inside the ensemble horizon.
ConvergenceReport ams_convergence_diagnostic(const TrajectoryEnsemble& ensemble, const Box& set,
                                             const std::vector<TimeWindow>& windows, double epsilon = 0.05);

}  // namespace stabcap

#endif
