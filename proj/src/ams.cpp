#include "stabcap/ams.hpp"

#include <algorithm>
#include <cmath>

namespace stabcap {

Box Box::interval(double a, double b) {
  Box box;
  box.lo = VectorXd::Constant(1, a);
  box.hi = VectorXd::Constant(1, b);
  return box;
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

namespace {

void check_ensemble(const TrajectoryEnsemble& ensemble, int horizon) {
  if (ensemble.trajectories.empty()) throw InputError("ams: ensemble is empty");
  if (horizon < 1) throw InputError("ams: horizon must be >= 1");
  if (horizon > ensemble.horizon()) {
    throw InputError("ams: requested horizon " + std::to_string(horizon) + " exceeds ensemble horizon " +
                     std::to_string(ensemble.horizon()));
  }
}

void check_box(const TrajectoryEnsemble& ensemble, const Box& set) {
  const auto dim = ensemble.trajectories.front().states.front().size();
  if (set.lo.size() != dim || set.hi.size() != dim) {
    throw InputError("ams: box dimension does not match state dimension");
  }
}

}  // namespace

double cesaro_measure(const TrajectoryEnsemble& ensemble, const Box& set, int horizon) {
  check_ensemble(ensemble, horizon);
  check_box(ensemble, set);
  std::vector<double> per_trajectory;
  per_trajectory.reserve(ensemble.trajectories.size());
  for (const Trajectory& traj : ensemble.trajectories) {
    int hits = 0;
    for (int t = 0; t < horizon; ++t) hits += set.contains(traj.states[static_cast<std::size_t>(t)]) ? 1 : 0;
    per_trajectory.push_back(static_cast<double>(hits) / horizon);
  }
  return pairwise_sum(per_trajectory) / static_cast<double>(per_trajectory.size());
}

MomentEstimate empirical_moment(const TrajectoryEnsemble& ensemble, double p, int horizon) {
  if (!(p > 0.0)) throw InputError("empirical_moment: exponent must be positive");
  check_ensemble(ensemble, horizon);
  MomentEstimate est;
  std::vector<double> per_trajectory;
  per_trajectory.reserve(ensemble.trajectories.size());
  for (const Trajectory& traj : ensemble.trajectories) {
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      const double norm = traj.states[static_cast<std::size_t>(t)].norm();
      const double term = std::pow(norm, p);
      if (!std::isfinite(term)) est.diverged = true;
      terms.push_back(term);
    }
    per_trajectory.push_back(pairwise_sum(terms) / horizon);
  }
  est.value = pairwise_sum(per_trajectory) / static_cast<double>(per_trajectory.size());
  if (!std::isfinite(est.value)) est.diverged = true;
  return est;
}

ConvergenceReport ams_convergence_diagnostic(const TrajectoryEnsemble& ensemble, const Box& set,
                                             const std::vector<TimeWindow>& windows, double epsilon) {
  if (windows.size() < 2) throw InputError("ams_convergence_diagnostic: needs at least two windows");
  if (ensemble.trajectories.empty()) throw InputError("ams: ensemble is empty");
  check_box(ensemble, set);
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const TimeWindow& w = windows[i];
    if (w.begin < 0 || w.end <= w.begin) throw InputError("ams_convergence_diagnostic: malformed window");
    if (w.end > ensemble.horizon()) {
      throw InputError("ams_convergence_diagnostic: window [" + std::to_string(w.begin) + "," +
                       std::to_string(w.end) + ") exceeds ensemble horizon " + std::to_string(ensemble.horizon()));
    }
    for (std::size_t j = i + 1; j < windows.size(); ++j) {
      if (w.begin < windows[j].end && windows[j].begin < w.end) {
        throw InputError("ams_convergence_diagnostic: windows must be pairwise disjoint");
      }
    }
  }

  ConvergenceReport report;
  report.epsilon = epsilon;
  for (const TimeWindow& w : windows) {
    std::vector<double> per_trajectory;
    per_trajectory.reserve(ensemble.trajectories.size());
    for (const Trajectory& traj : ensemble.trajectories) {
      int hits = 0;
      for (int t = w.begin; t < w.end; ++t) hits += set.contains(traj.states[static_cast<std::size_t>(t)]) ? 1 : 0;
      per_trajectory.push_back(static_cast<double>(hits) / (w.end - w.begin));
    }
    report.window_values.push_back(pairwise_sum(per_trajectory) / static_cast<double>(per_trajectory.size()));
  }
  for (std::size_t i = 0; i < report.window_values.size(); ++i) {
    for (std::size_t j = i + 1; j < report.window_values.size(); ++j) {
      report.max_gap = std::max(report.max_gap, std::abs(report.window_values[i] - report.window_values[j]));
    }
  }
  report.converged = report.max_gap <= epsilon;
  return report;
}

}  // namespace stabcap
