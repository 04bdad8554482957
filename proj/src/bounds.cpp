#include "stabcap/bounds.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

namespace stabcap {

namespace {

constexpr double kSuperadditivitySlack = 1e-9;

std::string format_double(double v) {
  std::ostringstream out;
  out << v;
  return out.str();
}

}  // namespace

GridMinResult inf_logdet(const SystemModel& model, const Box& region, int points_per_axis,
                         std::optional<double> lipschitz) {
  if (!model.drift.has_logdet()) throw CapabilityError("inf_logdet: model carries no Jacobian profile");
  const int dim = model.dimension;
  if (region.lo.size() != dim || region.hi.size() != dim) {
    throw InputError("inf_logdet: region dimension does not match model");
  }
  for (int d = 0; d < dim; ++d) {
    if (!std::isfinite(region.lo[d]) || !std::isfinite(region.hi[d]) || !(region.lo[d] <= region.hi[d])) {
      throw InputError("inf_logdet: region must be a bounded box");
    }
  }
  if (points_per_axis < 2) throw InputError("inf_logdet: need at least 2 grid points per axis");
  const double total_points = std::pow(static_cast<double>(points_per_axis), dim);
  if (total_points > 2e8) {
    throw CapabilityError("inf_logdet: grid of " + format_double(total_points) +
                          " points exceeds the evaluation budget; pass a smaller per-axis resolution");
  }

  GridMinResult result;
  result.min_bits = std::numeric_limits<double>::infinity();
  VectorXd x(dim);
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  double cell_sq = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double h = (region.hi[d] - region.lo[d]) / (points_per_axis - 1);
    cell_sq += h * h;
  }
  result.cell_diagonal = std::sqrt(cell_sq);

  const long long n_total = static_cast<long long>(total_points);
  for (long long flat = 0; flat < n_total; ++flat) {
    long long rest = flat;
    for (int d = 0; d < dim; ++d) {
      const int i = static_cast<int>(rest % points_per_axis);
      rest /= points_per_axis;
      x[d] = region.lo[d] + (region.hi[d] - region.lo[d]) * i / (points_per_axis - 1);
    }
    const double v = model.drift.logdet2(x);
    if (v < result.min_bits) {
      result.min_bits = v;
      result.argmin = x;
    }
  }
  if (lipschitz.has_value()) {
    result.certified = true;
    result.certified_bits = result.min_bits - *lipschitz * result.cell_diagonal / 2.0;
  } else {
    result.certified_bits = result.min_bits;
  }
  return result;
}

BoundReport volume_bound(double q_of_b, double inf_logdet_bits) {
  if (q_of_b < 0.0 || q_of_b > 1.0) throw InputError("volume_bound: Q(B) must lie in [0,1]");
  BoundReport report;
  report.theorem = "volume";
  report.raw_bits = q_of_b * inf_logdet_bits;
  report.bound_bits = std::max(0.0, report.raw_bits);
  if (report.raw_bits < 0.0) report.notes = "raw value " + format_double(report.raw_bits) + " clamped to 0";
  return report;
}

MomentBoundResult moment_bound(const std::function<double(double)>& profile, double moment, double p,
                               double kappa_max, int grid_points) {
  if (!(moment > 0.0)) throw InputError("moment_bound: moment must be positive");
  if (!(p > 0.0)) throw InputError("moment_bound: exponent must be positive");
  if (!profile) throw CapabilityError("moment_bound: profile is not evaluable");
  const double kappa_lo = std::pow(moment, 1.0 / p);
  if (!(kappa_max > kappa_lo)) {
    throw InputError("moment_bound: kappa_max must exceed M^(1/p) = " + format_double(kappa_lo));
  }
  if (grid_points < 3) throw InputError("moment_bound: need at least 3 grid points");

  auto objective = [&](double kappa) { return (1.0 - moment / std::pow(kappa, p)) * profile(kappa); };

  // Log-spaced scan over [kappa_lo, kappa_max].
  const double log_lo = std::log(kappa_lo);
  const double log_hi = std::log(kappa_max);
  int best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> kappas(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    kappas[static_cast<std::size_t>(i)] = std::exp(log_lo + (log_hi - log_lo) * i / (grid_points - 1));
    const double v = objective(kappas[static_cast<std::size_t>(i)]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }

  // Golden-section refinement on the bracket around the best grid cell.
  double a = kappas[static_cast<std::size_t>(std::max(0, best - 1))];
  double b = kappas[static_cast<std::size_t>(std::min(grid_points - 1, best + 1))];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int iter = 0; iter < 240 && (b - a) > 1e-12 * std::max(1.0, b); ++iter) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  MomentBoundResult result;
  result.kappa_star = 0.5 * (a + b);
  result.bound_bits = objective(result.kappa_star);
  if (best_value > result.bound_bits) {
    result.kappa_star = kappas[static_cast<std::size_t>(best)];
    result.bound_bits = best_value;
  }
  result.hit_cap = best == grid_points - 1;
  if (result.hit_cap) {
    result.kappa_star = kappa_max;
    result.bound_bits = objective(kappa_max);
  }
  return result;
}

BoundReport linear_bound(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("linear_bound: matrix must be square");
  Eigen::EigenSolver<MatrixXd> solver(a, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) throw NumericError("linear_bound: eigenvalue solver failed");
  BoundReport report;
  report.theorem = "linear";
  report.certified = true;
  double sum = 0.0;
  std::ostringstream spectrum;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double mod = std::abs(solver.eigenvalues()[i]);
    if (mod <= 0.0) throw NumericError("linear_bound: zero-modulus eigenvalue");
    sum += std::max(0.0, std::log2(mod));
    spectrum << (i ? "," : "|lambda|=") << mod;
  }
  report.raw_bits = sum;
  report.bound_bits = sum;
  report.notes = spectrum.str();
  return report;
}

namespace {

void check_block_invariance(const SemilinearModel& model, const std::vector<int>& block) {
  if (model.matrices.empty()) throw InputError("cocycle_rate_lower: empty matrix family");
  const Eigen::Index n = model.matrices.front().rows();
  if (block.empty()) throw InputError("cocycle_rate_lower: empty block");
  std::vector<bool> in_block(static_cast<std::size_t>(n), false);
  for (int i : block) {
    if (i < 0 || i >= n) throw InputError("cocycle_rate_lower: block index out of range");
    if (in_block[static_cast<std::size_t>(i)]) throw InputError("cocycle_rate_lower: duplicate block index");
    in_block[static_cast<std::size_t>(i)] = true;
  }
  for (std::size_t u = 0; u < model.matrices.size(); ++u) {
    const MatrixXd& m = model.matrices[u];
    if (m.rows() != n || m.cols() != n) throw InputError("cocycle_rate_lower: matrix sizes differ");
    for (Eigen::Index i = 0; i < n; ++i) {
      if (in_block[static_cast<std::size_t>(i)]) continue;
      for (int j : block) {
        if (std::abs(m(i, j)) > 1e-12) {
          throw InputError("cocycle_rate_lower: coordinate block is not invariant under matrix " +
                           std::to_string(u));
        }
      }
    }
  }
}

MatrixXd block_of(const MatrixXd& m, const std::vector<int>& block) {
  MatrixXd sub(block.size(), block.size());
  for (std::size_t r = 0; r < block.size(); ++r) {
    for (std::size_t c = 0; c < block.size(); ++c) {
      sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          m(block[r], block[c]);
    }
  }
  return sub;
}

}  // namespace

CocycleRateResult cocycle_rate_lower(const SemilinearModel& model, const std::vector<int>& block, int n_max,
                                     long long node_budget) {
  check_block_invariance(model, block);
  if (n_max < 1) throw InputError("cocycle_rate_lower: n_max must be >= 1");

  // Invariance of the block makes the restricted cocycle additive per step:
  // log2|det Phi(n,.)_block| = sum_t log2|det A(u_t)_block|.
  std::vector<double> step_values;
  step_values.reserve(model.matrices.size());
  for (const MatrixXd& m : model.matrices) {
    const double det = block_of(m, block).determinant();
    if (std::abs(det) < 1e-300) throw NumericError("cocycle_rate_lower: singular block restriction");
    step_values.push_back(std::log2(std::abs(det)));
  }
  std::sort(step_values.begin(), step_values.end());
  const double min_step = step_values.front();

  CocycleRateResult result;
  for (int n = 1; n <= n_max; ++n) {
    // Depth-first over label sequences; prune a prefix once its partial sum
    // plus (remaining steps) * min_step cannot beat the incumbent. Exact
    // because step contributions are additive.
    double incumbent = std::numeric_limits<double>::infinity();
    struct Frame {
      int depth;
      double partial;
    };
    std::vector<Frame> stack;
    stack.push_back(Frame{0, 0.0});
    while (!stack.empty()) {
      const Frame frame = stack.back();
      stack.pop_back();
      if (++result.nodes_visited > node_budget) {
        result.complete = false;
        break;
      }
      if (frame.depth == n) {
        incumbent = std::min(incumbent, frame.partial);
        continue;
      }
      const int remaining = n - frame.depth;
      for (auto it = step_values.rbegin(); it != step_values.rend(); ++it) {
        const double partial = frame.partial + *it;
        if (partial + (remaining - 1) * min_step >= incumbent) continue;
        stack.push_back(Frame{frame.depth + 1, partial});
      }
    }
    if (!result.complete) break;
    result.a_n.push_back(incumbent);
    result.per_step.push_back(incumbent / n);
  }
  if (result.a_n.empty()) {
    throw CapabilityError("cocycle_rate_lower: search budget exhausted before completing n=1");
  }

  // Fekete check: the restricted cocycle must be superadditive on everything
  // computed; a violation indicates a broken block restriction.
  for (std::size_t i = 1; i <= result.a_n.size(); ++i) {
    for (std::size_t j = 1; i + j <= result.a_n.size(); ++j) {
      if (result.a_n[i + j - 1] < result.a_n[i - 1] + result.a_n[j - 1] - kSuperadditivitySlack) {
        throw NumericError("cocycle_rate_lower: superadditivity violated at n=" + std::to_string(i) +
                           ", m=" + std::to_string(j));
      }
    }
  }
  result.certified_rate = *std::max_element(result.per_step.begin(), result.per_step.end());
  return result;
}

BoundReport selgrade_sum(const std::vector<double>& block_rates) {
  BoundReport report;
  report.theorem = "cocycle";
  report.certified = true;
  double sum = 0.0;
  int used = 0;
  for (double r : block_rates) {
    if (r > 0.0) {
      sum += r;
      ++used;
    }
  }
  report.raw_bits = sum;
  report.bound_bits = sum;
  report.notes = std::to_string(used) + " of " + std::to_string(block_rates.size()) + " block rates positive";
  return report;
}

double logdet_integral_estimate(const SystemModel& model, const TrajectoryEnsemble& ensemble, int horizon) {
  if (!model.drift.has_logdet()) throw CapabilityError("logdet_integral_estimate: model carries no Jacobian profile");
  if (ensemble.trajectories.empty()) throw InputError("logdet_integral_estimate: empty ensemble");
  if (horizon < 1 || horizon > ensemble.horizon()) throw InputError("logdet_integral_estimate: bad horizon");
  std::vector<double> per_traj;
  per_traj.reserve(ensemble.trajectories.size());
  for (const Trajectory& traj : ensemble.trajectories) {
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) vals.push_back(model.drift.logdet2(traj.states[static_cast<std::size_t>(t)]));
    per_traj.push_back(pairwise_sum(vals) / horizon);
  }
  return pairwise_sum(per_traj) / static_cast<double>(per_traj.size());
}

}  // namespace stabcap
