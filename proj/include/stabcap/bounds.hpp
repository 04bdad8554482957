#ifndef STABCAP_BOUNDS_HPP
#define STABCAP_BOUNDS_HPP

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stabcap/ams.hpp"
#include "stabcap/models.hpp"

namespace stabcap {

// A computed capacity lower bound with provenance. Values are clamped at 0 for
// reporting (a negative volume rate never certifies a positive requirement);
// the raw value is retained.
struct BoundReport {
  double bound_bits = 0.0;
  double raw_bits = 0.0;
  std::string theorem;  // "volume" | "moment" | "linear" | "cocycle"
  bool certified = false;
  std::string notes;
};

struct GridMinResult {
  double min_bits = 0.0;      // grid minimum of log2|det Df| over the region
  VectorXd argmin;
  bool certified = false;     // true when a modulus-of-continuity bound was supplied
  double certified_bits = 0.0;  // min_bits minus the continuity slack
  double cell_diagonal = 0.0;
};

// Minimum of log2|det Df(x)| over a uniform grid on the box (endpoints
// included). A caller-supplied Lipschitz bound on the profile certifies the
// result down to min - L * cell_diagonal / 2.
GridMinResult inf_logdet(const SystemModel& model, const Box& region, int points_per_axis,
                         std::optional<double> lipschitz = std::nullopt);

// C >= Q(B) * inf_B log2|det Df|.
BoundReport volume_bound(double q_of_b, double inf_logdet_bits);

struct MomentBoundResult {
  double kappa_star = 0.0;
  double bound_bits = 0.0;
  bool hit_cap = false;  // maximizer landed on the search cap kappa_max
};

// Maximizes (1 - M/kappa^p) * profile(kappa) over kappa^p >= M up to
// kappa_max, where profile(kappa) = min_{|x| <= kappa} log2|det Df(x)|.
// Log-spaced grid scan refined by golden-section around the best cell.
MomentBoundResult moment_bound(const std::function<double(double)>& profile, double moment, double p,
                               double kappa_max, int grid_points = 256);

// C >= sum over eigenvalues of max{0, multiplicity * log2|lambda|}.
BoundReport linear_bound(const MatrixXd& a);

struct CocycleRateResult {
  std::vector<double> a_n;        // a_n = min over label sequences of log2|det block of Phi(n,.)|
  std::vector<double> per_step;   // a_n / n
  double certified_rate = 0.0;    // max_n a_n / n, a lower bound for the limit by superadditivity
  bool complete = true;           // false when the search budget was exhausted
  long long nodes_visited = 0;
};

// Certified rate of the additive cocycle n -> log2|det Phi(n,.)| restricted to
// a constant invariant coordinate block, by exhaustive search over label
// sequences with additive branch-and-bound pruning.
CocycleRateResult cocycle_rate_lower(const SemilinearModel& model, const std::vector<int>& block, int n_max,
                                     long long node_budget = 50000000);

// Sum of the strictly positive certified block rates; zero when none.
BoundReport selgrade_sum(const std::vector<double>& block_rates);

// Reported integral estimate of log2|det Df| under an empirical measure; the
// corresponding integral bound is conjectural, so this is never certified.
double logdet_integral_estimate(const SystemModel& model, const TrajectoryEnsemble& ensemble, int horizon);

}  // namespace stabcap

#endif
