#ifndef STABCAP_ESTIMATION_HPP
#define STABCAP_ESTIMATION_HPP

#include <cstdint>
#include <functional>
#include <vector>

#include "stabcap/channels.hpp"
#include "stabcap/combinatorics.hpp"
#include "stabcap/models.hpp"
#include "stabcap/policies.hpp"

namespace stabcap {

struct ConditionedSet {
  bool empty = true;
  double lo = 0.0;
  double hi = 0.0;
  double midpoint = 0.0;
  double grid_cell = 0.0;  // resolution used; added to certified diameters

  double diameter() const { return empty ? 0.0 : hi - lo; }
};

// The set of initial states whose trajectory under (controls, noise) stays in
// [-b, b] for at least a (1 - r_star) fraction of t in [0;T-1], evaluated on a
// uniform grid and returned as the enclosing interval with its midpoint.
// `expansion_floor` is the caller's certified c with |f'| >= c > 1; the grid
// resolution must be finer than b * c^-T so no component is skipped. Empty
// sets are first-class results, not errors.
ConditionedSet conditioned_set(const SystemModel& scalar_model, const std::vector<double>& controls,
                               const std::vector<double>& noise, double b, double r_star, int horizon,
                               double grid_resolution, double expansion_floor);

struct BinPipelineResult {
  std::vector<Interval> b_bins;  // kept bins (fully inside K), sorted by left endpoint
  int dropped = 0;               // bins not fully inside K
  double rho = 0.0;              // common bin measure 2 * radius
  int group_size = 1;            // L
  int n1 = 0, n2 = 0, n3 = 0;    // #B, #C (disjoint), #E groups = floor(n2/L) + 1

  std::vector<int> c_indices;                  // into b_bins
  std::vector<std::vector<Interval>> d_sets;   // C_k plus its leftover; pairwise disjoint
  std::vector<std::vector<Interval>> e_groups; // L consecutive D's; the last may be empty

  double m_mt = 0.0;     // Lebesgue measure of M_T = union of B bins
  double m_mtbar = 0.0;  // Lebesgue measure of Mbar_T
  std::vector<double> e_measures;
  std::vector<double> group_masses;  // P(i) = pi0(E_i)
  double pi0_mt_lo = 0.0, pi0_mt_hi = 0.0;  // p_min/p_max brackets on pi0(M_T)
};

// The B -> C -> D -> E construction turning estimator centers into disjoint,
// grouped message cells. pi0 masses are bracketed through p_min/p_max; exact
// group masses use `pi0_mass` (mass of a closed interval), defaulting to the
// uniform law on the support.
BinPipelineResult bin_pipeline(const std::vector<double>& centers, double radius, int group_size, Interval support,
                               double p_min, double p_max,
                               const std::function<double(double, double)>& pi0_mass = {});

// Coupling disagreement probability against the uniform law on n points:
// beta = 1 - sum_i min(P(i), 1/n). Sub-probability P is allowed.
double coupling_tv(const std::vector<double>& p, int n);

struct FeasibilityResult {
  double value = 0.0;
  bool contradiction = false;  // value < 1: the auxiliary code beats the strong converse
};

// The closing error bound of the noisy-channel argument:
// 1 - (1/2)(p_min/p_max)(r*-a)/r* + (1/(2L))(p_max/p_min)^2 + 2(p_max/p_min) a/(r*-a).
FeasibilityResult step5_feasibility(double p_min, double p_max, double r_star, double alpha, int group_size);

struct TailDensity {
  enum class Family { gaussian, laplace, uniform };
  Family family = Family::gaussian;
  double mu = 0.0;
  double sigma = 1.0;  // gaussian stddev
  double scale = 1.0;  // laplace scale
  double lo = -1.0;    // uniform support
  double hi = 1.0;

  static TailDensity gaussian(double mu, double sigma);
  static TailDensity laplace(double mu, double scale);
  static TailDensity uniform(double lo, double hi);
};

struct TailRatioPoint {
  double epsilon = 0.0;
  double tail_mass = 0.0;
  double density_floor = 0.0;  // essential infimum of the density on K_eps
  double ratio = 0.0;
  Interval k_eps;
};

// Tail-to-floor ratios over an epsilon grid: K_eps is the symmetric-quantile
// interval of mass 1 - eps (the full support for compactly supported
// densities, whose ratio is identically 0).
std::vector<TailRatioPoint> tail_ratio(const TailDensity& density, const std::vector<double>& eps_grid);

struct EstimationHorizonStats {
  int horizon = 0;
  double exceed_frequency = 0.0;  // |x0 - x0_hat| > b c^-((1-3r*)T), empty sets included
  int empty_sets = 0;
  int distinct_controls = 0;
  double control_rate = 0.0;  // (1/T) log2 #distinct realized control sequences
  double mean_diameter = 0.0; // over nonempty conditioned sets
};

struct EstimationResult {
  std::vector<EstimationHorizonStats> per_horizon;
  double b = 0.0;
  double r_star = 0.0;
  double expansion_floor = 0.0;
  int trials = 0;
  // Exceedance is computed per noise realization (each trial conditions on its
  // own w); the realization-averaged frequency is what per_horizon reports.
  bool per_realization = true;
};

// Closed-loop runs of the zoom policy over the channel; per trial the realized
// control sequence and noise realization feed a conditioned-set midpoint
// estimate of x0, and the exceedance frequency at scale b c^-((1-3r*)T) is
// reported together with the realized control rate.
EstimationResult estimation_experiment(const SystemModel& scalar_model, const ChannelModel& channel,
                                       const ZoomPolicyConfig& policy, double b, double r_star,
                                       const std::vector<int>& horizons, int trials, double expansion_floor,
                                       std::uint64_t seed);

}  // namespace stabcap

#endif
