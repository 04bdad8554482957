#ifndef STABCAP_ENTROPY_HPP
#define STABCAP_ENTROPY_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "stabcap/ams.hpp"
#include "stabcap/models.hpp"
#include "stabcap/policies.hpp"

namespace stabcap {

// Exact minimal spanning count for the noise-free scalar affine system
// x' = a x + u with pi0 uniform on B = [-b_half, b_half] and rho = r = 0: one
// control sequence keeps an initial subinterval of length 2 b_half |a|^-(T-1),
// so the minimal cover of B has ceil(|a|^(T-1)) elements.
long long spanning_count_oracle_affine(double gain, double b_half, int horizon);

enum class CandidateSource {
  policy,   // one candidate per sample: the zoom policy's realized open-loop controls
  lattice,  // constant control sequences on a uniform grid of 2^lattice_bits levels
};

struct SpanningParams {
  Box target;                  // B
  int horizon = 1;             // T
  double rho = 0.0;            // fraction of samples allowed to stay uncovered
  double r = 0.0;              // fraction of times allowed outside B
  int samples = 1;             // n
  CandidateSource source = CandidateSource::policy;
  ZoomPolicyConfig policy;     // used by the policy source
  int lattice_bits = 3;        // 2^bits constant levels
  double lattice_span = 2.0;   // levels span [-span, span]
};

struct SpanningSet {
  int horizon = 0;
  Box target;
  double rho = 0.0;
  double r = 0.0;
  std::vector<std::vector<ControlInput>> candidates;
  std::vector<int> selected;                 // candidate indices, greedy order
  std::vector<int> cover_of_sample;          // per sample: covering selected candidate, or -1
  std::vector<double> best_freq_per_sample;  // best in-B frequency over selected candidates
  double covered_fraction = 0.0;
};

struct SpanningEstimate {
  long long count = 0;
  bool feasible = true;                 // false: target coverage unreachable with these candidates
  double max_achievable_coverage = 1.0; // fraction coverable by the full candidate set
  SpanningSet set;
};

// Greedy set cover for the minimal number of open-loop control sequences that
// keep a (1-rho) fraction of sampled (x0, noise) pairs inside B for at least a
// (1-r) fraction of the horizon. Ties break on the lower candidate index.
SpanningEstimate greedy_spanning_estimate(const SystemModel& model, const SpanningParams& params,
                                          std::uint64_t seed);

// Replays every selected sequence against every sample and checks the
// spanning-set invariants hold.
bool validate_spanning(const SystemModel& model, const SpanningEstimate& estimate, std::uint64_t seed);

struct RateFit {
  double slope_bits_per_step = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
  int points = 0;
};

// Least-squares slope of log2(count) against T. Needs >= 3 horizons.
RateFit entropy_rate_fit(const std::vector<std::pair<int, long long>>& counts);

}  // namespace stabcap

#endif
