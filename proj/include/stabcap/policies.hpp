#ifndef STABCAP_POLICIES_HPP
#define STABCAP_POLICIES_HPP

#include <cstdint>
#include <vector>

#include "stabcap/channels.hpp"
#include "stabcap/models.hpp"

namespace stabcap {

// Adaptive uniform quantizer over [center - range, center + range] that
// contracts after a successful quantization and expands on overflow.
struct ZoomPolicyConfig {
  int rate_bits = 3;      // R >= 0; each step uses one symbol out of 2^(R*N)
  double gain = 2.0;      // per-axis gain estimate a (|a| of the linear part)
  double range0 = 1.0;    // initial half-range Delta_0 > 0
  double center0 = 0.0;   // initial center c_0
  double zoom_out = 2.0;  // g_out > 1
  double zoom_in = 1.0;   // g_in in (0, 1]
  double safety = 1.2;    // kappa_safety multiplier on the contracted range
};

struct QuantizerState {
  double center = 0.0;
  double range = 1.0;  // Delta > 0 always
};

// Paired encoder/decoder state. With (noiseless) feedback of the received
// symbol the two sides evolve identically; both are kept and updated from the
// received symbol so the mirror invariant is checkable.
struct PolicyState {
  ZoomPolicyConfig config;
  std::vector<QuantizerState> encoder;  // one quantizer per state axis
  std::vector<QuantizerState> decoder;

  int dimension() const { return static_cast<int>(encoder.size()); }
  // Channel symbols consumed per step: 2^(rate_bits * dimension).
  long long symbols_per_step() const;
};

PolicyState make_zoom_policy(const ZoomPolicyConfig& config, int dimension);

struct PolicyStepResult {
  VectorXd control;
  int sent = -1;      // -1 when rate_bits == 0 (channel unused)
  int received = -1;
  PolicyState next;
};

// One encode/transmit/decode/update cycle at state x. The encoder quantizes x
// against the mirrored decoder state; the control and the state update are
// driven by the received symbol.
PolicyStepResult zoom_policy_step(const PolicyState& policy, const VectorXd& x, const ChannelModel& channel,
                                  Rng& rng);

struct SymbolRecord {
  int t = 0;
  int sent = -1;
  int received = -1;
  VectorXd control;
};

struct ClosedLoopRun {
  Trajectory trajectory;
  std::vector<SymbolRecord> log;
};

struct ClosedLoopEnsemble {
  std::vector<ClosedLoopRun> runs;
  std::uint64_t master_seed = 0;

  TrajectoryEnsemble as_trajectory_ensemble() const;
  // Number of distinct realized control sequences across the runs; feeds the
  // control-rate computation (1/T) log2 #distinct.
  int distinct_control_sequences() const;
  double control_rate() const;
};

// n closed-loop trajectories of the zoom policy over the channel, with
// per-run substreams of `seed`. Requires an additive model whose dimension
// matches the policy and a channel with equal input/output alphabets of at
// least 2^(rate_bits * dimension) symbols.
ClosedLoopEnsemble closed_loop_run(const SystemModel& model, const PolicyState& policy, const ChannelModel& channel,
                                   int horizon, int count, std::uint64_t seed);

// Controls reconstructed from the received-symbol log alone (decoder replay);
// equality with the logged controls witnesses causality of the policy.
std::vector<VectorXd> replay_decoder(const PolicyState& initial, const std::vector<int>& received_symbols);

}  // namespace stabcap

#endif
