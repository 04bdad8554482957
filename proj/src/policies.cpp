#include "stabcap/policies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stabcap {

namespace {

// Quantizer cells per axis: 2^R - 1 plus one escape symbol.
int cells(int rate_bits) { return (1 << rate_bits) - 1; }

int encode_axis(const QuantizerState& q, const ZoomPolicyConfig& cfg, double x) {
  const int m = cells(cfg.rate_bits);
  if (std::abs(x - q.center) > q.range) return m;  // escape
  const double cell_width = 2.0 * q.range / m;
  const int j = static_cast<int>(std::floor((x - (q.center - q.range)) / cell_width));
  return std::clamp(j, 0, m - 1);
}

// Applies the received sub-symbol: returns the control contribution for this
// axis and advances the quantizer state.
double decode_update_axis(QuantizerState& q, const ZoomPolicyConfig& cfg, int sub) {
  const int m = cells(cfg.rate_bits);
  double u = 0.0;
  if (sub >= m) {  // escape: expand, track the free drift of the center
    q.range *= cfg.zoom_out;
    q.center *= cfg.gain;
  } else {
    const double cell_width = 2.0 * q.range / m;
    const double midpoint = q.center - q.range + (sub + 0.5) * cell_width;
    u = -cfg.gain * midpoint;
    q.range *= cfg.zoom_in * std::abs(cfg.gain) * cfg.safety / (1 << cfg.rate_bits);
    q.center = 0.0;
  }
  q.range = std::max(q.range, std::numeric_limits<double>::min());
  if (!(q.range > 0.0)) throw NumericError("zoom policy: quantizer range became non-positive");
  return u;
}

void validate_config(const ZoomPolicyConfig& cfg) {
  if (cfg.rate_bits < 0) throw InputError("zoom policy: rate_bits must be >= 0");
  if (!(cfg.range0 > 0.0)) throw InputError("zoom policy: initial range must be positive");
  if (!(cfg.zoom_out > 1.0)) throw InputError("zoom policy: zoom_out must exceed 1");
  if (!(cfg.zoom_in > 0.0 && cfg.zoom_in <= 1.0)) throw InputError("zoom policy: zoom_in must lie in (0,1]");
  if (!(cfg.safety > 0.0)) throw InputError("zoom policy: safety factor must be positive");
  if (cfg.gain == 0.0) throw InputError("zoom policy: gain must be nonzero");
}

}  // namespace

long long PolicyState::symbols_per_step() const {
  if (config.rate_bits == 0) return 1;
  return 1LL << (config.rate_bits * dimension());
}

PolicyState make_zoom_policy(const ZoomPolicyConfig& config, int dimension) {
  validate_config(config);
  if (dimension < 1) throw InputError("zoom policy: dimension must be >= 1");
  if (config.rate_bits * dimension > 24) {
    throw CapabilityError("zoom policy: rate_bits * dimension > 24 symbols per step not supported");
  }
  PolicyState p;
  p.config = config;
  p.encoder.assign(static_cast<std::size_t>(dimension), QuantizerState{config.center0, config.range0});
  p.decoder = p.encoder;
  return p;
}

PolicyStepResult zoom_policy_step(const PolicyState& policy, const VectorXd& x, const ChannelModel& channel,
                                  Rng& rng) {
  const int dim = policy.dimension();
  if (x.size() != dim) throw InputError("zoom policy: state dimension mismatch");
  PolicyStepResult result;
  result.next = policy;
  result.control = VectorXd::Zero(dim);
  if (policy.config.rate_bits == 0) return result;  // channel unused

  const int base = 1 << policy.config.rate_bits;
  long long symbol = 0;
  long long weight = 1;
  for (int axis = 0; axis < dim; ++axis) {
    symbol += weight * encode_axis(policy.encoder[static_cast<std::size_t>(axis)], policy.config, x[axis]);
    weight *= base;
  }
  result.sent = static_cast<int>(symbol);
  result.received = transmit(channel, result.sent, rng);

  long long rest = result.received;
  for (int axis = 0; axis < dim; ++axis) {
    const int sub = static_cast<int>(rest % base);
    rest /= base;
    result.control[axis] =
        decode_update_axis(result.next.decoder[static_cast<std::size_t>(axis)], policy.config, sub);
  }
  result.next.encoder = result.next.decoder;  // fed back, both sides see the received symbol
  return result;
}

TrajectoryEnsemble ClosedLoopEnsemble::as_trajectory_ensemble() const {
  TrajectoryEnsemble ensemble;
  ensemble.master_seed = master_seed;
  ensemble.trajectories.reserve(runs.size());
  for (const ClosedLoopRun& run : runs) ensemble.trajectories.push_back(run.trajectory);
  return ensemble;
}

int ClosedLoopEnsemble::distinct_control_sequences() const {
  std::vector<std::vector<double>> sequences;
  sequences.reserve(runs.size());
  for (const ClosedLoopRun& run : runs) {
    std::vector<double> flat;
    for (const ControlInput& u : run.trajectory.controls) {
      for (Eigen::Index i = 0; i < u.v.size(); ++i) flat.push_back(u.v[i]);
    }
    sequences.push_back(std::move(flat));
  }
  std::sort(sequences.begin(), sequences.end());
  sequences.erase(std::unique(sequences.begin(), sequences.end()), sequences.end());
  return static_cast<int>(sequences.size());
}

double ClosedLoopEnsemble::control_rate() const {
  if (runs.empty() || runs.front().trajectory.horizon() == 0) return 0.0;
  return std::log2(static_cast<double>(distinct_control_sequences())) / runs.front().trajectory.horizon();
}

ClosedLoopEnsemble closed_loop_run(const SystemModel& model, const PolicyState& policy, const ChannelModel& channel,
                                   int horizon, int count, std::uint64_t seed) {
  if (model.kind != MapKind::additive) throw InputError("closed_loop_run: zoom policy binds to additive models");
  if (model.dimension != policy.dimension()) {
    throw InputError("closed_loop_run: policy dimension " + std::to_string(policy.dimension()) +
                     " does not match model dimension " + std::to_string(model.dimension));
  }
  if (horizon < 1) throw InputError("closed_loop_run: horizon must be >= 1");
  if (count < 1) throw InputError("closed_loop_run: count must be >= 1");
  if (policy.config.rate_bits > 0) {
    if (channel.input_size != channel.output_size) {
      throw InputError("closed_loop_run: zoom policy needs matching channel input/output alphabets");
    }
    if (channel.input_size < policy.symbols_per_step()) {
      throw InputError("closed_loop_run: channel alphabet " + std::to_string(channel.input_size) +
                       " smaller than the policy's " + std::to_string(policy.symbols_per_step()) +
                       " symbols per step");
    }
  }

  ClosedLoopEnsemble ensemble;
  ensemble.master_seed = seed;
  ensemble.runs.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(substream(seed, static_cast<std::uint64_t>(i)));
    VectorXd x(model.dimension);
    for (int d = 0; d < model.dimension; ++d) x[d] = model.init.sample(rng);

    ClosedLoopRun run;
    run.trajectory.seed = SeedProvenance{seed, static_cast<std::uint64_t>(i)};
    run.trajectory.states.push_back(x);
    PolicyState state = policy;
    for (int t = 0; t < horizon; ++t) {
      PolicyStepResult stepped = zoom_policy_step(state, x, channel, rng);
      state = std::move(stepped.next);
      VectorXd w(model.dimension);
      for (int d = 0; d < model.dimension; ++d) w[d] = model.noise.sample(rng);
      const ControlInput u = ControlInput{0, stepped.control};
      try {
        x = step(model, x, u, w);
      } catch (const NumericError& e) {
        throw NumericError("closed_loop_run: t=" + std::to_string(t) + ": " + e.what());
      }
      run.trajectory.states.push_back(x);
      run.trajectory.controls.push_back(u);
      run.trajectory.noise.push_back(w);
      run.log.push_back(SymbolRecord{t, stepped.sent, stepped.received, stepped.control});
    }
    ensemble.runs.push_back(std::move(run));
  }
  return ensemble;
}

std::vector<VectorXd> replay_decoder(const PolicyState& initial, const std::vector<int>& received_symbols) {
  std::vector<VectorXd> controls;
  controls.reserve(received_symbols.size());
  PolicyState state = initial;
  const int base = 1 << state.config.rate_bits;
  for (int symbol : received_symbols) {
    VectorXd u = VectorXd::Zero(state.dimension());
    if (state.config.rate_bits > 0) {
      long long rest = symbol;
      for (int axis = 0; axis < state.dimension(); ++axis) {
        const int sub = static_cast<int>(rest % base);
        rest /= base;
        u[axis] = decode_update_axis(state.decoder[static_cast<std::size_t>(axis)], state.config, sub);
      }
      state.encoder = state.decoder;
    }
    controls.push_back(std::move(u));
  }
  return controls;
}

}  // namespace stabcap
