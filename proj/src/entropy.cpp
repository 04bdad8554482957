#include "stabcap/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace stabcap {

long long spanning_count_oracle_affine(double gain, double b_half, int horizon) {
  if (!(b_half > 0.0)) throw InputError("spanning oracle: half-width must be positive");
  if (horizon < 1) throw InputError("spanning oracle: horizon must be >= 1");
  if (!(std::abs(gain) > 1.0)) {
    throw InputError("spanning oracle: |a| <= 1 is degenerate (a single sequence spans; count 1)");
  }
  if ((horizon - 1) * std::log2(std::abs(gain)) > 62.0) {
    throw CapabilityError("spanning oracle: count exceeds 2^62 at this horizon");
  }
  long double v = 1.0L;
  for (int t = 0; t + 1 < horizon; ++t) v *= std::abs(gain);
  return static_cast<long long>(std::ceil(v - v * 1e-12L));
}

namespace {

struct SampleDraw {
  VectorXd x0;
  std::vector<VectorXd> noise;
};

// Same substream derivation as sample_ensemble, so a validation pass can
// redraw the identical samples.
std::vector<SampleDraw> draw_samples(const SystemModel& model, int samples, int horizon, std::uint64_t seed) {
  std::vector<SampleDraw> out(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    Rng rng(substream(seed, static_cast<std::uint64_t>(i)));
    SampleDraw& s = out[static_cast<std::size_t>(i)];
    s.x0.resize(model.dimension);
    for (int d = 0; d < model.dimension; ++d) s.x0[d] = model.init.sample(rng);
    s.noise.resize(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      VectorXd w(model.dimension);
      for (int d = 0; d < model.dimension; ++d) w[d] = model.noise.sample(rng);
      s.noise[static_cast<std::size_t>(t)] = w;
    }
  }
  return out;
}

// In-B occupation count over t in [0;T-1]; early exit once the miss budget is
// spent. States are evaluated raw (no overflow throw): a diverging replay just
// fails to cover.
int hits_in_target(const SystemModel& model, const Box& target, const SampleDraw& sample,
                   const std::vector<ControlInput>& controls, int horizon, int needed_hits) {
  VectorXd x = sample.x0;
  int hits = 0;
  const int miss_budget = horizon - needed_hits;
  int misses = 0;
  for (int t = 0; t < horizon; ++t) {
    if (x.allFinite() && target.contains(x)) {
      ++hits;
    } else if (++misses > miss_budget) {
      return hits;
    }
    if (t + 1 < horizon) {
      if (!x.allFinite()) continue;  // stays non-finite; remaining times all miss
      x = model.drift.map(x) + controls[static_cast<std::size_t>(t)].v + sample.noise[static_cast<std::size_t>(t)];
    }
  }
  return hits;
}

std::vector<std::vector<ControlInput>> build_candidates(const SystemModel& model, const SpanningParams& params,
                                                        const std::vector<SampleDraw>& samples) {
  std::vector<std::vector<ControlInput>> candidates;
  if (params.source == CandidateSource::policy) {
    // One candidate per sample: the control sequence the zoom policy realizes
    // on that sample over an ideal noiseless channel.
    const PolicyState policy0 = make_zoom_policy(params.policy, model.dimension);
    const ChannelModel channel = ChannelModel::noiseless(static_cast<int>(policy0.symbols_per_step()));
    Rng dummy(0);  // noiseless transmissions draw nothing
    candidates.reserve(samples.size());
    for (const SampleDraw& sample : samples) {
      PolicyState state = policy0;
      VectorXd x = sample.x0;
      std::vector<ControlInput> seq;
      seq.reserve(static_cast<std::size_t>(params.horizon));
      for (int t = 0; t < params.horizon; ++t) {
        PolicyStepResult stepped = zoom_policy_step(state, x, channel, dummy);
        state = std::move(stepped.next);
        seq.push_back(ControlInput{0, stepped.control});
        x = model.drift.map(x) + stepped.control + sample.noise[static_cast<std::size_t>(t)];
        if (!x.allFinite()) {
          // Pad with zero controls; the candidate simply fails to cover much.
          for (int rest = t + 1; rest < params.horizon; ++rest) {
            seq.push_back(ControlInput{0, VectorXd::Zero(model.dimension)});
          }
          break;
        }
      }
      candidates.push_back(std::move(seq));
    }
  } else {
    if (model.dimension != 1) throw CapabilityError("lattice candidates support scalar models only");
    const int levels = 1 << params.lattice_bits;
    candidates.reserve(static_cast<std::size_t>(levels));
    for (int k = 0; k < levels; ++k) {
      const double level =
          levels == 1 ? 0.0 : -params.lattice_span + (k + 0.5) * (2.0 * params.lattice_span / levels);
      std::vector<ControlInput> seq(static_cast<std::size_t>(params.horizon), ControlInput::additive(level));
      candidates.push_back(std::move(seq));
    }
  }
  return candidates;
}

}  // namespace

SpanningEstimate greedy_spanning_estimate(const SystemModel& model, const SpanningParams& params,
                                          std::uint64_t seed) {
  if (params.samples < 1) throw InputError("greedy_spanning_estimate: samples must be >= 1");
  if (params.horizon < 1) throw InputError("greedy_spanning_estimate: horizon must be >= 1");
  if (params.rho < 0.0 || params.rho >= 1.0) throw InputError("greedy_spanning_estimate: rho must lie in [0,1)");
  if (params.r < 0.0 || params.r >= 1.0) throw InputError("greedy_spanning_estimate: r must lie in [0,1)");
  if (model.kind != MapKind::additive) throw CapabilityError("greedy_spanning_estimate: additive models only");

  const int n = params.samples;
  const int horizon = params.horizon;
  const int needed_hits = static_cast<int>(std::ceil((1.0 - params.r) * horizon - 1e-9));
  const std::vector<SampleDraw> samples = draw_samples(model, n, horizon, seed);
  SpanningEstimate estimate;
  estimate.set.horizon = horizon;
  estimate.set.target = params.target;
  estimate.set.rho = params.rho;
  estimate.set.r = params.r;
  estimate.set.candidates = build_candidates(model, params, samples);
  const auto& candidates = estimate.set.candidates;

  // Candidate -> covered-sample lists.
  std::vector<std::vector<int>> covers(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (int i = 0; i < n; ++i) {
      if (hits_in_target(model, params.target, samples[static_cast<std::size_t>(i)], candidates[c], horizon,
                         needed_hits) >= needed_hits) {
        covers[c].push_back(i);
      }
    }
  }

  const int need = std::max(1, static_cast<int>(std::ceil((1.0 - params.rho) * n - 1e-9)));
  estimate.set.cover_of_sample.assign(static_cast<std::size_t>(n), -1);
  int covered = 0;

  // Lazy greedy: stored counts only go stale downward, so a popped entry whose
  // recount matches is a true maximum; ties pop lowest index first.
  using Entry = std::pair<int, int>;  // (covered count, candidate index)
  auto cmp = [](const Entry& a, const Entry& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> heap(cmp);
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    heap.push(Entry{static_cast<int>(covers[c].size()), static_cast<int>(c)});
  }
  auto recount = [&](int c) {
    int fresh = 0;
    for (int i : covers[static_cast<std::size_t>(c)]) {
      if (estimate.set.cover_of_sample[static_cast<std::size_t>(i)] < 0) ++fresh;
    }
    return fresh;
  };
  while (covered < need && !heap.empty()) {
    const auto [stored, c] = heap.top();
    heap.pop();
    if (stored == 0) break;
    const int fresh = recount(c);
    if (fresh != stored) {
      if (fresh > 0) heap.push(Entry{fresh, c});
      continue;
    }
    estimate.set.selected.push_back(c);
    for (int i : covers[static_cast<std::size_t>(c)]) {
      auto& owner = estimate.set.cover_of_sample[static_cast<std::size_t>(i)];
      if (owner < 0) {
        owner = c;
        ++covered;
      }
    }
  }

  estimate.set.covered_fraction = static_cast<double>(covered) / n;
  estimate.count = static_cast<long long>(estimate.set.selected.size());
  if (covered < need) {
    estimate.feasible = false;
    // Coverage reachable with the full candidate set.
    std::vector<bool> reachable(static_cast<std::size_t>(n), false);
    for (const auto& list : covers) {
      for (int i : list) reachable[static_cast<std::size_t>(i)] = true;
    }
    estimate.max_achievable_coverage =
        static_cast<double>(std::count(reachable.begin(), reachable.end(), true)) / n;
  }

  estimate.set.best_freq_per_sample.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double best = 0.0;
    for (int c : estimate.set.selected) {
      const int hits = hits_in_target(model, params.target, samples[static_cast<std::size_t>(i)],
                                      candidates[static_cast<std::size_t>(c)], horizon, /*needed_hits=*/0);
      best = std::max(best, static_cast<double>(hits) / horizon);
    }
    estimate.set.best_freq_per_sample[static_cast<std::size_t>(i)] = best;
  }
  return estimate;
}

bool validate_spanning(const SystemModel& model, const SpanningEstimate& estimate, std::uint64_t seed) {
  const SpanningSet& set = estimate.set;
  const int n = static_cast<int>(set.cover_of_sample.size());
  const std::vector<SampleDraw> samples = draw_samples(model, n, set.horizon, seed);
  const int needed_hits = static_cast<int>(std::ceil((1.0 - set.r) * set.horizon - 1e-9));
  int covered = 0;
  for (int i = 0; i < n; ++i) {
    const int c = set.cover_of_sample[static_cast<std::size_t>(i)];
    if (c < 0) continue;
    if (std::find(set.selected.begin(), set.selected.end(), c) == set.selected.end()) return false;
    const int hits = hits_in_target(model, set.target, samples[static_cast<std::size_t>(i)],
                                    set.candidates[static_cast<std::size_t>(c)], set.horizon, needed_hits);
    if (hits < needed_hits) return false;
    ++covered;
  }
  return static_cast<double>(covered) / n >= (1.0 - set.rho) - 1e-12;
}

RateFit entropy_rate_fit(const std::vector<std::pair<int, long long>>& counts) {
  if (counts.size() < 3) throw InputError("entropy_rate_fit: needs at least 3 horizons");
  RateFit fit;
  fit.points = static_cast<int>(counts.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [t, count] : counts) {
    if (count < 1) throw InputError("entropy_rate_fit: counts must be >= 1");
    const double x = static_cast<double>(t);
    const double y = std::log2(static_cast<double>(count));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(counts.size());
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) throw InputError("entropy_rate_fit: horizons must not be all equal");
  fit.slope_bits_per_step = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope_bits_per_step * sx) / n;
  for (const auto& [t, count] : counts) {
    const double pred = fit.intercept + fit.slope_bits_per_step * t;
    fit.max_abs_residual = std::max(fit.max_abs_residual, std::abs(std::log2(static_cast<double>(count)) - pred));
  }
  return fit;
}

}  // namespace stabcap
