#include "stabcap/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace stabcap {

namespace {

constexpr double kGridBudget = 6e7;  // membership evaluations per conditioned set

void check_scalar_additive(const SystemModel& model, const char* who) {
  if (model.dimension != 1 || model.kind != MapKind::additive) {
    throw InputError(std::string(who) + ": requires a scalar additive model");
  }
}

// Number of hits |phi(t,x)| <= b over t in [0;T-1]; early exit once the miss
// budget is spent.
int membership_hits(const SystemModel& model, double x, const std::vector<double>& controls,
                    const std::vector<double>& noise, double b, int horizon, int miss_budget) {
  VectorXd state(1);
  state[0] = x;
  int hits = 0;
  int misses = 0;
  for (int t = 0; t < horizon; ++t) {
    if (std::isfinite(state[0]) && std::abs(state[0]) <= b) {
      ++hits;
    } else if (++misses > miss_budget) {
      return hits;
    }
    if (t + 1 < horizon && std::isfinite(state[0])) {
      state = model.drift.map(state);
      state[0] += controls[static_cast<std::size_t>(t)] + noise[static_cast<std::size_t>(t)];
    }
  }
  return hits;
}

}  // namespace

ConditionedSet conditioned_set(const SystemModel& scalar_model, const std::vector<double>& controls,
                               const std::vector<double>& noise, double b, double r_star, int horizon,
                               double grid_resolution, double expansion_floor) {
  check_scalar_additive(scalar_model, "conditioned_set");
  if (!(b >= 0.0)) throw InputError("conditioned_set: b must be nonnegative");
  if (r_star < 0.0 || r_star >= 1.0) throw InputError("conditioned_set: r_star must lie in [0,1)");
  if (horizon < 1) throw InputError("conditioned_set: horizon must be >= 1");
  if (!(expansion_floor > 1.0)) throw InputError("conditioned_set: expansion floor c must exceed 1");
  if (static_cast<int>(controls.size()) < horizon - 1 || static_cast<int>(noise.size()) < horizon - 1) {
    throw InputError("conditioned_set: need at least T-1 controls and noise terms");
  }
  const double finest_component = b * std::pow(expansion_floor, -horizon);
  if (!(grid_resolution > 0.0) || (b > 0.0 && grid_resolution >= finest_component)) {
    throw InputError("conditioned_set: grid resolution must be finer than b*c^-T = " +
                     std::to_string(finest_component));
  }

  ConditionedSet result;
  result.grid_cell = grid_resolution;
  if (b == 0.0) return result;  // |phi| <= 0 with noise present: report empty

  const int needed_hits = static_cast<int>(std::ceil((1.0 - r_star) * horizon - 1e-9));
  const int miss_budget = horizon - needed_hits;

  // Any member must visit [-b,b] within the first miss_budget+1 times, so the
  // set lies inside the backward images of [-b,b] through t <= miss_budget
  // steps. f is strictly monotone (|f'| >= c > 1), so interval endpoints map
  // to interval endpoints.
  std::vector<Interval> domains;
  for (int t_hit = 0; t_hit <= miss_budget && t_hit < horizon; ++t_hit) {
    double lo = -b, hi = b;
    bool valid = true;
    for (int s = t_hit - 1; s >= 0; --s) {
      const double offset = controls[static_cast<std::size_t>(s)] + noise[static_cast<std::size_t>(s)];
      const double a = scalar_drift_inverse(scalar_model.drift, lo - offset);
      const double c = scalar_drift_inverse(scalar_model.drift, hi - offset);
      lo = std::min(a, c);
      hi = std::max(a, c);
      if (!std::isfinite(lo) || !std::isfinite(hi)) {
        valid = false;
        break;
      }
    }
    if (valid) domains.push_back(Interval{lo - grid_resolution, hi + grid_resolution});
  }
  const std::vector<Interval> merged = normalize_union(domains);
  double total_points = 0.0;
  for (const Interval& iv : merged) total_points += iv.length() / grid_resolution + 1.0;
  if (total_points > kGridBudget) {
    throw CapabilityError("conditioned_set: grid would need " + std::to_string(total_points) +
                          " evaluations; coarsen the resolution or reduce the horizon");
  }

  double lo_member = std::numeric_limits<double>::infinity();
  double hi_member = -std::numeric_limits<double>::infinity();
  for (const Interval& iv : merged) {
    const long long steps = static_cast<long long>(std::floor(iv.length() / grid_resolution)) + 1;
    for (long long i = 0; i < steps; ++i) {
      const double x = iv.lo + static_cast<double>(i) * grid_resolution;
      if (membership_hits(scalar_model, x, controls, noise, b, horizon, miss_budget) >= needed_hits) {
        lo_member = std::min(lo_member, x);
        hi_member = std::max(hi_member, x);
      }
    }
  }
  if (lo_member <= hi_member) {
    result.empty = false;
    result.lo = lo_member;
    result.hi = hi_member;
    result.midpoint = 0.5 * (lo_member + hi_member);
  }
  return result;
}

BinPipelineResult bin_pipeline(const std::vector<double>& centers, double radius, int group_size, Interval support,
                               double p_min, double p_max, const std::function<double(double, double)>& pi0_mass) {
  if (centers.empty()) throw InputError("bin_pipeline: no centers");
  if (!(radius > 0.0)) throw InputError("bin_pipeline: radius must be positive");
  if (group_size < 1) throw InputError("bin_pipeline: group size L must be >= 1");
  if (!(p_min > 0.0) || p_max < p_min) throw InputError("bin_pipeline: requires 0 < p_min <= p_max");
  if (!(support.hi > support.lo)) throw InputError("bin_pipeline: empty support interval");

  std::function<double(double, double)> mass = pi0_mass;
  if (!mass) {
    // Default: the uniform law on the support.
    const double density = 1.0 / support.length();
    mass = [density](double lo, double hi) { return std::max(0.0, hi - lo) * density; };
  }

  BinPipelineResult result;
  result.rho = 2.0 * radius;
  result.group_size = group_size;
  for (double c : centers) {
    const Interval bin{c - radius, c + radius};
    if (bin.lo >= support.lo && bin.hi <= support.hi) {
      result.b_bins.push_back(bin);
    } else {
      ++result.dropped;  // partially or fully outside K; contributes at most 2 bins of mass
    }
  }
  if (result.b_bins.empty()) throw InputError("bin_pipeline: no bins fully inside the support");
  std::stable_sort(result.b_bins.begin(), result.b_bins.end(),
                   [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  result.n1 = static_cast<int>(result.b_bins.size());
  result.m_mt = union_measure(result.b_bins);

  const DisjointSelection selection = disjoint_subcollection(make_interval_collection(result.b_bins));
  result.c_indices = selection.selected;
  result.n2 = static_cast<int>(selection.selected.size());

  // D_k = C_k plus the leftover up to the next selected bin; the last D is
  // bare.
  for (int k = 0; k < result.n2; ++k) {
    std::vector<Interval> d{result.b_bins[static_cast<std::size_t>(result.c_indices[static_cast<std::size_t>(k)])]};
    if (k + 1 < result.n2) {
      const auto& leftover = selection.leftovers[static_cast<std::size_t>(k)];
      d.insert(d.end(), leftover.begin(), leftover.end());
    }
    result.d_sets.push_back(normalize_union(d));
  }

  result.n3 = result.n2 / group_size + 1;
  for (int g = 0; g < result.n3; ++g) {
    std::vector<Interval> e;
    for (int k = g * group_size; k < std::min((g + 1) * group_size, result.n2); ++k) {
      const auto& d = result.d_sets[static_cast<std::size_t>(k)];
      e.insert(e.end(), d.begin(), d.end());
    }
    result.e_groups.push_back(normalize_union(e));
    result.e_measures.push_back(union_measure(result.e_groups.back()));
    double m = 0.0;
    for (const Interval& iv : result.e_groups.back()) m += mass(iv.lo, iv.hi);
    result.group_masses.push_back(m);
  }

  // Mbar_T: each group minus the leftover part (D \ C) of its last member.
  std::vector<Interval> mbar;
  for (int g = 0; g < result.n3; ++g) {
    const int last_k = (g + 1) * group_size - 1;  // D_{(g+1)L}, 0-based
    std::vector<Interval> keep = result.e_groups[static_cast<std::size_t>(g)];
    if (last_k < result.n2) {
      const Interval c_bin =
          result.b_bins[static_cast<std::size_t>(result.c_indices[static_cast<std::size_t>(last_k)])];
      const std::vector<Interval> leftover =
          interval_difference(result.d_sets[static_cast<std::size_t>(last_k)], {c_bin});
      keep = interval_difference(keep, leftover);
    }
    mbar.insert(mbar.end(), keep.begin(), keep.end());
  }
  result.m_mtbar = union_measure(mbar);

  result.pi0_mt_lo = p_min * result.m_mt;
  result.pi0_mt_hi = p_max * result.m_mt;
  return result;
}

double coupling_tv(const std::vector<double>& p, int n) {
  if (n < 1) throw InputError("coupling_tv: support size must be >= 1");
  if (static_cast<int>(p.size()) > n) throw InputError("coupling_tv: distribution has more than n atoms");
  double total = 0.0;
  for (double v : p) {
    if (v < 0.0) throw InputError("coupling_tv: negative probability mass");
    total += v;
  }
  if (total > 1.0 + 1e-9) throw InputError("coupling_tv: mass exceeds 1");
  const double uniform = 1.0 / n;
  double overlap = 0.0;
  for (double v : p) overlap += std::min(v, uniform);
  return 1.0 - overlap;
}

FeasibilityResult step5_feasibility(double p_min, double p_max, double r_star, double alpha, int group_size) {
  if (!(p_min > 0.0) || p_max < p_min) throw InputError("step5_feasibility: requires 0 < p_min <= p_max");
  if (!(r_star > 0.0 && r_star < 1.0 / 3.0)) throw InputError("step5_feasibility: r* must lie in (0, 1/3)");
  if (!(alpha > 0.0 && alpha < r_star)) throw InputError("step5_feasibility: alpha must lie in (0, r*)");
  if (group_size < 1) throw InputError("step5_feasibility: group size L must be >= 1");
  const double ratio = p_max / p_min;
  FeasibilityResult result;
  result.value = 1.0 - 0.5 * (p_min / p_max) * (r_star - alpha) / r_star + ratio * ratio / (2.0 * group_size) +
                 2.0 * ratio * alpha / (r_star - alpha);
  result.contradiction = result.value < 1.0;
  return result;
}

TailDensity TailDensity::gaussian(double mu, double sigma) {
  if (!(sigma > 0.0)) throw InputError("tail density: gaussian sigma must be positive");
  TailDensity d;
  d.family = Family::gaussian;
  d.mu = mu;
  d.sigma = sigma;
  return d;
}

TailDensity TailDensity::laplace(double mu, double scale) {
  if (!(scale > 0.0)) throw InputError("tail density: laplace scale must be positive");
  TailDensity d;
  d.family = Family::laplace;
  d.mu = mu;
  d.scale = scale;
  return d;
}

TailDensity TailDensity::uniform(double lo, double hi) {
  if (!(hi > lo)) throw InputError("tail density: uniform requires lo < hi");
  TailDensity d;
  d.family = Family::uniform;
  d.lo = lo;
  d.hi = hi;
  return d;
}

std::vector<TailRatioPoint> tail_ratio(const TailDensity& density, const std::vector<double>& eps_grid) {
  std::vector<TailRatioPoint> out;
  for (double eps : eps_grid) {
    if (!(eps > 0.0 && eps < 1.0)) throw InputError("tail_ratio: epsilon must lie in (0,1)");
    TailRatioPoint pt;
    pt.epsilon = eps;
    switch (density.family) {
      case TailDensity::Family::gaussian: {
        // Half-width k with P(|X - mu| <= k) = 1 - eps, by bisection on erf.
        double lo = 0.0, hi = 64.0 * density.sigma;
        for (int i = 0; i < 200; ++i) {
          const double mid = 0.5 * (lo + hi);
          (std::erf(mid / (density.sigma * M_SQRT2)) < 1.0 - eps ? lo : hi) = mid;
        }
        const double k = 0.5 * (lo + hi);
        pt.k_eps = Interval{density.mu - k, density.mu + k};
        pt.tail_mass = eps;
        pt.density_floor =
            std::exp(-0.5 * (k / density.sigma) * (k / density.sigma)) / (density.sigma * std::sqrt(2.0 * M_PI));
        pt.ratio = pt.tail_mass / pt.density_floor;
        break;
      }
      case TailDensity::Family::laplace: {
        // P(|X - mu| > k) = exp(-k/scale).
        const double k = -density.scale * std::log(eps);
        pt.k_eps = Interval{density.mu - k, density.mu + k};
        pt.tail_mass = eps;
        pt.density_floor = std::exp(-k / density.scale) / (2.0 * density.scale);
        pt.ratio = pt.tail_mass / pt.density_floor;
        break;
      }
      case TailDensity::Family::uniform: {
        // Compact support: K_eps may be the support itself, so both the tail
        // and the ratio vanish for every eps.
        pt.k_eps = Interval{density.lo, density.hi};
        pt.tail_mass = 0.0;
        pt.density_floor = 1.0 / (density.hi - density.lo);
        pt.ratio = 0.0;
        break;
      }
    }
    out.push_back(pt);
  }
  return out;
}

EstimationResult estimation_experiment(const SystemModel& scalar_model, const ChannelModel& channel,
                                       const ZoomPolicyConfig& policy, double b, double r_star,
                                       const std::vector<int>& horizons, int trials, double expansion_floor,
                                       std::uint64_t seed) {
  check_scalar_additive(scalar_model, "estimation_experiment");
  if (trials < 1) throw InputError("estimation_experiment: trials must be >= 1");
  if (horizons.empty()) throw InputError("estimation_experiment: no horizons given");
  if (!(expansion_floor > 1.0)) throw InputError("estimation_experiment: expansion floor c must exceed 1");
  if (!(r_star > 0.0 && r_star < 1.0 / 3.0)) throw InputError("estimation_experiment: r* must lie in (0, 1/3)");

  EstimationResult result;
  result.b = b;
  result.r_star = r_star;
  result.expansion_floor = expansion_floor;
  result.trials = trials;

  const PolicyState policy0 = make_zoom_policy(policy, 1);
  for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
    const int horizon = horizons[hi];
    if (horizon < 1) throw InputError("estimation_experiment: horizons must be >= 1");
    const ClosedLoopEnsemble loops =
        closed_loop_run(scalar_model, policy0, channel, horizon, trials, substream(seed, hi));
    const double threshold = b * std::pow(expansion_floor, -(1.0 - 3.0 * r_star) * horizon);
    const double resolution = 0.5 * b * std::pow(expansion_floor, -horizon);

    EstimationHorizonStats stats;
    stats.horizon = horizon;
    int exceed = 0;
    double diameter_sum = 0.0;
    int nonempty = 0;
    for (const ClosedLoopRun& run : loops.runs) {
      std::vector<double> controls, noise;
      for (const ControlInput& u : run.trajectory.controls) controls.push_back(u.v[0]);
      for (const VectorXd& w : run.trajectory.noise) noise.push_back(w[0]);
      const ConditionedSet set =
          conditioned_set(scalar_model, controls, noise, b, r_star, horizon, resolution, expansion_floor);
      if (set.empty) {
        ++stats.empty_sets;
        ++exceed;  // no estimate exists; counts against the estimator
        continue;
      }
      ++nonempty;
      diameter_sum += set.diameter();
      if (std::abs(run.trajectory.states.front()[0] - set.midpoint) > threshold) ++exceed;
    }
    stats.exceed_frequency = static_cast<double>(exceed) / trials;
    stats.distinct_controls = loops.distinct_control_sequences();
    stats.control_rate = loops.control_rate();
    stats.mean_diameter = nonempty > 0 ? diameter_sum / nonempty : 0.0;
    result.per_horizon.push_back(stats);
  }
  return result;
}

}  // namespace stabcap
