#include "stabcap/models.hpp"

#include <cmath>
#include <sstream>

namespace stabcap {

Distribution Distribution::point_mass(double v) {
  Distribution d;
  d.family = Family::point_mass;
  d.value = v;
  return d;
}

Distribution Distribution::uniform(double a, double b) {
  if (!(a < b)) throw InputError("uniform distribution: requires a < b");
  Distribution d;
  d.family = Family::uniform;
  d.a = a;
  d.b = b;
  return d;
}

Distribution Distribution::gaussian(double mu, double sigma) {
  if (!(sigma > 0.0)) throw InputError("gaussian distribution: requires sigma > 0");
  Distribution d;
  d.family = Family::gaussian;
  d.mu = mu;
  d.sigma = sigma;
  return d;
}

Distribution Distribution::truncated_gaussian(double mu, double sigma, double lo, double hi) {
  if (!(sigma > 0.0)) throw InputError("truncated_gaussian distribution: requires sigma > 0");
  if (!(lo < hi)) throw InputError("truncated_gaussian distribution: requires lo < hi");
  Distribution d;
  d.family = Family::truncated_gaussian;
  d.mu = mu;
  d.sigma = sigma;
  d.lo = lo;
  d.hi = hi;
  return d;
}

double Distribution::sample(Rng& rng) const {
  switch (family) {
    case Family::zero:
      return 0.0;
    case Family::point_mass:
      return value;
    case Family::uniform:
      return rng.uniform(a, b);
    case Family::gaussian:
      return rng.gaussian(mu, sigma);
    case Family::truncated_gaussian:
      return rng.truncated_gaussian(mu, sigma, lo, hi);
  }
  throw CapabilityError("distribution family not supported");
}

const MatrixXd& SemilinearModel::matrix(int label) const {
  if (label < 0 || label >= alphabet_size()) {
    throw InputError("semilinear control label " + std::to_string(label) + " outside alphabet of size " +
                     std::to_string(alphabet_size()));
  }
  return matrices[static_cast<std::size_t>(label)];
}

MatrixXd SemilinearModel::transition(const std::vector<int>& labels_seq) const {
  const auto n = matrices.empty() ? 0 : matrices.front().rows();
  MatrixXd phi = MatrixXd::Identity(n, n);
  for (int label : labels_seq) phi = matrix(label) * phi;
  return phi;
}

ControlInput ControlInput::additive(double u) {
  VectorXd v(1);
  v << u;
  return ControlInput{0, v};
}

namespace {

void check_dim(const char* what, const VectorXd& v, int expected) {
  if (v.size() != expected) {
    std::ostringstream msg;
    msg << what << " has dimension " << v.size() << ", model expects " << expected;
    throw InputError(msg.str());
  }
}

void check_finite(const VectorXd& x) {
  if (!x.allFinite()) throw NumericError("state overflowed to a non-finite value");
}

}  // namespace

VectorXd step(const SystemModel& model, const VectorXd& x, const ControlInput& u, const VectorXd& w) {
  check_dim("state", x, model.dimension);
  check_dim("noise", w, model.dimension);
  VectorXd next;
  switch (model.kind) {
    case MapKind::additive: {
      check_dim("control", u.v, model.dimension);
      next = model.drift.map(x) + u.v + w;
      break;
    }
    case MapKind::semilinear: {
      const SemilinearModel& sl = *model.semilinear;
      check_dim("control", u.v, sl.control_dim);
      next = sl.matrix(u.label) * x + sl.input * u.v + w;
      break;
    }
    case MapKind::general: {
      next = model.general_map(x, u.v, w);
      break;
    }
  }
  check_finite(next);
  return next;
}

Trajectory simulate(const SystemModel& model, const VectorXd& x0, const std::vector<ControlInput>& controls,
                    const std::vector<VectorXd>& noise) {
  if (controls.size() != noise.size()) {
    throw InputError("simulate: control sequence length " + std::to_string(controls.size()) +
                     " != noise sequence length " + std::to_string(noise.size()));
  }
  Trajectory traj;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(x0);
  traj.controls = controls;
  traj.noise = noise;
  for (std::size_t t = 0; t < controls.size(); ++t) {
    try {
      traj.states.push_back(step(model, traj.states.back(), controls[t], noise[t]));
    } catch (const InputError& e) {
      throw InputError("t=" + std::to_string(t) + ": " + e.what());
    } catch (const NumericError& e) {
      throw NumericError("t=" + std::to_string(t) + ": " + e.what());
    }
  }
  return traj;
}

double jacobian_logdet(const SystemModel& model, const VectorXd& x) {
  if (!model.drift.has_logdet()) {
    throw CapabilityError("model '" + model.drift.name + "' carries no Jacobian log-determinant profile");
  }
  check_dim("state", x, model.dimension);
  return model.drift.logdet2(x);
}

TrajectoryEnsemble sample_ensemble(const SystemModel& model, const std::vector<ControlInput>& controls, int count,
                                   int horizon, std::uint64_t seed) {
  if (count < 1) throw InputError("sample_ensemble: count must be >= 1");
  if (horizon < 0) throw InputError("sample_ensemble: horizon must be >= 0");
  std::vector<ControlInput> u = controls;
  if (u.empty()) {
    const int cd = model.kind == MapKind::semilinear ? model.semilinear->control_dim : model.dimension;
    u.assign(static_cast<std::size_t>(horizon), ControlInput{0, VectorXd::Zero(cd)});
  }
  if (static_cast<int>(u.size()) != horizon) {
    throw InputError("sample_ensemble: control sequence length " + std::to_string(u.size()) +
                     " != horizon " + std::to_string(horizon));
  }

  TrajectoryEnsemble ensemble;
  ensemble.master_seed = seed;
  ensemble.trajectories.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(substream(seed, static_cast<std::uint64_t>(i)));
    VectorXd x0(model.dimension);
    for (int d = 0; d < model.dimension; ++d) x0[d] = model.init.sample(rng);
    std::vector<VectorXd> noise(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t) {
      VectorXd w(model.dimension);
      for (int d = 0; d < model.dimension; ++d) w[d] = model.noise.sample(rng);
      noise[static_cast<std::size_t>(t)] = w;
    }
    Trajectory traj = simulate(model, x0, u, noise);
    traj.seed = SeedProvenance{seed, static_cast<std::uint64_t>(i)};
    ensemble.trajectories.push_back(std::move(traj));
  }
  return ensemble;
}

Drift linear_drift(const MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("linear drift: matrix must be square");
  const double abs_det = std::abs(a.determinant());
  if (abs_det == 0.0) throw InputError("linear drift: matrix is singular");
  const double logdet = std::log2(abs_det);
  Drift d;
  d.name = "linear";
  d.map = [a](const VectorXd& x) { return VectorXd(a * x); };
  d.logdet2 = [logdet](const VectorXd&) { return logdet; };
  return d;
}

Drift scalar_gain_drift(double a) {
  if (a == 0.0) throw InputError("scalar gain drift: gain must be nonzero");
  const double logdet = std::log2(std::abs(a));
  Drift d;
  d.name = "scalar_gain";
  d.map = [a](const VectorXd& x) { return VectorXd(a * x); };
  d.logdet2 = [logdet](const VectorXd&) { return logdet; };
  return d;
}

Drift identity_drift() {
  Drift d;
  d.name = "identity";
  d.map = [](const VectorXd& x) { return x; };
  d.logdet2 = [](const VectorXd&) { return 0.0; };
  return d;
}

namespace {

// Integral of 2^(1/sqrt(s)) over [1, y] by composite Gauss-Legendre (5 points
// per unit-length panel). The integrand is smooth and monotone on [1, inf).
double expanding_sqrt_integral(double y) {
  static const double nodes[5] = {-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                  0.9061798459386640};
  static const double weights[5] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                    0.4786286704993665, 0.2369268850561891};
  double total = 0.0;
  const int panels = std::max(1, static_cast<int>(std::ceil(y - 1.0)));
  const double h = (y - 1.0) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = 1.0 + (p + 0.5) * h;
    for (int k = 0; k < 5; ++k) {
      const double s = mid + 0.5 * h * nodes[k];
      total += 0.5 * h * weights[k] * std::exp2(1.0 / std::sqrt(s));
    }
  }
  return total;
}

}  // namespace

Drift expanding_sqrt_drift() {
  Drift d;
  d.name = "expanding_sqrt";
  d.map = [](const VectorXd& x) {
    VectorXd out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double v = x[i];
      const double av = std::abs(v);
      const double f = av <= 1.0 ? 2.0 * av : 2.0 + expanding_sqrt_integral(av);
      out[i] = v < 0.0 ? -f : f;
    }
    return out;
  };
  d.logdet2 = [](const VectorXd& x) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double av = std::abs(x[i]);
      total += av <= 1.0 ? 1.0 : 1.0 / std::sqrt(av);
    }
    return total;
  };
  return d;
}

double scalar_drift_inverse(const Drift& drift, double y) {
  auto eval = [&drift](double x) {
    VectorXd v(1);
    v << x;
    return drift.map(v)[0];
  };
  const bool increasing = eval(1.0) > eval(-1.0);
  // g is increasing in x; solve g(x) = target by doubling bracket + bisection.
  auto g = [&](double x) { return increasing ? eval(x) : -eval(x); };
  const double target = increasing ? y : -y;
  double lo = -1.0, hi = 1.0;
  int budget = 4096;
  while (g(lo) > target && budget-- > 0) lo *= 2.0;
  while (g(hi) < target && budget-- > 0) hi *= 2.0;
  if (budget <= 0 || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw NumericError("drift inverse: bracket expansion failed");
  }
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SystemModel make_scalar_additive(const Drift& drift, const Distribution& noise, const Distribution& init) {
  SystemModel m;
  m.dimension = 1;
  m.kind = MapKind::additive;
  m.drift = drift;
  m.noise = noise;
  m.init = init;
  return m;
}

}  // namespace stabcap
