#ifndef STABCAP_MODELS_HPP
#define STABCAP_MODELS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stabcap/errors.hpp"
#include "stabcap/rng.hpp"

namespace stabcap {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class MapKind { additive, semilinear, general };

// Evaluable closed-form drift f: R^N -> R^N, optionally with its volume
// distortion x -> log2 |det Df(x)| in bits.
struct Drift {
  std::string name;
  std::function<VectorXd(const VectorXd&)> map;
  std::function<double(const VectorXd&)> logdet2;  // empty if unavailable

  bool has_logdet() const { return static_cast<bool>(logdet2); }
};

// Scalar i.i.d. noise / initial-state families. Vector-valued models draw each
// coordinate independently from the same family.
struct Distribution {
  enum class Family { zero, point_mass, uniform, gaussian, truncated_gaussian };

  Family family = Family::zero;
  double value = 0.0;   // point_mass
  double a = 0.0;       // uniform lower
  double b = 0.0;       // uniform upper
  double mu = 0.0;      // gaussian mean
  double sigma = 1.0;   // gaussian stddev
  double lo = 0.0;      // truncation lower
  double hi = 0.0;      // truncation upper

  static Distribution zero() { return Distribution{}; }
  static Distribution point_mass(double v);
  static Distribution uniform(double a, double b);
  static Distribution gaussian(double mu, double sigma);
  static Distribution truncated_gaussian(double mu, double sigma, double lo, double hi);

  double sample(Rng& rng) const;
  bool is_zero() const { return family == Family::zero || (family == Family::point_mass && value == 0.0); }
};

// Finite-alphabet matrix family A: U -> GL(N,R) driving x' = A(u) x + B v + w.
struct SemilinearModel {
  std::vector<std::string> labels;  // control alphabet U
  std::vector<MatrixXd> matrices;   // A(u), all invertible
  MatrixXd input;                   // B, N x M
  int control_dim = 0;              // M

  int alphabet_size() const { return static_cast<int>(matrices.size()); }
  const MatrixXd& matrix(int label) const;

  // Product Phi(t, u) = A(u_{t-1}) ... A(u_0) for labels u_0..u_{t-1}.
  MatrixXd transition(const std::vector<int>& labels_seq) const;
};

struct InitBounds {
  double p_min = 0.0;
  double p_max = 0.0;
  double support_lo = 0.0;
  double support_hi = 0.0;
};

struct SystemModel {
  int dimension = 1;
  MapKind kind = MapKind::additive;
  Drift drift;                                // additive / general kinds
  std::optional<SemilinearModel> semilinear;  // semilinear kind
  // general kind: full map f(x, u, w) supplied directly
  std::function<VectorXd(const VectorXd&, const VectorXd&, const VectorXd&)> general_map;
  Distribution noise;
  Distribution init;
  std::optional<InitBounds> init_bounds;  // 0 < p_min <= p_max on [support]
  bool volume_expanding = false;          // claims log2|det Df| >= 0 everywhere
};

// Control input: `label` selects A(u) for semilinear models and is ignored
// otherwise; `v` is the additive control vector.
struct ControlInput {
  int label = 0;
  VectorXd v;

  static ControlInput additive(const VectorXd& u) { return ControlInput{0, u}; }
  static ControlInput additive(double u);
  static ControlInput semilinear(int label, const VectorXd& v) { return ControlInput{label, v}; }
};

struct SeedProvenance {
  std::uint64_t master = 0;
  std::uint64_t index = 0;
};

struct Trajectory {
  std::vector<VectorXd> states;        // x_0 .. x_T
  std::vector<ControlInput> controls;  // u_0 .. u_{T-1}
  std::vector<VectorXd> noise;         // w_0 .. w_{T-1}
  SeedProvenance seed;

  int horizon() const { return static_cast<int>(controls.size()); }
};

struct TrajectoryEnsemble {
  std::vector<Trajectory> trajectories;
  std::uint64_t master_seed = 0;

  int count() const { return static_cast<int>(trajectories.size()); }
  int horizon() const { return trajectories.empty() ? 0 : trajectories.front().horizon(); }
};

// One step of x_{t+1} = f(x_t, u_t, w_t) for the model's map kind.
VectorXd step(const SystemModel& model, const VectorXd& x, const ControlInput& u, const VectorXd& w);

// Open-loop trajectory for given control and noise sequences (equal length).
Trajectory simulate(const SystemModel& model, const VectorXd& x0,
                    const std::vector<ControlInput>& controls,
                    const std::vector<VectorXd>& noise);

// log2 |det Df(x)| in bits. Requires the model to carry a Jacobian profile.
double jacobian_logdet(const SystemModel& model, const VectorXd& x);

// n open-loop trajectories with x0 ~ pi0 and w ~ nu^T, drawn from substream
// (seed, trajectory index). `controls` must have length `horizon` or be empty
// (interpreted as zero control).
TrajectoryEnsemble sample_ensemble(const SystemModel& model, const std::vector<ControlInput>& controls,
                                   int count, int horizon, std::uint64_t seed);

// Named drift constructors.
Drift linear_drift(const MatrixXd& a);
Drift scalar_gain_drift(double a);
Drift identity_drift();
// Scalar expanding map of slope 2 near the origin whose expansion exponent
// decays like 1/sqrt(|x|): f'(x) = 2 for |x| <= 1, 2^(1/sqrt(|x|)) otherwise.
Drift expanding_sqrt_drift();

// Inverse of a strictly monotone scalar drift, solved by bisection.
double scalar_drift_inverse(const Drift& drift, double y);

// Convenience constructors for scalar systems x' = f(x) + u + w.
SystemModel make_scalar_additive(const Drift& drift, const Distribution& noise, const Distribution& init);

}  // namespace stabcap

#endif
