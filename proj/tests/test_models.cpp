#include <doctest.h>

#include <cmath>

#include "stabcap/models.hpp"

using namespace stabcap;

namespace {

VectorXd vec1(double x) {
  VectorXd v(1);
  v << x;
  return v;
}

SystemModel doubling_model() {
  return make_scalar_additive(scalar_gain_drift(2.0), Distribution::zero(), Distribution::point_mass(1.0));
}

}  // namespace

TEST_CASE("step evaluates the additive map") {
  const SystemModel model = doubling_model();
  CHECK(step(model, vec1(1.0), ControlInput::additive(0.0), vec1(0.0))[0] == doctest::Approx(2.0));
  CHECK(step(model, vec1(1.0), ControlInput::additive(-2.0), vec1(0.5))[0] == doctest::Approx(0.5));
}

TEST_CASE("step evaluates the semilinear map") {
  SystemModel model;
  model.dimension = 2;
  model.kind = MapKind::semilinear;
  SemilinearModel sl;
  sl.labels = {"u1"};
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  sl.matrices = {a};
  sl.input = MatrixXd::Zero(2, 1);
  sl.control_dim = 1;
  model.semilinear = sl;

  VectorXd x(2);
  x << 1.0, 1.0;
  const VectorXd next = step(model, x, ControlInput::semilinear(0, VectorXd::Zero(1)), VectorXd::Zero(2));
  CHECK(next[0] == doctest::Approx(2.0));
  CHECK(next[1] == doctest::Approx(3.0));
}

TEST_CASE("step errors") {
  const SystemModel model = doubling_model();
  CHECK_THROWS_AS(step(model, VectorXd::Zero(2), ControlInput::additive(0.0), vec1(0.0)), InputError);
  // Repeated doubling overflows to inf eventually.
  SystemModel m = doubling_model();
  VectorXd x = vec1(1e308);
  CHECK_THROWS_AS(step(m, x, ControlInput::additive(0.0), vec1(0.0)), NumericError);
}

TEST_CASE("simulate geometric growth and hand recursion") {
  const SystemModel model = doubling_model();
  std::vector<ControlInput> zero(3, ControlInput::additive(0.0));
  std::vector<VectorXd> noise(3, vec1(0.0));
  const Trajectory traj = simulate(model, vec1(1.0), zero, noise);
  REQUIRE(traj.states.size() == 4);
  CHECK(traj.states[0][0] == 1.0);
  CHECK(traj.states[1][0] == 2.0);
  CHECK(traj.states[2][0] == 4.0);
  CHECK(traj.states[3][0] == 8.0);

  // Hand recursion: x'=2x-2 from 1 gives 1, 0, -2, -6.
  std::vector<ControlInput> minus_two(3, ControlInput::additive(-2.0));
  const Trajectory pulled = simulate(model, vec1(1.0), minus_two, noise);
  CHECK(pulled.states[1][0] == 0.0);
  CHECK(pulled.states[2][0] == -2.0);
  CHECK(pulled.states[3][0] == -6.0);
}

TEST_CASE("simulate annotates the failing step") {
  const SystemModel model = doubling_model();
  std::vector<ControlInput> controls(3, ControlInput::additive(0.0));
  std::vector<VectorXd> noise(2, vec1(0.0));
  CHECK_THROWS_AS(simulate(model, vec1(1.0), controls, noise), InputError);
}

TEST_CASE("semilinear simulate matches the homogeneous matrix product") {
  SystemModel model;
  model.dimension = 2;
  model.kind = MapKind::semilinear;
  SemilinearModel sl;
  sl.labels = {"u1"};
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  sl.matrices = {a};
  sl.input = MatrixXd::Zero(2, 1);
  sl.control_dim = 1;
  model.semilinear = sl;

  VectorXd x0(2);
  x0 << 1.0, 0.0;
  std::vector<ControlInput> controls(2, ControlInput::semilinear(0, VectorXd::Zero(1)));
  std::vector<VectorXd> noise(2, VectorXd::Zero(2));
  const Trajectory traj = simulate(model, x0, controls, noise);
  CHECK(traj.states[1][0] == doctest::Approx(2.0));
  CHECK(traj.states[1][1] == doctest::Approx(0.0));
  CHECK(traj.states[2][0] == doctest::Approx(4.0));
  CHECK(traj.states[2][1] == doctest::Approx(0.0));
}

TEST_CASE("semilinear consistency against variation-of-constants over random families") {
  Rng rng(7);
  for (int family = 0; family < 20; ++family) {
    SystemModel model;
    model.dimension = 2;
    model.kind = MapKind::semilinear;
    SemilinearModel sl;
    sl.labels = {"u1", "u2"};
    for (int u = 0; u < 2; ++u) {
      MatrixXd a(2, 2);
      do {
        for (int i = 0; i < 4; ++i) a(i / 2, i % 2) = rng.uniform(-1.5, 1.5);
      } while (std::abs(a.determinant()) < 1e-3);
      sl.matrices.push_back(a);
    }
    sl.input = MatrixXd::Zero(2, 1);
    sl.control_dim = 1;
    model.semilinear = sl;

    const int horizon = 20;
    std::vector<int> labels;
    std::vector<ControlInput> controls;
    for (int t = 0; t < horizon; ++t) {
      const int label = static_cast<int>(rng.next_below(2));
      labels.push_back(label);
      controls.push_back(ControlInput::semilinear(label, VectorXd::Zero(1)));
    }
    VectorXd x0(2);
    x0 << rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    const Trajectory traj = simulate(model, x0, controls, std::vector<VectorXd>(horizon, VectorXd::Zero(2)));
    const VectorXd expected = model.semilinear->transition(labels) * x0;
    const double scale = std::max(1.0, expected.norm());
    CHECK((traj.states.back() - expected).norm() / scale < 1e-10);
  }
}

TEST_CASE("jacobian logdet profiles") {
  CHECK(jacobian_logdet(doubling_model(), vec1(17.0)) == doctest::Approx(1.0));

  const SystemModel paper =
      make_scalar_additive(expanding_sqrt_drift(), Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  CHECK(jacobian_logdet(paper, vec1(4.0)) == doctest::Approx(0.5));  // 2^(1/sqrt(4)) has log2 = 1/2
  CHECK(jacobian_logdet(paper, vec1(0.5)) == doctest::Approx(1.0));

  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = 2.0;
  a(1, 1) = 3.0;
  SystemModel linear;
  linear.dimension = 2;
  linear.kind = MapKind::additive;
  linear.drift = linear_drift(a);
  CHECK(jacobian_logdet(linear, VectorXd::Zero(2)) == doctest::Approx(std::log2(6.0)));

  SystemModel no_profile = doubling_model();
  no_profile.drift.logdet2 = nullptr;
  CHECK_THROWS_AS(jacobian_logdet(no_profile, vec1(0.0)), CapabilityError);
}

TEST_CASE("expanding_sqrt drift is continuous and volume expanding") {
  const Drift drift = expanding_sqrt_drift();
  // Continuity at |x| = 1 and slope 2 below it.
  CHECK(drift.map(vec1(1.0))[0] == doctest::Approx(2.0));
  CHECK(drift.map(vec1(1.0 + 1e-9))[0] == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(drift.map(vec1(-1.0))[0] == doctest::Approx(-2.0));
  // Randomized volume-expansion check: log2|f'| >= 0 everywhere.
  Rng rng(99);
  for (int i = 0; i < 10000; ++i) {
    const double x = rng.uniform(-100.0, 100.0);
    CHECK(drift.logdet2(vec1(x)) >= -1e-12);
  }
}

TEST_CASE("scalar drift inverse") {
  const Drift doubling = scalar_gain_drift(2.0);
  CHECK(scalar_drift_inverse(doubling, 3.0) == doctest::Approx(1.5));
  const Drift paper = expanding_sqrt_drift();
  for (double y : {-7.0, -2.0, 0.0, 1.5, 9.0}) {
    const double x = scalar_drift_inverse(paper, y);
    CHECK(paper.map(vec1(x))[0] == doctest::Approx(y).epsilon(1e-9));
  }
}

TEST_CASE("sample_ensemble determinism and degenerate randomness") {
  SystemModel model = doubling_model();
  const TrajectoryEnsemble a = sample_ensemble(model, {}, 3, 2, 42);
  for (const Trajectory& traj : a.trajectories) {
    CHECK(traj.states[0][0] == 1.0);
    CHECK(traj.states[1][0] == 2.0);
    CHECK(traj.states[2][0] == 4.0);
  }
  const TrajectoryEnsemble b = sample_ensemble(model, {}, 3, 2, 42);
  for (int i = 0; i < 3; ++i) {
    for (int t = 0; t <= 2; ++t) {
      CHECK(a.trajectories[i].states[t][0] == b.trajectories[i].states[t][0]);  // bit-identical
    }
  }
}

TEST_CASE("sample_ensemble law of large numbers at n=1e4") {
  SystemModel model =
      make_scalar_additive(identity_drift(), Distribution::zero(), Distribution::uniform(-1.0, 1.0));
  const TrajectoryEnsemble ensemble = sample_ensemble(model, {}, 10000, 1, 7);
  double mean = 0.0;
  for (const Trajectory& traj : ensemble.trajectories) mean += traj.states[0][0];
  mean /= ensemble.count();
  CHECK(std::abs(mean) < 0.05);
}

TEST_CASE("distribution families sample inside their support") {
  Rng rng(3);
  const Distribution tg = Distribution::truncated_gaussian(0.0, 1.0, -0.5, 0.5);
  for (int i = 0; i < 1000; ++i) {
    const double x = tg.sample(rng);
    CHECK(x >= -0.5);
    CHECK(x <= 0.5);
  }
  const Distribution pm = Distribution::point_mass(2.5);
  CHECK(pm.sample(rng) == 2.5);
  CHECK_THROWS_AS(Distribution::uniform(1.0, 0.0), InputError);
}
