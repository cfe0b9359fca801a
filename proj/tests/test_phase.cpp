#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "dmpanim/error.hpp"
#include "dmpanim/phase.hpp"
#include "test_support.hpp"

#include <cmath>
#include <random>

using namespace dmpanim;

namespace {

void check_shape(const PhaseFunction& phi) {
  const auto& v = phi.values();
  REQUIRE(v.size() == phi.total_steps() + 1);
  CHECK(v.front() == 1.0);
  CHECK(v.back() == 0.0);
  for (std::size_t n = 1; n < v.size(); ++n) {
    REQUIRE(v[n] <= v[n - 1]);
    REQUIRE(v[n] >= 0.0);
    REQUIRE(v[n] <= 1.0);
  }
}

}  // namespace

TEST_CASE("linear phase") {
  CHECK(linear_phase(0, 100) == 1.0);
  CHECK(linear_phase(100, 100) == 0.0);
  CHECK(linear_phase(25, 100) == 0.75);
  CHECK_THROWS_AS(linear_phase(101, 100), ValidationError);
  CHECK_THROWS_AS(linear_phase(0, 0), ValidationError);
  const PhaseFunction phi = PhaseFunction::linear(100);
  check_shape(phi);
  CHECK(phi.kind() == PhaseFunction::Kind::Linear);
  for (std::size_t n = 0; n <= 100; ++n) CHECK(phi(n) == linear_phase(n, 100));
  CHECK(phi(150) == 0.0);
}

TEST_CASE("slow in / slow out") {
  const std::size_t N = 100;
  const PhaseFunction phi = PhaseFunction::slow(N, 10.0);
  check_shape(phi);
  CHECK(phi.kind() == PhaseFunction::Kind::SlowSigmoid);
  CHECK(phi(N / 2) == doctest::Approx(0.5).epsilon(1e-12));

  SUBCASE("symmetric about the midpoint") {
    for (std::size_t n = 0; n <= N; ++n) CHECK(phi(n) + phi(N - n) == doctest::Approx(1.0));
  }

  SUBCASE("slower than linear at both ends for k >= 8") {
    for (double k : {8.0, 10.0, 20.0, 50.0}) {
      for (std::size_t steps : {10u, 100u, 1000u}) {
        const PhaseFunction s = PhaseFunction::slow(steps, k);
        // Oracle: normalised logistic evaluated directly.
        auto logistic = [&](double u) { return 1.0 / (1.0 + std::exp(k * (u - 0.5))); };
        const double lo = logistic(1.0), hi = logistic(0.0);
        const double u1 = 1.0 / static_cast<double>(steps);
        const double expected = 1.0 - (logistic(u1) - lo) / (hi - lo);
        CHECK(1.0 - s(1) == doctest::Approx(expected).epsilon(1e-9));
        CHECK(std::abs(s(1) - s(0)) < 1.0 / static_cast<double>(steps));
        CHECK(std::abs(s(steps) - s(steps - 1)) < 1.0 / static_cast<double>(steps));
      }
    }
  }

  CHECK_THROWS_AS(PhaseFunction::slow(N, 0.0), ValidationError);
  CHECK_THROWS_AS(PhaseFunction::slow(N, -1.0), ValidationError);
  CHECK_THROWS_AS(PhaseFunction::slow(N, NAN), ValidationError);
}

TEST_CASE("timing sectors") {
  const std::size_t N = 100;

  SUBCASE("one sector at speed 1 is the linear phase") {
    const TimingSector one{1.0, 1.0};
    const PhaseFunction phi = PhaseFunction::timing(N, std::span(&one, 1));
    check_shape(phi);
    for (std::size_t n = 0; n <= N; ++n) CHECK(std::abs(phi(n) - linear_phase(n, N)) < 1e-9);
  }

  SUBCASE("equal speeds in several sectors are linear too") {
    const std::vector<TimingSector> s{{0.2, 1.5}, {0.5, 1.5}, {0.3, 1.5}};
    const PhaseFunction phi = PhaseFunction::timing(N, s);
    for (std::size_t n = 0; n <= N; ++n) CHECK(std::abs(phi(n) - linear_phase(n, N)) < 1e-9);
  }

  SUBCASE("slow then fast consumes less phase early") {
    const std::vector<TimingSector> s{{0.5, 0.5}, {0.5, 2.0}};
    const PhaseFunction phi = PhaseFunction::timing(N, s);
    check_shape(phi);
    // Constructed rates: consumed(u) = u * 0.5 / 1.25 for u <= 0.5.
    for (std::size_t n = 1; n < N / 2; ++n) {
      CHECK(phi(n) >= linear_phase(n, N));
      const double u = static_cast<double>(n) / N;
      CHECK(phi(n) == doctest::Approx(1.0 - u * 0.5 / 1.25).epsilon(2e-2));
    }
  }

  SUBCASE("fast then slow mirrors it") {
    const std::vector<TimingSector> s{{0.5, 2.0}, {0.5, 0.5}};
    const PhaseFunction phi = PhaseFunction::timing(N, s);
    check_shape(phi);
    for (std::size_t n = 1; n < N / 2; ++n) CHECK(phi(n) <= linear_phase(n, N));
  }

  SUBCASE("invalid sectors are rejected") {
    const std::vector<TimingSector> neg{{0.5, -1.0}, {0.5, 1.0}};
    const std::vector<TimingSector> zero_fraction{{0.0, 1.0}, {1.0, 1.0}};
    const std::vector<TimingSector> short_sum{{0.5, 1.0}, {0.4, 1.0}};
    const std::vector<TimingSector> none;
    CHECK_THROWS_AS(PhaseFunction::timing(N, neg), ValidationError);
    CHECK_THROWS_AS(PhaseFunction::timing(N, zero_fraction), ValidationError);
    CHECK_THROWS_AS(PhaseFunction::timing(N, short_sum), ValidationError);
    CHECK_THROWS_AS(PhaseFunction::timing(N, none), ValidationError);
  }
}

TEST_CASE("randomised phase shapes") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> k(0.01, 60.0);
  std::uniform_int_distribution<std::size_t> steps(1, 400);
  for (int i = 0; i < 300; ++i) {
    const std::size_t N = steps(rng);
    CAPTURE(N);
    check_shape(PhaseFunction::slow(N, k(rng)));
    check_shape(PhaseFunction::timing(N, testing::random_sectors(rng, 0.05, 20.0)));
  }
}

TEST_CASE("tiny step counts") {
  for (std::size_t N : {1u, 2u, 3u}) {
    check_shape(PhaseFunction::linear(N));
    check_shape(PhaseFunction::slow(N, 10.0));
    const std::vector<TimingSector> s{{0.3, 0.2}, {0.7, 3.0}};
    check_shape(PhaseFunction::timing(N, s));
  }
  CHECK_THROWS_AS(PhaseFunction::linear(0), ValidationError);
}
