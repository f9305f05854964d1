#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Cholesky>

#include "cmabfs/policies.hpp"

using namespace cmabfs;

TEST_CASE("linucb: fresh state ties break to arm 0") {
  LinUCBPolicy policy(3, 2, 1.0);
  Eigen::VectorXd x(2);
  x << 0.7, 1.0;
  CHECK(policy.select(x) == 0);
}

TEST_CASE("linucb: one-update hand example") {
  // d=1, alpha=0.5; after (x=[1], r=1) on arm 0: A_0=2, theta_0=0.5,
  // ucb_0 = 0.5 + 0.5*sqrt(0.5) ~= 0.8536 vs ucb_1 = 0.5
  LinUCBPolicy policy(2, 1, 0.5);
  Eigen::VectorXd x(1);
  x << 1.0;
  policy.update(0, x, 1.0);
  CHECK(policy.design(0)(0, 0) == 2.0);
  CHECK(policy.response(0)(0) == 1.0);
  CHECK(policy.select(x) == 0);
}

TEST_CASE("linucb: zero exploration weight reduces to greedy") {
  LinUCBPolicy policy(2, 1, 0.0);
  Eigen::VectorXd x(1);
  x << 1.0;
  // arm 0 trained to ~0.2, arm 1 to ~0.9
  for (int i = 0; i < 10; ++i) {
    policy.update(0, x, i < 2 ? 1.0 : 0.0);
    policy.update(1, x, i < 9 ? 1.0 : 0.0);
  }
  CHECK(policy.select(x) == 1);
}

TEST_CASE("linucb: updates touch only the chosen arm") {
  LinUCBPolicy policy(2, 2, 1.0);
  Eigen::VectorXd x(2);
  x << 1.0, -2.0;
  policy.update(0, x, 0.0);
  CHECK(policy.design(0) != Eigen::MatrixXd::Identity(2, 2));
  CHECK(policy.response(0) == Eigen::VectorXd::Zero(2));  // reward 0 leaves b alone
  CHECK(policy.design(1) == Eigen::MatrixXd::Identity(2, 2));

  // additivity: updates commute in A and b
  LinUCBPolicy ab(2, 2, 1.0), ba(2, 2, 1.0);
  Eigen::VectorXd y(2);
  y << 0.5, 3.0;
  ab.update(0, x, 1.0);
  ab.update(0, y, 0.0);
  ba.update(0, y, 0.0);
  ba.update(0, x, 1.0);
  CHECK(ab.design(0) == ba.design(0));
  CHECK(ab.response(0) == ba.response(0));

  LinUCBPolicy scalar(2, 1, 1.0);
  Eigen::VectorXd one(1);
  one << 1.0;
  for (int i = 0; i < 7; ++i) scalar.update(0, one, 1.0);
  CHECK(scalar.design(0)(0, 0) == 8.0);  // 1 + n
}

TEST_CASE("linucb: design matrices stay symmetric positive definite") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unit(-3.0, 3.0);
  std::uniform_int_distribution<int> arm_of(0, 2);
  LinUCBPolicy policy(3, 4, 1.0);
  for (int step = 0; step < 500; ++step) {
    Eigen::VectorXd x(4);
    for (int i = 0; i < 4; ++i) x(i) = unit(rng);
    policy.update(arm_of(rng), x, step % 2 ? 1.0 : 0.0);
  }
  for (int a = 0; a < 3; ++a) {
    const Eigen::MatrixXd& A = policy.design(a);
    CHECK(A.isApprox(A.transpose()));
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("linucb: selection stable under 1e-9 design perturbations") {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  LinUCBPolicy policy(3, 2, 1.0);
  Eigen::VectorXd x(2);
  for (int step = 0; step < 60; ++step) {
    x << unit(rng), unit(rng);
    policy.update(static_cast<int>(rng() % 3), x, step % 3 ? 1.0 : 0.0);
  }
  x << 0.8, -0.4;
  const int before = policy.select(x);
  // rank-one nudge of every arm's design matrix at the 1e-9 scale
  Eigen::VectorXd tiny(2);
  tiny << std::sqrt(1e-9), std::sqrt(0.5e-9);
  for (int a = 0; a < 3; ++a) policy.update(a, tiny, 0.0);
  CHECK(policy.select(x) == before);
}

TEST_CASE("linucb: dimension mismatch throws") {
  LinUCBPolicy policy(2, 3, 1.0);
  Eigen::VectorXd wrong(2);
  wrong << 1.0, 2.0;
  CHECK_THROWS_AS(policy.select(wrong), std::invalid_argument);
  CHECK_THROWS_AS(policy.update(0, wrong, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(policy.update(5, Eigen::VectorXd::Zero(3), 1.0), std::invalid_argument);
}

TEST_CASE("quadratic_expand: values then squares") {
  Eigen::VectorXd x(2);
  x << 2.0, 3.0;
  Eigen::VectorXd expanded = quadratic_expand(x);
  REQUIRE(expanded.size() == 4);
  CHECK(expanded(0) == 2.0);
  CHECK(expanded(1) == 3.0);
  CHECK(expanded(2) == 4.0);
  CHECK(expanded(3) == 9.0);

  Eigen::VectorXd zero(1);
  zero << 0.0;
  CHECK(quadratic_expand(zero) == Eigen::Vector2d(0.0, 0.0));
  Eigen::VectorXd neg(1);
  neg << -1.0;
  CHECK(quadratic_expand(neg) == Eigen::Vector2d(-1.0, 1.0));
}

TEST_CASE("cohort ts: single arm always selected") {
  CohortTSPolicy policy(1, 3, 42);
  for (int i = 0; i < 20; ++i) CHECK(policy.select(1) == 0);
}

TEST_CASE("cohort ts: symmetric priors select both arms near 50%") {
  CohortTSPolicy policy(2, 1, 7);
  int arm0 = 0;
  for (int i = 0; i < 10000; ++i) arm0 += policy.select(0) == 0;
  CHECK(arm0 > 4800);
  CHECK(arm0 < 5200);
}

TEST_CASE("cohort ts: near-degenerate posteriors dominate") {
  CohortTSPolicy policy(2, 1, 13);
  for (int i = 0; i < 99; ++i) policy.update(0, 0, 1);
  for (int i = 0; i < 99; ++i) policy.update(0, 1, 0);
  CHECK(policy.posterior(0, 0) == std::pair<double, double>{100.0, 1.0});
  CHECK(policy.posterior(0, 1) == std::pair<double, double>{1.0, 100.0});
  int arm0 = 0;
  for (int i = 0; i < 10000; ++i) arm0 += policy.select(0) == 0;
  CHECK(arm0 >= 9900);
}

TEST_CASE("cohort ts: conjugate updates and cohort isolation") {
  CohortTSPolicy policy(2, 2, 1);
  policy.update(0, 0, 1);
  CHECK(policy.posterior(0, 0) == std::pair<double, double>{2.0, 1.0});  // mean 2/3
  policy.update(0, 0, 1);
  policy.update(0, 0, 1);
  policy.update(0, 0, 0);
  CHECK(policy.posterior(0, 0) == std::pair<double, double>{4.0, 2.0});
  CHECK(policy.posterior(1, 0) == std::pair<double, double>{1.0, 1.0});
  CHECK(policy.posterior(0, 1) == std::pair<double, double>{1.0, 1.0});

  CHECK_THROWS_AS(policy.select(5), std::invalid_argument);
  CHECK_THROWS_AS(policy.update(0, 0, 2), std::invalid_argument);
  CHECK_THROWS_AS(policy.update(9, 0, 1), std::invalid_argument);
}

TEST_CASE("cohort ts: seeded selection sequence is reproducible") {
  CohortTSPolicy a(3, 2, 2024), b(3, 2, 2024);
  for (int i = 0; i < 200; ++i) {
    const int cohort = i % 2;
    const int sa = a.select(cohort);
    CHECK(sa == b.select(cohort));
    a.update(cohort, sa, i % 3 == 0);
    b.update(cohort, sa, i % 3 == 0);
  }
}
