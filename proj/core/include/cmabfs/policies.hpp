#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace cmabfs {

// Disjoint LinUCB: per-arm ridge statistics A_i = I + sum x x^T (symmetric
// positive definite by construction) and b_i = sum r x. Selection solves the
// ridge system with a Cholesky factorization rather than an explicit inverse.
class LinUCBPolicy {
 public:
  LinUCBPolicy(int arm_count, int dimension, double alpha_ucb = 1.0);

  // argmax_i theta_i . x + alpha_ucb * sqrt(x^T A_i^-1 x), ties to the
  // lowest arm id. Throws std::invalid_argument on dimension mismatch.
  int select(const Eigen::VectorXd& x) const;

  // A_arm += x x^T, b_arm += reward * x.
  void update(int arm, const Eigen::VectorXd& x, double reward);

  int arm_count() const { return static_cast<int>(design_.size()); }
  int dimension() const { return dimension_; }
  const Eigen::MatrixXd& design(int arm) const { return design_[arm]; }
  const Eigen::VectorXd& response(int arm) const { return response_[arm]; }

 private:
  int dimension_;
  double alpha_ucb_;
  std::vector<Eigen::MatrixXd> design_;    // A_i
  std::vector<Eigen::VectorXd> response_;  // b_i
};

// [x_1..x_d, x_1^2..x_d^2]; squares only, no cross terms.
Eigen::VectorXd quadratic_expand(const Eigen::VectorXd& x);

// Thompson sampling over (cohort, arm) Beta posteriors, cohorts being the
// bins of one feature. Beta parameters start at (1, 1) and never drop below
// 1. Selection is reproducible given the seed and the call sequence.
class CohortTSPolicy {
 public:
  CohortTSPolicy(int arm_count, int cohort_count, std::uint64_t seed);

  // Samples one Beta draw per arm in the cohort and returns the argmax.
  // Throws std::invalid_argument on an out-of-range cohort.
  int select(int cohort);

  // a += reward, b += 1 - reward for that (cohort, arm) only.
  void update(int cohort, int arm, int reward);

  int arm_count() const { return arm_count_; }
  int cohort_count() const { return static_cast<int>(posteriors_.size()); }
  std::pair<double, double> posterior(int cohort, int arm) const;

 private:
  struct BetaParams {
    double a = 1.0;
    double b = 1.0;
  };

  double sample_beta(const BetaParams& p);

  int arm_count_;
  std::vector<std::vector<BetaParams>> posteriors_;
  std::mt19937_64 rng_;
};

}  // namespace cmabfs
