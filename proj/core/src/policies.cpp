#include "cmabfs/policies.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Cholesky>

namespace cmabfs {

LinUCBPolicy::LinUCBPolicy(int arm_count, int dimension, double alpha_ucb)
    : dimension_(dimension), alpha_ucb_(alpha_ucb) {
  if (arm_count < 1) throw std::invalid_argument("LinUCBPolicy: arm_count must be positive");
  if (dimension < 1) throw std::invalid_argument("LinUCBPolicy: dimension must be positive");
  if (alpha_ucb < 0) throw std::invalid_argument("LinUCBPolicy: alpha_ucb must be >= 0");
  design_.assign(static_cast<std::size_t>(arm_count),
                 Eigen::MatrixXd::Identity(dimension, dimension));
  response_.assign(static_cast<std::size_t>(arm_count), Eigen::VectorXd::Zero(dimension));
}

int LinUCBPolicy::select(const Eigen::VectorXd& x) const {
  if (x.size() != dimension_) throw std::invalid_argument("LinUCBPolicy: dimension mismatch");
  int best = 0;
  double best_ucb = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < arm_count(); ++a) {
    const Eigen::LLT<Eigen::MatrixXd> llt(design_[static_cast<std::size_t>(a)]);
    const Eigen::VectorXd theta = llt.solve(response_[static_cast<std::size_t>(a)]);
    const double width = x.dot(llt.solve(x));
    const double ucb = theta.dot(x) + alpha_ucb_ * std::sqrt(std::max(width, 0.0));
    if (ucb > best_ucb) {
      best_ucb = ucb;
      best = a;
    }
  }
  return best;
}

void LinUCBPolicy::update(int arm, const Eigen::VectorXd& x, double reward) {
  if (arm < 0 || arm >= arm_count()) throw std::invalid_argument("LinUCBPolicy: bad arm id");
  if (x.size() != dimension_) throw std::invalid_argument("LinUCBPolicy: dimension mismatch");
  design_[static_cast<std::size_t>(arm)].noalias() += x * x.transpose();
  response_[static_cast<std::size_t>(arm)].noalias() += reward * x;
}

Eigen::VectorXd quadratic_expand(const Eigen::VectorXd& x) {
  Eigen::VectorXd out(2 * x.size());
  out.head(x.size()) = x;
  out.tail(x.size()) = x.array().square();
  return out;
}

CohortTSPolicy::CohortTSPolicy(int arm_count, int cohort_count, std::uint64_t seed)
    : arm_count_(arm_count), rng_(seed) {
  if (arm_count < 1) throw std::invalid_argument("CohortTSPolicy: arm_count must be positive");
  if (cohort_count < 1) throw std::invalid_argument("CohortTSPolicy: cohort_count must be positive");
  posteriors_.assign(static_cast<std::size_t>(cohort_count),
                     std::vector<BetaParams>(static_cast<std::size_t>(arm_count)));
}

double CohortTSPolicy::sample_beta(const BetaParams& p) {
  std::gamma_distribution<double> ga(p.a, 1.0);
  std::gamma_distribution<double> gb(p.b, 1.0);
  const double x = ga(rng_);
  const double y = gb(rng_);
  const double denom = x + y;
  return denom > 0 ? x / denom : 0.5;
}

int CohortTSPolicy::select(int cohort) {
  if (cohort < 0 || cohort >= cohort_count())
    throw std::invalid_argument("CohortTSPolicy: cohort out of range");
  const auto& arms = posteriors_[static_cast<std::size_t>(cohort)];
  int best = 0;
  double best_draw = -1.0;
  for (int a = 0; a < arm_count_; ++a) {
    const double draw = sample_beta(arms[static_cast<std::size_t>(a)]);
    if (draw > best_draw) {
      best_draw = draw;
      best = a;
    }
  }
  return best;
}

void CohortTSPolicy::update(int cohort, int arm, int reward) {
  if (cohort < 0 || cohort >= cohort_count())
    throw std::invalid_argument("CohortTSPolicy: cohort out of range");
  if (arm < 0 || arm >= arm_count_) throw std::invalid_argument("CohortTSPolicy: bad arm id");
  if (reward != 0 && reward != 1) throw std::invalid_argument("CohortTSPolicy: reward must be 0/1");
  auto& p = posteriors_[static_cast<std::size_t>(cohort)][static_cast<std::size_t>(arm)];
  p.a += reward;
  p.b += 1 - reward;
}

std::pair<double, double> CohortTSPolicy::posterior(int cohort, int arm) const {
  const auto& p = posteriors_.at(static_cast<std::size_t>(cohort)).at(static_cast<std::size_t>(arm));
  return {p.a, p.b};
}

}  // namespace cmabfs
