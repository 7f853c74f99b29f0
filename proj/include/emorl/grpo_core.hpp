#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "emorl/reward_engine.hpp"
#include "emorl/rng.hpp"
#include "emorl/ser_sim.hpp"

namespace emorl {

// Linear-softmax policy over a fixed discrete action space. One categorical
// action per response, so sequence-level log-probabilities are exact.
struct PolicyParams {
  Eigen::MatrixXd weights;  // state_dim x action_count
  std::string label_set_name;
  int variant_count = kFormatVariantCount;

  int state_dim() const { return static_cast<int>(weights.rows()); }
  int action_count() const { return static_cast<int>(weights.cols()); }

  static PolicyParams zeros(int state_dim, int action_count, std::string label_set_name = {});
};

// Log-probabilities of every action under the temperature-scaled softmax.
Eigen::VectorXd action_log_probs(const PolicyParams& policy, const Eigen::VectorXd& state,
                                 double temperature);
Eigen::VectorXd action_probs(const PolicyParams& policy, const Eigen::VectorXd& state,
                             double temperature);

struct GroupSample {
  std::vector<int> actions;
  Eigen::VectorXd log_probs;  // log-prob of each drawn action, under the sampling policy
};

// G i.i.d. draws from the policy at `state`. Recorded log-probs match the
// distribution the draws came from.
GroupSample sample_group(const PolicyParams& policy, const Eigen::VectorXd& state, int group_size,
                         double temperature, Rng& rng);

// Everything about one prompt's response group needed to take an update step.
// logp_current holds the values recorded at sampling time; the loss and
// gradient recompute current log-probs from the policy argument so the same
// group can serve multiple inner epochs.
struct SampledGroup {
  Eigen::VectorXd state;
  double temperature = 1.0;
  std::vector<int> actions;
  std::vector<std::string> rendered;
  Eigen::VectorXd logp_current;
  Eigen::VectorXd logp_old;
  Eigen::VectorXd logp_ref;
  Eigen::VectorXd rewards;
  Eigen::VectorXd advantages;
};

// Group-normalized advantages (r - mean) / std with the population standard
// deviation. Degenerate groups (std <= 1e-12) get all-zero advantages.
Eigen::VectorXd compute_advantages(const Eigen::VectorXd& rewards);

// Mean over the group of the per-sample unbiased estimator
// exp(d) - d - 1 with d = logp_ref - logp_current. Nonnegative; zero exactly
// when the vectors coincide.
double kl_penalty(const Eigen::VectorXd& logp_current, const Eigen::VectorXd& logp_ref);

// Clipped-ratio surrogate plus KL penalty:
//   -(1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) + beta * KL,
// with rho_i = exp(logp_current_i - logp_old_i) and logp_current recomputed
// from `policy`. Throws NonFiniteLoss when any intermediate is non-finite.
double surrogate_loss(const PolicyParams& policy, const SampledGroup& group,
                      double kl_coefficient, double clip_epsilon);

// Closed-form gradient of surrogate_loss with respect to the weights.
Eigen::MatrixXd policy_gradient(const PolicyParams& policy, const SampledGroup& group,
                                double kl_coefficient, double clip_epsilon);

struct TrainerConfig {
  int group_size = 6;
  long steps = 300;
  double learning_rate = 0.05;
  double kl_coefficient = 0.04;
  double clip_epsilon = 0.2;
  double temperature = 1.0;
  int inner_epochs = 1;
  std::uint64_t seed = 0;
  RewardConfig reward;
  ReasoningPattern pattern = ReasoningPattern::kEsr;
};

// Throws ConfigError when a field is out of range.
void validate(const TrainerConfig& config);

struct StepLog {
  long step = 0;
  double mean_reward = 0.0;
  double format_rate = 0.0;
  double accuracy = 0.0;
  double ua = 0.0;  // fraction of the group answering exactly the gold label
  double kl = 0.0;
  double alpha = 0.0;
};

struct TrainingRun {
  PolicyParams final_policy;
  std::vector<StepLog> curve;
  bool aborted = false;
  std::string abort_reason;
};

// One GRPO run: per step, draw an episode, sample a group, score it, compute
// advantages, and take `inner_epochs` gradient steps. The reference policy is
// frozen at initialization; the old policy is snapshotted each step. Aborts
// with partial logs if the loss goes non-finite.
TrainingRun train(const TrainerConfig& config, const Environment& env);

}  // namespace emorl
