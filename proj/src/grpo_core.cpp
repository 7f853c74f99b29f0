#include "emorl/grpo_core.hpp"

#include <algorithm>
#include <cmath>

namespace emorl {

namespace {

constexpr double kDegenerateStd = 1e-12;

void require_finite(double x, const char* what) {
  if (!std::isfinite(x)) throw NonFiniteLoss(std::string(what) + " is non-finite");
}

}  // namespace

PolicyParams PolicyParams::zeros(int state_dim, int action_count, std::string label_set_name) {
  PolicyParams p;
  p.weights = Eigen::MatrixXd::Zero(state_dim, action_count);
  p.label_set_name = std::move(label_set_name);
  return p;
}

Eigen::VectorXd action_log_probs(const PolicyParams& policy, const Eigen::VectorXd& state,
                                 double temperature) {
  Eigen::VectorXd logits = policy.weights.transpose() * state / temperature;
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return logits.array() - lse;
}

Eigen::VectorXd action_probs(const PolicyParams& policy, const Eigen::VectorXd& state,
                             double temperature) {
  return action_log_probs(policy, state, temperature).array().exp();
}

GroupSample sample_group(const PolicyParams& policy, const Eigen::VectorXd& state, int group_size,
                         double temperature, Rng& rng) {
  if (group_size < 2) throw ConfigError("group size must be at least 2");
  const Eigen::VectorXd logp = action_log_probs(policy, state, temperature);
  const Eigen::VectorXd probs = logp.array().exp();
  GroupSample out;
  out.actions.resize(static_cast<std::size_t>(group_size));
  out.log_probs.resize(group_size);
  for (int i = 0; i < group_size; ++i) {
    const int a = rng.categorical({probs.data(), static_cast<std::size_t>(probs.size())});
    out.actions[static_cast<std::size_t>(i)] = a;
    out.log_probs[i] = logp[a];
  }
  return out;
}

Eigen::VectorXd compute_advantages(const Eigen::VectorXd& rewards) {
  const auto g = rewards.size();
  if (g < 2) throw ConfigError("advantage normalization needs at least 2 rewards");
  const double mean = rewards.mean();
  const double var = (rewards.array() - mean).square().sum() / static_cast<double>(g);
  const double std = std::sqrt(var);
  if (std <= kDegenerateStd) return Eigen::VectorXd::Zero(g);
  return (rewards.array() - mean) / std;
}

double kl_penalty(const Eigen::VectorXd& logp_current, const Eigen::VectorXd& logp_ref) {
  if (logp_current.size() != logp_ref.size())
    throw ConfigError("log-prob vectors differ in length");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < logp_current.size(); ++i) {
    const double d = logp_ref[i] - logp_current[i];
    sum += std::expm1(d) - d;  // exp(d) - d - 1
  }
  return sum / static_cast<double>(logp_current.size());
}

namespace {

struct SurrogateForward {
  Eigen::VectorXd logp_current;  // recomputed from the policy
  Eigen::VectorXd probs;
  Eigen::VectorXd rho;
  Eigen::VectorXd clipped_rho;
  double surrogate = 0.0;  // pre-negation mean of min(...)
  double kl = 0.0;
};

SurrogateForward forward(const PolicyParams& policy, const SampledGroup& group,
                         double clip_epsilon) {
  const auto g = static_cast<Eigen::Index>(group.actions.size());
  if (g < 1) throw ConfigError("empty group");
  if (group.logp_old.size() != g || group.logp_ref.size() != g || group.advantages.size() != g)
    throw ConfigError("group vectors have mismatched lengths");

  SurrogateForward f;
  const Eigen::VectorXd all_logp = action_log_probs(policy, group.state, group.temperature);
  f.probs = all_logp.array().exp();
  f.logp_current.resize(g);
  f.rho.resize(g);
  f.clipped_rho.resize(g);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < g; ++i) {
    const int a = group.actions[static_cast<std::size_t>(i)];
    f.logp_current[i] = all_logp[a];
    const double rho = std::exp(f.logp_current[i] - group.logp_old[i]);
    require_finite(rho, "importance ratio");
    f.rho[i] = rho;
    f.clipped_rho[i] = std::clamp(rho, 1.0 - clip_epsilon, 1.0 + clip_epsilon);
    acc += std::min(rho * group.advantages[i], f.clipped_rho[i] * group.advantages[i]);
  }
  f.surrogate = acc / static_cast<double>(g);
  f.kl = kl_penalty(f.logp_current, group.logp_ref);
  require_finite(f.surrogate, "surrogate");
  require_finite(f.kl, "kl penalty");
  return f;
}

}  // namespace

double surrogate_loss(const PolicyParams& policy, const SampledGroup& group,
                      double kl_coefficient, double clip_epsilon) {
  const SurrogateForward f = forward(policy, group, clip_epsilon);
  const double loss = -f.surrogate + kl_coefficient * f.kl;
  require_finite(loss, "loss");
  return loss;
}

Eigen::MatrixXd policy_gradient(const PolicyParams& policy, const SampledGroup& group,
                                double kl_coefficient, double clip_epsilon) {
  const SurrogateForward f = forward(policy, group, clip_epsilon);
  const auto g = static_cast<Eigen::Index>(group.actions.size());
  const auto actions = static_cast<Eigen::Index>(policy.action_count());

  // dlogp(a_i)/dW[:,k] = state * (1[k == a_i] - p_k) / temperature, so the
  // gradient is the outer product of the state with an action-space vector
  // accumulating each sample's coefficient.
  Eigen::VectorXd coeff_by_action = Eigen::VectorXd::Zero(actions);
  double coeff_total = 0.0;
  for (Eigen::Index i = 0; i < g; ++i) {
    const double a_i = group.advantages[i];
    const bool unclipped_active = f.rho[i] * a_i <= f.clipped_rho[i] * a_i;
    const double surr_coeff = unclipped_active ? a_i * f.rho[i] : 0.0;
    const double d = group.logp_ref[i] - f.logp_current[i];
    const double kl_coeff = kl_coefficient * (1.0 - std::exp(d));
    const double c = (-surr_coeff + kl_coeff) / static_cast<double>(g);
    coeff_by_action[group.actions[static_cast<std::size_t>(i)]] += c;
    coeff_total += c;
  }
  const Eigen::VectorXd v = coeff_by_action - coeff_total * f.probs;
  Eigen::MatrixXd grad = (group.state * v.transpose()) / group.temperature;
  if (!grad.allFinite()) throw NonFiniteLoss("gradient is non-finite");
  return grad;
}

void validate(const TrainerConfig& config) {
  if (config.group_size < 2) throw ConfigError("group_size must be >= 2");
  if (config.steps < 0) throw ConfigError("steps must be >= 0");
  if (!(config.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (config.kl_coefficient < 0.0) throw ConfigError("kl_coefficient must be >= 0");
  if (!(config.clip_epsilon > 0.0 && config.clip_epsilon < 1.0))
    throw ConfigError("clip_epsilon must lie in (0, 1)");
  if (!(config.temperature > 0.0)) throw ConfigError("temperature must be > 0");
  if (config.inner_epochs < 1) throw ConfigError("inner_epochs must be >= 1");
  if (config.reward.gamma < 0.0 || config.reward.gamma >= 1.0)
    throw ConfigError("gamma must lie in [0, 1)");
  if (config.reward.alpha_schedule.kind == AlphaSchedule::Kind::kConstant &&
      (config.reward.alpha_schedule.value < 0.0 || config.reward.alpha_schedule.value > 1.0))
    throw ConfigError("constant alpha must lie in [0, 1]");
  if (config.reward.alpha_schedule.kind == AlphaSchedule::Kind::kLinearDecay &&
      config.reward.alpha_schedule.total_steps < 1)
    throw InvalidSchedule("linear decay needs total_steps >= 1");
}

TrainingRun train(const TrainerConfig& config, const Environment& env) {
  validate(config);
  const LabelSet& set = env.label_set();
  const TransitionMatrix similarity = build_transition_matrix(set);
  const int state_dim = env.config().feature_dim + 1;

  TrainingRun run;
  PolicyParams policy = PolicyParams::zeros(state_dim, env.action_count(), env.config().label_set);
  const PolicyParams reference = policy;  // frozen at initialization
  Rng sampler = Rng(config.seed).split(RngStream::kSampler);

  run.curve.reserve(static_cast<std::size_t>(config.steps));
  const int g = config.group_size;

  for (long step = 0; step < config.steps; ++step) {
    const SyntheticEpisode episode = env.episode_at(static_cast<std::uint64_t>(step));
    const Eigen::VectorXd state = env.featurize(episode);

    SampledGroup group;
    group.state = state;
    group.temperature = config.temperature;
    GroupSample s = sample_group(policy, state, g, config.temperature, sampler);
    group.actions = std::move(s.actions);
    group.logp_current = s.log_probs;
    group.logp_old = s.log_probs;  // old policy refreshed every step
    const Eigen::VectorXd ref_logp = action_log_probs(reference, state, config.temperature);
    group.logp_ref.resize(g);
    group.rewards.resize(g);
    group.rendered.resize(static_cast<std::size_t>(g));

    StepLog log;
    log.step = step;
    log.alpha = alpha_at(config.reward, step);
    for (int i = 0; i < g; ++i) {
      const int a = group.actions[static_cast<std::size_t>(i)];
      group.logp_ref[i] = ref_logp[a];
      std::string text = env.render_response(env.action(a), config.pattern, episode);
      const ParsedResponse parsed = parse_response(text, config.pattern, set);
      const RewardBreakdown reward =
          reward_from_parsed(parsed, episode.gold, config.reward, similarity, step);
      group.rewards[i] = reward.total;
      log.mean_reward += reward.total;
      log.format_rate += reward.format;
      log.accuracy += reward.accuracy;
      if (parsed.answer && parsed.answer->name == episode.gold.name) log.ua += 1.0;
      group.rendered[static_cast<std::size_t>(i)] = std::move(text);
    }
    log.mean_reward /= g;
    log.format_rate /= g;
    log.accuracy /= g;
    log.ua /= g;

    group.advantages = compute_advantages(group.rewards);
    log.kl = kl_penalty(group.logp_current, group.logp_ref);

    try {
      for (int epoch = 0; epoch < config.inner_epochs; ++epoch) {
        const Eigen::MatrixXd grad =
            policy_gradient(policy, group, config.kl_coefficient, config.clip_epsilon);
        policy.weights -= config.learning_rate * grad;
      }
    } catch (const NonFiniteLoss& e) {
      run.curve.push_back(log);
      run.aborted = true;
      run.abort_reason = e.what();
      break;
    }
    run.curve.push_back(log);
  }

  run.final_policy = std::move(policy);
  return run;
}

}  // namespace emorl
