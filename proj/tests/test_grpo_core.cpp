#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "emorl/artifacts.hpp"
#include "emorl/grpo_core.hpp"

using namespace emorl;

namespace {

PolicyParams random_policy(Rng& rng, int state_dim, int actions, double scale = 1.0) {
  PolicyParams p = PolicyParams::zeros(state_dim, actions);
  for (int r = 0; r < state_dim; ++r) {
    for (int c = 0; c < actions; ++c) p.weights(r, c) = scale * rng.normal();
  }
  return p;
}

Eigen::VectorXd random_vector(Rng& rng, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

// A random but self-consistent group: actions sampled from the policy,
// old/ref log-probs perturbed so ratios and KL terms are non-trivial.
SampledGroup random_group(Rng& rng, const PolicyParams& policy, int g) {
  SampledGroup group;
  group.state = random_vector(rng, policy.state_dim());
  group.temperature = 1.0;
  GroupSample s = sample_group(policy, group.state, g, group.temperature, rng);
  group.actions = s.actions;
  group.logp_current = s.log_probs;
  group.logp_old = s.log_probs + random_vector(rng, g, 0.2);
  group.logp_ref = s.log_probs + random_vector(rng, g, 0.2);
  Eigen::VectorXd rewards(g);
  for (int i = 0; i < g; ++i) rewards[i] = rng.uniform() * 2.0;
  group.rewards = rewards;
  group.advantages = compute_advantages(rewards);
  return group;
}

// Central finite differences of the loss with respect to every weight.
Eigen::MatrixXd fd_gradient(const PolicyParams& policy, const SampledGroup& group, double beta,
                            double eps, double h) {
  Eigen::MatrixXd grad(policy.state_dim(), policy.action_count());
  PolicyParams p = policy;
  for (int r = 0; r < policy.state_dim(); ++r) {
    for (int c = 0; c < policy.action_count(); ++c) {
      const double w = p.weights(r, c);
      p.weights(r, c) = w + h;
      const double up = surrogate_loss(p, group, beta, eps);
      p.weights(r, c) = w - h;
      const double dn = surrogate_loss(p, group, beta, eps);
      p.weights(r, c) = w;
      grad(r, c) = (up - dn) / (2.0 * h);
    }
  }
  return grad;
}

// True when some ratio sits close enough to a clip kink that central
// differences straddle the non-smooth point.
bool near_kink(const PolicyParams& policy, const SampledGroup& group, double eps, double margin) {
  const Eigen::VectorXd logp = action_log_probs(policy, group.state, group.temperature);
  for (std::size_t i = 0; i < group.actions.size(); ++i) {
    const double rho = std::exp(logp[group.actions[i]] - group.logp_old[static_cast<long>(i)]);
    if (std::fabs(rho - (1.0 - eps)) < margin || std::fabs(rho - (1.0 + eps)) < margin)
      return true;
  }
  return false;
}

Environment default_env(std::uint64_t seed = 7, double sigma = 0.0, double p = 0.0) {
  EnvConfig c;
  c.label_set = "meld7";
  c.feature_dim = 16;
  c.noise_sigma = sigma;
  c.ambiguity_rate = p;
  c.seed = seed;
  return Environment(c, default_label_sets().at("meld7"));
}

TrainerConfig default_trainer(long steps, std::uint64_t seed = 1) {
  TrainerConfig t;
  t.steps = steps;
  t.seed = seed;
  t.reward.alpha_schedule = AlphaSchedule::linear_decay(std::max(1L, steps));
  return t;
}

}  // namespace

TEST_CASE("advantage normalization worked examples") {
  Eigen::VectorXd r(6);
  r << 1, 0, 0, 0, 0, 0;
  const Eigen::VectorXd a = compute_advantages(r);
  CHECK(a[0] == doctest::Approx(std::sqrt(5.0)).epsilon(1e-12));
  for (int i = 1; i < 6; ++i) CHECK(a[i] == doctest::Approx(-1.0 / std::sqrt(5.0)).epsilon(1e-12));

  Eigen::VectorXd flat(3);
  flat << 0.7, 0.7, 0.7;
  CHECK(compute_advantages(flat) == Eigen::VectorXd::Zero(3));

  Eigen::VectorXd two(2);
  two << 2, 0;
  const Eigen::VectorXd a2 = compute_advantages(two);
  CHECK(a2[0] == 1.0);
  CHECK(a2[1] == -1.0);

  Eigen::VectorXd one(1);
  one << 1.0;
  CHECK_THROWS_AS(compute_advantages(one), ConfigError);
}

TEST_CASE("advantages have zero mean and unit population std") {
  Rng rng(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const int g = 2 + rng.uniform_int(7);
    Eigen::VectorXd r(g);
    for (int i = 0; i < g; ++i) r[i] = rng.normal() * 3.0 + 1.0;
    const Eigen::VectorXd a = compute_advantages(r);
    if (a.isZero(0.0)) continue;  // degenerate group
    const double mean = a.mean();
    const double std = std::sqrt((a.array() - mean).square().sum() / g);
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(std::fabs(std - 1.0) < 1e-9);
  }
}

TEST_CASE("advantage shift and positive-scale invariance") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const int g = 2 + rng.uniform_int(7);
    Eigen::VectorXd r(g);
    for (int i = 0; i < g; ++i) r[i] = rng.normal();
    const Eigen::VectorXd base = compute_advantages(r);

    // power-of-two scaling commutes with every rounding step, so the result
    // is bitwise identical
    const Eigen::VectorXd scaled = compute_advantages((r.array() * 4.0).matrix());
    CHECK(scaled == base);

    const double shift = rng.normal() * 10.0;
    const Eigen::VectorXd shifted = compute_advantages((r.array() + shift).matrix());
    for (int i = 0; i < g; ++i) CHECK(shifted[i] == doctest::Approx(base[i]).epsilon(1e-12));
  }
}

TEST_CASE("kl penalty worked examples and nonnegativity") {
  Eigen::VectorXd a(3), b(3);
  a << -1.0, -2.0, -0.5;
  b = a;
  CHECK(kl_penalty(a, b) == 0.0);

  Eigen::VectorXd cur(1), ref(1);
  cur << -1.0;
  ref << -1.0 + std::log(2.0);
  CHECK(kl_penalty(cur, ref) == doctest::Approx(2.0 - std::log(2.0) - 1.0).epsilon(1e-12));
  CHECK(kl_penalty(cur, ref) == doctest::Approx(0.30685281944).epsilon(1e-9));

  Rng rng(5);
  for (int trial = 0; trial < 1000; ++trial) {
    const int g = 1 + rng.uniform_int(8);
    Eigen::VectorXd x(g), y(g);
    for (int i = 0; i < g; ++i) {
      x[i] = -5.0 * rng.uniform();
      y[i] = -5.0 * rng.uniform();
    }
    CHECK(kl_penalty(x, y) >= 0.0);
  }
  CHECK_THROWS_AS(kl_penalty(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3)), ConfigError);
}

TEST_CASE("surrogate loss special cases") {
  Rng rng(31);
  const PolicyParams policy = random_policy(rng, 5, 4);

  SUBCASE("ratios of one and normalized advantages give zero loss at beta 0") {
    SampledGroup group = random_group(rng, policy, 6);
    const Eigen::VectorXd logp = action_log_probs(policy, group.state, group.temperature);
    for (int i = 0; i < 6; ++i) group.logp_old[i] = logp[group.actions[static_cast<std::size_t>(i)]];
    CHECK(std::fabs(surrogate_loss(policy, group, 0.0, 0.2)) < 1e-12);
  }
  SUBCASE("all-zero advantages reduce the loss to the KL penalty") {
    SampledGroup group = random_group(rng, policy, 6);
    group.advantages = Eigen::VectorXd::Zero(6);
    const Eigen::VectorXd logp = action_log_probs(policy, group.state, group.temperature);
    Eigen::VectorXd lc(6);
    for (int i = 0; i < 6; ++i) lc[i] = logp[group.actions[static_cast<std::size_t>(i)]];
    const double beta = 0.04;
    CHECK(surrogate_loss(policy, group, beta, 0.2) ==
          doctest::Approx(beta * kl_penalty(lc, group.logp_ref)).epsilon(1e-12));
  }
  SUBCASE("clip arithmetic: rho 1.5, A 1, eps 0.2 contributes min(1.5, 1.2)") {
    // two samples; the second has zero advantage and contributes nothing
    SampledGroup group;
    group.state = random_vector(rng, 5);
    group.temperature = 1.0;
    group.actions = {1, 2};
    const Eigen::VectorXd logp = action_log_probs(policy, group.state, 1.0);
    group.logp_old.resize(2);
    group.logp_old[0] = logp[1] - std::log(1.5);  // rho_0 = 1.5
    group.logp_old[1] = logp[2];
    group.logp_ref.resize(2);
    group.logp_ref[0] = logp[1];
    group.logp_ref[1] = logp[2];
    group.advantages.resize(2);
    group.advantages << 1.0, 0.0;
    group.rewards = Eigen::VectorXd::Zero(2);
    CHECK(surrogate_loss(policy, group, 0.0, 0.2) == doctest::Approx(-1.2 / 2.0).epsilon(1e-12));
  }
  SUBCASE("non-finite intermediates raise") {
    SampledGroup group = random_group(rng, policy, 4);
    group.logp_old[0] = -std::numeric_limits<double>::infinity();  // rho blows up
    CHECK_THROWS_AS(surrogate_loss(policy, group, 0.04, 0.2), NonFiniteLoss);
    SampledGroup nan_group = random_group(rng, policy, 4);
    nan_group.logp_ref[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(surrogate_loss(policy, nan_group, 0.04, 0.2), NonFiniteLoss);
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  Rng rng(2024);
  const double h = 1e-5;
  const double beta = 0.04;
  const double eps = 0.2;
  int checked = 0;
  double worst = 0.0;
  while (checked < 100) {
    const int state_dim = 3 + rng.uniform_int(5);
    const int actions = 3 + rng.uniform_int(6);
    const int g = 2 + rng.uniform_int(6);
    const PolicyParams policy = random_policy(rng, state_dim, actions, 0.7);
    const SampledGroup group = random_group(rng, policy, g);
    if (near_kink(policy, group, eps, 5e-3)) continue;  // FD invalid across the kink

    const Eigen::MatrixXd analytic = policy_gradient(policy, group, beta, eps);
    const Eigen::MatrixXd fd = fd_gradient(policy, group, beta, eps, h);
    const double scale = std::max(analytic.cwiseAbs().maxCoeff(), 1e-12);
    const double rel = (analytic - fd).cwiseAbs().maxCoeff() / scale;
    worst = std::max(worst, rel);
    ++checked;
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("gradient edge cases") {
  Rng rng(9);
  const PolicyParams policy = random_policy(rng, 4, 5);

  SUBCASE("zero advantages and beta 0 give an exactly zero gradient") {
    SampledGroup group = random_group(rng, policy, 4);
    group.advantages = Eigen::VectorXd::Zero(4);
    const Eigen::MatrixXd grad = policy_gradient(policy, group, 0.0, 0.2);
    CHECK(grad == Eigen::MatrixXd::Zero(4, 5));
  }
  SUBCASE("one positive-advantage action gains probability after a step") {
    PolicyParams uniform = PolicyParams::zeros(4, 5);
    SampledGroup group;
    group.state = random_vector(rng, 4);
    group.temperature = 1.0;
    group.actions = {2, 0};
    const Eigen::VectorXd logp = action_log_probs(uniform, group.state, 1.0);
    group.logp_old.resize(2);
    group.logp_old << logp[2], logp[0];
    group.logp_ref = group.logp_old;
    group.advantages.resize(2);
    group.advantages << 1.0, 0.0;
    group.rewards = Eigen::VectorXd::Zero(2);

    const Eigen::MatrixXd grad = policy_gradient(uniform, group, 0.0, 0.2);
    PolicyParams stepped = uniform;
    stepped.weights -= 0.1 * grad;
    const Eigen::VectorXd before = action_probs(uniform, group.state, 1.0);
    const Eigen::VectorXd after = action_probs(stepped, group.state, 1.0);
    CHECK(after[2] > before[2]);
  }
}

TEST_CASE("sample_group distribution and determinism") {
  SUBCASE("uniform policy yields uniform draws") {
    const int actions = 7;
    PolicyParams policy = PolicyParams::zeros(3, actions);
    Eigen::VectorXd state(3);
    state << 0.3, -1.0, 1.0;
    Rng rng(42);
    const int n = 100000;
    std::vector<int> counts(actions, 0);
    const int group = 5;
    for (int i = 0; i < n / group; ++i) {
      const GroupSample s = sample_group(policy, state, group, 1.0, rng);
      for (int j = 0; j < group; ++j) {
        counts[static_cast<std::size_t>(s.actions[static_cast<std::size_t>(j)])] += 1;
        CHECK(s.log_probs[j] == doctest::Approx(-std::log(actions)).epsilon(1e-12));
      }
    }
    const double p = 1.0 / actions;
    const double sigma = std::sqrt(n * p * (1.0 - p));
    for (int a = 0; a < actions; ++a) {
      CHECK(std::fabs(counts[static_cast<std::size_t>(a)] - n * p) < 3.0 * sigma);
    }
  }
  SUBCASE("a dominant logit is drawn every time") {
    PolicyParams policy = PolicyParams::zeros(2, 4);
    policy.weights(1, 2) = 1e6;  // state[1] = 1 pushes action 2 to probability ~1
    Eigen::VectorXd state(2);
    state << 0.0, 1.0;
    Rng rng(1);
    const GroupSample s = sample_group(policy, state, 6, 1.0, rng);
    for (int a : s.actions) CHECK(a == 2);
  }
  SUBCASE("fixed seed replays the same actions") {
    Rng rng_a(77);
    Rng rng_b(77);
    PolicyParams policy = PolicyParams::zeros(3, 5);
    policy.weights(0, 1) = 0.5;
    Eigen::VectorXd state(3);
    state << 1.0, 0.2, -0.4;
    const GroupSample a = sample_group(policy, state, 6, 1.0, rng_a);
    const GroupSample b = sample_group(policy, state, 6, 1.0, rng_b);
    CHECK(a.actions == b.actions);
    CHECK(a.log_probs == b.log_probs);
  }
  SUBCASE("group size below 2 is rejected") {
    PolicyParams policy = PolicyParams::zeros(2, 3);
    Eigen::VectorXd state = Eigen::VectorXd::Ones(2);
    Rng rng(3);
    CHECK_THROWS_AS(sample_group(policy, state, 1, 1.0, rng), ConfigError);
  }
}

TEST_CASE("softmax normalization survives training updates") {
  const Environment env = default_env(3, 0.2, 0.0);
  TrainerConfig t = default_trainer(50, 11);
  const TrainingRun run = train(t, env);
  Rng rng(123);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd state = env.featurize(env.episode_at(static_cast<std::uint64_t>(trial)));
    const Eigen::VectorXd probs = action_probs(run.final_policy, state, 1.0);
    CHECK(std::fabs(probs.sum() - 1.0) < 1e-10);
    CHECK(probs.minCoeff() >= 0.0);
  }
}

TEST_CASE("one-state bandit: the rewarded action dominates after 200 steps") {
  // grpo primitives wired into a minimal loop: state is the bias-only vector,
  // reward 1 for action 2 and 0 otherwise.
  const int actions = 4;
  const int target = 2;
  const int g = 6;
  PolicyParams policy = PolicyParams::zeros(1, actions);
  const PolicyParams reference = policy;
  Eigen::VectorXd state(1);
  state << 1.0;
  Rng rng(99);
  for (int step = 0; step < 200; ++step) {
    SampledGroup group;
    group.state = state;
    group.temperature = 1.0;
    GroupSample s = sample_group(policy, state, g, 1.0, rng);
    group.actions = s.actions;
    group.logp_current = s.log_probs;
    group.logp_old = s.log_probs;
    const Eigen::VectorXd ref_logp = action_log_probs(reference, state, 1.0);
    group.logp_ref.resize(g);
    group.rewards.resize(g);
    for (int i = 0; i < g; ++i) {
      group.logp_ref[i] = ref_logp[group.actions[static_cast<std::size_t>(i)]];
      group.rewards[i] = group.actions[static_cast<std::size_t>(i)] == target ? 1.0 : 0.0;
    }
    group.advantages = compute_advantages(group.rewards);
    policy.weights -= 0.1 * policy_gradient(policy, group, 0.04, 0.2);
  }
  const Eigen::VectorXd probs = action_probs(policy, state, 1.0);
  CHECK(probs[target] > 0.9);
}

TEST_CASE("train contract basics") {
  const Environment env = default_env(21, 0.1, 0.0);

  SUBCASE("zero steps leave the policy untouched") {
    const TrainingRun run = train(default_trainer(0, 5), env);
    CHECK(run.curve.empty());
    CHECK_FALSE(run.aborted);
    CHECK(run.final_policy.weights == Eigen::MatrixXd::Zero(17, 28));
  }
  SUBCASE("same config and seed replay identical curves and weights") {
    const TrainerConfig t = default_trainer(40, 31);
    const TrainingRun a = train(t, env);
    const TrainingRun b = train(t, env);
    REQUIRE(a.curve.size() == b.curve.size());
    CHECK(curve_to_csv(a.curve) == curve_to_csv(b.curve));
    CHECK(a.final_policy.weights == b.final_policy.weights);
  }
  SUBCASE("a different seed changes the trajectory") {
    const TrainingRun a = train(default_trainer(40, 31), env);
    const TrainingRun b = train(default_trainer(40, 32), env);
    CHECK(curve_to_csv(a.curve) != curve_to_csv(b.curve));
  }
  SUBCASE("config validation rejects bad fields") {
    TrainerConfig t = default_trainer(10);
    t.group_size = 1;
    CHECK_THROWS_AS(train(t, env), ConfigError);
    t = default_trainer(10);
    t.clip_epsilon = 1.0;
    CHECK_THROWS_AS(train(t, env), ConfigError);
    t = default_trainer(10);
    t.learning_rate = 0.0;
    CHECK_THROWS_AS(train(t, env), ConfigError);
    t = default_trainer(10);
    t.temperature = 0.0;
    CHECK_THROWS_AS(train(t, env), ConfigError);
  }
}

TEST_CASE("training improves on the uniform baseline") {
  EnvConfig c;
  c.label_set = "meld7";
  c.feature_dim = 16;
  c.noise_sigma = 0.2;
  c.ambiguity_rate = 0.0;
  c.seed = 13;
  const Environment env(c, default_label_sets().at("meld7"));
  TrainerConfig t = default_trainer(150, 7);
  const TrainingRun run = train(t, env);
  REQUIRE(run.curve.size() == 150);
  double early = 0.0, late = 0.0;
  for (int i = 0; i < 30; ++i) early += run.curve[static_cast<std::size_t>(i)].mean_reward;
  for (int i = 120; i < 150; ++i) late += run.curve[static_cast<std::size_t>(i)].mean_reward;
  CHECK(late / 30.0 > early / 30.0);
}
