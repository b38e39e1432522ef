#include "ocr3d/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <stdexcept>

#include "ocr3d/evidence.hpp"
#include "ocr3d/seed.hpp"

namespace ocr3d {

void GrpoConfig::validate() const {
  std::string bad;
  if (group_size < 2) bad += "group_size must be >= 2; ";
  if (!(clip_eps > 0.0)) bad += "clip_eps must be > 0; ";
  if (!(kl_coeff >= 0.0)) bad += "kl_coeff must be >= 0; ";
  if (!(std_floor > 0.0)) bad += "std_floor must be > 0; ";
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) bad += "learning_rate must be finite and > 0; ";
  if (total_steps < 1) bad += "total_steps must be >= 1; ";
  if (!bad.empty()) throw std::invalid_argument("grpo config: " + bad.substr(0, bad.size() - 2));
}

TrainerState TrainerState::initial(const PolicyParams& start, std::uint64_t seed) {
  TrainerState s;
  s.theta = start;
  s.theta_old = start;
  s.theta_ref = start;
  s.step = 0;
  s.rng_seed = seed;
  return s;
}

std::optional<int> parse_answer(std::string_view text, std::size_t option_count) {
  static const std::regex pattern(R"(^\s*<think>((?:(?!</?think>|</?answer>)[\s\S])*)</think>\s*<answer>\s*([A-Z])\s*</answer>\s*$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(text.begin(), text.end(), m, pattern)) return std::nullopt;
  const int idx = m[2].str()[0] - 'A';
  if (idx < 0 || static_cast<std::size_t>(idx) >= option_count) return std::nullopt;
  return idx;
}

double reward(std::string_view response_text, const Question& q) {
  const auto idx = parse_answer(response_text, q.options.size());
  return idx && *idx == q.answer_index ? 1.0 : 0.0;
}

Eigen::VectorXd advantages(const Eigen::VectorXd& rewards, double std_floor) {
  if (rewards.size() < 2) throw std::invalid_argument("advantages: need at least 2 rewards");
  const double mean = rewards.mean();
  const double var = (rewards.array() - mean).square().mean();
  const double sd = std::sqrt(var);
  if (sd < std_floor) return Eigen::VectorXd::Zero(rewards.size());
  return (rewards.array() - mean) / sd;
}

namespace {

// Adds the gradient of -min(rho*A, clip(rho)*A) / divisor.
double clipped_term(const PolicyParams& theta, const FeatureMatrix& feats, int option,
                    double logprob_old, double adv, double eps, double divisor, Eigen::VectorXd& grad) {
  const LogProbGrad lg = logprob_and_grad(theta, feats, option);
  const double rho = std::exp(lg.logprob - logprob_old);
  const double unclipped = rho * adv;
  const double clipped = std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv;
  if (unclipped <= clipped) {
    grad -= (adv * rho / divisor) * lg.grad;
    return -unclipped / divisor;
  }
  return -clipped / divisor;
}

}  // namespace

LossAndGrad surrogate_loss_and_grad(const TrainerState& state, const RolloutGroup& group,
                                    std::span<const FeatureMatrix> feats_per_rollout,
                                    const GrpoConfig& cfg) {
  const std::size_t total = group.size();
  if (group.clean.empty()) throw std::invalid_argument("surrogate: group has no clean rollouts");
  if (feats_per_rollout.size() != total)
    throw std::invalid_argument("surrogate: " + std::to_string(feats_per_rollout.size()) +
                                " feature sets for " + std::to_string(total) + " rollouts");
  if (static_cast<std::size_t>(group.advantages.size()) != total)
    throw std::invalid_argument("surrogate: " + std::to_string(group.advantages.size()) +
                                " advantages for " + std::to_string(total) + " rollouts");
  const Eigen::Index dim = state.theta.weights.size();
  for (const auto& f : feats_per_rollout)
    if (f.cols() != dim || f.rows() < 1) throw std::invalid_argument("surrogate: feature width mismatch");

  const FeatureMatrix& clean_feats = feats_per_rollout[0];
  const std::size_t n = group.clean.size();
  const double divisor = static_cast<double>(cfg.noisy_in_loss ? total : n);

  LossAndGrad out;
  out.grad = Eigen::VectorXd::Zero(dim);
  for (std::size_t i = 0; i < n; ++i) {
    const Response& r = group.clean[i];
    out.loss += clipped_term(state.theta, feats_per_rollout[i], r.option_index, r.logprob_old,
                             group.advantages[static_cast<Eigen::Index>(i)], cfg.clip_eps, divisor, out.grad);
  }
  if (cfg.noisy_in_loss) {
    const Eigen::VectorXd old_lp = log_action_probs(state.theta_old, clean_feats);
    for (std::size_t i = 0; i < group.noisy.size(); ++i) {
      const int o = group.noisy[i].option_index;
      if (o < 0 || o >= clean_feats.rows()) throw std::invalid_argument("surrogate: option out of range");
      out.loss += clipped_term(state.theta, clean_feats, o, old_lp[o],
                               group.advantages[static_cast<Eigen::Index>(n + i)], cfg.clip_eps, divisor,
                               out.grad);
    }
  }
  if (cfg.kl_coeff > 0.0) {
    out.kl = kl_divergence(state.theta, state.theta_ref, clean_feats);
    out.loss += cfg.kl_coeff * out.kl;
    out.grad += cfg.kl_coeff * kl_gradient(state.theta, state.theta_ref, clean_feats);
  }
  return out;
}

StepResult train_step(const TrainerState& state, const Episode& ep, const GrpoConfig& cfg,
                      const ScheduleSpec& sched, const NoiseSpec& noise) {
  if (!ep.scene || !ep.trajectory || !ep.question) throw std::invalid_argument("train_step: incomplete episode");
  if (state.step < 0 || state.step >= cfg.total_steps)
    throw std::invalid_argument("train_step: step " + std::to_string(state.step) + " outside [0, " +
                                std::to_string(cfg.total_steps) + ")");
  const Scene& scene = *ep.scene;
  const Trajectory& traj = *ep.trajectory;
  const Question& q = *ep.question;

  std::optional<Video> rendered;
  if (!ep.clean_video) rendered = render(scene, traj);
  const Video& clean = ep.clean_video ? *ep.clean_video : *rendered;
  std::optional<VideoEvidence> analyzed;
  if (!ep.clean_evidence) analyzed = analyze_video(clean);
  const VideoEvidence& clean_ev = ep.clean_evidence ? *ep.clean_evidence : *analyzed;
  const FeatureMatrix clean_feats = extract_question_features(clean_ev, q).options;

  const std::uint64_t step_seed = derive_seed(state.rng_seed, "step", static_cast<std::uint64_t>(state.step));
  const std::size_t n = static_cast<std::size_t>(cfg.group_size);

  StepResult res;
  RolloutGroup& g = res.group;
  std::vector<FeatureMatrix> feats(n, clean_feats);

  for (std::size_t i = 0; i < n; ++i)
    g.clean.push_back(sample_from_features(state.theta_old, clean_feats, q, derive_seed(step_seed, "clean", i)));

  if (cfg.perturbed_rollouts) {
    g.plan = build_plan(scene, traj, sched, noise, state.step, derive_seed(state.rng_seed, "perturb"));
    FeatureMatrix noisy_feats = clean_feats;
    if (!g.plan.selected_ids.empty() && g.plan.sigma > 0.0)
      noisy_feats = extract_question_features(analyze_video(apply_noise(clean, g.plan)), q).options;
    for (std::size_t i = 0; i < n; ++i) {
      g.noisy.push_back(sample_from_features(state.theta_old, noisy_feats, q, derive_seed(step_seed, "noisy", i)));
      feats.push_back(noisy_feats);
    }
  }

  const std::size_t total = g.size();
  g.rewards.resize(static_cast<Eigen::Index>(total));
  for (std::size_t i = 0; i < n; ++i) g.rewards[static_cast<Eigen::Index>(i)] = reward(g.clean[i].text, q);
  for (std::size_t i = 0; i < g.noisy.size(); ++i)
    g.rewards[static_cast<Eigen::Index>(n + i)] = reward(g.noisy[i].text, q);
  g.advantages = advantages(g.rewards, cfg.std_floor);

  const LossAndGrad lg = surrogate_loss_and_grad(state, g, feats, cfg);

  TrainerState next = state;
  next.theta.weights = state.theta.weights - cfg.learning_rate * lg.grad;
  next.theta.version = state.theta.version + 1;
  next.theta_old = next.theta;
  next.step = state.step + 1;

  StepMetrics& m = res.metrics;
  m.step = state.step;
  m.delta_t = g.plan.delta;
  m.sigma = g.plan.sigma;
  m.mean_reward_clean = g.rewards.head(static_cast<Eigen::Index>(n)).mean();
  if (!g.noisy.empty()) m.mean_reward_noisy = g.rewards.tail(static_cast<Eigen::Index>(g.noisy.size())).mean();
  m.loss = lg.loss;
  m.kl = lg.kl;
  m.grad_norm = lg.grad.norm();
  m.rewards.assign(g.rewards.data(), g.rewards.data() + g.rewards.size());

  res.state = std::move(next);
  return res;
}

StepResult train_step(const TrainerState& state, const Scene& scene, const Trajectory& traj,
                      const Question& q, const GrpoConfig& cfg, const ScheduleSpec& sched,
                      const NoiseSpec& noise) {
  return train_step(state, Episode{&scene, &traj, &q, nullptr, nullptr}, cfg, sched, noise);
}

EvalReport evaluate_detailed(const PolicyParams& params, std::span<const Episode> eval_set, bool perturbed,
                             double sigma_eval, std::uint64_t seed, double delta) {
  EvalReport rep;
  const Scene* cached_scene = nullptr;
  const Trajectory* cached_traj = nullptr;
  VideoEvidence cached;
  for (const Episode& ep : eval_set) {
    if (!ep.scene || !ep.trajectory || !ep.question) throw std::invalid_argument("evaluate: incomplete episode");
    if (ep.scene != cached_scene || ep.trajectory != cached_traj) {
      const bool have_clean = ep.clean_video != nullptr;
      if (!perturbed && ep.clean_evidence) {
        cached = *ep.clean_evidence;
      } else {
        Video v = have_clean ? *ep.clean_video : render(*ep.scene, *ep.trajectory);
        if (perturbed) {
          const PerturbationPlan plan =
              make_plan(*ep.scene, *ep.trajectory, delta, sigma_eval,
                        derive_seed(seed, "eval", static_cast<std::uint64_t>(ep.scene->scene_id)));
          v = apply_noise(v, plan);
        }
        cached = analyze_video(v);
      }
      cached_scene = ep.scene;
      cached_traj = ep.trajectory;
    }
    const Question& q = *ep.question;
    const int pick = greedy_answer(params, extract_question_features(cached, q).options);
    const bool ok = pick == q.answer_index;
    auto& cat = rep.per_category[std::string(to_string(q.category))];
    cat.first += ok ? 1 : 0;
    cat.second += 1;
    rep.correct += ok ? 1 : 0;
    rep.total += 1;
  }
  rep.accuracy = rep.total > 0 ? static_cast<double>(rep.correct) / rep.total : 0.0;
  return rep;
}

double evaluate(const PolicyParams& params, std::span<const Episode> eval_set, bool perturbed,
                double sigma_eval, std::uint64_t seed, double delta) {
  return evaluate_detailed(params, eval_set, perturbed, sigma_eval, seed, delta).accuracy;
}

SceneBundle make_bundle(Scene scene, int frame_count, std::uint64_t seed, const CameraIntrinsics& intr) {
  SceneBundle b;
  const auto id = static_cast<std::uint64_t>(scene.scene_id);
  b.scene = std::move(scene);
  b.trajectory = generate_trajectory(b.scene, frame_count, derive_seed(seed, "trajectory", id), intr);
  b.video = render(b.scene, b.trajectory);
  b.evidence = analyze_video(b.video);
  b.questions = generate_questions(b.scene, b.video, derive_seed(seed, "questions", id));
  return b;
}

std::vector<SceneBundle> make_bundles(int count, std::uint64_t seed, const GenerationBounds& bounds,
                                      int frame_count, int first_scene_id) {
  std::vector<SceneBundle> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    const int id = first_scene_id + i;
    Scene s = generate_scene(derive_seed(seed, "scene", static_cast<std::uint64_t>(id)), bounds, id);
    out.push_back(make_bundle(std::move(s), frame_count, seed));
  }
  return out;
}

std::vector<Episode> curriculum(const std::vector<SceneBundle>& bundles) {
  std::vector<Episode> out;
  std::size_t rounds = 0;
  for (const auto& b : bundles) rounds = std::max(rounds, b.questions.size());
  for (std::size_t r = 0; r < rounds; ++r)
    for (const auto& b : bundles)
      if (r < b.questions.size())
        out.push_back(Episode{&b.scene, &b.trajectory, &b.questions[r], &b.video, &b.evidence});
  return out;
}

TrainerState run_training(const TrainingOptions& opts, std::span<const Episode> curriculum,
                          std::span<const Episode> eval_set, const PolicyParams& start,
                          const std::function<void(const StepMetrics&, const TrainerState&)>& on_step) {
  opts.grpo.validate();
  opts.schedule.validate();
  opts.noise.validate();
  if (curriculum.empty()) throw std::invalid_argument("training curriculum is empty");
  TrainerState state = TrainerState::initial(start, derive_seed(opts.seed, "train"));
  for (int s = 0; s < opts.grpo.total_steps; ++s) {
    const Episode& ep = curriculum[static_cast<std::size_t>(s) % curriculum.size()];
    StepResult r = train_step(state, ep, opts.grpo, opts.schedule, opts.noise);
    state = std::move(r.state);
    if (opts.eval_interval > 0 && (s + 1) % opts.eval_interval == 0 && !eval_set.empty())
      r.metrics.eval_acc = evaluate(state.theta, eval_set, false, opts.sigma_eval, derive_seed(opts.seed, "eval"));
    if (on_step) on_step(r.metrics, state);
  }
  return state;
}

}  // namespace ocr3d
