#include "ocr3d/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "ocr3d/seed.hpp"

namespace ocr3d {

std::string_view to_string(ScheduleKind k) {
  switch (k) {
    case ScheduleKind::fix: return "fix";
    case ScheduleKind::linear: return "linear";
    case ScheduleKind::exp: return "exp";
    case ScheduleKind::cos: return "cos";
  }
  return "unknown";
}

ScheduleKind parse_schedule_kind(std::string_view s) {
  for (auto k : {ScheduleKind::fix, ScheduleKind::linear, ScheduleKind::exp, ScheduleKind::cos})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown schedule kind '" + std::string(s) + "'");
}

void ScheduleSpec::validate() const {
  if (!(delta0 >= 0.0 && delta0 <= 1.0)) throw std::invalid_argument("schedule: delta0 must lie in [0, 1]");
  if (total_steps < 1) throw std::invalid_argument("schedule: total_steps must be >= 1");
  if (!(fix_fraction >= 0.0 && fix_fraction <= 1.0))
    throw std::invalid_argument("schedule: fix_fraction must lie in [0, 1]");
}

void NoiseSpec::validate() const {
  if (!(sigma0 >= 0.0)) throw std::invalid_argument("noise: sigma0 must be >= 0");
}

double delta_t(const ScheduleSpec& spec, int step) {
  spec.validate();
  if (step < 0 || step > spec.total_steps) throw std::invalid_argument("delta_t: step out of range");
  if (spec.kind == ScheduleKind::fix) return spec.fix_fraction;
  if (step == spec.total_steps) return 0.0;
  const double x = static_cast<double>(step) / spec.total_steps;
  switch (spec.kind) {
    case ScheduleKind::linear: return spec.delta0 * (1.0 - x);
    case ScheduleKind::exp: {
      const double floor = std::exp(-5.0);
      return spec.delta0 * (std::exp(-5.0 * x) - floor) / (1.0 - floor);
    }
    case ScheduleKind::cos: return spec.delta0 * 0.5 * (1.0 + std::cos(std::numbers::pi * x));
    case ScheduleKind::fix: break;
  }
  return spec.fix_fraction;
}

int selection_count(double delta, std::size_t total) {
  if (!(delta >= 0.0 && delta <= 1.0)) throw std::invalid_argument("select_objects: delta must lie in [0, 1]");
  return static_cast<int>(std::round(delta * static_cast<double>(total)));
}

std::vector<ObjectBox> select_objects(const Scene& scene, double delta, std::uint64_t seed) {
  const int m = selection_count(delta, scene.objects.size());
  std::vector<std::size_t> idx(scene.objects.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  // Partial Fisher-Yates: the first m slots are a uniform sample without replacement.
  for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i)
    std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
  idx.resize(static_cast<std::size_t>(m));
  std::sort(idx.begin(), idx.end());
  std::vector<ObjectBox> out;
  for (auto i : idx) out.push_back(scene.objects[i]);
  return out;
}

std::vector<RegionMask> region_masks(const Scene& scene, const Trajectory& traj,
                                     std::span<const int> ids) {
  std::vector<RegionMask> masks;
  masks.reserve(traj.poses.size());
  for (const auto& pose : traj.poses) {
    RegionMask m(traj.intrinsics.width, traj.intrinsics.height);
    for (int id : ids) {
      const ObjectBox* box = scene.find(id);
      if (!box) throw std::invalid_argument("region_masks: unknown object id");
      m |= box_region(*box, pose, traj.intrinsics);
    }
    masks.push_back(std::move(m));
  }
  return masks;
}

PerturbationPlan make_plan(const Scene& scene, const Trajectory& traj, double delta, double sigma,
                           std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("make_plan: sigma must be >= 0");
  PerturbationPlan plan;
  plan.delta = delta;
  plan.sigma = sigma;
  plan.noise_seed = derive_seed(seed, "noise");
  for (const auto& b : select_objects(scene, delta, derive_seed(seed, "select"))) plan.selected_ids.push_back(b.id);
  plan.per_frame_masks = region_masks(scene, traj, plan.selected_ids);
  return plan;
}

PerturbationPlan build_plan(const Scene& scene, const Trajectory& traj, const ScheduleSpec& spec,
                            const NoiseSpec& noise, int step, std::uint64_t seed) {
  noise.validate();
  const double delta = delta_t(spec, step);
  const double sigma = spec.delta0 > 0.0 ? noise.sigma0 * delta / spec.delta0 : 0.0;
  return make_plan(scene, traj, delta, sigma, derive_seed(seed ^ noise.seed, "plan", static_cast<std::uint64_t>(step)));
}

Video apply_noise(const Video& video, const PerturbationPlan& plan) {
  if (plan.per_frame_masks.size() != video.frames.size())
    throw std::invalid_argument("apply_noise: plan frame count does not match video");
  Video out = video;
  if (plan.sigma == 0.0) {
    for (std::size_t k = 0; k < video.frames.size(); ++k) {
      const auto& m = plan.per_frame_masks[k];
      if (m.width() != video.frames[k].width || m.height() != video.frames[k].height)
        throw std::invalid_argument("apply_noise: mask dimensions do not match frame");
    }
    return out;
  }
  for (std::size_t k = 0; k < out.frames.size(); ++k) {
    Frame& f = out.frames[k];
    const RegionMask& m = plan.per_frame_masks[k];
    if (m.width() != f.width || m.height() != f.height)
      throw std::invalid_argument("apply_noise: mask dimensions do not match frame");
    Rng rng(derive_seed(plan.noise_seed, "frame", k));
    std::normal_distribution<double> gauss(0.0, plan.sigma);
    const auto& bits = m.bits();
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (!bits[i]) continue;
      for (std::size_t c = 0; c < 3; ++c) {
        auto& byte = f.rgb[3 * i + c];
        const double v = std::clamp(byte / 255.0 + gauss(rng), 0.0, 1.0);
        byte = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
    }
  }
  return out;
}

}  // namespace ocr3d
