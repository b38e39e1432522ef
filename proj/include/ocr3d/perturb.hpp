#pragma once

#include <cstdint>
#include <vector>

#include "ocr3d/geometry.hpp"
#include "ocr3d/scenegen.hpp"

namespace ocr3d {

enum class ScheduleKind { fix, linear, exp, cos };

std::string_view to_string(ScheduleKind k);
ScheduleKind parse_schedule_kind(std::string_view s);

/// Step-wise annealing of the perturbed-object fraction.
struct ScheduleSpec {
  ScheduleKind kind = ScheduleKind::linear;
  double delta0 = 0.5;
  int total_steps = 2000;
  double fix_fraction = 0.25;  // only used by ScheduleKind::fix

  void validate() const;
};

struct NoiseSpec {
  double sigma0 = 0.3;  // std of additive noise in [0,1] pixel units at delta == delta0
  std::uint64_t seed = 0;

  void validate() const;
};

struct PerturbationPlan {
  std::vector<int> selected_ids;
  std::vector<RegionMask> per_frame_masks;
  double delta = 0.0;
  double sigma = 0.0;
  std::uint64_t noise_seed = 0;
};

/// Decay factor at `step`. Throws std::invalid_argument when step is outside [0, total_steps].
double delta_t(const ScheduleSpec& spec, int step);

/// Number of objects selected out of `total` at decay `delta`: round(delta * total),
/// halves rounded away from zero.
int selection_count(double delta, std::size_t total);

/// Seeded uniform sample of selection_count(delta, M) boxes without replacement,
/// returned in scene order.
std::vector<ObjectBox> select_objects(const Scene& scene, double delta, std::uint64_t seed);

/// Plan for an explicit (delta, sigma) pair.
PerturbationPlan make_plan(const Scene& scene, const Trajectory& traj, double delta, double sigma,
                           std::uint64_t seed);

/// Plan at a training step: delta from the schedule, sigma = sigma0 * delta / delta0.
PerturbationPlan build_plan(const Scene& scene, const Trajectory& traj, const ScheduleSpec& spec,
                            const NoiseSpec& noise, int step, std::uint64_t seed);

/// Per-frame union of box regions for the given ids.
std::vector<RegionMask> region_masks(const Scene& scene, const Trajectory& traj,
                                     std::span<const int> ids);

/// Adds clamped Gaussian noise to the rgb channels of masked pixels. Every
/// other byte (unmasked rgb, all labels) is copied unchanged.
Video apply_noise(const Video& video, const PerturbationPlan& plan);

}  // namespace ocr3d
