#include "ocr3d/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ocr3d/seed.hpp"

namespace ocr3d {

namespace {

constexpr double kLogWidth = 0.25;    // numeric agreement kernel, in log units
constexpr double kCountWidth = 0.6;   // count agreement kernel, in objects
constexpr double kCloseness = 0.6;    // relative-distance falloff, meters
constexpr double kCameraWallOffset = 0.35;
constexpr double kAssumedCeiling = 2.9;  // meters; the ceiling is never observed

double kernel(double z) { return 2.0 * std::exp(-0.5 * z * z) - 1.0; }

double log_agree(double value, double estimate) {
  if (!(value > 0.0) || !(estimate > 0.0)) return -1.0;
  return kernel(std::log(value / estimate) / kLogWidth);
}

bool is_relational(QuestionCategory c) {
  return c == QuestionCategory::absolute_distance || c == QuestionCategory::relative_distance ||
         c == QuestionCategory::relative_direction;
}

bool is_ordinal(QuestionCategory c) {
  return c == QuestionCategory::object_count || c == QuestionCategory::appearance_order;
}

double direction_angle(int code) {
  switch (code) {
    case kFront: return 0.0;
    case kLeft: return 0.5 * std::numbers::pi;
    case kBack: return std::numbers::pi;
    default: return -0.5 * std::numbers::pi;
  }
}

/// Per-option agreement for a relative direction given estimated positions.
Eigen::VectorXd direction_agreement(const Question& q, const Vec2& from, const Vec2& facing,
                                    const Vec2& target) {
  const Vec2 fwd = facing - from;
  const Vec2 v = target - from;
  const double angle = std::atan2(fwd.x() * v.y() - fwd.y() * v.x(), fwd.dot(v));
  Eigen::VectorXd a(q.options.size());
  for (std::size_t j = 0; j < q.options.size(); ++j)
    a[static_cast<Eigen::Index>(j)] = std::cos(angle - direction_angle(static_cast<int>(q.option_values[j])));
  return a;
}

/// Pairwise concordance of each option's ordering with estimated first frames.
Eigen::VectorXd order_agreement(const Question& q, const std::array<std::optional<int>, 3>& first) {
  Eigen::VectorXd a = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(q.options.size()));
  for (std::size_t j = 0; j < q.options.size(); ++j) {
    const auto order = decode_order(static_cast<int>(q.option_values[j]));
    double score = 0.0;
    for (int x = 0; x < 3; ++x)
      for (int y = x + 1; y < 3; ++y) {
        const auto& fa = first[static_cast<std::size_t>(order[static_cast<std::size_t>(x)])];
        const auto& fb = first[static_cast<std::size_t>(order[static_cast<std::size_t>(y)])];
        if (!fa || !fb || *fa == *fb) continue;
        score += *fa < *fb ? 1.0 : -1.0;
      }
    a[static_cast<Eigen::Index>(j)] = score / 3.0;
  }
  return a;
}

struct Estimates {
  Eigen::VectorXd query;
  Eigen::VectorXd context;
  Eigen::VectorXd prior;
};

class FeatureBuilder {
 public:
  FeatureBuilder(const VideoEvidence& ev, const Question& q) : ev_(ev), q_(q) {
    if (q.options.size() != q.option_values.size() || q.options.size() < 2)
      throw std::invalid_argument("features: question needs >= 2 options with values");
  }

  Estimates build() const {
    const auto k = static_cast<Eigen::Index>(q_.options.size());
    Estimates e{Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k), Eigen::VectorXd::Zero(k)};
    switch (q_.category) {
      case QuestionCategory::object_count: count(e); break;
      case QuestionCategory::absolute_distance: absolute_distance(e); break;
      case QuestionCategory::object_size: object_size(e); break;
      case QuestionCategory::room_size: room_size(e); break;
      case QuestionCategory::relative_distance: relative_distance(e); break;
      case QuestionCategory::relative_direction: relative_direction(e); break;
      case QuestionCategory::appearance_order: appearance_order(e); break;
    }
    return e;
  }

 private:
  bool mentioned(std::string_view label) const {
    return std::find(q_.subjects.begin(), q_.subjects.end(), label) != q_.subjects.end();
  }

  std::optional<Vec2> query_position(const std::string& label) const { return ev_.of(label).floor_position; }

  // Location of an object inferred from its partner category, when the partner is not named.
  std::optional<Vec2> context_position(const std::string& label) const {
    const auto partner = category(label).partner;
    if (mentioned(partner)) return std::nullopt;
    return ev_.of(partner).floor_position;
  }

  // Object centers sit at half their height above the floor contact point.
  std::optional<Vec3> query_center(const std::string& label) const {
    const auto p = query_position(label);
    if (!p) return std::nullopt;
    const double h = ev_.of(label).height.value_or(category(label).nominal_size.z());
    return Vec3(p->x(), p->y(), 0.5 * h);
  }

  std::optional<Vec3> context_center(const std::string& label) const {
    const auto p = context_position(label);
    if (!p) return std::nullopt;
    return Vec3(p->x(), p->y(), 0.5 * category(label).nominal_size.z());
  }

  std::optional<int> query_first(const std::string& label) const {
    const int f = ev_.of(label).first_visible;
    return f >= 0 ? f : ev_.frame_count;  // never seen: after the last frame
  }

  std::optional<int> context_first(const std::string& label) const {
    const auto partner = category(label).partner;
    if (mentioned(partner)) return std::nullopt;
    const int f = ev_.of(partner).first_visible;
    if (f < 0) return std::nullopt;
    return f;
  }

  void fill_numeric(Eigen::VectorXd& out, double estimate) const {
    for (std::size_t j = 0; j < q_.option_values.size(); ++j)
      out[static_cast<Eigen::Index>(j)] = log_agree(q_.option_values[j], estimate);
  }

  void count(Estimates& e) const {
    const double seen = ev_.of(q_.subjects.at(0)).max_blobs_in_frame;
    for (std::size_t j = 0; j < q_.option_values.size(); ++j)
      e.query[static_cast<Eigen::Index>(j)] = kernel((q_.option_values[j] - seen) / kCountWidth);
  }

  void absolute_distance(Estimates& e) const {
    const auto& a = q_.subjects.at(0);
    const auto& b = q_.subjects.at(1);
    if (auto pa = query_center(a), pb = query_center(b); pa && pb) fill_numeric(e.query, (*pa - *pb).norm());
    if (auto ca = context_center(a), cb = context_center(b); ca && cb)
      fill_numeric(e.context, std::max((*ca - *cb).norm(), 0.05));
  }

  void object_size(Estimates& e) const {
    const auto& a = q_.subjects.at(0);
    const Vec3 nominal = category(a).nominal_size;
    const auto& ev = ev_.of(a);
    if (ev.height && ev.width) {
      // Depth is not observed; keep the category's footprint aspect.
      const double footprint = *ev.width * *ev.width * nominal.head<2>().minCoeff() / nominal.head<2>().maxCoeff();
      fill_numeric(e.query, 1000.0 * *ev.height * footprint);
    }
    fill_numeric(e.prior, 1000.0 * nominal.prod());
  }

  void room_size(Estimates& e) const {
    if (ev_.frame_count < 2) return;
    const Vec2 dims = 2.0 * (ev_.camera_extent.array() + kCameraWallOffset).matrix();
    fill_numeric(e.context, dims.x() * dims.y() * kAssumedCeiling);
  }

  static void closeness(Eigen::VectorXd& out, const std::vector<std::optional<double>>& dist, double missing) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& d : dist)
      if (d) best = std::min(best, *d);
    for (std::size_t j = 0; j < dist.size(); ++j)
      out[static_cast<Eigen::Index>(j)] = dist[j] ? 2.0 * std::exp(-(*dist[j] - best) / kCloseness) - 1.0 : missing;
  }

  void relative_distance(Estimates& e) const {
    const auto& anchor = q_.subjects.at(0);
    const std::size_t n = q_.options.size();
    if (auto pa = query_center(anchor)) {
      std::vector<std::optional<double>> d(n);
      for (std::size_t j = 0; j < n; ++j)
        if (auto pj = query_center(q_.options[j])) d[j] = (*pj - *pa).norm();
      // An unseen candidate cannot be judged closest.
      closeness(e.query, d, -1.0);
    }
    if (auto ca = context_center(anchor)) {
      std::vector<std::optional<double>> d(n);
      bool any = false;
      for (std::size_t j = 0; j < n; ++j)
        if (auto cj = context_center(q_.options[j])) {
          d[j] = (*cj - *ca).norm();
          any = true;
        }
      if (any) closeness(e.context, d, 0.0);
    }
  }

  void relative_direction(Estimates& e) const {
    const auto& s = q_.subjects;
    if (auto a = query_position(s.at(0)), f = query_position(s.at(1)), b = query_position(s.at(2)); a && f && b)
      e.query = direction_agreement(q_, *a, *f, *b);
    if (auto a = context_position(s.at(0)), f = context_position(s.at(1)), b = context_position(s.at(2)); a && f && b)
      e.context = direction_agreement(q_, *a, *f, *b);
  }

  void appearance_order(Estimates& e) const {
    std::array<std::optional<int>, 3> qf, cf;
    for (std::size_t i = 0; i < 3; ++i) {
      qf[i] = query_first(q_.subjects.at(i));
      cf[i] = context_first(q_.subjects.at(i));
    }
    e.query = order_agreement(q_, qf);
    e.context = order_agreement(q_, cf);
  }

  const VideoEvidence& ev_;
  const Question& q_;
};

}  // namespace

QuestionFeatures extract_question_features(const VideoEvidence& ev, const Question& q) {
  const Estimates est = FeatureBuilder(ev, q).build();

  QuestionFeatures out;
  for (const auto& s : q.subjects) out.subject_visibility.push_back(ev.visible_fraction(s));
  if (!out.subject_visibility.empty()) {
    double sum = 0.0;
    for (double v : out.subject_visibility) sum += v;
    out.query_visibility = sum / static_cast<double>(out.subject_visibility.size());
  }

  if (q.subjects.size() >= 2 && ev.width > 0) {
    const auto& a = ev.of(q.subjects[0]);
    const auto& b = ev.of(q.subjects[1]);
    double sum = 0.0;
    int n = 0;
    for (int k = 0; k < ev.frame_count; ++k) {
      const auto& ba = a.blobs[static_cast<std::size_t>(k)];
      const auto& bb = b.blobs[static_cast<std::size_t>(k)];
      if (ba.empty() || bb.empty()) continue;
      const auto largest = [](const std::vector<Blob>& v) {
        return *std::max_element(v.begin(), v.end(), [](const Blob& x, const Blob& y) { return x.pixels < y.pixels; });
      };
      const Blob la = largest(ba), lb = largest(bb);
      sum += std::hypot(la.mean_u - lb.mean_u, la.mean_v - lb.mean_v) / ev.width;
      ++n;
    }
    out.centroid_displacement = n > 0 ? std::min(1.0, sum / n) : 0.0;
  }

  if (ev.frame_count > 0) {
    int frames = 0;
    for (int k = 0; k < ev.frame_count; ++k) {
      for (std::size_t c = 0; c < ev.categories.size(); ++c) {
        const auto label = vocabulary()[c].label;
        if (std::find(q.subjects.begin(), q.subjects.end(), label) != q.subjects.end()) continue;
        if (!ev.categories[c].blobs[static_cast<std::size_t>(k)].empty()) {
          ++frames;
          break;
        }
      }
    }
    out.context_covisibility = static_cast<double>(frames) / ev.frame_count;
  }

  const auto n = static_cast<Eigen::Index>(q.options.size());
  const double rel = is_relational(q.category) ? 1.0 : 0.0;
  const double ord = is_ordinal(q.category) ? 1.0 : 0.0;
  out.options.resize(n, kFeatureDim);
  for (Eigen::Index j = 0; j < n; ++j) {
    auto row = out.options.row(j);
    row[kQueryAgree] = est.query[j];
    row[kQueryAgreeVisible] = est.query[j] * out.query_visibility;
    row[kContextAgree] = est.context[j];
    row[kContextAgreeCovisible] = est.context[j] * out.context_covisibility;
    row[kContextWhenQueryHidden] = est.context[j] * (1.0 - out.query_visibility);
    row[kPriorAgree] = est.prior[j];
    row[kQueryAgreeRelational] = est.query[j] * rel;
    row[kQueryAgreeOrdinal] = est.query[j] * ord;
    row[kContextAgreeRelational] = est.context[j] * rel;
    row[kQueryVisibility] = out.query_visibility;
    row[kCentroidDisplacement] = out.centroid_displacement;
    row[kContextCovisibility] = out.context_covisibility;
  }
  return out;
}

FeatureMatrix extract_option_features(const Video& video, const Question& q) {
  return extract_question_features(analyze_video(video), q).options;
}

FeatureVector extract_features(const Video& video, const Question& q, int option_index) {
  if (option_index < 0 || option_index >= static_cast<int>(q.options.size()))
    throw std::invalid_argument("extract_features: option index out of range");
  return extract_option_features(video, q).row(option_index).transpose();
}

Eigen::VectorXd log_action_probs(const PolicyParams& params, const FeatureMatrix& feats) {
  if (feats.rows() < 2) throw std::invalid_argument("action_probs: need at least two options");
  if (feats.cols() != params.weights.size()) throw std::invalid_argument("action_probs: feature dimension mismatch");
  const Eigen::VectorXd z = feats * params.weights;
  const double zmax = z.maxCoeff();
  const double lse = zmax + std::log((z.array() - zmax).exp().sum());
  return (z.array() - lse).matrix();
}

Eigen::VectorXd action_probs(const PolicyParams& params, const FeatureMatrix& feats) {
  return log_action_probs(params, feats).array().exp().matrix();
}

std::string response_text(const Question& q, int option_index) {
  std::string think = "The question is about ";
  if (q.subjects.empty()) {
    think += "the room as a whole";
  } else {
    for (std::size_t i = 0; i < q.subjects.size(); ++i) {
      if (i > 0) think += i + 1 == q.subjects.size() ? " and " : ", ";
      think += "the " + q.subjects[i];
    }
  }
  think += ". I compare each option with what the video shows.";
  return "<think>" + think + "</think><answer>" + Question::option_label(option_index) + "</answer>";
}

Response sample_from_features(const PolicyParams& params, const FeatureMatrix& feats,
                              const Question& q, std::uint64_t seed) {
  const Eigen::VectorXd logp = log_action_probs(params, feats);
  Rng rng(seed);
  const double u = uniform01(rng);
  double cdf = 0.0;
  int pick = static_cast<int>(logp.size()) - 1;
  for (Eigen::Index j = 0; j < logp.size(); ++j) {
    cdf += std::exp(logp[j]);
    if (u < cdf) {
      pick = static_cast<int>(j);
      break;
    }
  }
  return Response{response_text(q, pick), pick, logp[pick]};
}

Response sample_response(const PolicyParams& params, const Video& video, const Question& q,
                         std::uint64_t seed) {
  return sample_from_features(params, extract_option_features(video, q), q, seed);
}

LogProbGrad logprob_and_grad(const PolicyParams& params, const FeatureMatrix& feats, int option_index) {
  if (option_index < 0 || option_index >= feats.rows())
    throw std::invalid_argument("logprob_and_grad: option index out of range");
  const Eigen::VectorXd logp = log_action_probs(params, feats);
  const Eigen::VectorXd p = logp.array().exp().matrix();
  LogProbGrad out;
  out.logprob = logp[option_index];
  out.grad = feats.row(option_index).transpose() - feats.transpose() * p;
  return out;
}

double kl_divergence(const PolicyParams& p, const PolicyParams& ref, const FeatureMatrix& feats) {
  const Eigen::VectorXd lp = log_action_probs(p, feats);
  const Eigen::VectorXd lq = log_action_probs(ref, feats);
  double kl = 0.0;
  for (Eigen::Index j = 0; j < lp.size(); ++j) kl += std::exp(lp[j]) * (lp[j] - lq[j]);
  return std::max(kl, 0.0);
}

Eigen::VectorXd kl_gradient(const PolicyParams& p, const PolicyParams& ref, const FeatureMatrix& feats) {
  const Eigen::VectorXd lp = log_action_probs(p, feats);
  const Eigen::VectorXd lq = log_action_probs(ref, feats);
  const Eigen::VectorXd prob = lp.array().exp().matrix();
  double kl = 0.0;
  for (Eigen::Index j = 0; j < lp.size(); ++j) kl += prob[j] * (lp[j] - lq[j]);
  // d KL / d z_j = p_j (log p_j - log q_j - KL) for logits z = feats * w.
  const Eigen::VectorXd dz = (prob.array() * ((lp - lq).array() - kl)).matrix();
  return feats.transpose() * dz;
}

int greedy_answer(const PolicyParams& params, const FeatureMatrix& feats) {
  const Eigen::VectorXd z = feats * params.weights;
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < z.size(); ++j)
    if (z[j] > z[best]) best = j;
  return static_cast<int>(best);
}

}  // namespace ocr3d
