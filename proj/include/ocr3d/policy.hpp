#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ocr3d/evidence.hpp"
#include "ocr3d/scenegen.hpp"

namespace ocr3d {

inline constexpr int kFeatureDim = 12;

/// Layout of the per-option feature vector. Query features come from the
/// objects the question names; context features only from objects it does not
/// name (plus the camera path), so noise confined to query objects leaves the
/// context block untouched.
enum Feature : int {
  kQueryAgree = 0,         // option vs. query-object estimate
  kQueryAgreeVisible,      // ... scaled by query visibility
  kContextAgree,           // option vs. context-object estimate
  kContextAgreeCovisible,  // ... scaled by context co-visibility
  kContextWhenQueryHidden, // context agreement scaled by (1 - query visibility)
  kPriorAgree,             // option vs. category prior (object size only)
  kQueryAgreeRelational,   // query agreement, relational categories only
  kQueryAgreeOrdinal,      // query agreement, count and appearance order only
  kContextAgreeRelational, // context agreement, relational categories only
  kQueryVisibility,        // option-independent
  kCentroidDisplacement,   // option-independent
  kContextCovisibility,    // option-independent
};

inline constexpr std::array<int, 4> kContextBlock{kContextAgree, kContextAgreeCovisible,
                                                  kContextAgreeRelational, kContextCovisibility};

using FeatureVector = Eigen::VectorXd;
/// One row per answer option.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct QuestionFeatures {
  FeatureMatrix options;
  double query_visibility = 0.0;       // mean visible-frame fraction of named objects
  double centroid_displacement = 0.0;  // image-space gap between the first two named objects
  double context_covisibility = 0.0;   // fraction of frames showing an unnamed object
  std::vector<double> subject_visibility;  // per entry of Question::subjects
};

QuestionFeatures extract_question_features(const VideoEvidence& evidence, const Question& q);
FeatureMatrix extract_option_features(const Video& video, const Question& q);
FeatureVector extract_features(const Video& video, const Question& q, int option_index);

struct PolicyParams {
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(kFeatureDim);
  int version = 0;
};

struct Response {
  std::string text;
  int option_index = 0;
  double logprob_old = 0.0;
};

/// Softmax over per-option scores weights . feats[j].
Eigen::VectorXd action_probs(const PolicyParams& params, const FeatureMatrix& feats);
Eigen::VectorXd log_action_probs(const PolicyParams& params, const FeatureMatrix& feats);

/// "<think>...</think><answer>X</answer>" for the given option.
std::string response_text(const Question& q, int option_index);

Response sample_from_features(const PolicyParams& params, const FeatureMatrix& feats,
                              const Question& q, std::uint64_t seed);
Response sample_response(const PolicyParams& params, const Video& video, const Question& q,
                         std::uint64_t seed);

struct LogProbGrad {
  double logprob = 0.0;
  Eigen::VectorXd grad;
};

/// log pi(option) and its exact gradient feats[option] - sum_j p_j feats[j].
LogProbGrad logprob_and_grad(const PolicyParams& params, const FeatureMatrix& feats, int option_index);

/// Exact categorical KL(pi_p || pi_ref) over the options.
double kl_divergence(const PolicyParams& p, const PolicyParams& ref, const FeatureMatrix& feats);
/// Gradient of kl_divergence with respect to p.weights.
Eigen::VectorXd kl_gradient(const PolicyParams& p, const PolicyParams& ref, const FeatureMatrix& feats);

/// Index of the highest-probability option; ties resolve to the lowest index.
int greedy_answer(const PolicyParams& params, const FeatureMatrix& feats);

}  // namespace ocr3d
