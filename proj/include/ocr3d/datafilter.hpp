#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ocr3d {

/// Correctness of one sample under the four evaluation configurations:
/// 2 frames, 16 frames, 16 frames + BEV map, 16 frames after GRPO training.
struct PredictionRecord {
  std::string sample_id;
  std::string category;
  bool c_f2 = false;
  bool c_f16 = false;
  bool c_bev = false;
  bool c_grpo = false;
};

inline constexpr std::array<const char*, 4> kConfigNames{"f2", "f16", "bev", "grpo"};

struct ConfigCount {
  std::size_t correct = 0;
  std::size_t wrong = 0;
  std::optional<double> accuracy;  // absent for an empty record set
};

/// Recovers more frames:   not f2, f16, not grpo.
bool criterion_more_frames(const PredictionRecord& r);
/// Recovers with a BEV map: not f2, bev, not grpo.
bool criterion_bev(const PredictionRecord& r);

enum class CapMode { per_criterion, per_category };

struct FilterReport {
  std::size_t total = 0;
  std::array<ConfigCount, 4> configs{};
  std::vector<std::string> more_frames;  // selected ids, input order
  std::vector<std::string> bev;
  std::vector<std::string> selected;     // union, input order
  std::size_t more_frames_pool = 0;      // eligible before capping
  std::size_t bev_pool = 0;
  std::map<std::string, std::size_t> category_histogram;  // over the union
};

class DuplicateSampleError : public std::invalid_argument {
 public:
  explicit DuplicateSampleError(const std::string& id)
      : std::invalid_argument("duplicate sample_id '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class RecordParseError : public std::runtime_error {
 public:
  RecordParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

FilterReport config_stats(const std::vector<PredictionRecord>& records);

/// Criterion sets, each capped at `cap` by seeded uniform subsampling (either
/// over the whole criterion or within each question category).
FilterReport filter_coldstart(const std::vector<PredictionRecord>& records, std::size_t cap,
                              std::uint64_t seed, CapMode mode = CapMode::per_criterion);

/// CSV with a header naming sample_id, category, c_f2, c_f16, c_bev, c_grpo in
/// any order. Flags are 0 or 1. Blank lines are skipped.
std::vector<PredictionRecord> read_records(std::istream& in);
void write_records(std::ostream& out, const std::vector<PredictionRecord>& records);

void write_report(std::ostream& out, const FilterReport& report);

}  // namespace ocr3d
