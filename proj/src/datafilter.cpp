#include "ocr3d/datafilter.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ocr3d/seed.hpp"

namespace ocr3d {

namespace {

bool flag(const PredictionRecord& r, std::size_t config) {
  switch (config) {
    case 0: return r.c_f2;
    case 1: return r.c_f16;
    case 2: return r.c_bev;
    default: return r.c_grpo;
  }
}

void check_unique(const std::vector<PredictionRecord>& records) {
  std::unordered_set<std::string> seen;
  for (const auto& r : records)
    if (!seen.insert(r.sample_id).second) throw DuplicateSampleError(r.sample_id);
}

// Indices into `pool` kept after capping, ascending.
std::vector<std::size_t> subsample(std::size_t pool, std::size_t cap, std::uint64_t seed) {
  std::vector<std::size_t> idx(pool);
  for (std::size_t i = 0; i < pool; ++i) idx[i] = i;
  if (pool <= cap) return idx;
  Rng rng(seed);
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + uniform_index(rng, pool - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::vector<std::size_t> select(const std::vector<PredictionRecord>& records,
                                bool (*criterion)(const PredictionRecord&), std::size_t cap,
                                std::uint64_t seed, std::string_view label, CapMode mode,
                                std::size_t& pool_size) {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (criterion(records[i])) pool.push_back(i);
  pool_size = pool.size();

  std::vector<std::size_t> out;
  if (mode == CapMode::per_criterion) {
    for (std::size_t k : subsample(pool.size(), cap, derive_seed(seed, label))) out.push_back(pool[k]);
    return out;
  }
  std::map<std::string, std::vector<std::size_t>> by_cat;
  for (std::size_t i : pool) by_cat[records[i].category].push_back(i);
  for (const auto& [cat, members] : by_cat) {
    const std::string sub = std::string(label) + "/" + cat;
    for (std::size_t k : subsample(members.size(), cap, derive_seed(seed, sub))) out.push_back(members[k]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool parse_flag(const std::string& s, std::size_t line, const std::string& column) {
  if (s == "0") return false;
  if (s == "1") return true;
  throw RecordParseError(line, "column " + column + " must be 0 or 1, got '" + s + "'");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace

bool criterion_more_frames(const PredictionRecord& r) { return !r.c_f2 && r.c_f16 && !r.c_grpo; }
bool criterion_bev(const PredictionRecord& r) { return !r.c_f2 && r.c_bev && !r.c_grpo; }

FilterReport config_stats(const std::vector<PredictionRecord>& records) {
  FilterReport rep;
  rep.total = records.size();
  for (const auto& r : records)
    for (std::size_t c = 0; c < 4; ++c) (flag(r, c) ? rep.configs[c].correct : rep.configs[c].wrong) += 1;
  if (rep.total > 0)
    for (auto& c : rep.configs) c.accuracy = static_cast<double>(c.correct) / static_cast<double>(rep.total);
  return rep;
}

FilterReport filter_coldstart(const std::vector<PredictionRecord>& records, std::size_t cap,
                              std::uint64_t seed, CapMode mode) {
  if (cap < 1) throw std::invalid_argument("cap_per_criterion must be >= 1");
  check_unique(records);
  FilterReport rep = config_stats(records);
  const auto a = select(records, criterion_more_frames, cap, seed, "filter/more_frames", mode, rep.more_frames_pool);
  const auto b = select(records, criterion_bev, cap, seed, "filter/bev", mode, rep.bev_pool);
  for (std::size_t i : a) rep.more_frames.push_back(records[i].sample_id);
  for (std::size_t i : b) rep.bev.push_back(records[i].sample_id);
  std::set<std::size_t> uni(a.begin(), a.end());
  uni.insert(b.begin(), b.end());
  for (std::size_t i : uni) {
    rep.selected.push_back(records[i].sample_id);
    ++rep.category_histogram[records[i].category];
  }
  return rep;
}

std::vector<PredictionRecord> read_records(std::istream& in) {
  static const std::array<std::string, 6> kColumns{"sample_id", "category", "c_f2", "c_f16", "c_bev", "c_grpo"};
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t lineno = 0;
  std::array<std::size_t, 6> pos{};
  std::size_t width = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (!have_header) {
      width = fields.size();
      for (std::size_t c = 0; c < kColumns.size(); ++c) {
        const auto it = std::find(fields.begin(), fields.end(), kColumns[c]);
        if (it == fields.end()) throw RecordParseError(lineno, "header lacks column '" + kColumns[c] + "'");
        if (std::find(it + 1, fields.end(), kColumns[c]) != fields.end())
          throw RecordParseError(lineno, "header repeats column '" + kColumns[c] + "'");
        pos[c] = static_cast<std::size_t>(it - fields.begin());
      }
      have_header = true;
      continue;
    }
    if (fields.size() != width)
      throw RecordParseError(lineno, "expected " + std::to_string(width) + " fields, got " +
                                         std::to_string(fields.size()));
    PredictionRecord r;
    r.sample_id = fields[pos[0]];
    if (r.sample_id.empty()) throw RecordParseError(lineno, "empty sample_id");
    r.category = fields[pos[1]];
    r.c_f2 = parse_flag(fields[pos[2]], lineno, kColumns[2]);
    r.c_f16 = parse_flag(fields[pos[3]], lineno, kColumns[3]);
    r.c_bev = parse_flag(fields[pos[4]], lineno, kColumns[4]);
    r.c_grpo = parse_flag(fields[pos[5]], lineno, kColumns[5]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_records(std::ostream& out, const std::vector<PredictionRecord>& records) {
  out << "sample_id,category,c_f2,c_f16,c_bev,c_grpo\n";
  for (const auto& r : records)
    out << r.sample_id << ',' << r.category << ',' << r.c_f2 << ',' << r.c_f16 << ',' << r.c_bev << ','
        << r.c_grpo << '\n';
}

void write_report(std::ostream& out, const FilterReport& rep) {
  nlohmann::ordered_json j;
  j["total"] = rep.total;
  nlohmann::ordered_json configs;
  for (std::size_t c = 0; c < 4; ++c) {
    nlohmann::ordered_json e;
    e["correct"] = rep.configs[c].correct;
    e["wrong"] = rep.configs[c].wrong;
    e["accuracy"] = rep.configs[c].accuracy ? nlohmann::ordered_json(*rep.configs[c].accuracy) : nullptr;
    configs[kConfigNames[c]] = e;
  }
  j["configs"] = configs;
  j["criteria"] = {
      {"more_frames", {{"eligible", rep.more_frames_pool}, {"selected", rep.more_frames.size()}}},
      {"bev", {{"eligible", rep.bev_pool}, {"selected", rep.bev.size()}}},
  };
  j["selected_total"] = rep.selected.size();
  j["category_histogram"] = rep.category_histogram;
  out << j.dump(2) << '\n';
}

}  // namespace ocr3d
