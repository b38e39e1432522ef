#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "ocr3d/datafilter.hpp"

using namespace ocr3d;

namespace {

std::vector<PredictionRecord> synthetic_records(std::size_t count, std::uint64_t seed) {
  static const std::array<const char*, 7> cats{"object_count", "absolute_distance", "object_size", "room_size",
                                               "relative_distance", "relative_direction", "appearance_order"};
  std::mt19937_64 rng(seed);
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < count; ++i) {
    PredictionRecord r;
    r.sample_id = "s" + std::to_string(i);
    r.category = cats[rng() % cats.size()];
    r.c_f2 = rng() % 3 == 0;
    r.c_f16 = rng() % 2 == 0;
    r.c_bev = rng() % 2 == 0;
    r.c_grpo = rng() % 3 == 0;
    out.push_back(r);
  }
  return out;
}

PredictionRecord rec(std::string id, bool f2, bool f16, bool bev, bool grpo, std::string cat = "object_count") {
  return {std::move(id), std::move(cat), f2, f16, bev, grpo};
}

}  // namespace

TEST_CASE("criterion examples") {
  CHECK(criterion_more_frames(rec("a", false, true, false, false)));
  CHECK_FALSE(criterion_bev(rec("a", false, true, false, false)));
  CHECK(criterion_bev(rec("b", false, false, true, false)));
  for (const auto& r : {rec("c", true, true, true, false), rec("d", false, true, true, true)}) {
    CHECK_FALSE(criterion_more_frames(r));
    CHECK_FALSE(criterion_bev(r));
  }
}

TEST_CASE("uncapped filter equals brute-force set algebra") {
  const auto records = synthetic_records(10000, 5);
  const auto rep = filter_coldstart(records, records.size(), 1);
  std::vector<std::string> a, b, u;
  std::map<std::string, std::size_t> hist;
  for (const auto& r : records) {
    const bool in_a = !r.c_f2 && r.c_f16 && !r.c_grpo;
    const bool in_b = !r.c_f2 && r.c_bev && !r.c_grpo;
    if (in_a) a.push_back(r.sample_id);
    if (in_b) b.push_back(r.sample_id);
    if (in_a || in_b) {
      u.push_back(r.sample_id);
      ++hist[r.category];
    }
  }
  CHECK(rep.more_frames == a);
  CHECK(rep.bev == b);
  CHECK(rep.selected == u);
  CHECK(rep.category_histogram == hist);
  CHECK(rep.more_frames_pool == a.size());
  CHECK(rep.bev_pool == b.size());

  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : records) by_id[r.sample_id] = &r;
  for (const auto& id : rep.selected) {
    CHECK_FALSE(by_id.at(id)->c_f2);
    CHECK_FALSE(by_id.at(id)->c_grpo);
  }
}

TEST_CASE("capping is exact, seeded and stays inside the pool") {
  const auto records = synthetic_records(5000, 6);
  const auto full = filter_coldstart(records, records.size(), 1);
  const auto capped = filter_coldstart(records, 100, 42);
  CHECK(capped.more_frames.size() == 100);
  CHECK(capped.bev.size() == 100);
  const std::set<std::string> pool_a(full.more_frames.begin(), full.more_frames.end());
  const std::set<std::string> pool_b(full.bev.begin(), full.bev.end());
  for (const auto& id : capped.more_frames) CHECK(pool_a.count(id));
  for (const auto& id : capped.bev) CHECK(pool_b.count(id));
  CHECK(std::set<std::string>(capped.more_frames.begin(), capped.more_frames.end()).size() == 100);
  const auto again = filter_coldstart(records, 100, 42);
  CHECK(again.more_frames == capped.more_frames);
  CHECK(again.bev == capped.bev);
  CHECK(filter_coldstart(records, 100, 43).more_frames != capped.more_frames);

  const auto per_cat = filter_coldstart(records, 10, 42, CapMode::per_category);
  std::map<std::string, std::size_t> a_counts;
  std::map<std::string, const PredictionRecord*> by_id;
  for (const auto& r : records) by_id[r.sample_id] = &r;
  for (const auto& id : per_cat.more_frames) ++a_counts[by_id.at(id)->category];
  CHECK(a_counts.size() == 7);
  for (const auto& [cat, n] : a_counts) CHECK(n == 10);
}

TEST_CASE("config stats") {
  std::vector<PredictionRecord> four;
  for (int i = 0; i < 4; ++i) four.push_back(rec("r" + std::to_string(i), i % 2 == 0, true, i == 0, false));
  const auto s = config_stats(four);
  CHECK(s.total == 4);
  CHECK(s.configs[1].accuracy == 1.0);
  CHECK(s.configs[0].correct == 2);
  CHECK(s.configs[0].wrong == 2);
  CHECK(s.configs[2].correct == 1);
  CHECK(s.configs[3].correct == 0);

  const auto records = synthetic_records(3000, 7);
  const auto r = config_stats(records);
  std::array<std::size_t, 4> correct{};
  for (const auto& x : records) {
    correct[0] += x.c_f2;
    correct[1] += x.c_f16;
    correct[2] += x.c_bev;
    correct[3] += x.c_grpo;
  }
  for (std::size_t c = 0; c < 4; ++c) {
    CHECK(r.configs[c].correct == correct[c]);
    CHECK(r.configs[c].correct + r.configs[c].wrong == records.size());
  }

  const auto empty = config_stats({});
  CHECK(empty.total == 0);
  for (const auto& c : empty.configs) CHECK_FALSE(c.accuracy);
}

TEST_CASE("filter input errors") {
  std::vector<PredictionRecord> dup{rec("x", false, true, false, false), rec("x", false, false, true, false)};
  try {
    filter_coldstart(dup, 10, 1);
    FAIL("expected a duplicate error");
  } catch (const DuplicateSampleError& e) {
    CHECK(e.id() == "x");
  }
  CHECK_THROWS_AS(filter_coldstart({}, 0, 1), std::invalid_argument);
  const auto empty = filter_coldstart({}, 5, 1);
  CHECK(empty.selected.empty());
}

TEST_CASE("record CSV round trip and errors") {
  const auto records = synthetic_records(50, 8);
  std::stringstream ss;
  write_records(ss, records);
  const auto back = read_records(ss);
  REQUIRE(back.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(back[i].sample_id == records[i].sample_id);
    CHECK(back[i].category == records[i].category);
    CHECK(back[i].c_f2 == records[i].c_f2);
    CHECK(back[i].c_grpo == records[i].c_grpo);
  }

  std::istringstream reordered("c_grpo,c_bev,c_f16,c_f2,category,sample_id\n0,1,0,0,room_size,q1\n\n1,0,1,1,object_size,q2\n");
  const auto r = read_records(reordered);
  REQUIRE(r.size() == 2);
  CHECK(r[0].sample_id == "q1");
  CHECK(r[0].c_bev);
  CHECK_FALSE(r[0].c_grpo);
  CHECK(r[1].c_grpo);

  std::istringstream bad_flag("sample_id,category,c_f2,c_f16,c_bev,c_grpo\na,x,0,1,0,0\nb,x,0,2,0,0\n");
  try {
    read_records(bad_flag);
    FAIL("expected a parse error");
  } catch (const RecordParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream short_row("sample_id,category,c_f2,c_f16,c_bev,c_grpo\na,x,0,1\n");
  CHECK_THROWS_AS(read_records(short_row), RecordParseError);
  std::istringstream no_col("sample_id,category,c_f2,c_f16,c_bev\n");
  CHECK_THROWS_AS(read_records(no_col), RecordParseError);
  std::istringstream nothing("");
  CHECK(read_records(nothing).empty());
}

TEST_CASE("report is structured text") {
  const auto rep = filter_coldstart(synthetic_records(100, 9), 5, 3);
  std::ostringstream os;
  write_report(os, rep);
  const std::string s = os.str();
  CHECK(s.find("\"total\": 100") != std::string::npos);
  CHECK(s.find("\"more_frames\"") != std::string::npos);
  CHECK(s.find("\"category_histogram\"") != std::string::npos);
}
