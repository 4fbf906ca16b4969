#include <doctest.h>

#include <random>
#include <set>

#include "alref/core/error.hpp"
#include "alref/orchestrator/clip_plan.hpp"

using namespace alref;
using namespace alref::orchestrator;

namespace {

// Window boundaries computed by walking the video span by span.
std::vector<std::pair<std::int64_t, std::int64_t>> oracle_windows(std::int64_t t, std::int64_t span) {
  std::vector<std::pair<std::int64_t, std::int64_t>> out;
  std::int64_t pos = 0;
  while (pos < t) {
    const std::int64_t left = t - pos;
    if (left >= span) {
      out.emplace_back(pos, pos + span);
      pos += span;
    } else if (out.empty() || left * 2 >= span) {
      out.emplace_back(pos, t);
      pos = t;
    } else {
      out.back().second = t;
      pos = t;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("100 frames, 5 per clip, interval 10") {
  const auto plan = plan_clips(100, 5, 10);
  REQUIRE(plan.clips.size() == 2);
  CHECK(plan.clips[0] == ClipWindow{0, 50, {0, 10, 20, 30, 40}});
  CHECK(plan.clips[1] == ClipWindow{50, 100, {50, 60, 70, 80, 90}});
  CHECK(plan.frames_per_clip == 5);
  CHECK(plan.interval == 10);
}

TEST_CASE("remainders merge or stand alone") {
  // 124 = 2 spans + 24 < 25: merged into the second clip.
  auto p = plan_clips(124, 5, 10);
  REQUIRE(p.clips.size() == 2);
  CHECK(p.clips[1].start == 50);
  CHECK(p.clips[1].end == 124);
  CHECK(p.clips[1].sampled == std::vector<std::int64_t>{50, 60, 70, 80, 90});
  // 125 = 2 spans + 25: its own clip, too short for interval 10, so even spread.
  p = plan_clips(125, 5, 10);
  REQUIRE(p.clips.size() == 3);
  CHECK(p.clips[2].start == 100);
  CHECK(p.clips[2].end == 125);
  CHECK(p.clips[2].sampled == std::vector<std::int64_t>{100, 106, 112, 118, 124});
  // Shorter than one span: a single clip.
  p = plan_clips(3, 5, 10);
  REQUIRE(p.clips.size() == 1);
  CHECK(p.clips[0] == ClipWindow{0, 3, {0, 1, 2}});
  p = plan_clips(1, 5, 1);
  CHECK(p.clips[0] == ClipWindow{0, 1, {0}});
}

TEST_CASE("random plans tile the video") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::int64_t t = 1 + rng() % 400;
    const int fpc = 1 + static_cast<int>(rng() % 9);
    const int interval = 1 + static_cast<int>(rng() % 12);
    const auto plan = plan_clips(t, fpc, interval);
    const auto expected = oracle_windows(t, static_cast<std::int64_t>(fpc) * interval);
    REQUIRE(plan.clips.size() == expected.size());
    std::int64_t pos = 0;
    std::set<std::int64_t> seen;
    for (std::size_t k = 0; k < plan.clips.size(); ++k) {
      const auto& c = plan.clips[k];
      CHECK(c.start == expected[k].first);
      CHECK(c.end == expected[k].second);
      CHECK(c.start == pos);
      CHECK(c.end > c.start);
      pos = c.end;
      CHECK(static_cast<std::int64_t>(c.sampled.size()) == std::min<std::int64_t>(fpc, c.end - c.start));
      for (std::size_t i = 0; i < c.sampled.size(); ++i) {
        CHECK(c.sampled[i] >= c.start);
        CHECK(c.sampled[i] < c.end);
        CHECK(c.sampled[i] < t);
        if (i > 0) CHECK(c.sampled[i] > c.sampled[i - 1]);
        CHECK(seen.insert(c.sampled[i]).second);
      }
    }
    CHECK(pos == t);
  }
}

TEST_CASE("single clip plan and middle clip") {
  const auto p = single_clip_plan(10, 5);
  REQUIRE(p.clips.size() == 1);
  CHECK(p.clips[0] == ClipWindow{0, 10, {0, 2, 5, 7, 9}});
  CHECK(single_clip_plan(3, 5).clips[0].sampled == std::vector<std::int64_t>{0, 1, 2});
  CHECK(middle_clip_index(1) == 0);
  CHECK(middle_clip_index(2) == 0);
  CHECK(middle_clip_index(3) == 1);
  CHECK(middle_clip_index(4) == 1);
  CHECK(middle_clip_index(5) == 2);
  CHECK_THROWS_AS(middle_clip_index(0), Error);
}

TEST_CASE("invalid plan arguments") {
  CHECK_THROWS_AS(plan_clips(0, 5, 10), Error);
  CHECK_THROWS_AS(plan_clips(10, 0, 10), Error);
  CHECK_THROWS_AS(plan_clips(10, 5, 0), Error);
  CHECK_THROWS_AS(single_clip_plan(0, 5), Error);
}
