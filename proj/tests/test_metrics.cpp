#include <doctest.h>

#include <random>

#include "alref/core/error.hpp"
#include "alref/eval/metrics.hpp"
#include "oracles.hpp"

using namespace alref;
using namespace alref::eval;

namespace {

BinaryMask rect(int h, int w, int x0, int y0, int x1, int y1) {
  BinaryMask m(h, w);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.set(x, y, true);
  return m;
}

}  // namespace

TEST_CASE("boundary map matches the oracle and ignores the image border") {
  const auto full = rect(6, 8, 0, 0, 8, 6);
  CHECK(boundary_map(full).count() == 0);
  const auto inner = rect(6, 8, 2, 1, 5, 4);  // 3x3 block: all but the centre
  CHECK(boundary_map(inner).count() == 8);
  CHECK_FALSE(boundary_map(inner).get(3, 2));
  const auto touching = rect(6, 8, 0, 0, 3, 3);  // only the sides facing the interior
  CHECK(boundary_map(touching).count() == 5);

  std::mt19937 rng(3);
  for (int i = 0; i < 40; ++i) {
    const auto m = oracle::random_shape(rng, 20 + i, 30);
    const auto b = boundary_map(m);
    const auto pts = oracle::boundary_points(m);
    CHECK(b.count() == pts.size());
    for (auto [x, y] : pts) CHECK(b.get(x, y));
  }
}

TEST_CASE("boundary tolerance follows the image diagonal") {
  CHECK(boundary_tolerance(480, 854) == 8);  // diagonal 979.6 -> 7.84
  CHECK(boundary_tolerance(720, 1280) == 12);
  CHECK(boundary_tolerance(3, 4) == 1);
  CHECK(boundary_tolerance(1, 1) == 1);
}

TEST_CASE("contour F agrees with the all-pairs matcher on random shapes") {
  std::mt19937 rng(2024);
  int compared = 0, nontrivial = 0;
  for (int i = 0; i < 80; ++i) {
    const int h = std::uniform_int_distribution<int>(8, 128)(rng);
    const int w = std::uniform_int_distribution<int>(8, 128)(rng);
    const auto a = oracle::random_shape(rng, h, w);
    // Half the pairs are perturbed copies so scores spread across (0, 1).
    auto b = oracle::random_shape(rng, h, w);
    if (i % 2 == 0) {
      b = a;
      for (int k = 0; k < h * w / 20; ++k) {
        const auto p = static_cast<std::size_t>(rng() % b.bits.size());
        b.bits[p] ^= 1;
      }
    }
    for (int tol : {boundary_tolerance(h, w), 0, 3}) {
      const auto got = boundary_f(a, b, tol);
      const auto want = oracle::boundary_f_all_pairs(a, b, tol);
      CAPTURE(i);
      CAPTURE(tol);
      CHECK(std::abs(got.precision - want.precision) <= 1e-9);
      CHECK(std::abs(got.recall - want.recall) <= 1e-9);
      CHECK(std::abs(got.f - want.f) <= 1e-9);
      if (want.f > 0 && want.f < 1) ++nontrivial;
    }
    ++compared;
  }
  CHECK(compared >= 50);
  CHECK(nontrivial >= 50);
}

TEST_CASE("contour F edge cases") {
  const BinaryMask empty(10, 10);
  const auto box = rect(10, 10, 2, 2, 6, 6);
  CHECK(boundary_f(empty, empty).f == 1.0);
  CHECK(boundary_f(box, empty).f == 0.0);
  CHECK(boundary_f(empty, box).f == 0.0);
  CHECK(boundary_f(box, box).f == 1.0);
  // A whole-image mask has no boundary, like an empty one.
  CHECK(boundary_f(rect(10, 10, 0, 0, 10, 10), empty).f == 1.0);
  CHECK_THROWS_AS(boundary_f(box, BinaryMask(10, 11)), Error);
  CHECK_THROWS_AS(boundary_f(box, box, -1), Error);
}

TEST_CASE("region J equals pixel-count intersection over union") {
  std::mt19937 rng(77);
  for (int i = 0; i < 60; ++i) {
    const int h = 5 + static_cast<int>(rng() % 40), w = 5 + static_cast<int>(rng() % 40);
    const int frames = 1 + static_cast<int>(rng() % 5);
    std::vector<BinaryMask> p, g;
    for (int f = 0; f < frames; ++f) {
      p.push_back(oracle::random_shape(rng, h, w));
      g.push_back(oracle::random_shape(rng, h, w));
    }
    CHECK(region_j(p, g) == oracle::region_j_counts(p, g));
  }
  const BinaryMask empty(4, 4);
  CHECK(region_j({empty}, {empty}) == 1.0);
  CHECK(region_j({rect(4, 4, 0, 0, 2, 2)}, {rect(4, 4, 0, 0, 2, 4)}) == 0.5);
}

TEST_CASE("unannotated frames are left out of the mean") {
  const auto a = rect(4, 4, 0, 0, 2, 2);
  const BinaryMask empty(4, 4);
  const std::vector<BinaryMask> pred{a, empty, a}, gt{a, a, a};
  CHECK(region_j(pred, gt) == doctest::Approx(2.0 / 3.0));
  CHECK(region_j(pred, gt, {true, false, true}) == 1.0);
  CHECK(contour_f(pred, gt, {true, false, true}) == 1.0);
  CHECK(contour_f(pred, gt, {false, true, false}) == 0.0);
  CHECK_THROWS_AS(region_j(pred, gt, {false, false, false}), Error);
  CHECK_THROWS_AS(region_j(pred, {a}), Error);
  CHECK_THROWS_AS(region_j(pred, gt, {true}), Error);
}

TEST_CASE("dataset means average within groups, then across them") {
  MetricReport r;
  r.objects = {{"v", "0", "a", 1.0, 0.5, 3}, {"v", "1", "a", 0.0, 0.5, 3}, {"w", "0", "b", 0.8, 1.0, 3}};
  r.aggregate();
  CHECK(r.j == doctest::Approx((0.5 + 0.8) / 2));
  CHECK(r.f == doctest::Approx((0.5 + 1.0) / 2));
  CHECK(r.jf == doctest::Approx((r.j + r.f) / 2));
  for (auto& o : r.objects) o.group.clear();
  r.aggregate();
  CHECK(r.j == doctest::Approx(1.8 / 3));
  MetricReport none;
  none.aggregate();
  CHECK(none.jf == 0.0);
}

TEST_CASE("report serialisation") {
  MetricReport r;
  r.dataset = "ref_davis17";
  r.objects = {{"v", "0", "", 0.75, 0.5, 2}};
  r.aggregate();
  CHECK(to_csv(r) == "dataset,J&F,J,F\nref_davis17,62.5,75.0,50.0\n");
  const auto j = to_json(r);
  CHECK(j["J&F"] == 0.625);
  CHECK(j["objects"][0]["J&F"] == 0.625);
  CHECK_FALSE(j["objects"][0].contains("group"));
  CHECK_FALSE(j.contains("M_J"));
  r.avs = true;
  r.dataset = "avsbench";
  CHECK(to_csv(r) == "dataset,M_J,M_F\navsbench,75.0,50.0\n");
  CHECK(to_json(r)["M_F"] == 0.5);
}
