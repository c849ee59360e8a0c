#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "figlabel/error.hpp"
#include "figlabel/geometry.hpp"
#include "testutil/oracles.hpp"

using namespace figlabel;

namespace {

BBox random_box(std::mt19937& rng, double extent = 100.0) {
  std::uniform_real_distribution<double> coord(0.0, extent);
  std::uniform_real_distribution<double> size(1.0, extent / 2);
  const double x1 = coord(rng), y1 = coord(rng);
  return BBox{x1, y1, x1 + size(rng), y1 + size(rng)};
}

}  // namespace

TEST_CASE("iou examples") {
  CHECK(iou(BBox{0, 0, 10, 10}, BBox{0, 0, 10, 10}) == doctest::Approx(1.0));
  CHECK(iou(BBox{0, 0, 10, 10}, BBox{20, 20, 30, 30}) == doctest::Approx(0.0));
  // intersection 50, union 150
  CHECK(iou(BBox{0, 0, 10, 10}, BBox{5, 0, 15, 10}) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("iou properties") {
  std::mt19937 rng(7);
  for (int i = 0; i < 500; ++i) {
    const BBox a = random_box(rng), b = random_box(rng);
    const double ab = iou(a, b);
    CHECK(ab == doctest::Approx(iou(b, a)));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
    CHECK(iou(a, a) == doctest::Approx(1.0));
  }
}

TEST_CASE("center") {
  CHECK(center(BBox{0, 0, 10, 10}) == Point{5, 5});
  CHECK(center(BBox{2, 4, 6, 8}) == Point{4, 6});
  CHECK(center(BBox{0, 0, 1, 3}) == Point{0.5, 1.5});
}

TEST_CASE("enclosing_box examples") {
  const BBox single[] = {BBox{0, 0, 2, 2}};
  CHECK(enclosing_box(std::span<const BBox>(single)) == BBox{0, 0, 2, 2});

  const BBox two[] = {BBox{0, 0, 2, 2}, BBox{5, 1, 6, 7}};
  CHECK(enclosing_box(std::span<const BBox>(two)) == BBox{0, 0, 6, 7});

  const BBox mixed[] = {BBox{1, 1, 2, 2}, BBox{0, 3, 1.5, 4}};
  CHECK(enclosing_box(std::span<const BBox>(mixed)) == BBox{0, 1, 2, 4});
}

TEST_CASE("enclosing_box rejects empty input") {
  CHECK_THROWS_WITH_AS(enclosing_box(std::span<const BBox>{}),
                       "empty geometry set", Error);
  CHECK_THROWS_WITH_AS(enclosing_box(std::span<const Point>{}),
                       "empty geometry set", Error);
}

TEST_CASE("enclosing_box contains every input") {
  std::mt19937 rng(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<BBox> boxes;
    std::uniform_int_distribution<int> n(1, 8);
    const int count = n(rng);
    for (int j = 0; j < count; ++j) boxes.push_back(random_box(rng));
    const BBox enc = enclosing_box(std::span<const BBox>(boxes));
    for (const BBox& b : boxes) CHECK(enc.contains(b));
  }
}

TEST_CASE("solve_assignment examples") {
  {
    const Assignment a = solve_assignment({{1, 2}, {2, 4}});
    CHECK(a.total_cost == doctest::Approx(4.0));
    REQUIRE(a.pairs.size() == 2);
    CHECK(a.pairs[0] == std::pair<int, int>(0, 1));
    CHECK(a.pairs[1] == std::pair<int, int>(1, 0));
  }
  {
    const Assignment a = solve_assignment({{0}});
    CHECK(a.total_cost == doctest::Approx(0.0));
    REQUIRE(a.pairs.size() == 1);
    CHECK(a.pairs[0] == std::pair<int, int>(0, 0));
  }
  {
    // Two optimal assignments cost 8; the lexicographically smaller pair
    // list {(0,0),(1,1)} wins.
    const Assignment a = solve_assignment({{5, 1}, {7, 3}, {9, 9}});
    CHECK(a.total_cost == doctest::Approx(8.0));
    REQUIRE(a.pairs.size() == 2);
    CHECK(a.pairs[0] == std::pair<int, int>(0, 0));
    CHECK(a.pairs[1] == std::pair<int, int>(1, 1));
  }
}

TEST_CASE("solve_assignment rejects bad input") {
  CHECK_THROWS_AS(solve_assignment({}), Error);
  CHECK_THROWS_AS(solve_assignment({{}}), Error);
  CHECK_THROWS_WITH_AS(solve_assignment({{1.0, -0.5}}), "invalid cost", Error);
  CHECK_THROWS_WITH_AS(
      solve_assignment({{1.0, std::numeric_limits<double>::infinity()}}),
      "invalid cost", Error);
  CHECK_THROWS_WITH_AS(
      solve_assignment({{1.0, std::numeric_limits<double>::quiet_NaN()}}),
      "invalid cost", Error);
}

TEST_CASE("solve_assignment matches brute force") {
  std::mt19937 rng(23);
  std::uniform_int_distribution<int> dim(1, 6);
  std::uniform_int_distribution<int> wide(6, 9);
  std::uniform_real_distribution<double> cost_value(0.0, 10.0);
  std::uniform_int_distribution<int> integer_cost(0, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int trial = 0; trial < 300; ++trial) {
    int rows = dim(rng), cols = dim(rng);
    if (trial % 5 == 0) (trial % 2 ? rows : cols) = wide(rng);
    // Integer costs now and then to force ties.
    const bool integral = unit(rng) < 0.4;
    std::vector<std::vector<double>> cost(rows, std::vector<double>(cols));
    for (auto& row : cost) {
      for (double& c : row) {
        c = integral ? double(integer_cost(rng)) : cost_value(rng);
      }
    }

    const Assignment got = solve_assignment(cost);
    const auto expected = oracles::brute_force_assignment(cost);
    CHECK(got.total_cost == doctest::Approx(expected.total_cost).epsilon(1e-9));
    CHECK(got.pairs == expected.pairs);
    CHECK(got.pairs.size() == static_cast<std::size_t>(std::min(rows, cols)));
  }
}
