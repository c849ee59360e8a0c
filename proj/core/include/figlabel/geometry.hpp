#pragma once

#include <span>
#include <utility>
#include <vector>

namespace figlabel {

// Axis-aligned box in page-pixel coordinates, origin at the page top-left.
// Coordinates may be fractional. A box is valid iff x1 < x2 and y1 < y2.
struct BBox {
  double x1 = 0;
  double y1 = 0;
  double x2 = 0;
  double y2 = 0;

  bool valid() const { return x1 < x2 && y1 < y2; }
  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
  bool contains(const BBox& other) const {
    return x1 <= other.x1 && y1 <= other.y1 && x2 >= other.x2 && y2 >= other.y2;
  }
  bool operator==(const BBox& other) const = default;
};

struct Point {
  double x = 0;
  double y = 0;
  bool operator==(const Point& other) const = default;
};

// Result of solve_assignment: an injective pairing of rows to columns with
// globally minimal total cost. Pairs are sorted by row index.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;
  double total_cost = 0;
};

// Intersection over union of two valid boxes; 0 for disjoint boxes.
double iou(const BBox& a, const BBox& b);

Point center(const BBox& b);

double distance(const Point& a, const Point& b);

// Smallest box containing all inputs. Throws Error("empty geometry set") on
// empty input.
BBox enclosing_box(std::span<const BBox> boxes);
BBox enclosing_box(std::span<const Point> points);

// Minimum-cost linear assignment over an R x C matrix of finite nonnegative
// costs; returns min(R, C) pairs. Ties between optimal assignments are broken
// by the lexicographically smallest pair list. Throws Error("invalid cost")
// for non-finite or negative entries.
Assignment solve_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace figlabel
