#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "layout.hpp"

namespace proxilink::calibration {

inline constexpr double kGeomEpsilon = 1e-9;
inline constexpr double kSingularEpsilon = 1e-12;

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

// Corner order: top-left, top-right, bottom-right, bottom-left.
struct Quad {
  std::array<Point, 4> corners;

  static Quad unit() { return Quad{{Point{0, 0}, Point{1, 0}, Point{1, 1}, Point{0, 1}}}; }

  friend bool operator==(const Quad&, const Quad&) = default;
};

// Empty when the quad is usable for a projective solve; otherwise a short
// reason (collinear corners, self-intersection, non-finite coordinate).
std::optional<std::string> quad_defect(const Quad& quad);

class Homography {
 public:
  using Matrix = std::array<std::array<double, 3>, 3>;

  Homography() : m_{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}} {}

  // Normalizes so that m[2][2] == 1. Throws Degenerate when that is not
  // possible or the matrix is singular.
  static Homography from_matrix(const Matrix& m);
  static Homography translation(double dx, double dy);

  const Matrix& matrix() const noexcept { return m_; }
  double operator()(int row, int col) const { return m_[row][col]; }
  double determinant() const;

 private:
  Matrix m_;
};

// Four-point direct linear transform with h33 = 1.
Homography solve_homography(const Quad& source, const Quad& target);

Point apply(const Homography& h, Point p);
Homography invert(const Homography& h);
// apply(compose(a, b), p) == apply(a, apply(b, p))
Homography compose(const Homography& a, const Homography& b);

struct SlotCalibration {
  std::string id;
  std::string label;
  double distance_m = 0.0;
  Quad quad;

  friend bool operator==(const SlotCalibration&, const SlotCalibration&) = default;
};

struct CalibrationProfile {
  int profile_version = 1;
  std::vector<SlotCalibration> slots;

  layout::SlotSet slot_set() const;

  friend bool operator==(const CalibrationProfile&, const CalibrationProfile&) = default;
};

struct ProfileIssue {
  std::string slot;  // empty for document-level problems
  std::string message;
};

struct ProfileCheck {
  std::optional<CalibrationProfile> profile;
  std::vector<ProfileIssue> issues;

  bool ok() const { return issues.empty() && profile.has_value(); }
};

// Collects every problem instead of stopping at the first one.
ProfileCheck check_profile(std::string_view text);

CalibrationProfile load_profile(std::string_view text);
CalibrationProfile load_profile_file(const std::filesystem::path& path);

// Canonical form: fixed key order, two-space indent, at most 9 fractional
// digits with trailing zeros trimmed.
std::string save_profile(const CalibrationProfile& profile);

std::string format_number(double value);

}  // namespace proxilink::calibration
