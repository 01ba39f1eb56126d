#pragma once

// Independent reference implementations. Nothing here calls into the engine's
// own solvers, so agreement is evidence rather than tautology.

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Mat3 = std::array<std::array<double, 3>, 3>;
struct Pt {
  double x, y;
};
using Quad4 = std::array<Pt, 4>;  // images of (0,0), (1,0), (1,1), (0,1)

inline Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) out[r][c] += a[r][k] * b[k][c];
  return out;
}

inline Mat3 adjugate_inverse(const Mat3& m) {
  const double a = m[0][0], b = m[0][1], c = m[0][2];
  const double d = m[1][0], e = m[1][1], f = m[1][2];
  const double g = m[2][0], h = m[2][1], i = m[2][2];
  const double det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
  return {{{(e * i - f * h) / det, (c * h - b * i) / det, (b * f - c * e) / det},
           {(f * g - d * i) / det, (a * i - c * g) / det, (c * d - a * f) / det},
           {(d * h - e * g) / det, (b * g - a * h) / det, (a * e - b * d) / det}}};
}

inline Mat3 normalized(Mat3 m) {
  const double s = m[2][2];
  for (auto& row : m)
    for (auto& v : row) v /= s;
  return m;
}

// Closed-form unit square -> quadrilateral mapping (Heckbert, 1989).
inline Mat3 square_to_quad(const Quad4& q) {
  const double dx1 = q[1].x - q[2].x, dx2 = q[3].x - q[2].x, dx3 = q[0].x - q[1].x + q[2].x - q[3].x;
  const double dy1 = q[1].y - q[2].y, dy2 = q[3].y - q[2].y, dy3 = q[0].y - q[1].y + q[2].y - q[3].y;
  double g = 0, h = 0;
  if (dx3 != 0 || dy3 != 0) {
    const double den = dx1 * dy2 - dx2 * dy1;
    g = (dx3 * dy2 - dx2 * dy3) / den;
    h = (dx1 * dy3 - dx3 * dy1) / den;
  }
  return {{{q[1].x - q[0].x + g * q[1].x, q[3].x - q[0].x + h * q[3].x, q[0].x},
           {q[1].y - q[0].y + g * q[1].y, q[3].y - q[0].y + h * q[3].y, q[0].y},
           {g, h, 1.0}}};
}

inline Mat3 quad_to_quad(const Quad4& src, const Quad4& dst) {
  return normalized(multiply(square_to_quad(dst), adjugate_inverse(square_to_quad(src))));
}

inline Pt apply(const Mat3& m, Pt p) {
  const double w = m[2][0] * p.x + m[2][1] * p.y + m[2][2];
  return {(m[0][0] * p.x + m[0][1] * p.y + m[0][2]) / w, (m[1][0] * p.x + m[1][1] * p.y + m[1][2]) / w};
}

// Convex quads: the corners of [0.2,0.8]^2 each nudged by up to 0.15.
inline Quad4 random_convex_quad(std::mt19937& rng) {
  std::uniform_real_distribution<double> nudge(-0.15, 0.15);
  const Quad4 base{{{0.2, 0.2}, {0.8, 0.2}, {0.8, 0.8}, {0.2, 0.8}}};
  Quad4 q;
  for (int i = 0; i < 4; ++i) q[i] = {base[i].x + nudge(rng), base[i].y + nudge(rng)};
  return q;
}

// Times at which x(t) = a*sin(2*pi*f*t) turns around, strictly inside (0, T).
inline std::vector<double> sine_extrema(double f, double duration) {
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double t = (2 * k + 1) / (4 * f);
    if (t >= duration) break;
    out.push_back(t);
  }
  return out;
}

// Independent dwell accumulator: samples every layout-state interval on a
// fine grid instead of summing interval lengths.
struct Interval {
  double start, end;
  std::map<std::string, std::size_t> ranks;  // peer -> distance rank
};

inline std::map<std::string, std::map<std::size_t, double>> sampled_dwell(const std::vector<Interval>& intervals,
                                                                        double step) {
  std::map<std::string, std::map<std::size_t, double>> out;
  for (const auto& iv : intervals) {
    const auto n = static_cast<std::int64_t>(std::llround((iv.end - iv.start) / step));
    for (std::int64_t i = 0; i < n; ++i)
      for (const auto& [peer, rank] : iv.ranks) out[peer][rank] += step;
  }
  return out;
}

// Counts (distance rank, intimacy rank) pairs directly from two orderings.
inline std::array<std::array<int, 3>, 3> count_pairs(const std::vector<std::string>& by_distance,
                                                     const std::vector<std::string>& by_intimacy) {
  std::array<std::array<int, 3>, 3> m{};
  for (std::size_t d = 0; d < by_distance.size(); ++d)
    for (std::size_t i = 0; i < by_intimacy.size(); ++i)
      if (by_distance[d] == by_intimacy[i]) ++m[d][i];
  return m;
}

}  // namespace oracle
