#include "calibration.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "error.hpp"

namespace proxilink::calibration {

namespace {

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool segments_cross(Point p1, Point p2, Point q1, Point q2) {
  const double d1 = cross(q1, q2, p1);
  const double d2 = cross(q1, q2, p2);
  const double d3 = cross(p1, p2, q1);
  const double d4 = cross(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

// Solves a x = b in place with partial pivoting; false if a pivot vanishes.
template <std::size_t N>
bool gauss_solve(std::array<std::array<double, N>, N> a, std::array<double, N>& b) {
  double scale = 0.0;
  for (const auto& row : a)
    for (double v : row) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return false;

  for (std::size_t col = 0; col < N; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < N; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    if (std::abs(a[pivot][col]) <= kSingularEpsilon * scale) return false;
    std::swap(a[pivot], a[col]);
    std::swap(b[pivot], b[col]);
    for (std::size_t r = col + 1; r < N; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t i = N; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < N; ++c) s -= a[i][c] * b[c];
    b[i] = s / a[i][i];
  }
  return true;
}

}  // namespace

std::optional<std::string> quad_defect(const Quad& quad) {
  const auto& c = quad.corners;
  for (const auto& p : c)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return "non-finite corner coordinate";
  static constexpr std::array<std::array<int, 3>, 4> kTriples{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
  for (const auto& t : kTriples) {
    if (std::abs(cross(c[t[0]], c[t[1]], c[t[2]])) / 2.0 <= kGeomEpsilon)
      return "three collinear corners";
  }
  if (segments_cross(c[0], c[1], c[2], c[3]) || segments_cross(c[1], c[2], c[3], c[0]))
    return "self-intersecting quad";
  return std::nullopt;
}

Homography Homography::from_matrix(const Matrix& m) {
  for (const auto& row : m)
    for (double v : row)
      if (!std::isfinite(v)) throw Error(ErrorCode::Degenerate, "homography has non-finite entries");
  if (std::abs(m[2][2]) <= kSingularEpsilon)
    throw Error(ErrorCode::Degenerate, "homography cannot be normalized (m33 = 0)");
  Homography h;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) h.m_[r][c] = m[r][c] / m[2][2];
  h.m_[2][2] = 1.0;
  if (std::abs(h.determinant()) <= kSingularEpsilon)
    throw Error(ErrorCode::Degenerate, "homography is singular");
  return h;
}

Homography Homography::translation(double dx, double dy) {
  return from_matrix({{{1, 0, dx}, {0, 1, dy}, {0, 0, 1}}});
}

double Homography::determinant() const {
  const auto& m = m_;
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Homography solve_homography(const Quad& source, const Quad& target) {
  if (auto defect = quad_defect(source)) throw Error(ErrorCode::Degenerate, "source quad: " + *defect);
  if (auto defect = quad_defect(target)) throw Error(ErrorCode::Degenerate, "target quad: " + *defect);

  using System = std::array<std::array<double, 8>, 8>;
  System a{};
  std::array<double, 8> b{};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto [x, y] = source.corners[i];
    const auto [u, v] = target.corners[i];
    a[2 * i] = {x, y, 1, 0, 0, 0, -x * u, -y * u};
    a[2 * i + 1] = {0, 0, 0, x, y, 1, -x * v, -y * v};
    b[2 * i] = u;
    b[2 * i + 1] = v;
  }

  std::array<double, 8> h = b;
  if (!gauss_solve(a, h)) throw Error(ErrorCode::Degenerate, "corner correspondences are degenerate");

  // Two rounds of iterative refinement with the residual in long double keep
  // corner errors near machine precision for oblique quads.
  for (int round = 0; round < 2; ++round) {
    std::array<double, 8> residual{};
    for (std::size_t r = 0; r < 8; ++r) {
      long double s = b[r];
      for (std::size_t c = 0; c < 8; ++c) s -= static_cast<long double>(a[r][c]) * h[c];
      residual[r] = static_cast<double>(s);
    }
    if (!gauss_solve(a, residual)) break;
    for (std::size_t c = 0; c < 8; ++c) h[c] += residual[c];
  }

  return Homography::from_matrix({{{h[0], h[1], h[2]}, {h[3], h[4], h[5]}, {h[6], h[7], 1.0}}});
}

Point apply(const Homography& h, Point p) {
  const double w = h(2, 0) * p.x + h(2, 1) * p.y + h(2, 2);
  if (!(std::abs(w) > kSingularEpsilon)) throw Error(ErrorCode::PointAtInfinity, "point maps to infinity");
  return {(h(0, 0) * p.x + h(0, 1) * p.y + h(0, 2)) / w, (h(1, 0) * p.x + h(1, 1) * p.y + h(1, 2)) / w};
}

Homography invert(const Homography& h) {
  const double det = h.determinant();
  if (!(std::abs(det) > kSingularEpsilon)) throw Error(ErrorCode::Degenerate, "homography is singular");
  const auto& m = h.matrix();
  Homography::Matrix adj{{
      {m[1][1] * m[2][2] - m[1][2] * m[2][1], m[0][2] * m[2][1] - m[0][1] * m[2][2],
       m[0][1] * m[1][2] - m[0][2] * m[1][1]},
      {m[1][2] * m[2][0] - m[1][0] * m[2][2], m[0][0] * m[2][2] - m[0][2] * m[2][0],
       m[0][2] * m[1][0] - m[0][0] * m[1][2]},
      {m[1][0] * m[2][1] - m[1][1] * m[2][0], m[0][1] * m[2][0] - m[0][0] * m[2][1],
       m[0][0] * m[1][1] - m[0][1] * m[1][0]},
  }};
  for (auto& row : adj)
    for (double& v : row) v /= det;
  return Homography::from_matrix(adj);
}

Homography compose(const Homography& a, const Homography& b) {
  Homography::Matrix m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      for (int k = 0; k < 3; ++k) m[r][c] += a(r, k) * b(k, c);
  return Homography::from_matrix(m);
}

layout::SlotSet CalibrationProfile::slot_set() const {
  std::vector<layout::ProjectionSlot> out;
  out.reserve(slots.size());
  for (const auto& s : slots) out.push_back({s.id, s.label, s.distance_m, s.id});
  return layout::SlotSet(std::move(out));
}

ProfileCheck check_profile(std::string_view text) {
  ProfileCheck check;
  auto issue = [&](std::string slot, std::string message) {
    check.issues.push_back({std::move(slot), std::move(message)});
  };

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    issue("", std::string("malformed document: ") + e.what());
    return check;
  }
  if (!doc.is_object()) {
    issue("", "document must be an object");
    return check;
  }
  if (!doc.contains("profile_version") || !doc["profile_version"].is_number_integer()) {
    issue("", "profile_version must be an integer");
    return check;
  }
  if (!doc.contains("slots") || !doc["slots"].is_array()) {
    issue("", "slots must be an array");
    return check;
  }

  CalibrationProfile profile;
  profile.profile_version = doc["profile_version"].get<int>();
  if (profile.profile_version != 1) issue("", "unsupported profile_version " + std::to_string(profile.profile_version));

  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& entry : doc["slots"]) {
    const std::string fallback = "#" + std::to_string(index++);
    if (!entry.is_object() || !entry.contains("id") || !entry["id"].is_string()) {
      issue(fallback, "slot entry needs a string id");
      continue;
    }
    SlotCalibration slot;
    slot.id = entry["id"].get<std::string>();
    const std::size_t issues_before = check.issues.size();

    if (!seen.insert(slot.id).second) issue(slot.id, "duplicate slot id");
    if (entry.contains("label") && entry["label"].is_string())
      slot.label = entry["label"].get<std::string>();
    else
      issue(slot.id, "label must be a string");

    if (entry.contains("distance_m") && entry["distance_m"].is_number()) {
      slot.distance_m = entry["distance_m"].get<double>();
      if (!(slot.distance_m > 0.0) || !std::isfinite(slot.distance_m))
        issue(slot.id, "distance_m must be positive");
    } else {
      issue(slot.id, "distance_m must be a number");
    }

    const auto& quad = entry.contains("quad") ? entry["quad"] : nlohmann::json();
    bool quad_ok = quad.is_array() && quad.size() == 4;
    for (std::size_t i = 0; quad_ok && i < 4; ++i) {
      const auto& corner = quad[i];
      quad_ok = corner.is_array() && corner.size() == 2 && corner[0].is_number() && corner[1].is_number();
      if (quad_ok) slot.quad.corners[i] = {corner[0].get<double>(), corner[1].get<double>()};
    }
    if (!quad_ok) {
      issue(slot.id, "quad must be four [x, y] corners");
    } else {
      for (const auto& p : slot.quad.corners)
        if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0) {
          issue(slot.id, "quad corner outside the normalized [0,1] projector frame");
          break;
        }
      if (auto defect = quad_defect(slot.quad)) issue(slot.id, *defect);
    }

    if (check.issues.size() == issues_before) profile.slots.push_back(std::move(slot));
  }

  if (check.issues.empty()) check.profile = std::move(profile);
  return check;
}

CalibrationProfile load_profile(std::string_view text) {
  auto check = check_profile(text);
  if (check.ok()) return std::move(*check.profile);
  std::string message;
  for (const auto& i : check.issues) {
    if (!message.empty()) message += "; ";
    message += i.slot.empty() ? i.message : "slot '" + i.slot + "': " + i.message;
  }
  throw Error(ErrorCode::Validation, message);
}

CalibrationProfile load_profile_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open calibration profile '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_profile(buffer.str());
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9f", value);
  std::string s = buf;
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string save_profile(const CalibrationProfile& profile) {
  std::string out = "{\n  \"profile_version\": " + std::to_string(profile.profile_version) + ",\n  \"slots\": [";
  for (std::size_t i = 0; i < profile.slots.size(); ++i) {
    const auto& s = profile.slots[i];
    out += i == 0 ? "\n" : ",\n";
    out += "    {\n";
    out += "      \"id\": " + nlohmann::json(s.id).dump() + ",\n";
    out += "      \"label\": " + nlohmann::json(s.label).dump() + ",\n";
    out += "      \"distance_m\": " + format_number(s.distance_m) + ",\n";
    out += "      \"quad\": [";
    for (std::size_t c = 0; c < 4; ++c) {
      if (c) out += ", ";
      out += "[" + format_number(s.quad.corners[c].x) + ", " + format_number(s.quad.corners[c].y) + "]";
    }
    out += "]\n    }";
  }
  out += profile.slots.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

}  // namespace proxilink::calibration
