#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace proxilink::analytics {

using Json = nlohmann::ordered_json;

struct LogEvent {
  double t = 0.0;
  std::string room;
  std::string type;
  Json payload;
};

// Session-server JSONL log. Timestamps must be non-decreasing; problems throw
// Format naming the line.
std::vector<LogEvent> parse_event_log(std::string_view text);
std::vector<LogEvent> load_event_log(const std::filesystem::path& path);

// Rooms in which `subject` joined as the viewer.
std::vector<std::string> subject_rooms(const std::vector<LogEvent>& log, const std::string& subject);
// Every participant that joined some room as a viewer, in first-seen order.
std::vector<std::string> viewing_subjects(const std::vector<LogEvent>& log);

// peer -> slot rank -> seconds seated there, summed over the subject's rooms.
// A layout-state holds until the room's next layout-state, or until the
// room's last logged event.
using DwellTable = std::map<std::string, std::map<std::size_t, double>>;
DwellTable dwell_times(const std::vector<LogEvent>& log, const std::string& subject);

// Rank with the longest dwell for each peer; ties go to the nearer rank.
// Throws EmptyInput when the log is empty or holds no layout-state for the
// subject's rooms.
std::map<std::string, std::size_t> dominant_distance_ranking(const std::vector<LogEvent>& log,
                                                             const std::string& subject);

struct IntimacyDeclaration {
  std::string subject;
  std::vector<std::string> ranking;  // closest first
};

std::vector<IntimacyDeclaration> parse_declarations(std::string_view text);
std::vector<IntimacyDeclaration> load_declarations(const std::filesystem::path& path);

struct DistanceRanking {
  std::string subject;
  std::map<std::string, std::size_t> ranks;
};

// Rows: distance rank (close, middle, far). Columns: intimacy rank.
using Matrix3 = std::array<std::array<int, 3>, 3>;

struct Crosstab {
  Matrix3 total{};
  std::vector<std::pair<std::string, Matrix3>> per_subject;  // declaration order
};

// Throws Validation naming the subject on missing subjects or mismatched
// peer sets.
Crosstab crosstab(const std::vector<IntimacyDeclaration>& declarations, const std::vector<DistanceRanking>& rankings);

struct ConformityStats {
  int diagonal_count = 0;
  int total = 0;
  double diagonal_ratio = 0.0;
  int fully_conforming_subjects = 0;
  int subjects = 0;
};

// Throws Validation when the per-subject matrices do not sum to `m`.
ConformityStats conformity_stats(const Matrix3& m, const std::vector<Matrix3>& per_subject);

struct SubjectResult {
  std::string subject;
  std::map<std::string, std::size_t> distance_ranking;
  std::vector<std::string> intimacy_ranking;
  DwellTable dwell;
  Matrix3 matrix{};
  bool conforming = false;
  // False when two peers share a dominant rank, so the row counts of the
  // subject's matrix are not all one.
  bool distinct_ranks = true;
};

struct Report {
  Matrix3 matrix{};
  ConformityStats stats;
  std::vector<SubjectResult> subjects;

  Json to_json() const;
  std::string matrix_csv() const;
};

// Full pipeline: every viewing subject in the log must be declared and vice
// versa.
Report analyze(const std::vector<LogEvent>& log, const std::vector<IntimacyDeclaration>& declarations);

Json matrix_json(const Matrix3& m);

}  // namespace proxilink::analytics
