#include "analytics.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "error.hpp"

namespace proxilink::analytics {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool is_diagonal(const Matrix3& m) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (r != c && m[r][c] != 0) return false;
  return true;
}

}  // namespace

std::vector<LogEvent> parse_event_log(std::string_view text) {
  std::vector<LogEvent> events;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](const std::string& why) {
      return Error(ErrorCode::Format, "event log line " + std::to_string(line_no) + ": " + why);
    };
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error&) {
      throw fail("malformed JSON");
    }
    if (!j.is_object() || !j.contains("t") || !j["t"].is_number() || !j.contains("room") || !j["room"].is_string() ||
        !j.contains("type") || !j["type"].is_string())
      throw fail("expected {\"t\", \"room\", \"type\", \"payload\"}");
    LogEvent e{j["t"].get<double>(), j["room"].get<std::string>(), j["type"].get<std::string>(),
               j.value("payload", Json::object())};
    if (!events.empty() && e.t < events.back().t) throw fail("timestamps go backwards");
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<LogEvent> load_event_log(const std::filesystem::path& path) { return parse_event_log(read_file(path)); }

std::vector<std::string> subject_rooms(const std::vector<LogEvent>& log, const std::string& subject) {
  std::vector<std::string> rooms;
  for (const auto& e : log) {
    if (e.type == "join" && e.payload.value("id", "") == subject && e.payload.value("role", "") == "viewer" &&
        std::find(rooms.begin(), rooms.end(), e.room) == rooms.end())
      rooms.push_back(e.room);
  }
  return rooms;
}

std::vector<std::string> viewing_subjects(const std::vector<LogEvent>& log) {
  std::vector<std::string> subjects;
  for (const auto& e : log) {
    if (e.type != "join" || e.payload.value("role", "") != "viewer") continue;
    const auto id = e.payload.value("id", "");
    if (std::find(subjects.begin(), subjects.end(), id) == subjects.end()) subjects.push_back(id);
  }
  return subjects;
}

DwellTable dwell_times(const std::vector<LogEvent>& log, const std::string& subject) {
  DwellTable table;
  for (const auto& room : subject_rooms(log, subject)) {
    std::map<std::string, std::size_t> seated;  // peer -> rank under the current layout
    std::optional<double> since;
    double last_t = 0.0;
    auto accrue = [&](double until) {
      if (!since) return;
      for (const auto& [peer, rank] : seated) table[peer][rank] += until - *since;
    };

    for (const auto& e : log) {
      if (e.room != room) continue;
      last_t = e.t;
      if (e.type != "layout-state") continue;
      accrue(e.t);
      seated.clear();
      try {
        std::vector<std::string> order;
        for (const auto& s : e.payload.at("slot_order")) order.push_back(s.get<std::string>());
        for (const auto& [peer, slot] : e.payload.at("assignment").items()) {
          const auto it = std::find(order.begin(), order.end(), slot.get<std::string>());
          if (it == order.end()) throw Error(ErrorCode::Format, "layout-state assigns an unlisted slot");
          if (peer != subject) {
            seated[peer] = static_cast<std::size_t>(it - order.begin());
            table[peer];  // peers seated for zero time still appear
          }
        }
      } catch (const Json::exception& ex) {
        throw Error(ErrorCode::Format, std::string("bad layout-state in room '") + room + "': " + ex.what());
      }
      since = e.t;
    }
    accrue(last_t);
  }
  return table;
}

std::map<std::string, std::size_t> dominant_distance_ranking(const std::vector<LogEvent>& log,
                                                             const std::string& subject) {
  if (log.empty()) throw Error(ErrorCode::EmptyInput, "empty-input: event log is empty");
  const auto rooms = subject_rooms(log, subject);
  const bool has_layout = std::any_of(log.begin(), log.end(), [&](const LogEvent& e) {
    return e.type == "layout-state" && std::find(rooms.begin(), rooms.end(), e.room) != rooms.end();
  });
  if (!has_layout) throw Error(ErrorCode::EmptyInput, "empty-input: no layout-state for subject '" + subject + "'");

  std::map<std::string, std::size_t> ranking;
  for (const auto& [peer, per_rank] : dwell_times(log, subject)) {
    std::size_t best = 0;
    double best_s = -1.0;
    for (const auto& [rank, seconds] : per_rank) {  // ascending rank, strict > keeps the nearer on ties
      if (seconds > best_s) {
        best = rank;
        best_s = seconds;
      }
    }
    ranking[peer] = best;
  }
  return ranking;
}

std::vector<IntimacyDeclaration> parse_declarations(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Format, std::string("declarations are not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorCode::Format, "declarations must be a JSON array");
  std::vector<IntimacyDeclaration> out;
  std::set<std::string> seen;
  for (const auto& entry : doc) {
    if (!entry.is_object() || !entry.contains("subject") || !entry["subject"].is_string() ||
        !entry.contains("ranking") || !entry["ranking"].is_array())
      throw Error(ErrorCode::Format, "each declaration needs a string subject and a ranking array");
    IntimacyDeclaration d;
    d.subject = entry["subject"].get<std::string>();
    for (const auto& peer : entry["ranking"]) {
      if (!peer.is_string()) throw Error(ErrorCode::Format, "subject '" + d.subject + "': ranking holds non-strings");
      d.ranking.push_back(peer.get<std::string>());
    }
    if (!seen.insert(d.subject).second) throw Error(ErrorCode::Validation, "subject '" + d.subject + "' declared twice");
    if (std::set<std::string>(d.ranking.begin(), d.ranking.end()).size() != d.ranking.size())
      throw Error(ErrorCode::Validation, "subject '" + d.subject + "': ranking repeats a peer");
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<IntimacyDeclaration> load_declarations(const std::filesystem::path& path) {
  return parse_declarations(read_file(path));
}

Crosstab crosstab(const std::vector<IntimacyDeclaration>& declarations, const std::vector<DistanceRanking>& rankings) {
  std::map<std::string, const DistanceRanking*> by_subject;
  for (const auto& r : rankings) by_subject[r.subject] = &r;
  for (const auto& r : rankings) {
    const bool declared = std::any_of(declarations.begin(), declarations.end(),
                                      [&](const auto& d) { return d.subject == r.subject; });
    if (!declared) throw Error(ErrorCode::Validation, "subject '" + r.subject + "' has no intimacy declaration");
  }

  Crosstab out;
  for (const auto& d : declarations) {
    auto it = by_subject.find(d.subject);
    if (it == by_subject.end())
      throw Error(ErrorCode::Validation, "subject '" + d.subject + "' has no distance ranking");
    const auto& ranks = it->second->ranks;

    std::set<std::string> declared_peers(d.ranking.begin(), d.ranking.end());
    std::set<std::string> observed_peers;
    for (const auto& [peer, rank] : ranks) observed_peers.insert(peer);
    if (declared_peers != observed_peers)
      throw Error(ErrorCode::Validation, "subject '" + d.subject + "': declared and observed peers differ");

    Matrix3 m{};
    for (std::size_t intimacy = 0; intimacy < d.ranking.size(); ++intimacy) {
      const auto distance = ranks.at(d.ranking[intimacy]);
      if (intimacy > 2 || distance > 2)
        throw Error(ErrorCode::Validation, "subject '" + d.subject + "': ranks beyond close/middle/far");
      ++m[distance][intimacy];
      ++out.total[distance][intimacy];
    }
    out.per_subject.emplace_back(d.subject, m);
  }
  return out;
}

ConformityStats conformity_stats(const Matrix3& m, const std::vector<Matrix3>& per_subject) {
  Matrix3 sum{};
  for (const auto& s : per_subject)
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) sum[r][c] += s[r][c];
  if (sum != m) throw Error(ErrorCode::Validation, "per-subject matrices do not sum to the total matrix");

  ConformityStats stats;
  for (int r = 0; r < 3; ++r) {
    stats.diagonal_count += m[r][r];
    for (int c = 0; c < 3; ++c) stats.total += m[r][c];
  }
  stats.diagonal_ratio = stats.total == 0 ? 0.0 : static_cast<double>(stats.diagonal_count) / stats.total;
  stats.subjects = static_cast<int>(per_subject.size());
  stats.fully_conforming_subjects =
      static_cast<int>(std::count_if(per_subject.begin(), per_subject.end(), is_diagonal));
  return stats;
}

Report analyze(const std::vector<LogEvent>& log, const std::vector<IntimacyDeclaration>& declarations) {
  if (log.empty()) throw Error(ErrorCode::EmptyInput, "empty-input: event log is empty");

  std::vector<DistanceRanking> rankings;
  for (const auto& subject : viewing_subjects(log)) {
    const bool declared = std::any_of(declarations.begin(), declarations.end(),
                                      [&](const auto& d) { return d.subject == subject; });
    if (!declared) throw Error(ErrorCode::Validation, "subject '" + subject + "' has no intimacy declaration");
  }
  for (const auto& d : declarations) {
    if (subject_rooms(log, d.subject).empty())
      throw Error(ErrorCode::Validation, "subject '" + d.subject + "' has no session in the event log");
    rankings.push_back({d.subject, dominant_distance_ranking(log, d.subject)});
  }

  const auto table = crosstab(declarations, rankings);
  std::vector<Matrix3> per_subject;
  for (const auto& [subject, m] : table.per_subject) per_subject.push_back(m);

  Report report;
  report.matrix = table.total;
  report.stats = conformity_stats(table.total, per_subject);
  for (std::size_t i = 0; i < declarations.size(); ++i) {
    SubjectResult r;
    r.subject = declarations[i].subject;
    r.distance_ranking = rankings[i].ranks;
    r.intimacy_ranking = declarations[i].ranking;
    r.dwell = dwell_times(log, r.subject);
    r.matrix = per_subject[i];
    r.conforming = is_diagonal(r.matrix);
    std::set<std::size_t> ranks;
    for (const auto& [peer, rank] : r.distance_ranking) ranks.insert(rank);
    r.distinct_ranks = ranks.size() == r.distance_ranking.size();
    report.subjects.push_back(std::move(r));
  }
  return report;
}

Json matrix_json(const Matrix3& m) {
  Json rows = Json::array();
  for (const auto& row : m) rows.push_back(Json(row));
  return rows;
}

Json Report::to_json() const {
  Json subjects_json = Json::array();
  for (const auto& s : subjects) {
    Json dwell = Json::object();
    for (const auto& [peer, per_rank] : s.dwell) {
      Json ranks = Json::object();
      for (const auto& [rank, seconds] : per_rank) ranks[std::to_string(rank)] = seconds;
      dwell[peer] = std::move(ranks);
    }
    Json distance = Json::object();
    for (const auto& [peer, rank] : s.distance_ranking) distance[peer] = rank;
    subjects_json.push_back({{"subject", s.subject},
                             {"distance_ranking", std::move(distance)},
                             {"intimacy_ranking", s.intimacy_ranking},
                             {"matrix", matrix_json(s.matrix)},
                             {"conforming", s.conforming},
                             {"distinct_ranks", s.distinct_ranks},
                             {"dwell_s", std::move(dwell)}});
  }
  return Json{{"rows", "distance rank (close, middle, far)"},
              {"columns", "intimacy rank (close, middle, far)"},
              {"matrix", matrix_json(matrix)},
              {"stats",
               {{"diagonal_count", stats.diagonal_count},
                {"total", stats.total},
                {"diagonal_ratio", stats.diagonal_ratio},
                {"fully_conforming_subjects", stats.fully_conforming_subjects},
                {"subjects", stats.subjects}}},
              {"subjects", std::move(subjects_json)}};
}

std::string Report::matrix_csv() const {
  static constexpr const char* kRanks[] = {"close", "middle", "far"};
  std::string out = "distance\\intimacy,close,middle,far\n";
  for (int r = 0; r < 3; ++r) {
    out += kRanks[r];
    for (int c = 0; c < 3; ++c) out += "," + std::to_string(matrix[r][c]);
    out += "\n";
  }
  return out;
}

}  // namespace proxilink::analytics
