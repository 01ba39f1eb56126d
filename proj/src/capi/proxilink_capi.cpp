#include "proxilink/proxilink.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "analytics.hpp"
#include "audio_mix.hpp"
#include "calibration.hpp"
#include "error.hpp"
#include "gesture.hpp"
#include "layout.hpp"
#include "protocol.hpp"
#include "replay.hpp"
#include "server.hpp"

using namespace proxilink;

struct pl_layout {
  layout::SlotSet slots;
  layout::GainPolicy policy;
  layout::LayoutState state;
};

struct pl_detector {
  gesture::WaveDetector detector;
};

struct pl_server {
  std::unique_ptr<session::Server> server;
};

namespace {

thread_local std::string g_last_error;

pl_status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Domain: return PL_ERR_DOMAIN;
    case ErrorCode::Configuration: return PL_ERR_CONFIGURATION;
    case ErrorCode::NotFound: return PL_ERR_NOT_FOUND;
    case ErrorCode::Degenerate: return PL_ERR_DEGENERATE;
    case ErrorCode::PointAtInfinity: return PL_ERR_POINT_AT_INFINITY;
    case ErrorCode::Validation: return PL_ERR_VALIDATION;
    case ErrorCode::Format: return PL_ERR_FORMAT;
    case ErrorCode::Stream: return PL_ERR_STREAM;
    case ErrorCode::InvalidSample: return PL_ERR_INVALID_SAMPLE;
    case ErrorCode::EmptyInput: return PL_ERR_EMPTY_INPUT;
    case ErrorCode::Io: return PL_ERR_IO;
    case ErrorCode::Protocol: return PL_ERR_PROTOCOL;
  }
  return PL_ERR_INTERNAL;
}

pl_status fail(pl_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Runs `fn`, translating every exception into a status and a message.
template <typename Fn>
pl_status call(Fn&& fn) noexcept {
  try {
    fn();
    return PL_OK;
  } catch (const Error& e) {
    return fail(status_for(e.code()), e.what());
  } catch (const session::ProtocolFault& e) {
    return fail(PL_ERR_PROTOCOL, e.code() + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PL_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool condition, const char* what) {
  if (!condition) throw std::invalid_argument(what);
}

calibration::Quad to_quad(const pl_quad& q) {
  calibration::Quad out;
  for (int i = 0; i < 4; ++i) out.corners[i] = {q.corners[i].x, q.corners[i].y};
  return out;
}

calibration::Homography to_homography(const pl_homography& h) {
  calibration::Homography::Matrix m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = h.m[r * 3 + c];
  return calibration::Homography::from_matrix(m);
}

void from_homography(const calibration::Homography& h, pl_homography* out) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out->m[r * 3 + c] = h(r, c);
}

std::string profile_report(std::string_view text, bool* ok) {
  const auto check = calibration::check_profile(text);
  analytics::Json slots = analytics::Json::array();
  if (check.profile) {
    for (const auto& s : check.profile->slots) {
      analytics::Json entry{{"id", s.id}, {"label", s.label}, {"distance_m", s.distance_m}};
      entry["zone"] = layout::zone_name(layout::classify_zone(s.distance_m));
      slots.push_back(std::move(entry));
    }
  }
  analytics::Json issues = analytics::Json::array();
  for (const auto& issue : check.issues) issues.push_back({{"slot", issue.slot}, {"message", issue.message}});
  *ok = check.ok();
  return analytics::Json{{"ok", *ok}, {"slots", std::move(slots)}, {"issues", std::move(issues)}}.dump();
}

}  // namespace

extern "C" {

const char* pl_status_name(pl_status status) {
  switch (status) {
    case PL_OK: return "ok";
    case PL_ERR_DOMAIN: return "domain";
    case PL_ERR_CONFIGURATION: return "configuration";
    case PL_ERR_NOT_FOUND: return "not-found";
    case PL_ERR_DEGENERATE: return "degenerate";
    case PL_ERR_POINT_AT_INFINITY: return "point-at-infinity";
    case PL_ERR_VALIDATION: return "validation";
    case PL_ERR_FORMAT: return "format";
    case PL_ERR_STREAM: return "stream";
    case PL_ERR_INVALID_SAMPLE: return "invalid-sample";
    case PL_ERR_EMPTY_INPUT: return "empty-input";
    case PL_ERR_IO: return "io";
    case PL_ERR_PROTOCOL: return "protocol";
    case PL_ERR_INVALID_ARGUMENT: return "invalid-argument";
    case PL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* pl_last_error(void) { return g_last_error.c_str(); }

void pl_string_free(char* s) { std::free(s); }

const char* pl_version(void) { return "0.1.0"; }

pl_status pl_classify_zone(double distance_m, pl_zone* out) {
  if (!out) return fail(PL_ERR_INVALID_ARGUMENT, "out is NULL");
  return call([&] { *out = static_cast<pl_zone>(layout::classify_zone(distance_m)); });
}

const char* pl_zone_name(pl_zone zone) {
  if (zone < PL_ZONE_INTIMATE || zone > PL_ZONE_PUBLIC) return "unknown";
  return layout::zone_name(static_cast<layout::Zone>(zone));
}

pl_status pl_layout_create(const pl_slot* slots, size_t count, pl_layout** out) {
  if (!out || (!slots && count > 0)) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return call([&] {
    std::vector<layout::ProjectionSlot> list;
    for (size_t i = 0; i < count; ++i) {
      require(slots[i].id != nullptr, "slot id is NULL");
      list.push_back({slots[i].id, slots[i].label ? slots[i].label : "", slots[i].distance_m, {}});
    }
    auto handle = std::make_unique<pl_layout>();
    handle->slots = layout::SlotSet(std::move(list));
    *out = handle.release();
  });
}

void pl_layout_destroy(pl_layout* layout) { delete layout; }

pl_status pl_layout_use_rank_table(pl_layout* layout, const double* table, size_t count) {
  if (!layout || (!table && count > 0)) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    layout::GainPolicy policy{layout::GainMode::RankTable, std::vector<double>(table, table + count)};
    policy.validate();
    if (policy.rank_table.size() < layout->slots.size())
      throw Error(ErrorCode::Configuration, "rank table is shorter than the slot list");
    layout->policy = std::move(policy);
  });
}

pl_status pl_layout_use_inverse_square(pl_layout* layout) {
  if (!layout) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  layout->policy = layout::GainPolicy::inverse_square();
  return PL_OK;
}

pl_status pl_layout_place(pl_layout* layout, const char* participant, const char* slot) {
  if (!layout || !participant || !slot) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { layout->state = layout::place(layout->state, layout->slots, participant, slot); });
}

pl_status pl_layout_unassign(pl_layout* layout, const char* participant) {
  if (!layout || !participant) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    if (!layout->state.assignment.contains(participant))
      throw Error(ErrorCode::NotFound, std::string("participant '") + participant + "' is not assigned");
    layout->state = layout::unassign(layout->state, participant);
  });
}

pl_status pl_layout_set(pl_layout* layout, const char* participant, const char* slot) {
  if (!layout || !participant || !slot) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { layout->state = layout::set_assignment(layout->state, layout->slots, participant, slot); });
}

pl_status pl_layout_rotate(pl_layout* layout, pl_direction direction, int* changed) {
  if (!layout) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    const auto d = direction == PL_BACKWARD ? layout::Direction::Backward : layout::Direction::Forward;
    auto result = layout::rotate_layout(layout->state, layout->slots, d);
    layout->state = std::move(result.layout);
    if (changed) *changed = result.noop ? 0 : 1;
  });
}

pl_status pl_layout_version(const pl_layout* layout, uint64_t* out) {
  if (!layout || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = layout->state.version;
  return PL_OK;
}

pl_status pl_layout_slot_of(const pl_layout* layout, const char* participant, char** out) {
  if (!layout || !participant || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return call([&] {
    auto it = layout->state.assignment.find(participant);
    if (it == layout->state.assignment.end())
      throw Error(ErrorCode::NotFound, std::string("participant '") + participant + "' is not assigned");
    *out = dup_string(it->second);
  });
}

pl_status pl_layout_gain(const pl_layout* layout, const char* participant, double* out) {
  if (!layout || !participant || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    const auto gains = layout::gains_for_layout(layout->state, layout->slots, layout->policy);
    auto it = gains.find(participant);
    if (it == gains.end())
      throw Error(ErrorCode::NotFound, std::string("participant '") + participant + "' is not assigned");
    *out = it->second;
  });
}

pl_status pl_layout_gains_json(const pl_layout* layout, char** out) {
  if (!layout || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return call([&] {
    analytics::Json j = analytics::Json::object();
    for (const auto& [p, g] : layout::gains_for_layout(layout->state, layout->slots, layout->policy)) j[p] = g;
    *out = dup_string(j.dump());
  });
}

pl_status pl_quad_defect(const pl_quad* quad, char** reason) {
  if (!quad || !reason) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *reason = nullptr;
  return call([&] {
    if (auto defect = calibration::quad_defect(to_quad(*quad))) *reason = dup_string(*defect);
  });
}

pl_status pl_homography_solve(const pl_quad* source, const pl_quad* target, pl_homography* out) {
  if (!source || !target || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { from_homography(calibration::solve_homography(to_quad(*source), to_quad(*target)), out); });
}

pl_status pl_homography_apply(const pl_homography* h, pl_point p, pl_point* out) {
  if (!h || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    const auto q = calibration::apply(to_homography(*h), {p.x, p.y});
    *out = {q.x, q.y};
  });
}

pl_status pl_homography_invert(const pl_homography* h, pl_homography* out) {
  if (!h || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { from_homography(calibration::invert(to_homography(*h)), out); });
}

pl_status pl_homography_compose(const pl_homography* a, const pl_homography* b, pl_homography* out) {
  if (!a || !b || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { from_homography(calibration::compose(to_homography(*a), to_homography(*b)), out); });
}

pl_status pl_profile_check(const char* text, char** report) {
  if (!text || !report) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *report = nullptr;
  bool ok = false;
  const pl_status status = call([&] { *report = dup_string(profile_report(text, &ok)); });
  if (status != PL_OK) return status;
  return ok ? PL_OK : fail(PL_ERR_VALIDATION, "profile has validation issues");
}

pl_status pl_profile_check_file(const char* path, char** report) {
  if (!path || !report) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *report = nullptr;
  bool ok = false;
  const pl_status status = call([&] {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, std::string("cannot open '") + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    *report = dup_string(profile_report(buffer.str(), &ok));
  });
  if (status != PL_OK) return status;
  return ok ? PL_OK : fail(PL_ERR_VALIDATION, "profile has validation issues");
}

pl_status pl_profile_canonical(const char* text, char** out) {
  if (!text || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return call([&] { *out = dup_string(calibration::save_profile(calibration::load_profile(text))); });
}

void pl_detector_config_default(pl_detector_config* out) {
  if (!out) return;
  const gesture::DetectorConfig d;
  *out = {d.window_s, d.min_amplitude_mm, d.min_reversals, d.cooldown_s, d.jitter_mm};
}

pl_status pl_detector_create(const pl_detector_config* config, pl_detector** out) {
  if (!out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return call([&] {
    gesture::DetectorConfig c;
    if (config) c = {config->window_s, config->min_amplitude_mm, config->min_reversals, config->cooldown_s, config->jitter_mm};
    *out = new pl_detector{gesture::WaveDetector(c)};
  });
}

void pl_detector_destroy(pl_detector* detector) { delete detector; }

pl_status pl_detector_feed(pl_detector* detector, const pl_hand_sample* sample, int* fired, pl_gesture_event* event) {
  if (!detector || !sample || !fired) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *fired = 0;
  return call([&] {
    auto e = detector->detector.feed({sample->t, sample->x, sample->y, sample->z});
    if (!e) return;
    *fired = 1;
    if (event) {
      *event = {e->direction == gesture::WaveDirection::Left ? PL_WAVE_LEFT : PL_WAVE_RIGHT, e->t_detect, e->t_start,
                e->t_end};
    }
  });
}

pl_status pl_detector_reset(pl_detector* detector) {
  if (!detector) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  detector->detector.reset();
  return PL_OK;
}

pl_status pl_audio_apply_gain(const double* in, size_t n, double gain, double* out) {
  if ((!in || !out) && n > 0) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    audio::PcmFrame frame;
    frame.samples.assign(in, in + n);
    const auto scaled = audio::apply_gain(frame, gain);
    std::copy(scaled.samples.begin(), scaled.samples.end(), out);
  });
}

pl_status pl_audio_mix(const double* const* frames, const double* gains, size_t frame_count, size_t n, double* out) {
  if (!frames || !gains || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    std::vector<audio::PcmFrame> list(frame_count);
    std::map<std::string, double> gain_map;
    for (size_t k = 0; k < frame_count; ++k) {
      require(frames[k] != nullptr || n == 0, "frame is NULL");
      list[k].participant = std::to_string(k);
      list[k].samples.assign(frames[k], frames[k] + n);
      gain_map[list[k].participant] = gains[k];
    }
    const auto mixed = audio::mix(list, gain_map);
    std::copy(mixed.samples.begin(), mixed.samples.end(), out);
  });
}

pl_status pl_audio_rms(const double* samples, size_t n, double* out) {
  if ((!samples && n > 0) || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { *out = audio::rms({samples, n}); });
}

pl_status pl_server_create(const char* config_path, pl_server** out) {
  if (!config_path || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return call([&] {
    auto config = session::load_server_config(config_path);
    auto handle = std::make_unique<pl_server>();
    handle->server = std::make_unique<session::Server>(std::move(config));
    *out = handle.release();
  });
}

void pl_server_destroy(pl_server* server) { delete server; }

pl_status pl_server_listen(pl_server* server) {
  if (!server) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { server->server->listen(); });
}

pl_status pl_server_address(const pl_server* server, char** out) {
  if (!server || !out) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  *out = nullptr;
  return call([&] { *out = dup_string(server->server->address()); });
}

pl_status pl_server_run(pl_server* server) {
  if (!server) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { server->server->run(); });
}

pl_status pl_server_stop(pl_server* server) {
  if (!server) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] { server->server->stop(); });
}

pl_status pl_replay(const pl_replay_options* options, pl_line_callback on_line, void* user) {
  if (!options || !options->trace_path || !options->address || !options->room)
    return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  return call([&] {
    session::ReplayOptions o;
    o.trace = options->trace_path;
    o.address = options->address;
    o.room = options->room;
    if (options->participant) o.participant = options->participant;
    if (options->timeout_s > 0) o.timeout = std::chrono::milliseconds(static_cast<long long>(options->timeout_s * 1000));
    session::replay_trace(o, [&](const std::string& line) {
      if (on_line) on_line(line.c_str(), user);
    });
  });
}

pl_status pl_analyze(const char* log_path, const char* declarations_path, char** report_json, char** matrix_csv) {
  if (!log_path || !declarations_path) return fail(PL_ERR_INVALID_ARGUMENT, "NULL argument");
  if (report_json) *report_json = nullptr;
  if (matrix_csv) *matrix_csv = nullptr;
  return call([&] {
    const auto report = analytics::analyze(analytics::load_event_log(log_path),
                                           analytics::load_declarations(declarations_path));
    std::unique_ptr<char, decltype(&std::free)> json(report_json ? dup_string(report.to_json().dump(2) + "\n") : nullptr,
                                                     &std::free);
    if (matrix_csv) *matrix_csv = dup_string(report.matrix_csv());
    if (report_json) *report_json = json.release();
  });
}

}  // extern "C"
