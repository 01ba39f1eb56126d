// proxilink command-line front end. Links only the public C API.
//
// Exit codes: 0 success, 1 invalid input, 2 runtime failure.

#include <pthread.h>
#include <signal.h>

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "proxilink/proxilink.h"

namespace {

using Json = nlohmann::ordered_json;

struct StringDeleter {
  void operator()(char* s) const { pl_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

int exit_code_for(pl_status status) {
  switch (status) {
    case PL_OK: return 0;
    case PL_ERR_IO:
    case PL_ERR_PROTOCOL:
    case PL_ERR_INTERNAL: return 2;
    default: return 1;
  }
}

int report_failure(const char* command, pl_status status) {
  std::cerr << "proxilink " << command << ": " << pl_status_name(status) << ": " << pl_last_error() << "\n";
  return exit_code_for(status);
}

void print_line(const std::string& line) {
  std::fwrite(line.data(), 1, line.size(), stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

int cmd_serve(const std::string& config_path) {
  // Signals are taken synchronously on a dedicated thread, which can then
  // call the (not async-signal-safe) stop routine.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  pl_server* raw = nullptr;
  if (pl_status s = pl_server_create(config_path.c_str(), &raw); s != PL_OK) return report_failure("serve", s);
  std::unique_ptr<pl_server, decltype(&pl_server_destroy)> server(raw, &pl_server_destroy);

  if (pl_status s = pl_server_listen(server.get()); s != PL_OK) {
    report_failure("serve", s);
    return 2;
  }
  char* addr = nullptr;
  if (pl_status s = pl_server_address(server.get(), &addr); s != PL_OK) return report_failure("serve", s);
  OwnedString address(addr);

  std::atomic<bool> finished{false};
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    if (!finished.load()) pl_server_stop(server.get());
  });

  print_line(Json{{"event", "ready"}, {"addr", address.get()}}.dump());
  const pl_status run_status = pl_server_run(server.get());
  finished.store(true);
  pthread_kill(waiter.native_handle(), SIGTERM);  // release sigwait if no signal arrived
  waiter.join();

  if (run_status != PL_OK) return report_failure("serve", run_status);
  print_line(Json{{"event", "stopped"}}.dump());
  return 0;
}

int cmd_check_profile(const std::string& path) {
  char* raw = nullptr;
  const pl_status status = pl_profile_check_file(path.c_str(), &raw);
  if (!raw) return report_failure("check-profile", status);
  OwnedString report_text(raw);

  const auto report = Json::parse(report_text.get());
  if (status == PL_OK) {
    for (const auto& slot : report["slots"]) {
      print_line(Json{{"slot", slot["id"]},
                      {"label", slot["label"]},
                      {"distance_m", slot["distance_m"]},
                      {"zone", slot["zone"]}}
                     .dump());
    }
    return 0;
  }
  for (const auto& issue : report["issues"]) {
    const auto slot = issue["slot"].get<std::string>();
    std::cerr << "proxilink check-profile: ";
    if (!slot.empty()) std::cerr << "slot '" << slot << "': ";
    std::cerr << issue["message"].get<std::string>() << "\n";
  }
  return exit_code_for(status);
}

int cmd_replay(const std::string& trace, const std::string& addr, const std::string& room,
               const std::string& participant) {
  pl_replay_options options{};
  options.trace_path = trace.c_str();
  options.address = addr.c_str();
  options.room = room.c_str();
  options.participant = participant.empty() ? nullptr : participant.c_str();
  const pl_status status =
      pl_replay(&options, [](const char* line, void*) { print_line(line); }, nullptr);
  return status == PL_OK ? 0 : report_failure("replay", status);
}

int cmd_analyze(const std::string& log, const std::string& declarations, const std::string& out,
                const std::string& csv) {
  char* report_raw = nullptr;
  char* csv_raw = nullptr;
  const pl_status status = pl_analyze(log.c_str(), declarations.c_str(), &report_raw, &csv_raw);
  if (status != PL_OK) return report_failure("analyze", status);
  OwnedString report_text(report_raw);
  OwnedString csv_text(csv_raw);

  auto write_file = [](const std::string& path, const char* text) {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    file << text;
    return static_cast<bool>(file.flush());
  };
  if (!write_file(out, report_text.get())) {
    std::cerr << "proxilink analyze: io: cannot write '" << out << "'\n";
    return 2;
  }
  if (!csv.empty() && !write_file(csv, csv_text.get())) {
    std::cerr << "proxilink analyze: io: cannot write '" << csv << "'\n";
    return 2;
  }

  const auto report = Json::parse(report_text.get());
  const auto& stats = report["stats"];
  print_line(Json{{"matrix", report["matrix"]},
                  {"diagonal", stats["diagonal_count"]},
                  {"total", stats["total"]},
                  {"fully_conforming_subjects", stats["fully_conforming_subjects"]},
                  {"subjects", stats["subjects"]}}
                 .dump());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proxemic video-chat layout engine"};
  app.require_subcommand(1);
  app.set_version_flag("--version", pl_version());

  std::string config_path;
  auto* serve = app.add_subcommand("serve", "Run the session server until SIGINT/SIGTERM");
  serve->add_option("--config", config_path, "Server config file")->required();

  std::string profile_path;
  auto* check = app.add_subcommand("check-profile", "Validate a calibration profile");
  check->add_option("path", profile_path, "Profile file")->required();

  std::string trace, addr, room, participant;
  auto* replay = app.add_subcommand("replay", "Replay a hand trace against a running server");
  replay->add_option("--trace", trace, "JSONL hand trace")->required();
  replay->add_option("--addr", addr, "Server address host:port")->required();
  replay->add_option("--room", room, "Room id")->required();
  replay->add_option("--participant", participant, "Participant id for the replay sensor");

  std::string log, declarations, out, csv;
  auto* analyze = app.add_subcommand("analyze", "Cross-tabulate dwell distance against declared intimacy");
  analyze->add_option("--log", log, "Session event log (JSONL)")->required();
  analyze->add_option("--declarations", declarations, "Intimacy declarations (JSON)")->required();
  analyze->add_option("--out", out, "Report output path")->required();
  analyze->add_option("--csv", csv, "Optional matrix CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*serve) return cmd_serve(config_path);
  if (*check) return cmd_check_profile(profile_path);
  if (*replay) return cmd_replay(trace, addr, room, participant);
  if (*analyze) return cmd_analyze(log, declarations, out, csv);
  return 1;
}
