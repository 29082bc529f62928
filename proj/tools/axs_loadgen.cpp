// axs-loadgen: scripted concurrent clients against a running gateway.
#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "axs/error.hpp"
#include "axs/loadgen.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Gateway load generator"};
  axs::load::LoadProfile profile;
  std::string host = "127.0.0.1", pacing = "realtime", script, out, thresholds_path, log_level = "warn";
  unsigned short port = 8080;
  bool sweep = false;
  std::vector<std::size_t> levels = axs::load::default_sweep_levels();

  app.add_option("--host", host);
  app.add_option("--port", port);
  app.add_option("--clients", profile.clients, "Concurrent clients")->check(CLI::PositiveNumber);
  app.add_option("--ramp", profile.ramp_s, "Seconds over which clients connect")->check(CLI::NonNegativeNumber);
  app.add_option("--pacing", pacing)->check(CLI::IsMember({"realtime", "max"}));
  app.add_option("--msgs", profile.msgs_per_client, "audio_chunk messages per client")->check(CLI::PositiveNumber);
  app.add_option("--script", script, "Utterance script, one per line")->required()->check(CLI::ExistingFile);
  app.add_flag("--sweep", sweep, "Run every load level in turn");
  app.add_option("--levels", levels, "Client counts for --sweep");
  app.add_option("--out", out, "Per-level CSV report");
  app.add_option("--thresholds", thresholds_path, "KPI threshold rows (JSON)")->check(CLI::ExistingFile);
  app.add_option("--settle", profile.settle_s, "Seconds to wait for outstanding responses");
  app.add_option("--room-size", profile.room_size)->check(CLI::Range(1, 8));
  app.add_flag("--inject-reorder", profile.inject_reorder, "Resend a stale seq per client");
  app.add_option("--log-level", log_level);
  CLI11_PARSE(app, argc, argv);
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    profile.pacing = *axs::load::parse_pacing(pacing);
    profile.script = axs::load::load_script(script);
    const auto thresholds =
        thresholds_path.empty() ? axs::load::Thresholds::defaults() : axs::load::load_thresholds(thresholds_path);
    double min_rps = 900.0;
    for (const auto& row : thresholds.rows)
      if (row.metric == "throughput_rps") min_rps = row.value;

    std::vector<axs::load::LoadReport> reports;
    int rc = 0;
    if (sweep) {
      auto result = axs::load::run_sweep(profile, levels, host, port, min_rps);
      for (auto& r : result.levels) axs::load::apply_thresholds(r, thresholds);
      std::cout << axs::load::render_table(result.levels);
      std::cout << (result.pass ? "SWEEP PASS: " : "SWEEP FAIL: ") << result.reason << "\n";
      reports = std::move(result.levels);
      rc = result.pass ? 0 : 1;
    } else {
      // Fresh room and participant ids so repeated runs never collide.
      profile.room_prefix += "-" + std::to_string(std::chrono::system_clock::now().time_since_epoch().count() % 1000000007);
      auto r = axs::load::run_load(profile, host, port);
      axs::load::apply_thresholds(r, thresholds);
      std::cout << axs::load::render_text(r);
      rc = r.kpi_pass() && r.errors == 0 && r.mismatches == 0 ? 0 : 1;
      reports.push_back(std::move(r));
    }
    if (!out.empty()) {
      std::ofstream(out) << axs::load::render_csv(reports);
      auto samples = std::filesystem::path(out);
      samples.replace_filename(samples.stem().string() + "_samples.csv");
      std::ofstream(samples) << axs::load::render_samples_csv(reports);
      std::cout << "wrote " << out << " and " << samples.string() << "\n";
    }
    return rc;
  } catch (const std::exception& e) {
    std::cerr << "axs-loadgen: " << e.what() << "\n";
    return 2;
  }
}
