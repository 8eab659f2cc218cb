// trajguide command-line tool: world generation, suite runs, sweeps and reports.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "trajguide/config.hpp"
#include "trajguide/error.hpp"
#include "trajguide/io.hpp"
#include "trajguide/report.hpp"
#include "trajguide/world.hpp"

namespace fs = std::filesystem;
using namespace trajguide;

namespace {

enum Exit : int { kOk = 0, kUsage = 1, kIo = 2, kInternal = 3 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  bool trace = false;
};

RunConfig resolve_config(const CommonFlags& flags) {
  RunConfig cfg;
  if (!flags.config.empty()) {
    try {
      cfg = load_run_config(flags.config);
    } catch (const std::ios_base::failure& e) {
      throw IoError(e.what());
    }
  }
  if (flags.workers) cfg.run.workers = *flags.workers;
  if (flags.seed) cfg.run.master_seed = *flags.seed;
  if (!flags.out.empty()) cfg.run.output_dir = flags.out;
  if (flags.trace) cfg.run.trace = true;
  if (cfg.run.workers == 0) throw ParseError("run.workers must be >= 1");
  return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

fs::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::string episodes_jsonl(const std::vector<EpisodeOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) out += episode_record_to_json(o.config, o.result).dump() + "\n";
  return out;
}

std::string traces_jsonl(const std::vector<EpisodeOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    for (const auto& step : o.trace) out += trace_step_to_json(o.config.id, step).dump() + "\n";
  }
  return out;
}

std::vector<EpisodeRecord> to_records(const std::vector<EpisodeOutcome>& outcomes) {
  std::vector<EpisodeRecord> records;
  records.reserve(outcomes.size());
  for (const auto& o : outcomes) records.push_back({o.config, o.result});
  return records;
}

std::size_t count_invalid(const std::vector<EpisodeOutcome>& outcomes) {
  std::size_t n = 0;
  for (const auto& o : outcomes) n += o.result.valid ? 0 : 1;
  return n;
}

int cmd_gen_world(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const std::string path = flags.out.empty() ? "world.txt" : flags.out;
  const World world = generate_world(cfg.run.master_seed, cfg.world);
  try {
    save_world(world, path);
  } catch (const std::ios_base::failure& e) {
    throw IoError(e.what());
  }
  const auto free_cells = world.free_cell_count();
  const auto total = static_cast<std::size_t>(world.width()) * static_cast<std::size_t>(world.height());
  std::printf("world %dx%d cell %.3f m seed %llu\n", world.width(), world.height(), world.cell_size(),
              static_cast<unsigned long long>(cfg.run.master_seed));
  std::printf("free cells %zu of %zu (%.1f%%), largest component %zu\n", free_cells, total,
              100.0 * static_cast<double>(free_cells) / static_cast<double>(total),
              world.largest_free_component());
  std::printf("wrote %s\n", path.c_str());
  return kOk;
}

int cmd_run(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const Scenario scenario = cfg.scenario();
  const SuiteConfig suite = cfg.suite_config();
  const fs::path dir = prepare_dir(cfg.run.output_dir);
  write_file(dir / "config.yaml", emit_run_config(cfg));

  const auto t0 = std::chrono::steady_clock::now();
  const auto episodes = build_suite(suite, scenario);
  const auto outcomes = run_suite(episodes, scenario, cfg.run.workers, cfg.run.trace);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  write_file(dir / "episodes.jsonl", episodes_jsonl(outcomes));
  if (cfg.run.trace) write_file(dir / "trace.jsonl", traces_jsonl(outcomes));
  const auto rows = aggregate(to_records(outcomes));
  write_file(dir / "report.csv", aggregate_csv(rows));

  std::cout << aggregate_markdown(rows);
  std::printf("%zu episodes (%zu invalid) in %.1f s with %zu workers; results in %s\n", outcomes.size(),
              count_invalid(outcomes), secs, cfg.run.workers, dir.string().c_str());
  return kOk;
}

int cmd_sweep(const CommonFlags& flags) {
  const RunConfig cfg = resolve_config(flags);
  const Scenario scenario = cfg.scenario();
  SuiteConfig suite = cfg.suite_config();
  suite.camera_modes = {CameraModeKind::Matched};
  const SweepParameter parameter = cfg.sweep_parameter();
  const fs::path dir = prepare_dir(cfg.run.output_dir);
  write_file(dir / "config.yaml", emit_run_config(cfg));

  const auto base = build_suite(suite, scenario);
  const SweepResult sweep = sweep_mismatch(parameter, cfg.sweep.magnitudes, base, scenario, cfg.run.workers);

  write_file(dir / "episodes.jsonl", episodes_jsonl(sweep.outcomes));
  const auto curve = mismatch_curve(to_records(sweep.outcomes), parameter);
  write_file(dir / "mismatch.csv", curve_csv(curve, std::string(to_string(parameter))));

  std::printf("| %s offset | SR | SPL | n | invalid |\n|---:|---:|---:|---:|---:|\n",
              std::string(to_string(parameter)).c_str());
  for (const auto& b : sweep.buckets) {
    std::printf("| %g | %.1f | %.1f | %zu | %zu |\n", b.magnitude, 100.0 * b.success_rate, 100.0 * b.spl, b.n,
                b.invalid);
  }
  std::printf("results in %s\n", dir.string().c_str());
  return kOk;
}

struct ReportFlags {
  std::vector<std::string> inputs;
  std::string out;
  bool markdown = false;
  bool init_curve = false;
  std::string mismatch;
};

int cmd_report(const ReportFlags& flags) {
  std::vector<EpisodeRecord> records;
  for (const auto& path : flags.inputs) {
    std::vector<EpisodeRecord> part;
    try {
      part = read_episode_jsonl(path);
    } catch (const std::ios_base::failure& e) {
      throw IoError(e.what());
    }
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto rows = aggregate(records);
  const std::string table = flags.markdown ? aggregate_markdown(rows) : aggregate_csv(rows);
  std::optional<std::string> init_csv;
  std::optional<std::string> mismatch_csv;
  if (flags.init_curve) init_csv = curve_csv(init_distance_curve(records, 0.5), "init_distance");
  if (!flags.mismatch.empty()) {
    const SweepParameter p = parse_sweep_parameter(flags.mismatch);
    mismatch_csv = curve_csv(mismatch_curve(records, p), flags.mismatch);
  }

  if (flags.out.empty()) {
    std::cout << table;
    if (init_csv) std::cout << "\n" << *init_csv;
    if (mismatch_csv) std::cout << "\n" << *mismatch_csv;
    return kOk;
  }
  const fs::path dir = prepare_dir(flags.out);
  write_file(dir / (flags.markdown ? "report.md" : "report.csv"), table);
  if (init_csv) write_file(dir / "init_distance.csv", *init_csv);
  if (mismatch_csv) write_file(dir / "mismatch.csv", *mismatch_csv);
  std::cout << table;
  return kOk;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_trace) {
  cmd->add_option("--config", flags.config, "YAML run config");
  cmd->add_option("--out", flags.out, "output directory (file for gen-world)");
  cmd->add_option("--workers", flags.workers, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--seed", flags.seed, "master seed");
  if (with_trace) cmd->add_flag("--trace", flags.trace, "also write per-step guidance traces");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajguide: trajectory-guided navigation benchmark"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  CommonFlags run_flags;
  CommonFlags sweep_flags;
  ReportFlags report_flags;

  auto* gen = app.add_subcommand("gen-world", "generate a world and write it as text");
  add_common(gen, gen_flags, false);
  auto* run = app.add_subcommand("run", "run an episode suite");
  add_common(run, run_flags, true);
  auto* sweep = app.add_subcommand("sweep", "camera-mismatch sweep over one parameter");
  add_common(sweep, sweep_flags, false);
  auto* report = app.add_subcommand("report", "aggregate episode JSONL files");
  report->add_option("inputs", report_flags.inputs, "episode JSONL files")->required();
  report->add_option("--out", report_flags.out, "output directory");
  report->add_flag("--markdown", report_flags.markdown, "markdown table instead of CSV");
  report->add_flag("--init-curve", report_flags.init_curve, "SR over initialization distance");
  report->add_option("--mismatch", report_flags.mismatch, "SR over sweep magnitude for fov|aspect|height");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen_world(gen_flags);
    if (*run) return cmd_run(run_flags);
    if (*sweep) return cmd_sweep(sweep_flags);
    if (*report) return cmd_report(report_flags);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
