// Copyright 2026 The mtlb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mtlb/core/binary_io.hpp"
#include "mtlb/core/errors.hpp"
#include "mtlb/metrics/evaluate.hpp"
#include "mtlb/report/run_config.hpp"
#include "mtlb/report/study.hpp"
#include "mtlb/scene/dataset.hpp"
#include "mtlb/scene/generator.hpp"
#include "mtlb/scene/ingest.hpp"
#include "mtlb/train/checkpoint.hpp"
#include "mtlb/train/experiment.hpp"

namespace fs = std::filesystem;
using namespace mtlb;

namespace
{

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

struct Common
{
  std::string config;
  std::optional<std::uint64_t> seed;
  bool force{false};
  std::string out;
};

RunConfig load_config(const Common & c)
{
  RunConfig rc = c.config.empty() ? RunConfig{} : RunConfig::load(c.config);
  if (c.seed) {
    rc.seed = *c.seed;
    rc.generate.seed = *c.seed;
  }
  rc.validate();
  return rc;
}

void check_writable(const fs::path & path, bool force)
{
  if (fs::exists(path) && !force) {
    throw InputError("refusing to overwrite '" + path.string() + "' (pass --force)");
  }
}

void write_text(const fs::path & path, const std::string & text) { write_file(path.string(), text); }

void print_split_sizes(const DatasetHandle & d)
{
  std::cout << "splits train/val/test = " << d.indices(Split::Train).size() << "/" << d.indices(Split::Val).size()
            << "/" << d.indices(Split::Test).size() << "\n";
}

int cmd_generate(const Common & c, const std::optional<std::string> & preset, const std::optional<std::size_t> & count)
{
  RunConfig rc = load_config(c);
  if (preset) rc.generate.preset = preset_from_string(*preset);
  if (count) rc.generate.count = *count;
  rc.generate.validate();
  if (c.out.empty()) throw ConfigError("generate needs --out");
  check_writable(c.out, c.force);
  const auto role = rc.generate.preset == Preset::SourceLike ? DatasetRole::Source : DatasetRole::Target;
  auto dataset = make_dataset(role, generate_synthetic(rc.generate), rc.generate.seed);
  save_dataset(c.out, dataset);
  std::cout << "generated " << dataset.count() << " " << to_string(rc.generate.preset) << " scenarios -> " << c.out
            << "\n";
  print_split_sizes(dataset);
  return 0;
}

std::pair<DatasetHandle, DatasetHandle> load_pair(const RunConfig & rc)
{
  if (rc.source_path.empty() || rc.target_path.empty()) {
    throw ConfigError("data.source and data.target must name dataset files");
  }
  auto source = load_dataset(rc.source_path);
  auto target = load_dataset(rc.target_path);
  if (source.role != DatasetRole::Source) throw ConfigError("data.source holds a " + std::string(to_string(source.role)) + " dataset");
  if (target.role != DatasetRole::Target) throw ConfigError("data.target holds a " + std::string(to_string(target.role)) + " dataset");
  return {std::move(source), std::move(target)};
}

int cmd_run(const Common & c, const std::optional<std::string> & method, const std::string & source_checkpoint)
{
  RunConfig rc = load_config(c);
  if (method) rc.method = method_from_string(*method);
  auto spec = rc.experiment(rc.method);
  if (is_two_stage(rc.method)) {
    if (source_checkpoint.empty()) {
      throw ConfigError("method " + std::string(to_string(rc.method)) + " depends on a stage-1 model: pass --source-checkpoint");
    }
    spec.source_checkpoint = load_checkpoint(source_checkpoint);
  }
  const fs::path out = c.out.empty() ? fs::path("run_" + std::string(to_string(rc.method))) : fs::path(c.out);
  const std::string m(to_string(rc.method));
  const std::vector<fs::path> files{out / (m + ".ckpt"), out / (m + "_source.json"), out / (m + "_target.json"),
                                    out / (m + "_timing.csv")};
  for (const auto & f : files) check_writable(f, c.force);
  auto [source, target] = load_pair(rc);
  const auto result = run_experiment(spec, source, target);
  fs::create_directories(out);
  save_checkpoint(files[0].string(), result.checkpoint);
  write_text(files[1], result.source_test.to_json());
  write_text(files[2], result.target_test.to_json());
  std::string timing = "method,stage,seconds\n";
  for (const auto & t : result.timings) timing += m + "," + t.stage + "," + format_double(t.seconds) + "\n";
  write_text(files[3], timing);
  std::cout << m << " source: " << result.source_test.to_key_value() << m << " target: " << result.target_test.to_key_value();
  std::cout << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_study(const Common & c)
{
  RunConfig rc = load_config(c);
  const fs::path out = c.out.empty() ? fs::path("study") : fs::path(c.out);
  const std::vector<fs::path> files{out / "study_report.txt", out / "study_report.json", out / "timing_total.csv",
                                    out / "timing_target.csv"};
  for (const auto & f : files) check_writable(f, c.force);
  auto [source, target] = load_pair(rc);
  fs::create_directories(out / "methods");
  const auto outcome = run_study(rc, source, target, [&](const ExperimentResult & r, const StudyTiming & t) {
    const std::string m(to_string(r.method));
    write_text(out / "methods" / (m + "_source.json"), r.source_test.to_json());
    write_text(out / "methods" / (m + "_target.json"), r.target_test.to_json());
    if (r.method == Method::SB) save_checkpoint((out / "methods" / "SB.ckpt").string(), r.checkpoint);
    std::cout << m << " done: target minADE " << r.target_test.min_ade << ", stage time " << t.total_seconds << " s\n"
              << std::flush;
  });
  write_text(files[0], outcome.report.to_text());
  write_text(files[1], outcome.report.to_json());
  write_text(files[2], total_time_csv(outcome.timings));
  write_text(files[3], target_time_csv(outcome.timings));
  std::cout << outcome.report.to_text() << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_eval(const Common & c, const std::string & checkpoint_path, const std::string & dataset_path,
             const std::optional<std::string> & split_name)
{
  RunConfig rc = load_config(c);
  const Split split = split_name ? split_from_string(*split_name) : rc.eval_split;
  if (!c.out.empty()) check_writable(c.out, c.force);
  const auto checkpoint = load_checkpoint(checkpoint_path);
  const auto dataset = load_dataset(dataset_path);
  const std::optional<ModelConfig> override = c.config.empty() ? std::nullopt : std::optional<ModelConfig>(rc.model);
  const ModelConfig mc = override.value_or(checkpoint.config);
  const auto scenes = prepare_split(dataset, split, mc);
  EvalOptions opts;
  opts.metrics.sample_rate = rc.generate.sample_rate;
  opts.metrics.eval_step = rc.eval_step;
  opts.output_modes = mc.output_modes;
  opts.nms_radius = mc.nms_radius;
  opts.threads = rc.worker_threads();
  MetricsReport report;
  if (checkpoint.kind == CheckpointKind::Oracle) {
    report = evaluate(oracle_predictor(mc.modes), scenes, opts);
  } else {
    const auto model = restore_model(checkpoint, override);
    report = evaluate(model, scenes, opts);
  }
  std::cout << report.to_key_value();
  if (!c.out.empty()) write_text(c.out, report.to_json());
  return 0;
}

int cmd_ingest(const Common & c, const std::string & replay, std::optional<int> port, std::optional<std::size_t> max_scenarios,
               std::optional<double> idle_timeout, const std::string & role_name)
{
  RunConfig rc = load_config(c);
  if (c.out.empty()) throw ConfigError("ingest needs --out");
  check_writable(c.out, c.force);
  const DatasetRole role = dataset_role_from_string(role_name);
  IngestStats stats;
  std::vector<Scenario> scenarios;
  if (!replay.empty()) {
    scenarios = ingest_replay(replay, rc.ingest, &stats);
  } else {
    const int p = port.value_or(rc.ingest_port);
    if (p <= 0 || p > 65535) throw ConfigError("--port must be in 1..65535");
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    scenarios = ingest_udp(static_cast<std::uint16_t>(p), rc.ingest, max_scenarios.value_or(rc.ingest_max_scenarios),
                           idle_timeout.value_or(rc.ingest_idle_timeout), &g_stop, &stats);
  }
  std::cout << "received " << stats.received << " datagrams, malformed " << stats.malformed << ", late " << stats.late
            << ", duplicates " << stats.duplicates << ", rejected scenarios " << stats.rejected_scenarios << "\n";
  if (scenarios.empty()) throw InputError("ingest produced no scenario");
  auto dataset = make_dataset(role, std::move(scenarios), rc.seed);
  save_dataset(c.out, dataset);
  std::cout << "wrote " << dataset.count() << " scenarios -> " << c.out << "\n";
  print_split_sizes(dataset);
  return 0;
}

void add_common(CLI::App * sub, Common & c, bool needs_config)
{
  auto * opt = sub->add_option("--config", c.config, "key=value settings file");
  if (needs_config) opt->required();
  sub->add_option("--seed", c.seed, "override run.seed and generate.seed");
  sub->add_flag("--force", c.force, "overwrite existing outputs");
  sub->add_option("--out", c.out, "output file or directory");
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Motion-prediction transfer-learning workbench"};
  app.require_subcommand(1);

  Common gen_c, run_c, study_c, eval_c, ingest_c;
  std::optional<std::string> gen_preset;
  std::optional<std::size_t> gen_count;
  auto * gen = app.add_subcommand("generate", "write a synthetic dataset");
  add_common(gen, gen_c, false);
  gen->add_option("--preset", gen_preset, "source_like or target_like");
  gen->add_option("--count", gen_count, "number of scenarios");

  std::optional<std::string> run_method;
  std::string source_checkpoint;
  auto * run = app.add_subcommand("run", "train and evaluate one method");
  add_common(run, run_c, true);
  run->add_option("--method", run_method, "TB, SB, MTL, FT, FTD, FTE or FR");
  run->add_option("--source-checkpoint", source_checkpoint, "stage-1 model for FT, FTD, FTE and FR");

  auto * study = app.add_subcommand("study", "run all seven methods and write the results table");
  add_common(study, study_c, true);

  std::string eval_checkpoint, eval_dataset;
  std::optional<std::string> eval_split;
  auto * eval = app.add_subcommand("eval", "evaluate a checkpoint on a dataset split");
  add_common(eval, eval_c, false);
  eval->add_option("--checkpoint", eval_checkpoint, "checkpoint file")->required();
  eval->add_option("--dataset", eval_dataset, "dataset file")->required();
  eval->add_option("--split", eval_split, "train, val or test");

  std::string replay, ingest_role = "target";
  std::optional<int> port;
  std::optional<std::size_t> max_scenarios;
  std::optional<double> idle_timeout;
  auto * ingest = app.add_subcommand("ingest", "assemble datagrams into a dataset");
  add_common(ingest, ingest_c, false);
  ingest->add_option("--replay", replay, "capture file with one datagram per line");
  ingest->add_option("--port", port, "UDP port to listen on");
  ingest->add_option("--max-scenarios", max_scenarios, "stop after this many end markers");
  ingest->add_option("--idle-timeout", idle_timeout, "seconds without traffic before stopping");
  ingest->add_option("--role", ingest_role, "dataset role tag: source or target");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*gen) return cmd_generate(gen_c, gen_preset, gen_count);
    if (*run) return cmd_run(run_c, run_method, source_checkpoint);
    if (*study) return cmd_study(study_c);
    if (*eval) return cmd_eval(eval_c, eval_checkpoint, eval_dataset, eval_split);
    if (*ingest) return cmd_ingest(ingest_c, replay, port, max_scenarios, idle_timeout, ingest_role);
  } catch (const mtlb::Error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
