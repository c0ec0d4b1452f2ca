#include "relay/cli/commands.hpp"

#include <CLI11.hpp>

#include <ostream>

#include "relay/benchmark_io.hpp"
#include "relay/cli/app_config.hpp"
#include "relay/errors.hpp"
#include "relay/evaluation.hpp"
#include "relay/synthesis.hpp"
#include "relay/transcript_io.hpp"

namespace relay::cli {

namespace {

AppConfig config_for(const GlobalOptions& g) {
  AppConfig c = g.config ? load_app_config(*g.config) : default_app_config();
  if (g.workers) {
    if (*g.workers == 0) throw ConfigError("--workers must be positive");
    c.workers = *g.workers;
  }
  if (g.out) c.runs_dir = *g.out;
  return c;
}

std::shared_ptr<ResponseCache> cache_for(const AppConfig& c) {
  return std::make_shared<ResponseCache>(c.cache_dir.value_or(c.runs_dir / "cache"));
}

// Shared error mapping; every command body runs through here.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const KeySetMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BackendError& e) {
    err << "backend failure: " << e.what() << '\n';
    return kBackendFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace

int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AppConfig config = config_for(g);
    RunMatrix matrix;
    matrix.settings = select_settings(config, o.settings);
    if (g.seed) {
      for (auto& s : matrix.settings) s.dialogue.seed = *g.seed;
    }
    auto load = load_benchmark(o.benchmark, o.format);
    for (const auto& w : load.warnings) err << "warning: " << w << '\n';
    matrix.tasks = o.filter.empty() ? std::move(load.tasks) : filter_tasks(load.tasks, MetaFilter::parse(o.filter));
    matrix.name = o.name.value_or(std::filesystem::path(o.benchmark).lexically_normal().filename().stem().string());
    if (matrix.name.empty()) matrix.name = "eval";
    matrix.out_dir = config.runs_dir;
    matrix.workers = config.workers;
    auto selected = [&](const std::string& n) {
      return std::any_of(matrix.settings.begin(), matrix.settings.end(), [&](const Setting& s) { return s.name == n; });
    };
    if (config.breakdown && selected(config.breakdown->perceiver) && selected(config.breakdown->reasoner) &&
        selected(config.breakdown->collaborative)) {
      matrix.breakdown = config.breakdown;
    }

    auto cache = cache_for(config);
    BackendMap backends = make_backends(config, g.backend, cache);
    RunStats stats;
    EvalReport report = run_matrix(matrix, backends, &stats);
    write_report(report, config.runs_dir / matrix.name);
    out << format_report(report);
    err << "pairs executed " << stats.executed << ", restored " << stats.restored << "; cache hits " << cache->hits()
        << ", misses " << cache->misses() << '\n';

    std::size_t pairs = 0;
    std::size_t aborted = 0;
    for (const auto& s : report.settings) {
      pairs += s.total;
      aborted += s.aborted;
    }
    if (pairs > 0 && aborted == pairs) {
      err << "every run failed; first error: " << report.errors.front() << '\n';
      return int(kBackendFailure);
    }
    return int(kOk);
  });
}

int cmd_synthesize(const GlobalOptions& g, const SynthesizeOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AppConfig config = config_for(g);
    SynthesisConfig sc = default_synthesis_config();
    sc.dialogue = config.dialogue;
    sc.budget = o.budget.value_or(config.synthesis.budget);
    if (sc.budget == 0) throw ConfigError("--budget must be positive");
    sc.sampling_temperature = config.synthesis.sampling_temperature;
    sc.question_retries = config.synthesis.question_retries;
    sc.questions_per_image = config.synthesis.questions_per_image;
    sc.min_options = config.synthesis.min_options;
    sc.workers = config.workers;
    if (g.seed) sc.seed = *g.seed;
    if (config.synthesis.question_prompt_file) sc.question_prompt = read_file(*config.synthesis.question_prompt_file);

    std::string teacher = o.teacher.value_or(config.synthesis.teacher);
    if (!config.endpoints.contains(teacher)) throw ConfigError("unknown teacher endpoint '" + teacher + "'");
    auto corpus = scan_corpus(o.corpus, o.manifest);
    auto cache = cache_for(config);
    BackendMap backends = make_backends(config, g.backend, cache);
    DatasetSummary summary = run_synthesis(corpus, *backends.at(teacher), sc, config.runs_dir / "dataset");
    out << format_summary(summary);

    auto failed = summary.status_counts.find(FilterStatus::DroppedGenerationFailed);
    if (summary.records > 0 && failed != summary.status_counts.end() && failed->second == summary.records) {
      err << "no record could be generated; check the teacher endpoint\n";
      return int(kBackendFailure);
    }
    return int(kOk);
  });
}

int cmd_export(const GlobalOptions& g, const ExportOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AppConfig config = config_for(g);
    auto records_path = o.records.value_or(config.runs_dir / "dataset" / "records.jsonl");
    auto dir = o.dataset_dir.value_or(records_path.parent_path());
    auto records = load_records(records_path);
    out << format_summary(export_sft_dataset(records, dir, config.dialogue));
    return int(kOk);
  });
}

int cmd_breakdown(const GlobalOptions& g, const BreakdownOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AppConfig config = config_for(g);
    Breakdown b = error_breakdown(load_verdicts(o.perceiver), load_verdicts(o.reasoner), load_verdicts(o.collaborative));
    out << format_breakdown(b);
    auto csv = o.csv.value_or(config.runs_dir / "breakdown.csv");
    write_file_atomic(csv, breakdown_csv(b));
    return int(kOk);
  });
}

int cmd_transcript(const GlobalOptions& g, const TranscriptOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    AppConfig config = config_for(g);
    auto path = transcript_path(config.runs_dir / "runs", o.run_id, o.task_id);
    if (!std::filesystem::is_regular_file(path)) {
      err << "error: no transcript for run '" << o.run_id << "' task '" << o.task_id << "' (looked for " << path.string()
          << ")\n";
      return int(kConfigError);
    }
    out << format_transcript(read_transcript(path));
    return int(kOk);
  });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"relay: perceiver/reasoner dialogues, synthesis and evaluation"};
  app.require_subcommand(1);
  GlobalOptions g;
  std::string config_path;
  std::string out_path;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--backend", g.backend, "http, or mock:<script> for scripted responses")->capture_default_str();
  auto* workers_opt = app.add_option("--workers", workers, "Concurrent tasks (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for sampled calls");
  app.add_option("--out", out_path, "Output root for runs, reports, cache and dataset");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Run the settings matrix over a benchmark and report accuracy");
  eval_cmd->add_option("--benchmark", eval.benchmark, "Benchmark file, or directory holding tasks.jsonl")->required();
  eval_cmd->add_option("--format", eval.format, "Benchmark adapter: jsonl or mmmu")->capture_default_str();
  eval_cmd->add_option("--settings", eval.settings, "all, or comma-separated setting names")->capture_default_str();
  eval_cmd->add_option("--filter", eval.filter, "Metadata filter, e.g. subject=Biology|Chemistry");
  std::string eval_name;
  auto* name_opt = eval_cmd->add_option("--name", eval_name, "Matrix name (default: benchmark name)");

  SynthesizeOptions synth;
  auto* synth_cmd = app.add_subcommand("synthesize", "Generate, answer, converse and filter over an image corpus");
  synth_cmd->add_option("--corpus", synth.corpus, "Directory of images")->required();
  std::uint32_t budget = 0;
  auto* budget_opt = synth_cmd->add_option("--budget", budget, "Conversations sampled per question (default 8)");
  std::string manifest;
  auto* manifest_opt = synth_cmd->add_option("--manifest", manifest, "file,category CSV (default <corpus>/manifest.csv)");
  std::string teacher;
  auto* teacher_opt = synth_cmd->add_option("--teacher", teacher, "Teacher endpoint name");

  ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export", "Rebuild the fine-tuning samples from stored records");
  std::string records;
  std::string dataset_dir;
  auto* records_opt = export_cmd->add_option("--records", records, "records.jsonl (default <out>/dataset/records.jsonl)");
  auto* dataset_opt = export_cmd->add_option("--dataset", dataset_dir, "Output directory (default: beside the records)");

  BreakdownOptions bd;
  auto* bd_cmd = app.add_subcommand("breakdown", "Eight-group correctness breakdown from three verdict files");
  bd_cmd->add_option("perceiver", bd.perceiver, "Verdicts of the perceiver alone")->required()->check(CLI::ExistingFile);
  bd_cmd->add_option("reasoner", bd.reasoner, "Verdicts of the reasoner with vision")->required()->check(CLI::ExistingFile);
  bd_cmd->add_option("collaborative", bd.collaborative, "Verdicts of the collaborative setting")
      ->required()
      ->check(CLI::ExistingFile);
  std::string csv;
  auto* csv_opt = bd_cmd->add_option("--csv", csv, "CSV output (default <out>/breakdown.csv)");

  TranscriptOptions tr;
  auto* tr_cmd = app.add_subcommand("transcript", "Print a stored dialogue");
  tr_cmd->add_option("run_id", tr.run_id, "Run id, <matrix>.<setting>")->required();
  tr_cmd->add_option("task_id", tr.task_id, "Task id")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? int(kOk) : int(kConfigError);
  }

  if (!config_path.empty()) g.config = config_path;
  if (!out_path.empty()) g.out = out_path;
  if (*workers_opt) g.workers = workers;
  if (*seed_opt) g.seed = seed;

  if (*eval_cmd) {
    if (*name_opt) eval.name = eval_name;
    return cmd_eval(g, eval, out, err);
  }
  if (*synth_cmd) {
    if (*budget_opt) synth.budget = budget;
    if (*manifest_opt) synth.manifest = manifest;
    if (*teacher_opt) synth.teacher = teacher;
    return cmd_synthesize(g, synth, out, err);
  }
  if (*export_cmd) {
    if (*records_opt) exp.records = records;
    if (*dataset_opt) exp.dataset_dir = dataset_dir;
    return cmd_export(g, exp, out, err);
  }
  if (*bd_cmd) {
    if (*csv_opt) bd.csv = csv;
    return cmd_breakdown(g, bd, out, err);
  }
  return cmd_transcript(g, tr, out, err);
}

}  // namespace relay::cli
