#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairmit/errors.hpp"
#include "fairmit/harness.hpp"
#include "fairmit/io.hpp"
#include "fairmit/metrics.hpp"
#include "fairmit/mitigate.hpp"

namespace {

using namespace fairmit;

void print_report(const MetricReport& report, std::size_t eval_size) {
  const auto single = [](double v) {
    return ValueWithSpread{v, std::nullopt};
  };
  std::cout << "accuracy:  " << format_percent(single(report.accuracy * 100.0))
            << '\n';
  std::cout << "dpd:       "
            << format_count(single(static_cast<double>(report.dpd))) << '\n';
  std::cout << "ppd:       " << format_metric(single(report.ppd)) << '\n';
  std::cout << "eood:      " << format_metric(single(report.eood)) << '\n';
  std::cout << "prpd:      " << format_metric(single(report.prpd)) << '\n';
  std::cout << "eval_size: " << eval_size << '\n';
}

int run_evaluate(const std::string& scores_path, double threshold) {
  const auto records = load_scores(scores_path);
  const auto counts = confusion_from_scores(records, Threshold(threshold));
  std::cout << "threshold: " << threshold << '\n';
  std::cout << "tp: " << counts.tp << "  fp: " << counts.fp
            << "  tn: " << counts.tn << "  fn: " << counts.fn << '\n';
  print_report(metric_report(counts), records.size());
  return 0;
}

int run_threshold(const std::string& scores_path,
                  const std::string& strategy_text) {
  const auto strategy = strategy_from_name(strategy_text);
  if (!strategy) {
    throw config_error("unknown threshold strategy: " + strategy_text);
  }
  const auto records = load_scores(scores_path);
  const auto result = optimize_threshold(records, *strategy);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", result.t_star.value());
  std::cout << "strategy:   " << strategy_name(*strategy) << '\n';
  std::cout << "t_star:     " << buf << '\n';
  std::cout << "objective:  " << result.objective_value << '\n';
  std::cout << "candidates: " << result.candidates_evaluated << '\n';
  print_report(result.report_at_t, records.size());
  return 0;
}

int run_reweight(long long male, long long female) {
  if (male < 0 || female < 0) {
    throw input_error("class counts must be non-negative");
  }
  const ClassWeights weights =
      class_weights(static_cast<std::size_t>(male),
                    static_cast<std::size_t>(female));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", weights.male);
  std::cout << "male:   " << buf << '\n';
  std::snprintf(buf, sizeof(buf), "%.6f", weights.female);
  std::cout << "female: " << buf << '\n';
  return 0;
}

int run_synth(const std::string& spec_path, const std::string& out_dir) {
  const SyntheticSpec spec = load_synth_spec(spec_path);
  const SyntheticData data = generate_synthetic(spec);
  const std::filesystem::path out(out_dir);
  save_dataset_dir(out / "source", data.source);
  save_dataset_dir(out / "target", data.target);
  const auto count_females = [](const Dataset& d) {
    std::size_t n = 0;
    for (int label : d.labels) n += label == kFemale ? 1 : 0;
    return n;
  };
  std::cout << "source: " << data.source.size() << " samples ("
            << count_females(data.source) << " female)\n";
  std::cout << "target: " << data.target.size() << " samples ("
            << count_females(data.target) << " female)\n";
  std::cout << "wrote " << (out / "source").string() << " and "
            << (out / "target").string() << '\n';
  return 0;
}

ReportFormat format_from_name(const std::string& name) {
  if (name == "csv") return ReportFormat::Csv;
  if (name == "markdown" || name == "md") return ReportFormat::Markdown;
  throw config_error("unknown report format: " + name);
}

ReportFormat format_from_extension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".csv") return ReportFormat::Csv;
  if (ext == ".md" || ext == ".markdown") return ReportFormat::Markdown;
  throw config_error("cannot infer report format from extension: " +
                     path.string());
}

int run_experiment_cmd(const std::string& config_path,
                       const std::string& out_path) {
  const auto configs = load_experiment_configs(config_path);
  const ReportFormat format = format_from_extension(out_path);
  std::vector<ResultRow> rows;
  rows.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    std::cerr << "running experiment " << (i + 1) << "/" << configs.size()
              << "...\n";
    rows.push_back(run_experiment(configs[i]));
  }
  write_report(rows, out_path, format);
  std::cout << "wrote " << out_path << " (" << rows.size() << " rows)\n";
  return 0;
}

int run_report(const std::string& in_path, const std::string& format_name) {
  const ReportCells cells = parse_report_csv(in_path);
  emit_cells(cells, std::cout, format_from_name(format_name));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Group fairness metrics and bias mitigation for binary "
               "classifiers"};
  app.require_subcommand(1);

  std::string scores_path;
  double threshold = 0.5;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Metric report for a score file at a fixed threshold");
  evaluate->add_option("--scores", scores_path, "score CSV or JSONL file")
      ->required();
  evaluate->add_option("--threshold", threshold, "decision threshold [0,1]");

  std::string strategy_text;
  auto* threshold_cmd = app.add_subcommand(
      "threshold", "Fit the fairness-optimal decision threshold");
  threshold_cmd->add_option("--scores", scores_path, "score CSV or JSONL file")
      ->required();
  threshold_cmd
      ->add_option("--strategy", strategy_text,
                   "equal-true|equal-false|equal-total|equal-opportunity")
      ->required();

  long long male_count = 0;
  long long female_count = 0;
  auto* reweight = app.add_subcommand(
      "reweight", "Balanced class weights from training counts");
  reweight->add_option("--male", male_count, "male sample count")->required();
  reweight->add_option("--female", female_count, "female sample count")
      ->required();

  std::string spec_path;
  std::string out_dir;
  auto* synth = app.add_subcommand(
      "synth", "Generate the synthetic source/target dataset pair");
  synth->add_option("--spec", spec_path, "synthetic spec config file")
      ->required();
  synth->add_option("--out", out_dir, "output directory")->required();

  std::string config_path;
  std::string report_out;
  auto* experiment = app.add_subcommand(
      "experiment", "Run the configured experiment rows and write a report");
  experiment->add_option("--config", config_path, "experiment config file")
      ->required();
  experiment->add_option("--out", report_out, "report path (.csv or .md)")
      ->required();

  std::string report_in;
  std::string format_name = "markdown";
  auto* report = app.add_subcommand(
      "report", "Re-render a CSV report to stdout");
  report->add_option("--in", report_in, "report CSV produced by experiment")
      ->required();
  report->add_option("--format", format_name, "csv|markdown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }

  try {
    if (evaluate->parsed()) return run_evaluate(scores_path, threshold);
    if (threshold_cmd->parsed()) return run_threshold(scores_path, strategy_text);
    if (reweight->parsed()) return run_reweight(male_count, female_count);
    if (synth->parsed()) return run_synth(spec_path, out_dir);
    if (experiment->parsed()) return run_experiment_cmd(config_path, report_out);
    if (report->parsed()) return run_report(report_in, format_name);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 3;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 2;
  } catch (const input_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
