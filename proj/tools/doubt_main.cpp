// Command-line front end: batch scoring, matrix views, histograms,
// model comparison, projective coordinates, and the training demo.

#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "doubt/doubt.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFatal = 1;
constexpr int kExitRecordError = 2;

doubt::InputFormat parse_format(const std::string& name) {
  if (name == "jsonl") return doubt::InputFormat::jsonl;
  if (name == "csv") return doubt::InputFormat::csv;
  throw std::invalid_argument("unknown format \"" + name + "\"");
}

doubt::HistogramField parse_field(const std::string& name) {
  if (name == "theta") return doubt::HistogramField::theta;
  if (name == "max_doubt") return doubt::HistogramField::max_doubt;
  if (name == "neg_log") return doubt::HistogramField::neg_log;
  throw std::invalid_argument("unknown field \"" + name + "\"");
}

std::vector<double> parse_vector_literal(const std::string& literal) {
  std::vector<double> values;
  std::stringstream ss(literal);
  std::string token;
  while (std::getline(ss, token, ',')) {
    values.push_back(doubt::detail::parse_number(token));
  }
  if (!literal.empty() && literal.back() == ',') {
    throw std::invalid_argument("trailing comma in \"" + literal + "\"");
  }
  return values;
}

// Writes to --output when given, stdout otherwise.
class OutputTarget {
 public:
  explicit OutputTarget(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw std::runtime_error("cannot open output file \"" + path + "\"");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void report_issues(const std::vector<doubt::ParseIssue>& issues) {
  for (const auto& issue : issues) {
    std::cerr << "warning: line " << issue.line << " skipped: " << issue.message << "\n";
  }
}

// Loads scored reports from a file that may contain either prediction
// records (scored on the fly) or already-scored report lines.
std::vector<doubt::ScoreReport> load_reports(const std::string& path, doubt::InputFormat format,
                                             bool fail_fast, unsigned threads) {
  if (format == doubt::InputFormat::csv) {
    doubt::ParseResult parsed = doubt::parse_records(path, format, fail_fast);
    report_issues(parsed.issues);
    return doubt::score_batch(parsed.records, threads);
  }

  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open \"" + path + "\"");
  std::vector<doubt::ScoreReport> reports;
  std::vector<doubt::PredictionRecord> pending;       // records awaiting scoring
  std::vector<std::size_t> pending_slots;             // their positions in `reports`
  std::string line;
  std::size_t line_no = 0;
  auto problem = [&](std::size_t n, const std::string& message) {
    if (fail_fast) throw doubt::RecordError(n, message);
    std::cerr << "warning: line " << n << " skipped: " << message << "\n";
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const nlohmann::json obj = nlohmann::json::parse(line);
      if (doubt::looks_like_report(obj)) {
        reports.push_back(doubt::report_from_json(obj));
      } else {
        pending.push_back(doubt::detail::record_from_json(obj));
        pending_slots.push_back(reports.size());
        reports.emplace_back();
      }
    } catch (const std::exception& e) {
      problem(line_no, e.what());
    }
  }
  const std::vector<doubt::ScoreReport> scored = doubt::score_batch(pending, threads);
  for (std::size_t i = 0; i < scored.size(); ++i) reports[pending_slots[i]] = scored[i];
  return reports;
}

int cmd_score(const std::string& input, const std::string& format, const std::string& output,
              unsigned threads, bool fail_fast) {
  doubt::ParseResult parsed = doubt::parse_records(input, parse_format(format), fail_fast);
  report_issues(parsed.issues);
  const std::vector<doubt::ScoreReport> reports = doubt::score_batch(parsed.records, threads);
  OutputTarget out(output);
  for (const doubt::ScoreReport& r : reports) {
    out.stream() << doubt::report_to_json_line(r) << "\n";
  }
  return kExitOk;
}

int cmd_matrix(const std::string& probs_literal, const std::string& output) {
  const doubt::ProbabilityVector p(parse_vector_literal(probs_literal));
  const doubt::CertaintyMatrix offset = doubt::certainty_offset_matrix(p);
  const doubt::CertaintyMatrix c = doubt::certainty_matrix(p);
  const doubt::DoubtMatrix d = doubt::doubt_matrix(p);

  auto append_rows = [](std::string& text, const auto& m) {
    text += '[';
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (i) text += ',';
      text += '[';
      for (std::size_t k = 0; k < m.size(); ++k) {
        if (k) text += ',';
        doubt::append_number_token(text, m(i, k));
      }
      text += ']';
    }
    text += ']';
  };

  std::string text = "{\"probs\":[";
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) text += ',';
    doubt::append_number_token(text, p[i]);
  }
  text += "],\"c_offset\":";
  append_rows(text, offset);
  text += ",\"c\":";
  append_rows(text, c);
  text += ",\"d\":";
  append_rows(text, d);
  text += ",\"max_doubt\":";
  doubt::append_number_token(text, doubt::max_doubt_score(p));
  text += ",\"row_l1_max\":";
  doubt::append_number_token(text, doubt::row_l1_max(c));
  text += '}';

  OutputTarget out(output);
  out.stream() << text << "\n";
  return kExitOk;
}

int cmd_hist(const std::string& input, const std::string& format, const std::string& field,
             std::size_t bins, const std::string& output, unsigned threads, bool fail_fast) {
  const std::vector<doubt::ScoreReport> reports =
      load_reports(input, parse_format(format), fail_fast, threads);
  const doubt::Histogram h = doubt::doubt_histogram(reports, parse_field(field), bins);
  OutputTarget out(output);
  doubt::write_histogram_csv(out.stream(), h);
  return kExitOk;
}

int cmd_compare(const std::string& input_a, const std::string& input_b, const std::string& format,
                const std::string& output, unsigned threads, bool fail_fast) {
  const auto reports_a = load_reports(input_a, parse_format(format), fail_fast, threads);
  const auto reports_b = load_reports(input_b, parse_format(format), fail_fast, threads);
  const doubt::ComparisonSummary summary = doubt::compare_models(reports_a, reports_b);
  OutputTarget out(output);
  out.stream() << doubt::comparison_to_json(summary) << "\n";
  return kExitOk;
}

int cmd_project(const std::string& probs_literal, const std::string& output) {
  const doubt::ProbabilityVector p(parse_vector_literal(probs_literal));
  const doubt::SortedProbabilities ordered = doubt::sort_descending(p);
  const doubt::CertaintyProjection f = doubt::certainty_projection(ordered.probabilities);
  std::string text = "[";
  for (std::size_t i = 0; i < f.points.size(); ++i) {
    if (i) text += ',';
    text += '[';
    doubt::append_number_token(text, f.points[i].a());
    text += ',';
    doubt::append_number_token(text, f.points[i].b());
    text += ']';
  }
  text += ']';
  OutputTarget out(output);
  out.stream() << text << "\n";
  return kExitOk;
}

int cmd_train(double lambda, std::size_t epochs, double lr, std::uint32_t seed,
              const std::string& output) {
  const doubt::SyntheticDataset data = doubt::make_blobs(3, 100, 0.3, seed);
  doubt::TrainConfig cfg;
  cfg.lambda = lambda;
  cfg.epochs = epochs;
  cfg.learning_rate = lr;
  cfg.seed = seed;
  const doubt::TrainResult result = doubt::train(data, cfg);
  OutputTarget out(output);
  doubt::write_metrics_csv(out.stream(), result.metrics);
  const doubt::EpochMetrics& last = result.metrics.back();
  std::cerr << "final: acc=" << doubt::format_double(last.accuracy)
            << " ce=" << doubt::format_double(last.mean_cross_entropy)
            << " doubt_cost=" << doubt::format_double(last.mean_doubt_cost) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"certainty/doubt scores for multi-class classifier outputs"};
  app.require_subcommand(1);

  std::string input;
  std::string input_b;
  std::string format = "jsonl";
  std::string field = "theta";
  std::string output;
  std::string probs_literal;
  std::size_t bins = 10;
  double lambda = 0.0;
  std::size_t epochs = 500;
  double lr = 0.1;
  std::uint32_t seed = 42;
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  bool fail_fast = false;

  CLI::App* score = app.add_subcommand("score", "score a prediction file into report JSONL");
  score->add_option("input", input, "prediction file")->required();
  score->add_option("--format", format, "input format: jsonl or csv")->capture_default_str();
  score->add_option("--output", output, "output path (default stdout)");
  score->add_option("--threads", threads, "worker threads")->capture_default_str();
  score->add_flag("--fail-fast", fail_fast, "abort on the first bad record");

  CLI::App* matrix = app.add_subcommand("matrix", "certainty/doubt matrices of one vector");
  matrix->add_option("--probs", probs_literal, "comma-separated probabilities")->required();
  matrix->add_option("--output", output, "output path (default stdout)");

  CLI::App* hist = app.add_subcommand("hist", "histogram of a doubt field");
  hist->add_option("input", input, "prediction or report file")->required();
  hist->add_option("--format", format, "input format: jsonl or csv")->capture_default_str();
  hist->add_option("--field", field, "theta, max_doubt, or neg_log")->capture_default_str();
  hist->add_option("--bins", bins, "number of bins")->capture_default_str();
  hist->add_option("--output", output, "output path (default stdout)");
  hist->add_option("--threads", threads, "worker threads")->capture_default_str();
  hist->add_flag("--fail-fast", fail_fast, "abort on the first bad record");

  CLI::App* compare = app.add_subcommand("compare", "compare two scored models by id");
  compare->add_option("input_a", input, "first prediction or report file")->required();
  compare->add_option("input_b", input_b, "second prediction or report file")->required();
  compare->add_option("--format", format, "input format: jsonl or csv")->capture_default_str();
  compare->add_option("--output", output, "output path (default stdout)");
  compare->add_option("--threads", threads, "worker threads")->capture_default_str();
  compare->add_flag("--fail-fast", fail_fast, "abort on the first bad record");

  CLI::App* project = app.add_subcommand("project", "projective certainty coordinates");
  project->add_option("--probs", probs_literal, "comma-separated probabilities")->required();
  project->add_option("--output", output, "output path (default stdout)");

  CLI::App* train = app.add_subcommand("train", "doubt-penalized training demo on blobs");
  train->add_option("--lambda", lambda, "doubt penalty weight")->capture_default_str();
  train->add_option("--epochs", epochs, "training epochs")->capture_default_str();
  train->add_option("--lr", lr, "learning rate")->capture_default_str();
  train->add_option("--seed", seed, "dataset and init seed")->capture_default_str();
  train->add_option("--output", output, "metrics CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitFatal;
  }

  try {
    if (score->parsed()) return cmd_score(input, format, output, threads, fail_fast);
    if (matrix->parsed()) return cmd_matrix(probs_literal, output);
    if (hist->parsed()) return cmd_hist(input, format, field, bins, output, threads, fail_fast);
    if (compare->parsed())
      return cmd_compare(input, input_b, format, output, threads, fail_fast);
    if (project->parsed()) return cmd_project(probs_literal, output);
    if (train->parsed()) return cmd_train(lambda, epochs, lr, seed, output);
  } catch (const doubt::RecordError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRecordError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitFatal;
}
