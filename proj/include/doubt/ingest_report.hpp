#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "doubt/cost.hpp"
#include "doubt/extended_real.hpp"
#include "doubt/json_format.hpp"
#include "doubt/matrix_scores.hpp"
#include "doubt/score_core.hpp"

namespace doubt {

enum class RecordKind { probs, logits };

inline const char* to_string(RecordKind k) {
  return k == RecordKind::probs ? "probs" : "logits";
}

struct PredictionRecord {
  std::string id;
  RecordKind kind = RecordKind::probs;
  std::vector<double> values;
  std::optional<int> label;
};

enum class InputFormat { jsonl, csv };

struct ParseIssue {
  std::size_t line = 0;
  std::string message;
};

struct ParseResult {
  std::vector<PredictionRecord> records;
  std::vector<ParseIssue> issues;  // skipped lines, when not failing fast
};

/// Raised for the first bad record when fail-fast parsing is requested.
class RecordError : public std::runtime_error {
 public:
  RecordError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline void validate_record(const PredictionRecord& r) {
  if (r.id.empty()) throw std::invalid_argument("record id must be non-empty");
  if (r.kind == RecordKind::probs) {
    ProbabilityVector check(r.values);
  } else {
    LogitVector check(r.values);
  }
  if (r.label && (*r.label < 0 || static_cast<std::size_t>(*r.label) >= r.values.size())) {
    throw std::invalid_argument("label out of range");
  }
}

inline PredictionRecord record_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("expected a JSON object");
  PredictionRecord r;
  bool saw_values = false;
  for (const auto& [key, value] : obj.items()) {
    if (key == "id") {
      if (!value.is_string()) throw std::invalid_argument("\"id\" must be a string");
      r.id = value.get<std::string>();
    } else if (key == "probs" || key == "logits") {
      if (saw_values) throw std::invalid_argument("record has both \"probs\" and \"logits\"");
      if (!value.is_array()) throw std::invalid_argument("\"" + key + "\" must be an array");
      r.kind = (key == "probs") ? RecordKind::probs : RecordKind::logits;
      for (const auto& v : value) {
        if (!v.is_number()) throw std::invalid_argument("\"" + key + "\" entries must be numbers");
        r.values.push_back(v.get<double>());
      }
      saw_values = true;
    } else if (key == "label") {
      if (!value.is_number_integer()) throw std::invalid_argument("\"label\" must be an integer");
      r.label = value.get<int>();
    } else {
      throw std::invalid_argument("unexpected key \"" + key + "\"");
    }
  }
  if (r.id.empty()) throw std::invalid_argument("missing \"id\"");
  if (!saw_values) throw std::invalid_argument("missing \"probs\" or \"logits\"");
  validate_record(r);
  return r;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

inline double parse_number(const std::string& token) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size() || token.empty()) {
    throw std::invalid_argument("bad number \"" + token + "\"");
  }
  return v;
}

}  // namespace detail

/// Reads prediction records from a JSONL or CSV file. An unreadable file is
/// fatal; malformed records are collected as issues and skipped, or thrown
/// as RecordError when fail_fast is set. Blank lines are ignored.
inline ParseResult parse_records(const std::string& path, InputFormat format,
                                 bool fail_fast = false) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open \"" + path + "\"");

  ParseResult result;
  auto record_problem = [&](std::size_t line, const std::string& message) {
    if (fail_fast) throw RecordError(line, message);
    result.issues.push_back({line, message});
  };

  std::string line;
  std::size_t line_no = 0;

  if (format == InputFormat::jsonl) {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      try {
        result.records.push_back(detail::record_from_json(nlohmann::json::parse(line)));
      } catch (const std::exception& e) {
        record_problem(line_no, e.what());
      }
    }
    return result;
  }

  // CSV: header "id,kind,v1..vN[,label]", kind in {prob, logit}.
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV file \"" + path + "\"");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "id" || header[1] != "kind" || header[2] != "v1") {
    throw std::runtime_error("bad CSV header \"" + line + "\"");
  }
  const bool has_label = header.back() == "label";
  const std::size_t n_values = header.size() - 2 - (has_label ? 1 : 0);
  if (n_values < 2) throw std::runtime_error("CSV header must declare at least v1,v2");

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const std::vector<std::string> fields = detail::split_csv_line(line);
      if (fields.size() != header.size()) {
        throw std::invalid_argument("expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
      }
      PredictionRecord r;
      r.id = fields[0];
      if (fields[1] == "prob") {
        r.kind = RecordKind::probs;
      } else if (fields[1] == "logit") {
        r.kind = RecordKind::logits;
      } else {
        throw std::invalid_argument("kind must be \"prob\" or \"logit\", got \"" + fields[1] + "\"");
      }
      for (std::size_t i = 0; i < n_values; ++i) {
        r.values.push_back(detail::parse_number(fields[2 + i]));
      }
      if (has_label && !fields.back().empty()) {
        r.label = static_cast<int>(detail::parse_number(fields.back()));
      }
      detail::validate_record(r);
      result.records.push_back(std::move(r));
    } catch (const std::exception& e) {
      record_problem(line_no, e.what());
    }
  }
  return result;
}

/// Per-record bundle of every score. Probability-space fields are computed
/// on the record's probabilities (softmax of the logits for logit records,
/// with the logits' argmax as the fixed comparison index); raw fields are
/// present for logit records only.
struct ScoreReport {
  std::string id;
  RecordKind kind = RecordKind::probs;
  std::optional<int> label;
  std::size_t argmax_index = 0;
  std::vector<double> certainty;
  std::vector<ExtendedReal> doubt;
  std::vector<ExtendedReal> neg_log_certainty;
  ExtendedReal max_doubt;
  double theta = 0.0;
  std::vector<double> raw_certainty;
  std::vector<ExtendedReal> raw_doubt;
  double raw_theta = 0.0;
};

inline ScoreReport score_record(const PredictionRecord& record) {
  ScoreReport report;
  report.id = record.id;
  report.kind = record.kind;
  report.label = record.label;

  if (record.kind == RecordKind::probs) {
    const ProbabilityVector p(record.values);
    const std::size_t j = argmax_index(p);
    report.argmax_index = j;
    report.certainty = pairwise_certainty(p, j).scores;
    report.doubt = pairwise_doubt(p, j).scores;
    report.neg_log_certainty = neg_log_certainty(p, j).scores;
    report.max_doubt = max_doubt_score(p);
    report.theta = doubt_cost(p, j);
  } else {
    const LogitVector y(record.values);
    const std::size_t j = argmax_index(y);
    const ProbabilityVector p = softmax(y);
    report.argmax_index = j;
    report.certainty = pairwise_certainty(p, j).scores;
    report.doubt = pairwise_doubt(p, j).scores;
    report.neg_log_certainty = neg_log_certainty(p, j).scores;
    report.max_doubt = max_doubt_score(p);
    report.theta = doubt_cost(p, j);
    report.raw_certainty = raw_certainty(y, j).scores;
    report.raw_doubt = raw_doubt(y, j).scores;
    report.raw_theta = raw_doubt_cost(y, j);
  }
  return report;
}

/// Scores records in input order; results are identical for any thread
/// count. Per-record failures surface as the lowest-index exception.
inline std::vector<ScoreReport> score_batch(const std::vector<PredictionRecord>& records,
                                            unsigned threads = 1) {
  std::vector<ScoreReport> reports(records.size());
  if (records.empty()) return reports;
  if (threads <= 1 || records.size() == 1) {
    for (std::size_t i = 0; i < records.size(); ++i) reports[i] = score_record(records[i]);
    return reports;
  }

  std::vector<std::exception_ptr> failures(records.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < records.size(); i = next.fetch_add(1)) {
      try {
        reports[i] = score_record(records[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned count = std::min<unsigned>(threads, static_cast<unsigned>(records.size()));
  pool.reserve(count);
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }
  return reports;
}

namespace detail {

template <typename T>
inline void append_number_array(std::string& out, const std::vector<T>& values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    append_number_token(out, values[i]);
  }
  out += ']';
}

inline double number_from_token(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw std::invalid_argument("expected a number or \"inf\"/\"-inf\"");
}

inline std::vector<double> double_array(const nlohmann::json& v) {
  if (!v.is_array()) throw std::invalid_argument("expected an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(number_from_token(x));
  return out;
}

inline std::vector<ExtendedReal> extended_array(const nlohmann::json& v) {
  if (!v.is_array()) throw std::invalid_argument("expected an array");
  std::vector<ExtendedReal> out;
  out.reserve(v.size());
  for (const auto& x : v) out.emplace_back(number_from_token(x));
  return out;
}

}  // namespace detail

/// One compact JSON object, fixed key order, no trailing newline.
inline std::string report_to_json_line(const ScoreReport& r) {
  std::string out = "{\"id\":";
  append_json_string(out, r.id);
  out += ",\"kind\":\"";
  out += to_string(r.kind);
  out += '"';
  if (r.label) {
    out += ",\"label\":";
    out += std::to_string(*r.label);
  }
  out += ",\"argmax_index\":";
  out += std::to_string(r.argmax_index);
  out += ",\"certainty\":";
  detail::append_number_array(out, r.certainty);
  out += ",\"doubt\":";
  detail::append_number_array(out, r.doubt);
  out += ",\"neg_log_certainty\":";
  detail::append_number_array(out, r.neg_log_certainty);
  out += ",\"max_doubt\":";
  append_number_token(out, r.max_doubt);
  out += ",\"theta\":";
  append_number_token(out, r.theta);
  if (r.kind == RecordKind::logits) {
    out += ",\"raw_certainty\":";
    detail::append_number_array(out, r.raw_certainty);
    out += ",\"raw_doubt\":";
    detail::append_number_array(out, r.raw_doubt);
    out += ",\"raw_theta\":";
    append_number_token(out, r.raw_theta);
  }
  out += '}';
  return out;
}

inline ScoreReport report_from_json(const nlohmann::json& obj) {
  if (!obj.is_object()) throw std::invalid_argument("expected a JSON object");
  ScoreReport r;
  r.id = obj.at("id").get<std::string>();
  const std::string kind = obj.at("kind").get<std::string>();
  if (kind == "probs") {
    r.kind = RecordKind::probs;
  } else if (kind == "logits") {
    r.kind = RecordKind::logits;
  } else {
    throw std::invalid_argument("bad kind \"" + kind + "\"");
  }
  if (obj.contains("label")) r.label = obj.at("label").get<int>();
  r.argmax_index = obj.at("argmax_index").get<std::size_t>();
  r.certainty = detail::double_array(obj.at("certainty"));
  r.doubt = detail::extended_array(obj.at("doubt"));
  r.neg_log_certainty = detail::extended_array(obj.at("neg_log_certainty"));
  r.max_doubt = ExtendedReal(detail::number_from_token(obj.at("max_doubt")));
  r.theta = detail::number_from_token(obj.at("theta"));
  if (r.kind == RecordKind::logits) {
    r.raw_certainty = detail::double_array(obj.at("raw_certainty"));
    r.raw_doubt = detail::extended_array(obj.at("raw_doubt"));
    r.raw_theta = detail::number_from_token(obj.at("raw_theta"));
  }
  return r;
}

inline bool looks_like_report(const nlohmann::json& obj) {
  return obj.is_object() && obj.contains("theta") && obj.contains("certainty");
}

struct Histogram {
  std::vector<double> bin_edges;  // bins + 1 edges
  std::vector<std::size_t> counts;
  std::size_t infinite_count = 0;
};

enum class HistogramField { theta, max_doubt, neg_log };

/// Scalar summary a histogram bins per report: theta, the max-doubt score,
/// or the largest off-argmax neg-log-certainty (the record's worst
/// log-scale doubt).
inline double report_field_value(const ScoreReport& r, HistogramField field) {
  switch (field) {
    case HistogramField::theta:
      return r.theta;
    case HistogramField::max_doubt:
      return r.max_doubt.value();
    case HistogramField::neg_log: {
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < r.neg_log_certainty.size(); ++i) {
        if (i == r.argmax_index) continue;
        worst = std::max(worst, r.neg_log_certainty[i].value());
      }
      return worst;
    }
  }
  throw std::logic_error("report_field_value: bad field");
}

/// Equal-width bins over the finite range of the chosen field; the final
/// bin is right-inclusive and infinite values are counted separately.
inline Histogram doubt_histogram(const std::vector<ScoreReport>& reports, HistogramField field,
                                 std::size_t bins) {
  if (reports.empty()) throw std::invalid_argument("doubt_histogram: no reports");
  if (bins < 1) throw std::invalid_argument("doubt_histogram: need at least 1 bin");

  std::vector<double> values;
  values.reserve(reports.size());
  for (const ScoreReport& r : reports) values.push_back(report_field_value(r, field));

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (std::isinf(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (lo > hi) {  // every value infinite
    lo = 0.0;
    hi = 1.0;
  }
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }

  Histogram h;
  h.counts.assign(bins, 0);
  const double width = (hi - lo) / static_cast<double>(bins);
  h.bin_edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.bin_edges[i] = lo + static_cast<double>(i) * width;
  h.bin_edges[bins] = hi;

  for (double v : values) {
    if (std::isinf(v)) {
      ++h.infinite_count;
      continue;
    }
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= bins) idx = bins - 1;
    ++h.counts[idx];
  }
  return h;
}

inline void write_histogram_csv(std::ostream& os, const Histogram& h) {
  os << "bin_lo,bin_hi,count\n";
  for (std::size_t b = 0; b < h.counts.size(); ++b) {
    os << format_double(h.bin_edges[b]) << ',' << format_double(h.bin_edges[b + 1]) << ','
       << h.counts[b] << '\n';
  }
  os << "inf,," << h.infinite_count << '\n';
}

struct ModelSummary {
  double mean_theta = 0.0;
  double median_theta = 0.0;
  std::size_t infinite_max_doubt = 0;
};

struct ComparisonSummary {
  std::size_t common_count = 0;
  std::vector<std::string> missing_in_a;  // ids only the other model scored
  std::vector<std::string> missing_in_b;
  ModelSummary a;
  ModelSummary b;
  double a_win_fraction = 0.0;  // theta_a < theta_b wins; ties split 0.5/0.5
};

namespace detail {

inline ModelSummary summarize(const std::vector<const ScoreReport*>& reports) {
  ModelSummary s;
  std::vector<double> thetas;
  thetas.reserve(reports.size());
  for (const ScoreReport* r : reports) {
    thetas.push_back(r->theta);
    s.mean_theta += r->theta;
    if (r->max_doubt.is_infinite()) ++s.infinite_max_doubt;
  }
  s.mean_theta /= static_cast<double>(thetas.size());
  std::sort(thetas.begin(), thetas.end());
  const std::size_t mid = thetas.size() / 2;
  s.median_theta =
      (thetas.size() % 2 == 1) ? thetas[mid] : (thetas[mid - 1] + thetas[mid]) / 2.0;
  return s;
}

}  // namespace detail

/// Side-by-side doubt statistics over the ids both models scored.
inline ComparisonSummary compare_models(const std::vector<ScoreReport>& a,
                                        const std::vector<ScoreReport>& b) {
  std::unordered_map<std::string, const ScoreReport*> index_b;
  for (const ScoreReport& r : b) {
    if (!index_b.emplace(r.id, &r).second) {
      throw std::invalid_argument("compare_models: duplicate id \"" + r.id + "\" in second list");
    }
  }
  std::unordered_map<std::string, const ScoreReport*> index_a;
  for (const ScoreReport& r : a) {
    if (!index_a.emplace(r.id, &r).second) {
      throw std::invalid_argument("compare_models: duplicate id \"" + r.id + "\" in first list");
    }
  }

  ComparisonSummary summary;
  std::vector<const ScoreReport*> matched_a;
  std::vector<const ScoreReport*> matched_b;
  double wins = 0.0;
  for (const ScoreReport& ra : a) {
    const auto it = index_b.find(ra.id);
    if (it == index_b.end()) {
      summary.missing_in_b.push_back(ra.id);
      continue;
    }
    matched_a.push_back(&ra);
    matched_b.push_back(it->second);
    if (ra.theta < it->second->theta) {
      wins += 1.0;
    } else if (ra.theta == it->second->theta) {
      wins += 0.5;
    }
  }
  for (const ScoreReport& rb : b) {
    if (!index_a.contains(rb.id)) summary.missing_in_a.push_back(rb.id);
  }
  std::sort(summary.missing_in_a.begin(), summary.missing_in_a.end());
  std::sort(summary.missing_in_b.begin(), summary.missing_in_b.end());

  if (matched_a.empty()) {
    throw std::invalid_argument("compare_models: the id sets are disjoint");
  }
  summary.common_count = matched_a.size();
  summary.a = detail::summarize(matched_a);
  summary.b = detail::summarize(matched_b);
  summary.a_win_fraction = wins / static_cast<double>(matched_a.size());
  return summary;
}

inline std::string comparison_to_json(const ComparisonSummary& s) {
  auto append_model = [](std::string& out, const ModelSummary& m) {
    out += "{\"mean_theta\":";
    append_number_token(out, m.mean_theta);
    out += ",\"median_theta\":";
    append_number_token(out, m.median_theta);
    out += ",\"infinite_max_doubt\":";
    out += std::to_string(m.infinite_max_doubt);
    out += '}';
  };
  auto append_ids = [](std::string& out, const std::vector<std::string>& ids) {
    out += '[';
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (i) out += ',';
      append_json_string(out, ids[i]);
    }
    out += ']';
  };
  std::string out = "{\"common_count\":";
  out += std::to_string(s.common_count);
  out += ",\"missing_in_a\":";
  append_ids(out, s.missing_in_a);
  out += ",\"missing_in_b\":";
  append_ids(out, s.missing_in_b);
  out += ",\"a\":";
  append_model(out, s.a);
  out += ",\"b\":";
  append_model(out, s.b);
  out += ",\"a_win_fraction\":";
  append_number_token(out, s.a_win_fraction);
  out += '}';
  return out;
}

}  // namespace doubt
