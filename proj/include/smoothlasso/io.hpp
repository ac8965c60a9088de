#pragma once

// File formats.
//
// Dataset CSV (UTF-8, LF line endings, values at 17 significant digits):
//
//   kind,index,time,c0,c1,...,c{m-1}        m = max(n, p)
//   x,<i>,,<x_i1>,...,<x_ip>                one line per design row
//   y,<r>,<t_r>,<y_1(t_r)>,...,<y_n(t_r)>   one line per time-point
//   beta,<r>,<t_r>,<b_1(t_r)>,...,<b_p(t_r)>  optional truth columns
//
// Rows carry exactly their own number of values; a short row or an empty cell
// is a parse error.
//
// Report CSV header: estimator,model,sigma,n,p,metric,mean,sd,runs

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "smoothlasso/error.hpp"
#include "smoothlasso/estimators.hpp"
#include "smoothlasso/simulation.hpp"

namespace smoothlasso {

inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline Error parse_error(std::size_t line, const std::string& reason) {
  return Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + reason);
}

inline double parse_double(std::string_view cell, std::size_t line) {
  if (cell.empty()) throw parse_error(line, "missing value");
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw parse_error(line, "not a number: '" + std::string(cell) + "'");
  }
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "line " + std::to_string(line) + ": non-finite value");
  return v;
}

inline long long parse_int(std::string_view cell, std::size_t line) {
  long long v = 0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw parse_error(line, "not an integer: '" + std::string(cell) + "'");
  }
  return v;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace detail

inline std::string dataset_to_csv(const TimeCourseDataset& d) {
  d.validate();
  const Index n = d.n(), p = d.p(), N = d.time_points();
  std::string out = "kind,index,time";
  for (Index c = 0; c < std::max(n, p); ++c) out += ",c" + std::to_string(c);
  out += '\n';
  for (Index i = 0; i < n; ++i) {
    out += "x," + std::to_string(i) + ",";
    for (Index j = 0; j < p; ++j) out += "," + format_double(d.X(i, j));
    out += '\n';
  }
  for (Index r = 0; r < N; ++r) {
    out += "y," + std::to_string(r) + "," + format_double(d.times(r));
    for (Index i = 0; i < n; ++i) out += "," + format_double(d.Y(i, r));
    out += '\n';
  }
  if (d.truth) {
    for (Index r = 0; r < N; ++r) {
      out += "beta," + std::to_string(r) + "," + format_double(d.times(r));
      for (Index j = 0; j < p; ++j) out += "," + format_double((*d.truth)(j, r));
      out += '\n';
    }
  }
  return out;
}

inline void save_dataset(const TimeCourseDataset& d, const std::string& path) {
  auto out = detail::open_out(path);
  out << dataset_to_csv(d);
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

inline TimeCourseDataset parse_dataset(const std::string& text) {
  const std::vector<std::string> lines = detail::lines_of(text);
  if (lines.empty()) throw detail::parse_error(1, "empty file");
  {
    const auto header = detail::split_csv(lines[0]);
    if (header.size() < 3 || header[0] != "kind" || header[1] != "index" || header[2] != "time") {
      throw detail::parse_error(1, "header must start with kind,index,time");
    }
  }
  std::map<long long, std::vector<double>> xs;
  struct Column {
    double time;
    std::vector<double> values;
    std::size_t line;
  };
  std::map<long long, Column> ys, betas;
  std::optional<std::size_t> p_width;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    const std::size_t lineno = k + 1;
    if (lines[k].empty()) continue;
    const auto cells = detail::split_csv(lines[k]);
    if (cells.size() < 4) throw detail::parse_error(lineno, "row has no values");
    const std::string_view kind = cells[0];
    const long long idx = detail::parse_int(cells[1], lineno);
    std::vector<double> values;
    for (std::size_t c = 3; c < cells.size(); ++c) values.push_back(detail::parse_double(cells[c], lineno));
    if (kind == "x") {
      if (!cells[2].empty()) throw detail::parse_error(lineno, "design rows carry no time");
      if (p_width && *p_width != values.size()) throw detail::parse_error(lineno, "design row has the wrong length");
      p_width = values.size();
      if (!xs.emplace(idx, std::move(values)).second) throw detail::parse_error(lineno, "duplicate design row");
    } else if (kind == "y" || kind == "beta") {
      const double t = detail::parse_double(cells[2], lineno);
      auto& target = kind == "y" ? ys : betas;
      if (!target.emplace(idx, Column{t, std::move(values), lineno}).second) {
        throw detail::parse_error(lineno, "duplicate time index");
      }
    } else {
      throw detail::parse_error(lineno, "unknown row kind '" + std::string(kind) + "'");
    }
  }
  if (xs.empty() || ys.empty()) throw Error(ErrorCode::DimensionMismatch, "dataset needs x and y rows");
  const Index n = static_cast<Index>(xs.size());
  const Index p = static_cast<Index>(*p_width);
  const Index N = static_cast<Index>(ys.size());

  TimeCourseDataset d;
  d.X.resize(n, p);
  Index i = 0;
  for (const auto& [idx, row] : xs) {
    if (idx != i) throw Error(ErrorCode::DimensionMismatch, "design row indices must be 0..n-1");
    for (Index j = 0; j < p; ++j) d.X(i, j) = row[static_cast<std::size_t>(j)];
    ++i;
  }
  d.Y.resize(n, N);
  d.times.resize(N);
  Index r = 0;
  for (const auto& [idx, entry] : ys) {
    if (idx != r) throw Error(ErrorCode::DimensionMismatch, "response indices must be 0..N-1");
    if (static_cast<Index>(entry.values.size()) != n) {
      throw detail::parse_error(entry.line, "response row must have " + std::to_string(n) + " values");
    }
    d.times(r) = entry.time;
    for (Index k = 0; k < n; ++k) d.Y(k, r) = entry.values[static_cast<std::size_t>(k)];
    ++r;
  }
  for (Index s = 1; s < N; ++s) {
    if (!(d.times(s) > d.times(s - 1))) throw Error(ErrorCode::DimensionMismatch, "times must be increasing");
  }
  if (!betas.empty()) {
    if (static_cast<Index>(betas.size()) != N) throw Error(ErrorCode::DimensionMismatch, "truth must cover every time");
    Matrix B(p, N);
    r = 0;
    for (const auto& [idx, entry] : betas) {
      if (static_cast<Index>(entry.values.size()) != p) {
        throw detail::parse_error(entry.line, "truth row must have " + std::to_string(p) + " values");
      }
      if (idx != r || entry.time != d.times(r)) {
        throw Error(ErrorCode::DimensionMismatch, "truth row " + std::to_string(idx) + " is inconsistent");
      }
      for (Index j = 0; j < p; ++j) B(j, r) = entry.values[static_cast<std::size_t>(j)];
      ++r;
    }
    d.truth = std::move(B);
    d.truth_intercepts = Vector::Zero(N);
  }
  d.generator_id = "file";
  return d;
}

inline TimeCourseDataset load_dataset(const std::string& path) { return parse_dataset(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Reports

struct ReportRow {
  int estimator = 0;
  int model = 0;
  double sigma = 0.0;
  Index n = 0;
  Index p = 0;
  std::string metric;
  double mean = 0.0;
  std::optional<double> sd;
  std::size_t runs = 0;

  bool operator==(const ReportRow&) const = default;
};

inline constexpr std::string_view kReportHeader = "estimator,model,sigma,n,p,metric,mean,sd,runs";

inline std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::string out(kReportHeader);
  out += '\n';
  for (const ReportRow& r : rows) {
    out += std::to_string(r.estimator) + "," + std::to_string(r.model) + "," + format_double(r.sigma) + "," +
           std::to_string(r.n) + "," + std::to_string(r.p) + "," + r.metric + "," + format_double(r.mean) + "," +
           (r.sd ? format_double(*r.sd) : std::string()) + "," + std::to_string(r.runs) + "\n";
  }
  return out;
}

inline std::vector<ReportRow> parse_report(const std::string& text) {
  const auto lines = detail::lines_of(text);
  if (lines.empty() || lines[0] != kReportHeader) throw detail::parse_error(1, "unexpected report header");
  std::vector<ReportRow> rows;
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const auto c = detail::split_csv(lines[k]);
    if (c.size() != 9) throw detail::parse_error(k + 1, "expected 9 cells");
    ReportRow r;
    r.estimator = static_cast<int>(detail::parse_int(c[0], k + 1));
    r.model = static_cast<int>(detail::parse_int(c[1], k + 1));
    r.sigma = detail::parse_double(c[2], k + 1);
    r.n = detail::parse_int(c[3], k + 1);
    r.p = detail::parse_int(c[4], k + 1);
    r.metric = std::string(c[5]);
    r.mean = detail::parse_double(c[6], k + 1);
    if (!c[7].empty()) r.sd = detail::parse_double(c[7], k + 1);
    r.runs = static_cast<std::size_t>(detail::parse_int(c[8], k + 1));
    rows.push_back(std::move(r));
  }
  return rows;
}

/// Results table: one block per (model, n, p,
/// sigma); rows are estimators, columns MSE_beta, MSE_P, MSize, FP as "mean (sd)".
inline std::string report_to_table(const std::vector<ReportRow>& rows) {
  using Key = std::tuple<int, Index, Index, double>;
  std::map<Key, std::map<int, std::map<std::string, const ReportRow*>>> blocks;
  for (const ReportRow& r : rows) blocks[{r.model, r.n, r.p, r.sigma}][r.estimator][r.metric] = &r;
  const std::vector<std::pair<std::string, std::string>> columns{
      {"mse_beta", "MSE_beta"}, {"mse_pred", "MSE_P"}, {"msize", "MSize"}, {"fp", "FP"}};
  std::ostringstream out;
  for (const auto& [key, by_estimator] : blocks) {
    const auto& [model, n, p, sigma] = key;
    out << "Model " << model << ", n = " << n << ", p = " << p << ", sigma = " << sigma << "\n";
    out << std::left << std::setw(6) << "est";
    for (const auto& col : columns) out << std::setw(18) << col.second;
    out << "\n";
    for (const auto& [est, metrics] : by_estimator) {
      out << std::setw(6) << (std::to_string(est) + ".");
      for (const auto& col : columns) {
        auto it = metrics.find(col.first);
        std::string cell = "-";
        if (it != metrics.end()) {
          char buf[64];
          if (it->second->sd) {
            std::snprintf(buf, sizeof(buf), "%.2f (%.2f)", it->second->mean, *it->second->sd);
          } else {
            std::snprintf(buf, sizeof(buf), "%.2f", it->second->mean);
          }
          cell = buf;
        }
        out << std::setw(18) << cell;
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

enum class ReportFormat { Csv, Table };

inline void emit_report(const std::vector<ReportRow>& rows, const std::string& path, ReportFormat format) {
  auto out = detail::open_out(path);
  out << (format == ReportFormat::Csv ? report_to_csv(rows) : report_to_table(rows));
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

inline std::vector<ReportRow> load_report(const std::string& path) { return parse_report(detail::read_file(path)); }

// ---------------------------------------------------------------------------
// Tuned parameters (JSON) and fitted coefficients (CSV)

inline nlohmann::json tuned_to_json(const EstimatorSpec& spec, const TunedParams& tuned) {
  nlohmann::json j;
  j["estimator"] = spec.id;
  j["gamma"] = spec.gamma;
  j["kernel"] = std::string(kernel_name(spec.kernel));
  auto& arr = j["time_points"] = nlohmann::json::array();
  for (const StageParams& s : tuned.per_time) {
    nlohmann::json e;
    e["lambda"] = s.lambda;
    e["bandwidth"] = s.bandwidth;
    if (s.init_lambda) e["init_lambda"] = *s.init_lambda;
    if (s.init_bandwidth) e["init_bandwidth"] = *s.init_bandwidth;
    if (s.mid_lambda) e["mid_lambda"] = *s.mid_lambda;
    e["validation_loss"] = s.validation_loss;
    if (s.init_lambda || s.init_bandwidth) e["init_validation_loss"] = s.init_validation_loss;
    arr.push_back(std::move(e));
  }
  return j;
}

inline std::pair<EstimatorSpec, TunedParams> tuned_from_json(const nlohmann::json& j) {
  try {
    EstimatorSpec spec;
    spec.id = j.at("estimator").get<int>();
    spec.gamma = j.value("gamma", 1.0);
    spec.kernel = parse_kernel(j.value("kernel", std::string("gaussian")));
    TunedParams tuned;
    for (const auto& e : j.at("time_points")) {
      StageParams s;
      s.lambda = e.at("lambda").get<double>();
      s.bandwidth = e.value("bandwidth", 0.0);
      if (e.contains("init_lambda")) s.init_lambda = e["init_lambda"].get<double>();
      if (e.contains("init_bandwidth")) s.init_bandwidth = e["init_bandwidth"].get<double>();
      if (e.contains("mid_lambda")) s.mid_lambda = e["mid_lambda"].get<double>();
      s.validation_loss = e.value("validation_loss", 0.0);
      s.init_validation_loss = e.value("init_validation_loss", 0.0);
      tuned.per_time.push_back(s);
    }
    return {spec, tuned};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("tuned parameters: ") + e.what());
  }
}

/// estimator,index,time,intercept,c0..c{p-1}: the fitted regression functions
/// on the raw covariate scale, one line per (estimator, time-point).
inline std::string coefficients_to_csv(const std::vector<TimeCourseFit>& fits, const Vector& times) {
  Index p = 0;
  for (const TimeCourseFit& f : fits) {
    if (!f.fits.empty()) p = f.fits.front().coefficients.size();
  }
  std::string out = "estimator,index,time,intercept";
  for (Index j = 0; j < p; ++j) out += ",c" + std::to_string(j);
  out += '\n';
  for (const TimeCourseFit& fit : fits) {
    for (Index r = 0; r < fit.time_points(); ++r) {
      const Vector b = fit.raw_coefficients(r);
      out += std::to_string(fit.spec.id) + "," + std::to_string(r) + "," + format_double(times(r)) + "," +
             format_double(fit.raw_intercept(r));
      for (Index j = 0; j < b.size(); ++j) out += "," + format_double(b(j));
      out += '\n';
    }
  }
  return out;
}

}  // namespace smoothlasso
