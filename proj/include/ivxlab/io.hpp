#pragma once

/// @file
/// CSV ingestion of predictor data and CSV emission of result tables.
///
/// Input files hold one row per date with the dependent series and the
/// predictors observed at that date. Ingestion pairs y from row k+1 with x
/// from row k, so a file of N dates yields at most T = N - 1 observations.

#include "ivxlab/asymptotics.hpp"
#include "ivxlab/breaktests.hpp"
#include "ivxlab/core.hpp"
#include "ivxlab/mc.hpp"

#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ivxlab {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::size_t column(const std::string& name) const {
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == name) return j;
    std::string known;
    for (const auto& h : header) known += (known.empty() ? "" : ", ") + h;
    throw std::invalid_argument("unknown column '" + name + "' (available: " + known + ")");
  }
};

namespace detail {

inline std::string trim_cell(std::string s) {
  const auto not_space = [](unsigned char ch) { return !std::isspace(ch); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
      cell += ch;
    } else if (ch == ',' && !quoted) {
      out.push_back(trim_cell(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  out.push_back(trim_cell(cell));
  return out;
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::string> cells = detail::split_csv_line(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      std::ostringstream os;
      os << "CSV line " << line_no << " has " << cells.size() << " fields, header has " << t.header.size();
      throw std::invalid_argument(os.str());
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw std::invalid_argument("CSV input is empty (a header row is required)");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open CSV file '" + path + "'");
  return parse_csv(in);
}

/// Empty cells and "NA" are missing; anything else must parse completely as a number.
inline std::optional<double> parse_cell(const std::string& cell, std::size_t row, const std::string& column) {
  if (cell.empty() || cell == "NA") return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    std::ostringstream os;
    os << "non-numeric cell '" << cell << "' in column '" << column << "', data row " << row + 1;
    throw std::invalid_argument(os.str());
  }
  return v;
}

struct ColumnMapping {
  std::string y;                       ///< dependent column; ignored in premium mode
  std::vector<std::string> x;
  std::optional<std::string> ret;      ///< premium mode: y = ret - riskfree
  std::optional<std::string> riskfree;
  Intercept intercept = Intercept::stable;

  [[nodiscard]] bool premium() const { return ret.has_value(); }

  void validate() const {
    if (x.empty()) throw std::invalid_argument("column mapping: at least one --x column is required");
    if (ret.has_value() != riskfree.has_value())
      throw std::invalid_argument("column mapping: --return and --riskfree must be given together");
    if (!premium() && y.empty()) throw std::invalid_argument("column mapping: --y is required (or --return/--riskfree)");
  }
};

struct IngestResult {
  Sample sample;
  Index dates = 0;    ///< data rows read
  Index dropped = 0;  ///< (y, lagged x) pairs dropped for a missing field
};

inline IngestResult sample_from_table(const CsvTable& table, const ColumnMapping& map) {
  map.validate();
  const Index p = static_cast<Index>(map.x.size());
  std::vector<std::size_t> xcol;
  for (const auto& name : map.x) xcol.push_back(table.column(name));
  const std::size_t N = table.rows.size();
  std::vector<std::optional<double>> y(N);
  std::vector<std::vector<std::optional<double>>> x(N, std::vector<std::optional<double>>(p));
  const std::size_t ycol = map.premium() ? 0 : table.column(map.y);
  const std::size_t rcol = map.premium() ? table.column(*map.ret) : 0;
  const std::size_t fcol = map.premium() ? table.column(*map.riskfree) : 0;
  for (std::size_t k = 0; k < N; ++k) {
    const auto& row = table.rows[k];
    if (map.premium()) {
      const auto r = parse_cell(row[rcol], k, *map.ret);
      const auto f = parse_cell(row[fcol], k, *map.riskfree);
      if (r && f) y[k] = *r - *f;
    } else {
      y[k] = parse_cell(row[ycol], k, map.y);
    }
    for (Index j = 0; j < p; ++j) x[k][j] = parse_cell(row[xcol[j]], k, map.x[j]);
  }

  std::vector<std::size_t> keep;
  Index dropped = 0;
  for (std::size_t k = 0; k + 1 < N; ++k) {
    bool ok = y[k + 1].has_value();
    for (Index j = 0; j < p && ok; ++j) ok = x[k][j].has_value();
    if (ok)
      keep.push_back(k);
    else
      ++dropped;
  }
  const Index T = static_cast<Index>(keep.size());
  if (T < Sample::min_length(p)) {
    std::ostringstream os;
    os << "only " << T << " usable observations after lagging";
    if (dropped > 0) os << " (" << dropped << " dropped for missing values)";
    os << "; the minimum is 4(p+1) = " << Sample::min_length(p);
    throw std::invalid_argument(os.str());
  }
  Vector yv(T);
  Matrix X(T, p);
  for (Index r = 0; r < T; ++r) {
    const std::size_t k = keep[r];
    yv(r) = *y[k + 1];
    for (Index j = 0; j < p; ++j) X(r, j) = *x[k][j];
  }
  return {Sample(std::move(yv), std::move(X), map.intercept), static_cast<Index>(N), dropped};
}

inline IngestResult ingest_predictor_csv(const std::string& path, const ColumnMapping& map) {
  return sample_from_table(read_csv(path), map);
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes the sample as T + 1 dated rows (columns y, x1..xp) that
/// ingest_predictor_csv maps back to an identical Sample. The first y and the
/// last x are never used and are written as NA.
inline void write_sample_csv(std::ostream& out, const Sample& s) {
  const Index T = s.T(), p = s.p();
  out << "y";
  for (Index j = 0; j < p; ++j) out << ",x" << j + 1;
  out << '\n';
  for (Index k = 0; k <= T; ++k) {
    out << (k == 0 ? std::string("NA") : format_double(s.y()(k - 1)));
    for (Index j = 0; j < p; ++j) out << ',' << (k == T ? std::string("NA") : format_double(s.X()(k, j)));
    out << '\n';
  }
}

inline ColumnMapping sample_csv_mapping(Index p, Intercept intercept) {
  ColumnMapping m;
  m.y = "y";
  for (Index j = 0; j < p; ++j) m.x.push_back("x" + std::to_string(j + 1));
  m.intercept = intercept;
  return m;
}

// Result tables -------------------------------------------------------------

inline void write_test_reports_csv(std::ostream& out, const std::vector<TestReport>& reports) {
  out << "statistic,value,cv,alpha,decision,break_fraction\n";
  for (const auto& r : reports) {
    out << to_string(r.kind) << ',' << format_double(r.value) << ',' << format_double(r.critical_value) << ','
        << format_double(r.alpha) << ',' << (r.reject ? "reject" : "fail-to-reject") << ','
        << (r.break_fraction ? format_double(*r.break_fraction) : std::string()) << '\n';
  }
}

inline void write_cv_table_csv(std::ostream& out, const CriticalValueTable& t) {
  out << "statistic,p,pi1,pi2,alpha,cv,replications,seed,method,discarded,flagged\n";
  for (const auto& [a, c] : t.quantiles) {
    out << t.statistic << ',' << t.p << ',' << format_double(t.pi1) << ',' << format_double(t.pi2) << ','
        << format_double(a) << ',' << format_double(c) << ',' << t.replications << ',' << t.seed << ','
        << to_string(t.method) << ',' << t.discarded << ',' << t.flagged << '\n';
  }
}

inline void write_mc_csv(std::ostream& out, const McTable& table) {
  out << "statistic,c,T,rho,rejection_rate,stderr,B,cv,cv_source,seed\n";
  for (const auto& c : table.cells) {
    out << c.statistic << ',' << format_double(c.c) << ',' << c.T << ',' << format_double(c.rho) << ','
        << format_double(c.rejection_rate) << ',' << format_double(c.stderr_) << ',' << c.B << ','
        << format_double(c.cv) << ',' << c.cv_source << ',' << c.seed << '\n';
  }
}

inline void write_monotone_csv(std::ostream& out, const McTable& table) {
  out << "c,rho,nondecreasing_in_T\n";
  for (const auto& m : table.monotone)
    out << format_double(m.c) << ',' << format_double(m.rho) << ',' << (m.nondecreasing ? "true" : "false") << '\n';
}

inline void write_pc_csv(std::ostream& out, const std::vector<PcRow>& rows) {
  out << "estimator,pi,mean,lo95,hi95\n";
  for (const auto& r : rows)
    out << r.estimator << ',' << format_double(r.pi) << ',' << format_double(r.mean) << ',' << format_double(r.lo95)
        << ',' << format_double(r.hi95) << '\n';
}

}  // namespace ivxlab
