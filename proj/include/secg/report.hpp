#pragma once

// Benchmark rows (Rec, PRD, SR, CR^Hf, QS, PRDN) as CSV or an aligned table,
// with mean and standard deviation rows.

#include <cmath>
#include <cstddef>
#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>
#include <string>
#include <vector>

#include "secg/metrics.hpp"

namespace secg {

struct BenchmarkRow {
  std::string record;
  double prd = 0.0;
  double sr = 0.0;
  double cr = 0.0;
  double cr_hf = 0.0;
  double qs = 0.0;
  double prdn = 0.0;
  double prd0 = 0.0;
  double delta = 0.0;
  double seconds = 0.0;

  static BenchmarkRow from(const std::string& record, const MetricsReport& m, double prd0, double delta,
                           double seconds) {
    return {record, m.prd, m.sr, m.cr, m.cr_hf, m.qs, m.prdn, prd0, delta, seconds};
  }
};

/// Mean and population standard deviation per numeric column.
inline std::pair<BenchmarkRow, BenchmarkRow> summarize(const std::vector<BenchmarkRow>& rows) {
  BenchmarkRow mean{"mean"}, sd{"std"};
  if (rows.empty()) return {mean, sd};
  const double n = static_cast<double>(rows.size());
  auto col = [&](double BenchmarkRow::*f) {
    double s = 0.0;
    for (const auto& r : rows) s += r.*f;
    const double m = s / n;
    double v = 0.0;
    for (const auto& r : rows) v += (r.*f - m) * (r.*f - m);
    mean.*f = m;
    sd.*f = std::sqrt(v / n);
  };
  for (auto f : {&BenchmarkRow::prd, &BenchmarkRow::sr, &BenchmarkRow::cr, &BenchmarkRow::cr_hf, &BenchmarkRow::qs,
                 &BenchmarkRow::prdn, &BenchmarkRow::prd0, &BenchmarkRow::delta, &BenchmarkRow::seconds})
    col(f);
  return {mean, sd};
}

inline constexpr const char* kBenchmarkCsvHeader = "record,prd,sr,cr,cr_hf,qs,prdn,prd0,delta,seconds";

inline void write_csv_row(std::ostream& os, const BenchmarkRow& r) {
  std::ostringstream s;
  s << std::setprecision(10) << r.record << ',' << r.prd << ',' << r.sr << ',' << r.cr << ',' << r.cr_hf << ','
    << r.qs << ',' << r.prdn << ',' << r.prd0 << ',' << r.delta << ',' << r.seconds << '\n';
  os << s.str();
}

inline void write_csv(std::ostream& os, const std::vector<BenchmarkRow>& rows, bool with_summary = true) {
  os << kBenchmarkCsvHeader << '\n';
  for (const auto& r : rows) write_csv_row(os, r);
  if (with_summary && !rows.empty()) {
    const auto [m, s] = summarize(rows);
    write_csv_row(os, m);
    write_csv_row(os, s);
  }
}

/// Fixed-width table with the column set Rec | PRD | SR | CR^Hf | QS | PRDN.
inline void write_table(std::ostream& os, const std::vector<BenchmarkRow>& rows, bool with_summary = true) {
  auto line = [&](const BenchmarkRow& r) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-8s %7.2f %7.2f %7.2f %7.2f %7.2f\n", r.record.c_str(), r.prd, r.sr, r.cr_hf,
                  r.qs, r.prdn);
    os << buf;
  };
  char head[160];
  std::snprintf(head, sizeof head, "%-8s %7s %7s %7s %7s %7s\n", "Rec", "PRD", "SR", "CR^Hf", "QS", "PRDN");
  os << head;
  for (const auto& r : rows) line(r);
  if (with_summary && !rows.empty()) {
    os << std::string(48, '-') << '\n';
    const auto [m, s] = summarize(rows);
    line(m);
    line(s);
  }
}

}  // namespace secg
