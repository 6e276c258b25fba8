#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "edlab/data.hpp"
#include "edlab/errors.hpp"

namespace edlab::data {

namespace {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) -
         719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::int64_t parse_iso8601(const std::string& text) {
  int y, mo, d, h, mi, s;
  char sep;
  if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi,
                  &s) != 7 ||
      (sep != 'T' && sep != ' '))
    throw InvalidParams("timestamp not ISO-8601 (YYYY-MM-DDTHH:MM:SS): " + text);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
      s < 0 || s > 60)
    throw InvalidParams("timestamp field out of range: " + text);
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lld", y, m, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem % 3600) / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

bool is_weekend(std::int64_t t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) days -= 1;
  const int dow = static_cast<int>(((days % 7) + 7 + 4) % 7);  // 0 = Sunday
  return dow == 0 || dow == 6;
}

int hour_of_day(std::int64_t t) {
  std::int64_t rem = t % 86400;
  if (rem < 0) rem += 86400;
  return static_cast<int>(rem / 3600);
}

LoadSeries series_from_csv_text(const std::string& text, bool allow_gaps) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;

  if (!std::getline(in, line)) throw ParseError(1, "empty file");
  ++lineno;
  std::vector<std::string> header;
  {
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  if (header.size() < 2 || header[0] != "timestamp" || header[1] != "load_mw")
    throw ParseError(1, "header must start with timestamp,load_mw");
  const int n_bus_cols = static_cast<int>(header.size()) - 2;

  LoadSeries s;
  std::vector<std::vector<double>> bus_cols(n_bus_cols);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    if (!std::getline(ls, cell, ',')) throw ParseError(lineno, "missing timestamp");
    std::int64_t ts;
    try {
      ts = parse_iso8601(cell);
    } catch (const Error& e) {
      throw ParseError(lineno, e.what());
    }
    if (!s.timestamps.empty()) {
      const std::int64_t prev = s.timestamps.back();
      if (ts <= prev)
        throw NonMonotoneTimestamps("timestamps not strictly increasing at line " +
                                    std::to_string(lineno));
      if (ts - prev > 3600 && !allow_gaps)
        throw GapError("gap before " + format_iso8601(ts) + " at line " +
                       std::to_string(lineno));
    }
    if (!std::getline(ls, cell, ',')) throw ParseError(lineno, "missing load_mw");
    double load;
    try {
      std::size_t pos = 0;
      load = std::stod(cell, &pos);
      if (pos != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ParseError(lineno, "load_mw is not a number: " + cell);
    }
    if (load < 0.0)
      throw NegativeLoad("negative load at line " + std::to_string(lineno));
    for (int c = 0; c < n_bus_cols; ++c) {
      if (!std::getline(ls, cell, ','))
        throw ParseError(lineno, "missing bus column " + std::to_string(c));
      try {
        bus_cols[c].push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(lineno, "bus column is not a number: " + cell);
      }
    }
    s.timestamps.push_back(ts);
    s.total_load.push_back(load);
  }
  if (n_bus_cols > 0) {
    s.per_bus.resize(static_cast<Eigen::Index>(s.size()), n_bus_cols);
    for (int c = 0; c < n_bus_cols; ++c)
      for (std::size_t r = 0; r < s.size(); ++r)
        s.per_bus(static_cast<Eigen::Index>(r), c) = bus_cols[c][r];
  }
  return s;
}

LoadSeries load_csv(const std::string& path, bool allow_gaps) {
  std::ifstream in(path);
  if (!in) throw InvalidParams("cannot open CSV file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return series_from_csv_text(ss.str(), allow_gaps);
}

std::string series_to_csv_text(const LoadSeries& series) {
  std::ostringstream out;
  out << "timestamp,load_mw";
  for (Eigen::Index c = 0; c < series.per_bus.cols(); ++c) out << ",bus_" << c;
  out << "\n";
  char buf[64];
  for (std::size_t i = 0; i < series.size(); ++i) {
    out << format_iso8601(series.timestamps[i]);
    std::snprintf(buf, sizeof(buf), "%.12g", series.total_load[i]);
    out << ',' << buf;
    for (Eigen::Index c = 0; c < series.per_bus.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.12g",
                    series.per_bus(static_cast<Eigen::Index>(i), c));
      out << ',' << buf;
    }
    out << "\n";
  }
  return out.str();
}

void write_csv(const LoadSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidParams("cannot open CSV file for writing: " + path);
  out << series_to_csv_text(series);
}

}  // namespace edlab::data
