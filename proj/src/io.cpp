#include "tailrisk/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace tailrisk::io {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t b = 0;
  while (true) {
    const std::size_t e = line.find(',', b);
    std::string_view f = line.substr(b, e == std::string_view::npos ? std::string_view::npos : e - b);
    while (!f.empty() && (f.front() == ' ' || f.front() == '"')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '"' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (e == std::string_view::npos) break;
    b = e + 1;
  }
  return out;
}

template <class Int>
Int parse_int(std::string_view s, std::string_view what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError("cannot parse " + std::string(what) + " '" + std::string(s) + "'");
  return v;
}

// Reads data rows after a header whose first field is "timestamp".
struct CsvRows {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;
};

CsvRows read_rows(std::istream& in, std::string_view source) {
  CsvRows out;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    auto fields = split_fields(line);
    if (!have_header) {
      have_header = true;
      if (fields.front() == "timestamp") {
        for (auto f : fields) out.header.emplace_back(f);
        continue;
      }
    }
    std::vector<std::string> row;
    for (auto f : fields) row.emplace_back(f);
    out.rows.push_back(std::move(row));
    out.line_numbers.push_back(number);
  }
  if (out.rows.empty()) throw DataError(std::string(source) + ": no data rows");
  return out;
}

std::size_t column_of(const CsvRows& csv, std::string_view name, std::string_view source) {
  const auto it = std::find(csv.header.begin(), csv.header.end(), name);
  if (it == csv.header.end()) throw DataError(std::string(source) + ": missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - csv.header.begin());
}

std::string field_of(const CsvRows& csv, std::size_t r, std::size_t c, std::string_view source) {
  if (c >= csv.rows[r].size())
    throw DataError(std::string(source) + ": line " + std::to_string(csv.line_numbers[r]) + " has too few fields");
  return csv.rows[r][c];
}

// Maps consecutive row stamps onto consecutive return indices.
std::size_t first_index(const CsvRows& csv, const ReturnSeries& returns, std::string_view source) {
  const std::size_t first = return_index(returns, parse_timestamp(csv.rows.front().front()));
  if (first + csv.rows.size() > returns.size())
    throw DataError(std::string(source) + ": rows run past the last return");
  for (std::size_t r = 0; r < csv.rows.size(); ++r)
    if (parse_timestamp(csv.rows[r].front()) != returns.timestamps()[first + r])
      throw DataError(std::string(source) + ": line " + std::to_string(csv.line_numbers[r]) +
                      " breaks the return timestamps");
  return first;
}

}  // namespace

GapPolicy parse_gap_policy(std::string_view name) {
  if (name == "error") return GapPolicy::Error;
  if (name == "ffill") return GapPolicy::Ffill;
  throw ConfigError("unknown gap policy '" + std::string(name) + "' (expected error or ffill)");
}

std::int64_t parse_timestamp(std::string_view s) {
  if (s.empty()) throw DataError("empty timestamp");
  const bool numeric = std::all_of(s.begin(), s.end(), [](char c) { return (c >= '0' && c <= '9') || c == '-'; }) &&
                       s.find('-', 1) == std::string_view::npos;
  std::int64_t seconds = 0;
  if (numeric) {
    seconds = parse_int<std::int64_t>(s, "timestamp");
  } else {
    // YYYY-MM-DD[T ]HH:MM[:SS][Z]
    if (s.size() < 16 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':')
      throw DataError("cannot parse timestamp '" + std::string(s) + "'");
    const int y = parse_int<int>(s.substr(0, 4), "year");
    const unsigned mo = parse_int<unsigned>(s.substr(5, 2), "month");
    const unsigned d = parse_int<unsigned>(s.substr(8, 2), "day");
    const int hh = parse_int<int>(s.substr(11, 2), "hour");
    const int mm = parse_int<int>(s.substr(14, 2), "minute");
    int ss = 0;
    std::string_view rest = s.substr(16);
    if (!rest.empty() && rest.front() == ':') {
      ss = parse_int<int>(rest.substr(1, 2), "second");
      rest = rest.substr(std::min<std::size_t>(3, rest.size()));
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00"))
      throw DataError("timestamp '" + std::string(s) + "' is not UTC");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw DataError("invalid timestamp '" + std::string(s) + "'");
    const auto days = std::chrono::sys_days(ymd).time_since_epoch().count();
    seconds = static_cast<std::int64_t>(days) * 86400 + hh * 3600 + mm * 60 + ss;
  }
  if (seconds % 3600 != 0) throw DataError("timestamp '" + std::string(s) + "' is not on the hour");
  return seconds / 3600;
}

std::string format_timestamp(std::int64_t hour) {
  const std::int64_t days = hour >= 0 ? hour / 24 : -((-hour + 23) / 24);
  const int hh = static_cast<int>(hour - days * 24);
  const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:00:00Z", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), hh);
  return buf;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw DataError("cannot parse number '" + std::string(s) + "'");
  return v;
}

PriceSeries read_prices_csv(std::istream& in, GapPolicy gaps) {
  const CsvRows csv = read_rows(in, "prices");
  const std::size_t close_col = csv.header.empty() ? 1 : column_of(csv, "close", "prices");
  std::vector<std::int64_t> hours;
  std::vector<double> closes;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    const std::int64_t h = parse_timestamp(csv.rows[r].front());
    const double c = parse_double(field_of(csv, r, close_col, "prices"));
    if (!hours.empty()) {
      const std::int64_t step = h - hours.back();
      if (step <= 0)
        throw DataError("prices: timestamp " + format_timestamp(h) + " on line " +
                        std::to_string(csv.line_numbers[r]) + " is not increasing");
      if (step > 1) {
        if (gaps == GapPolicy::Error)
          throw DataError("prices: " + std::to_string(step - 1) + " missing hour(s) before " + format_timestamp(h));
        const double last = closes.back();
        for (std::int64_t k = hours.back() + 1; k < h; ++k) {
          hours.push_back(k);
          closes.push_back(last);
        }
      }
    }
    hours.push_back(h);
    closes.push_back(c);
  }
  return PriceSeries(std::move(hours), std::move(closes));
}

PriceSeries read_prices_csv(const std::filesystem::path& path, GapPolicy gaps) {
  auto in = open_input(path);
  return read_prices_csv(in, gaps);
}

void write_prices_csv(const PriceSeries& prices, std::ostream& out) {
  out << "timestamp,close\n";
  for (std::size_t i = 0; i < prices.size(); ++i)
    out << format_timestamp(prices.timestamps()[i]) << ',' << format_double(prices.closes()[i]) << '\n';
}

void write_targets_csv(const ReturnSeries& returns, const TvarSeries& tvar, const LabelSeries& labels,
                       std::ostream& out) {
  if (tvar.end() > returns.size()) throw DataError("targets run past the returns");
  out << "timestamp,tvar_upper,tvar_lower,label\n";
  for (std::size_t t = tvar.first; t < tvar.end(); ++t) {
    out << format_timestamp(returns.timestamps()[t]) << ',' << format_double(tvar.upper_at(t)) << ','
        << format_double(tvar.lower_at(t)) << ',';
    if (labels.covers(t)) out << labels.at_return(t);
    out << '\n';
  }
}

TargetTable read_targets_csv(std::istream& in, const ReturnSeries& returns) {
  const CsvRows csv = read_rows(in, "targets");
  const std::size_t cu = column_of(csv, "tvar_upper", "targets"), cl = column_of(csv, "tvar_lower", "targets"),
                    cy = column_of(csv, "label", "targets");
  TargetTable out;
  out.tvar.first = first_index(csv, returns, "targets");
  out.labels.first = out.tvar.first;
  for (std::size_t r = 0; r < csv.rows.size(); ++r) {
    out.tvar.upper.push_back(parse_double(field_of(csv, r, cu, "targets")));
    out.tvar.lower.push_back(parse_double(field_of(csv, r, cl, "targets")));
    const std::string y = cy < csv.rows[r].size() ? csv.rows[r][cy] : std::string();
    if (y.empty()) {
      if (r != out.labels.values.size()) throw DataError("targets: labels must be contiguous");
      continue;
    }
    const int label = parse_int<int>(y, "label");
    if (label < 0 || label > 2) throw DataError("targets: label " + y + " outside {0,1,2}");
    out.labels.values.push_back(label);
  }
  return out;
}

void write_series_csv(const Aligned<double>& series, const ReturnSeries& returns, std::string_view column,
                      std::ostream& out) {
  if (series.end() > returns.size()) throw DataError("series runs past the returns");
  out << "timestamp," << column << '\n';
  for (std::size_t t = series.first; t < series.end(); ++t)
    out << format_timestamp(returns.timestamps()[t]) << ',' << format_double(series.at_return(t)) << '\n';
}

Aligned<double> read_series_csv(std::istream& in, const ReturnSeries& returns, std::string_view column) {
  const CsvRows csv = read_rows(in, column);
  const std::size_t c = column_of(csv, column, column);
  Aligned<double> out;
  out.first = first_index(csv, returns, column);
  for (std::size_t r = 0; r < csv.rows.size(); ++r) out.values.push_back(parse_double(field_of(csv, r, c, column)));
  return out;
}

std::size_t return_index(const ReturnSeries& returns, std::int64_t hour) {
  const auto& ts = returns.timestamps();
  const auto it = std::lower_bound(ts.begin(), ts.end(), hour);
  if (it == ts.end() || *it != hour) throw DataError("no return stamped " + format_timestamp(hour));
  return static_cast<std::size_t>(it - ts.begin());
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing file: " + path.string());
  return in;
}

AtomicFile::AtomicFile(std::filesystem::path path) : path_(std::move(path)) {
  partial_ = path_;
  partial_ += ".partial";
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  out_.open(partial_, std::ios::binary | std::ios::trunc);
  if (!out_) throw DataError("cannot write " + partial_.string());
}

void AtomicFile::commit() {
  if (committed_) return;
  out_.close();
  if (!out_) throw DataError("write failed: " + partial_.string());
  std::filesystem::rename(partial_, path_);
  committed_ = true;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  AtomicFile f(path);
  f.stream() << text;
  f.commit();
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a(buf.str());
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

nlohmann::json to_json(const ArmaGarchParams& p) {
  return {{"ar", p.ar}, {"ma", p.ma}, {"omega", p.omega}, {"arch", p.arch}, {"garch", p.garch}};
}

nlohmann::json to_json(const GpdParams& p) {
  return {{"xi", p.xi},
          {"beta", p.beta},
          {"threshold_g", p.threshold_g},
          {"tail_fraction", p.tail_fraction},
          {"exceedances", p.exceedances}};
}

nlohmann::json to_json(const CarlVolParams& p) {
  return {{"phi0", p.phi0}, {"phi1", p.phi1},     {"omega", p.omega},
          {"alpha1", p.alpha1}, {"beta1", p.beta1}, {"mu", p.mu}};
}

ArmaGarchParams arma_garch_from_json(const nlohmann::json& j) {
  try {
    ArmaGarchParams p;
    j.at("ar").get_to(p.ar);
    j.at("ma").get_to(p.ma);
    p.omega = j.at("omega").get<double>();
    j.at("arch").get_to(p.arch);
    j.at("garch").get_to(p.garch);
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("ARMA-GARCH parameters: ") + e.what());
  }
}

GpdParams gpd_from_json(const nlohmann::json& j) {
  try {
    GpdParams p;
    p.xi = j.at("xi").get<double>();
    p.beta = j.at("beta").get<double>();
    p.threshold_g = j.at("threshold_g").get<double>();
    p.tail_fraction = j.at("tail_fraction").get<double>();
    p.exceedances = j.value("exceedances", std::size_t{0});
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("GPD parameters: ") + e.what());
  }
}

CarlVolParams carlvol_from_json(const nlohmann::json& j) {
  try {
    CarlVolParams p;
    p.phi0 = j.at("phi0").get<double>();
    p.phi1 = j.at("phi1").get<double>();
    p.omega = j.at("omega").get<double>();
    p.alpha1 = j.at("alpha1").get<double>();
    p.beta1 = j.at("beta1").get<double>();
    p.mu = j.at("mu").get<double>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("CARL-vol parameters: ") + e.what());
  }
}

}  // namespace tailrisk::io
