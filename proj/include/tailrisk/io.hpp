#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <json.hpp>
#include <string>
#include <string_view>

#include "tailrisk/econ.hpp"
#include "tailrisk/error.hpp"
#include "tailrisk/timeseries.hpp"

namespace tailrisk::io {

enum class GapPolicy { Error, Ffill };

GapPolicy parse_gap_policy(std::string_view name);

/// ISO-8601 (`2019-01-01T00:00:00Z`, `2019-01-01 00:00:00`) or epoch seconds,
/// returned as epoch hours. Off-the-hour stamps are rejected.
std::int64_t parse_timestamp(std::string_view field);
/// `YYYY-MM-DDTHH:00:00Z`
std::string format_timestamp(std::int64_t hour);

/// Shortest text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view field);

/// `timestamp,close`. Missing hours are an error or forward-filled.
PriceSeries read_prices_csv(std::istream& in, GapPolicy gaps = GapPolicy::Error);
PriceSeries read_prices_csv(const std::filesystem::path& path, GapPolicy gaps = GapPolicy::Error);
void write_prices_csv(const PriceSeries& prices, std::ostream& out);

struct TargetTable {
  TvarSeries tvar;
  LabelSeries labels;
};

/// `timestamp,tvar_upper,tvar_lower,label`, one row per return the targets cover.
void write_targets_csv(const ReturnSeries& returns, const TvarSeries& tvar, const LabelSeries& labels,
                       std::ostream& out);
TargetTable read_targets_csv(std::istream& in, const ReturnSeries& returns);

/// `timestamp,<column>` with rows stamped by the return each value applies to.
void write_series_csv(const Aligned<double>& series, const ReturnSeries& returns, std::string_view column,
                      std::ostream& out);
Aligned<double> read_series_csv(std::istream& in, const ReturnSeries& returns, std::string_view column);

/// `timestamp,p`
inline void write_probability_csv(const ProbabilitySeries& p, const ReturnSeries& returns, std::ostream& out) {
  write_series_csv(p, returns, "p", out);
}
inline ProbabilitySeries read_probability_csv(std::istream& in, const ReturnSeries& returns) {
  return read_series_csv(in, returns, "p");
}

/// Index of the return stamped `hour`; DataError when there is none.
std::size_t return_index(const ReturnSeries& returns, std::int64_t hour);

/// Opens an input file or throws DataError naming it.
std::ifstream open_input(const std::filesystem::path& path);

/// Writes to `<path>.partial` and renames onto `path` on commit(). An
/// uncommitted file keeps its `.partial` name.
class AtomicFile {
 public:
  explicit AtomicFile(std::filesystem::path path);
  AtomicFile(const AtomicFile&) = delete;
  AtomicFile& operator=(const AtomicFile&) = delete;

  std::ostream& stream() noexcept { return out_; }
  const std::filesystem::path& partial_path() const noexcept { return partial_; }
  void commit();

 private:
  std::filesystem::path path_;
  std::filesystem::path partial_;
  std::ofstream out_;
  bool committed_ = false;
};

/// Writes `text` through an AtomicFile.
void write_text_file(const std::filesystem::path& path, std::string_view text);

std::uint64_t fnv1a(std::string_view bytes);
std::uint64_t fnv1a_file(const std::filesystem::path& path);
std::string hex64(std::uint64_t value);

// Parameter containers as JSON objects keyed by field name.
nlohmann::json to_json(const ArmaGarchParams& p);
nlohmann::json to_json(const GpdParams& p);
nlohmann::json to_json(const CarlVolParams& p);
ArmaGarchParams arma_garch_from_json(const nlohmann::json& j);
GpdParams gpd_from_json(const nlohmann::json& j);
CarlVolParams carlvol_from_json(const nlohmann::json& j);

}  // namespace tailrisk::io
