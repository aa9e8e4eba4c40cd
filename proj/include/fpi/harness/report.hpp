#pragma once

// Bundle files: per-run CSV traces, SVG plots and the hashed manifest.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace fpi::harness {

/// One run's numeric table. The first column is always "n".
struct TraceTable {
  std::string id;
  std::string scheme;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of `name` in columns, if present.
  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const;
};

/// "%.17g": round-trips every double exactly.
[[nodiscard]] std::string format_number(double x);

[[nodiscard]] std::string to_csv(const TraceTable& table);
/// Throws Error(io) on malformed input.
[[nodiscard]] TraceTable parse_csv(std::string_view text, std::string id, std::string scheme);

/// Log-scale plot of each table's "error" column against n, one polyline per
/// table. Layout depends only on the data.
[[nodiscard]] std::string render_svg(std::string_view title, std::span<const TraceTable> tables);

[[nodiscard]] std::string sha256_hex(std::string_view data);

/// Writes `data` to dir/relative, creating directories. Throws Error(io).
void write_file(const std::filesystem::path& dir, const std::string& relative,
                std::string_view data);
[[nodiscard]] std::string read_file(const std::filesystem::path& path);

struct Bundle {
  std::filesystem::path dir;
  nlohmann::json manifest;
  nlohmann::json summary;
  std::vector<TraceTable> traces;
};

/// Reads a bundle written by `run` and checks every manifest hash.
[[nodiscard]] Bundle load_bundle(const std::filesystem::path& dir);

enum class ReportFormat { csv, json, svg };

[[nodiscard]] std::optional<ReportFormat> parse_report_format(std::string_view tag);

/// Writes the requested view of the bundle under dir/report/ and returns the
/// written paths. csv: one row per run; json: the manifest; svg: one plot per
/// problem and schedule.
std::vector<std::filesystem::path> emit_report(const Bundle& bundle, ReportFormat format);

}  // namespace fpi::harness
