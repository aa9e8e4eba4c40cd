#include "fpi/harness/report.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <openssl/evp.h>

#include "fpi/error.hpp"

namespace fpi::harness {

namespace fs = std::filesystem;

std::optional<std::size_t> TraceTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  return std::nullopt;
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string to_csv(const TraceTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      // n is an index; print it without an exponent.
      out += i == 0 ? std::to_string(static_cast<long long>(row[i])) : format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view field, std::size_t line) {
  const std::string s(field);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  // strtod flags subnormals with ERANGE too; only overflow is an error here.
  if (s.empty() || end != s.c_str() + s.size() || (errno == ERANGE && std::isinf(v)))
    throw Error(ErrorKind::io, "csv line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

TraceTable parse_csv(std::string_view text, std::string id, std::string scheme) {
  TraceTable t;
  t.id = std::move(id);
  t.scheme = std::move(scheme);
  std::size_t line_no = 0;
  for (std::string_view rest = text; !rest.empty();) {
    const std::size_t nl = rest.find('\n');
    const std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (t.columns.empty()) {
      for (auto f : fields) t.columns.emplace_back(f);
      if (t.columns.front() != "n") throw Error(ErrorKind::io, "csv: first column must be n");
      continue;
    }
    if (fields.size() != t.columns.size())
      throw Error(ErrorKind::io, "csv line " + std::to_string(line_no) + ": wrong field count");
    std::vector<double> row;
    for (auto f : fields) row.push_back(parse_double(f, line_no));
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw Error(ErrorKind::io, "csv: missing header");
  return t;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 72.0;
constexpr double kRight = 140.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_svg(std::string_view title, std::span<const TraceTable> tables) {
  double n_max = 1.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (const auto& t : tables) {
    const auto col = t.column("error");
    if (!col) continue;
    for (const auto& row : t.rows) {
      n_max = std::max(n_max, row[0]);
      const double e = row[*col];
      if (e > 0.0) {
        lo = std::min(lo, e);
        hi = std::max(hi, e);
      }
    }
  }
  int dec_lo = std::isfinite(lo) ? static_cast<int>(std::floor(std::log10(lo))) : -16;
  int dec_hi = hi > 0.0 ? static_cast<int>(std::ceil(std::log10(hi))) : 0;
  dec_lo = std::max(dec_lo, -300);
  if (dec_hi <= dec_lo) dec_hi = dec_lo + 1;

  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double n) { return kLeft + pw * n / n_max; };
  auto sy = [&](double e) {
    const double l = e > 0.0 ? std::clamp(std::log10(e), double(dec_lo), double(dec_hi)) : dec_lo;
    return kTop + ph * (dec_hi - l) / (dec_hi - dec_lo);
  };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed2(kLeft) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
    << escape_xml(title) << "</text>\n";

  const int span = dec_hi - dec_lo;
  const int step = std::max(1, span / 10);
  for (int d = dec_lo; d <= dec_hi; d += step) {
    const double y = sy(std::pow(10.0, d));
    o << "<line class=\"grid\" x1=\"" << fixed2(kLeft) << "\" y1=\"" << fixed2(y) << "\" x2=\""
      << fixed2(kLeft + pw) << "\" y2=\"" << fixed2(y) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << fixed2(kLeft - 6) << "\" y=\"" << fixed2(y + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << d << "</text>\n";
  }
  o << "<rect x=\"" << fixed2(kLeft) << "\" y=\"" << fixed2(kTop) << "\" width=\"" << fixed2(pw)
    << "\" height=\"" << fixed2(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double n = std::round(n_max * k / 4.0);
    o << "<text x=\"" << fixed2(sx(n)) << "\" y=\"" << fixed2(kTop + ph + 16)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
      << static_cast<long long>(n) << "</text>\n";
  }
  o << "<text x=\"" << fixed2(kLeft + pw / 2) << "\" y=\"" << fixed2(kHeight - 12)
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">n</text>\n";
  o << "<text x=\"16\" y=\"" << fixed2(kTop + ph / 2) << "\" transform=\"rotate(-90 16 "
    << fixed2(kTop + ph / 2)
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">error (log scale)</text>\n";

  std::size_t k = 0;
  for (const auto& t : tables) {
    const auto col = t.column("error");
    if (!col) continue;
    const char* colour = kPalette[k % std::size(kPalette)];
    o << "<polyline class=\"trace\" data-scheme=\"" << escape_xml(t.scheme)
      << "\" fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      if (r) o << ' ';
      o << fixed2(sx(t.rows[r][0])) << ',' << fixed2(sy(t.rows[r][*col]));
    }
    o << "\"/>\n";
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    const double lx = kLeft + pw + 12.0;
    o << "<line x1=\"" << fixed2(lx) << "\" y1=\"" << fixed2(ly - 4) << "\" x2=\"" << fixed2(lx + 20)
      << "\" y2=\"" << fixed2(ly - 4) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    o << "<text class=\"legend\" x=\"" << fixed2(lx + 26) << "\" y=\"" << fixed2(ly)
      << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape_xml(t.scheme) << "</text>\n";
    ++k;
  }
  o << "</svg>\n";
  return o.str();
}

// ---------------------------------------------------------------------------

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorKind::io, "sha256 digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

void write_file(const fs::path& dir, const std::string& relative, std::string_view data) {
  const fs::path path = dir / relative;
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorKind::io, "cannot create " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error(ErrorKind::io, "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Bundle load_bundle(const fs::path& dir) {
  Bundle b;
  b.dir = dir;
  try {
    b.manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, "manifest.json is not valid JSON: " + std::string(e.what()));
  }
  if (!b.manifest.contains("files") || !b.manifest["files"].is_array())
    throw Error(ErrorKind::io, "manifest.json lacks a files list");
  for (const auto& f : b.manifest["files"]) {
    const std::string rel = f.at("path").get<std::string>();
    const std::string data = read_file(dir / rel);
    if (sha256_hex(data) != f.at("sha256").get<std::string>())
      throw Error(ErrorKind::io, "hash mismatch for " + rel);
  }
  try {
    b.summary = nlohmann::json::parse(read_file(dir / "summary.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::io, "summary.json is not valid JSON: " + std::string(e.what()));
  }
  for (const auto& run : b.summary.at("runs")) {
    const std::string rel = run.at("csv").get<std::string>();
    b.traces.push_back(parse_csv(read_file(dir / rel), run.at("id").get<std::string>(),
                                 run.at("scheme").get<std::string>()));
  }
  return b;
}

std::optional<ReportFormat> parse_report_format(std::string_view tag) {
  if (tag == "csv") return ReportFormat::csv;
  if (tag == "json") return ReportFormat::json;
  if (tag == "svg") return ReportFormat::svg;
  return std::nullopt;
}

std::vector<fs::path> emit_report(const Bundle& bundle, ReportFormat format) {
  std::vector<fs::path> written;
  const auto& runs = bundle.summary.at("runs");
  switch (format) {
    case ReportFormat::csv: {
      std::string out = "id,problem,schedule,scheme,steps,termination,final_error,final_residual\n";
      for (const auto& r : runs) {
        out += r.at("id").get<std::string>() + ',' + r.at("problem").get<std::string>() + ',' +
               std::to_string(r.at("schedule").get<int>()) + ',' + r.at("scheme").get<std::string>() +
               ',' + std::to_string(r.at("steps").get<long long>()) + ',' +
               r.at("termination").get<std::string>() + ',' +
               (r.at("final_error").is_null() ? std::string() : format_number(r.at("final_error").get<double>())) +
               ',' + format_number(r.at("final_residual").get<double>()) + '\n';
      }
      write_file(bundle.dir, "report/runs.csv", out);
      written.push_back(bundle.dir / "report/runs.csv");
      break;
    }
    case ReportFormat::json: {
      write_file(bundle.dir, "report/manifest.json", bundle.manifest.dump(2) + "\n");
      written.push_back(bundle.dir / "report/manifest.json");
      break;
    }
    case ReportFormat::svg: {
      std::map<std::string, std::vector<TraceTable>> cases;
      for (std::size_t i = 0; i < runs.size(); ++i)
        cases[runs[i].at("case").get<std::string>()].push_back(bundle.traces[i]);
      for (const auto& [name, tables] : cases) {
        const std::string rel = "report/" + name + ".svg";
        write_file(bundle.dir, rel, render_svg(name, tables));
        written.push_back(bundle.dir / rel);
      }
      break;
    }
  }
  return written;
}

}  // namespace fpi::harness
