#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ctg/errors.hpp"
#include "ctg/signal.hpp"

namespace ctg {

namespace detail {

inline std::string trim(std::string s) {
  const auto notspace = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
  s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
  return s;
}

inline std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline bool parse_double(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

/// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace detail

/// Loads a trace from the canonical CSV schema `t_s,fhr_bpm,uc` (t_s optional;
/// any header starting with "fhr"/"uc"/"t" is accepted). A row's sample is
/// gap-masked when the FHR cell is absent, non-numeric, zero, or outside
/// [30, 250] bpm, or when the UC cell is absent/non-numeric. UC values are
/// clamped into [0, 100]. record_id defaults to the file stem.
inline CtgRecord load_csv(const std::filesystem::path& path, double default_rate_hz = 4.0) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError(path.string());

  std::string line;
  if (!std::getline(in, line)) throw EmptyRecordError(path.string());
  if (!line.empty() && line.front() == '\xEF') line.erase(0, 3);  // BOM
  const auto header = detail::split_csv_line(line);

  int fhr_col = -1, uc_col = -1, t_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string name = detail::lower(header[c]);
    if (fhr_col < 0 && name.rfind("fhr", 0) == 0) fhr_col = static_cast<int>(c);
    else if (uc_col < 0 && name.rfind("uc", 0) == 0) uc_col = static_cast<int>(c);
    else if (t_col < 0 && (name == "t_s" || name == "t" || name.rfind("time", 0) == 0))
      t_col = static_cast<int>(c);
  }
  if (fhr_col < 0 || uc_col < 0)
    throw MalformedRowError(1, "header must name fhr and uc columns, got '" + line + "'");

  CtgRecord rec;
  rec.record_id = path.stem().string();
  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size())
      throw LengthMismatchError("line " + std::to_string(line_no) + " has " +
                                std::to_string(cells.size()) + " cells, header has " +
                                std::to_string(header.size()));
    bool gap = false;
    double fhr = 0.0, uc = 0.0;
    const std::string& fcell = cells[static_cast<std::size_t>(fhr_col)];
    if (fcell.empty() || !detail::parse_double(fcell, fhr) || fhr == 0.0 ||
        fhr < kFhrMinBpm || fhr > kFhrMaxBpm) {
      gap = true;
      fhr = 0.0;  // canonical gap sentinel
    }
    const std::string& ucell = cells[static_cast<std::size_t>(uc_col)];
    if (ucell.empty() || !detail::parse_double(ucell, uc)) {
      gap = true;
      uc = 0.0;
    }
    uc = std::clamp(uc, kUcMin, kUcMax);
    if (t_col >= 0) {
      double t = 0.0;
      if (!detail::parse_double(cells[static_cast<std::size_t>(t_col)], t))
        throw MalformedRowError(line_no, "non-numeric time cell '" +
                                             cells[static_cast<std::size_t>(t_col)] + "'");
      times.push_back(t);
    }
    rec.fhr.push_back(gap ? 0.0 : fhr);
    rec.uc.push_back(uc);
    rec.gap_mask.push_back(gap);
  }
  if (rec.fhr.empty()) throw EmptyRecordError(path.string());

  rec.sample_rate_hz = default_rate_hz;
  if (times.size() >= 2) {
    const double dt = times[1] - times[0];
    if (dt <= 0) throw MalformedRowError(3, "time column is not strictly increasing");
    rec.sample_rate_hz = 1.0 / dt;
  }
  return rec;
}

/// Writes the canonical schema `t_s,fhr_bpm,uc`. Gap samples carry the 0
/// sentinel in the FHR column, so load(save(load(f))) == load(f).
inline void save_csv(const CtgRecord& rec, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "t_s,fhr_bpm,uc\n";
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const double t = static_cast<double>(i) / rec.sample_rate_hz;
    out << detail::format_double(t) << ',' << detail::format_double(rec.gap_mask[i] ? 0.0 : rec.fhr[i])
        << ',' << detail::format_double(rec.uc[i]) << '\n';
  }
}

/// labels.csv: header `record_id,label`, label in {normal, abnormal}.
inline std::map<std::string, BinaryLabel> load_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FileNotFoundError(path.string());
  std::map<std::string, BinaryLabel> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (line_no == 1 && !cells.empty() && detail::lower(cells[0]) == "record_id") continue;
    if (cells.size() != 2) throw MalformedRowError(line_no, "expected record_id,label");
    const std::string label = detail::lower(cells[1]);
    if (label == "normal") labels[cells[0]] = BinaryLabel::Normal;
    else if (label == "abnormal") labels[cells[0]] = BinaryLabel::Abnormal;
    else throw MalformedRowError(line_no, "label must be normal or abnormal, got '" + cells[1] + "'");
  }
  return labels;
}

/// All '<id>.csv' traces in a directory, sorted by record id. labels.csv is skipped.
inline std::vector<CtgRecord> load_trace_dir(const std::filesystem::path& dir,
                                             double default_rate_hz = 4.0) {
  if (!std::filesystem::is_directory(dir)) throw FileNotFoundError(dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".csv") continue;
    if (e.path().filename() == "labels.csv") continue;
    files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CtgRecord> records;
  records.reserve(files.size());
  for (const auto& f : files) records.push_back(load_csv(f, default_rate_hz));
  return records;
}

}  // namespace ctg
