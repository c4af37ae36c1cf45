#include "tdp/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <sstream>

namespace tdp {

namespace {

std::string fmt_ms(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", ms);
  return buf;
}

void put_row(std::string &out, const char *record, const std::string &worker,
             const WorkerRow &r, const std::string &wall,
             const std::string &tail) {
  out += record;
  out += ',' + worker;
  for (std::uint64_t v : {r.regions, r.paths, r.frontier, r.queries,
                          r.cache_hits, r.transfers_in, r.transfers_out})
    out += ',' + std::to_string(v);
  out += ',' + wall;
  out += ',' + tail;
  out += '\n';
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T> T num(std::string_view cell, const char *what) {
  T v{};
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size())
    throw std::invalid_argument(std::string("bad ") + what + " '" +
                                std::string(cell) + "'");
  return v;
}

double num_double(std::string_view cell) {
  if (cell.empty())
    return 0;
  try {
    std::size_t used = 0;
    double v = std::stod(std::string(cell), &used);
    if (used != cell.size())
      throw std::invalid_argument("");
    return v;
  } catch (const std::exception &) {
    throw std::invalid_argument("bad wall_ms '" + std::string(cell) + "'");
  }
}

} // namespace

// Columns: record, worker, then the seven counters, wall_ms,
// program_digest, final_depth, path_digest, partial, path.
std::string to_csv(const RunReport &report, bool with_wall) {
  std::string out = kReportHeader;
  out += '\n';
  for (const auto &w : report.workers)
    put_row(out, "worker", std::to_string(w.worker), w,
            with_wall ? fmt_ms(w.wall_ms) : "", ",,,,");
  put_row(out, "summary", "", report.summary(),
          with_wall ? fmt_ms(report.wall_ms) : "",
          report.program_digest + ',' + std::to_string(report.final_depth) +
              ',' + report.path_digest() + ',' +
              (report.partial ? "1" : "0") + ',');
  const std::string blank(13, ',');
  for (const auto &p : report.completed)
    out += "path," + blank + to_string(p) + '\n';
  for (const auto &p : report.frontier)
    out += "frontier," + blank + to_string(p) + '\n';
  return out;
}

RunReport parse_csv(std::string_view text) {
  RunReport r;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool saw_summary = false;
  std::string expected_digest;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    ++line_no;
    if (line_no == 1) {
      if (line != kReportHeader)
        throw std::invalid_argument("report header does not match");
      continue;
    }
    if (line.empty())
      continue;
    auto c = split(line);
    if (c.size() != 15)
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": expected 15 cells");
    auto row_of = [&] {
      WorkerRow w;
      w.regions = num<std::uint64_t>(c[2], "regions");
      w.paths = num<std::uint64_t>(c[3], "paths");
      w.frontier = num<std::uint64_t>(c[4], "frontier");
      w.queries = num<std::uint64_t>(c[5], "queries");
      w.cache_hits = num<std::uint64_t>(c[6], "cache_hits");
      w.transfers_in = num<std::uint64_t>(c[7], "transfers_in");
      w.transfers_out = num<std::uint64_t>(c[8], "transfers_out");
      w.wall_ms = num_double(c[9]);
      return w;
    };
    if (c[0] == "worker") {
      WorkerRow w = row_of();
      w.worker = num<std::size_t>(c[1], "worker");
      r.workers.push_back(w);
    } else if (c[0] == "summary") {
      if (saw_summary)
        throw std::invalid_argument("report has two summary rows");
      WorkerRow s = row_of();
      r.transfers = s.transfers_out;
      r.wall_ms = s.wall_ms;
      r.program_digest = std::string(c[10]);
      r.final_depth = num<std::uint32_t>(c[11], "final_depth");
      expected_digest = std::string(c[12]);
      if (c[13] != "0" && c[13] != "1")
        throw std::invalid_argument("bad partial flag");
      r.partial = c[13] == "1";
      saw_summary = true;
    } else if (c[0] == "path") {
      r.completed.push_back(parse_path(c[14]));
    } else if (c[0] == "frontier") {
      r.frontier.push_back(parse_path(c[14]));
    } else {
      throw std::invalid_argument("line " + std::to_string(line_no) +
                                  ": unknown record '" + std::string(c[0]) +
                                  "'");
    }
  }
  if (line_no == 0)
    throw std::invalid_argument("empty report");
  if (!saw_summary)
    throw std::invalid_argument("report has no summary row");
  std::sort(r.completed.begin(), r.completed.end());
  std::sort(r.frontier.begin(), r.frontier.end());
  if (r.path_digest() != expected_digest)
    throw std::invalid_argument("path rows do not match the summary digest");
  return r;
}

//===----------------------------------------------------------------------===//
// verify
//===----------------------------------------------------------------------===//

namespace {

using Counts = std::map<PathVector, std::size_t>;

Counts count(const std::vector<PathVector> &ps) {
  Counts c;
  for (const auto &p : ps)
    ++c[p];
  return c;
}

void diff(const Counts &want, const Counts &got, std::vector<PathVector> &lost,
          std::vector<PathVector> &extra) {
  for (const auto &[p, n] : want) {
    auto it = got.find(p);
    if (it == got.end() || it->second < n)
      lost.push_back(p);
  }
  for (const auto &[p, n] : got) {
    auto it = want.find(p);
    if (it == want.end() || it->second < n)
      extra.push_back(p);
  }
}

} // namespace

VerifyResult verify(const RunReport &oracle, const RunReport &candidate) {
  if (oracle.program_digest != candidate.program_digest)
    throw DigestMismatch("program digests differ: " + oracle.program_digest +
                         " vs " + candidate.program_digest);
  if (oracle.final_depth != candidate.final_depth)
    throw DigestMismatch("final depths differ: " +
                         std::to_string(oracle.final_depth) + " vs " +
                         std::to_string(candidate.final_depth));
  VerifyResult v;
  Counts want = count(oracle.completed), got = count(candidate.completed);
  diff(want, got, v.missing, v.unexpected);
  for (const auto &[p, n] : got)
    if (n > 1)
      v.duplicated.push_back(p);
  diff(count(oracle.frontier), count(candidate.frontier), v.frontier_missing,
       v.frontier_unexpected);
  v.pass = v.missing.empty() && v.unexpected.empty() && v.duplicated.empty() &&
           v.frontier_missing.empty() && v.frontier_unexpected.empty();
  return v;
}

std::string VerifyResult::describe() const {
  std::ostringstream out;
  auto list = [&](const char *what, const std::vector<PathVector> &ps) {
    for (const auto &p : ps)
      out << what << ' ' << (p.empty() ? "<empty>" : to_string(p)) << '\n';
  };
  list("missing path", missing);
  list("unexpected path", unexpected);
  list("duplicated path", duplicated);
  list("missing frontier", frontier_missing);
  list("unexpected frontier", frontier_unexpected);
  if (pass)
    out << "pass\n";
  return out.str();
}

} // namespace tdp
