#pragma once

#include "tdp/coord.hpp"
#include "tdp/engine.hpp"
#include "tdp/lang.hpp"
#include "tdp/transport.hpp"
#include "tdp/worker.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tdp {

//===----------------------------------------------------------------------===//
// Runs
//===----------------------------------------------------------------------===//

enum class Mode : std::uint8_t { Single, Threads, Tcp };

std::string to_string(Mode m);
/// Throws std::invalid_argument.
Mode parse_mode(std::string_view name);

struct RunConfig {
  Mode mode = Mode::Single;
  std::size_t workers = 1;
  SearchStrategy strategy;
  std::uint32_t final_depth = 0;
  std::uint64_t max_steps = kDefaultMaxSteps;
  std::size_t offload_threshold = kDefaultOffloadThreshold;
  ResumeOrder resume_order = ResumeOrder::Deepest;
  std::size_t steal_retry_cap = kDefaultStealRetryCap;
  bool use_cache = true;
  std::chrono::microseconds query_delay{0};
  /// Soft deadline for distributed runs, measured from the start of run().
  std::optional<std::chrono::milliseconds> time_limit;

  /// threads mode only: capture or reproduce message delivery order.
  Schedule *record = nullptr;
  const Schedule *replay = nullptr;
};

struct WorkerRow {
  std::size_t worker = 0;
  std::uint64_t regions = 0;
  std::uint64_t paths = 0;
  std::uint64_t frontier = 0;
  std::uint64_t queries = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t transfers_in = 0;
  std::uint64_t transfers_out = 0;
  double wall_ms = 0;
  bool operator==(const WorkerRow &) const = default;
};

struct RunReport {
  std::string program_digest;
  std::uint32_t final_depth = 0;
  std::vector<WorkerRow> workers;
  std::uint64_t transfers = 0;
  double wall_ms = 0;
  /// Budget exhausted, deadline reached, or run aborted.
  bool partial = false;
  /// Why a distributed run was aborted; empty otherwise.
  std::string error;
  /// Sorted path multisets.
  std::vector<PathVector> completed;
  std::vector<PathVector> frontier;

  WorkerRow summary() const;
  /// Digest of the sorted completed and frontier multisets.
  std::string path_digest() const;
};

/// Executes `program` in the configured topology. An aborted distributed
/// run yields a partial report with `error` set.
RunReport run(const RunConfig &config, const Program &program);

/// FNV-1a 64-bit over the bytes, as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);
/// Digest of the printed block form.
std::string program_digest(const Program &program);

//===----------------------------------------------------------------------===//
// Report CSV
//===----------------------------------------------------------------------===//

inline constexpr const char *kReportHeader =
    "record,worker,regions,paths,frontier,queries,cache_hits,transfers_in,"
    "transfers_out,wall_ms,program_digest,final_depth,path_digest,partial,"
    "path";

/// With `with_wall` false the wall_ms cells are left empty, so reports of
/// replayed runs compare byte for byte.
std::string to_csv(const RunReport &report, bool with_wall = true);
/// Throws std::invalid_argument on malformed input.
RunReport parse_csv(std::string_view text);

//===----------------------------------------------------------------------===//
// Verification
//===----------------------------------------------------------------------===//

class DigestMismatch : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct VerifyResult {
  bool pass = false;
  std::vector<PathVector> missing;    // in oracle, not in candidate
  std::vector<PathVector> unexpected; // in candidate, not in oracle
  std::vector<PathVector> duplicated; // more than once in candidate
  std::vector<PathVector> frontier_missing;
  std::vector<PathVector> frontier_unexpected;

  /// Human-readable diff, one line per finding.
  std::string describe() const;
};

/// Pass iff the candidate's completed multiset equals the oracle's, no
/// completed path occurs twice in it, and the frontier multisets agree.
/// Throws DigestMismatch if the reports describe different programs or
/// depths.
VerifyResult verify(const RunReport &oracle, const RunReport &candidate);

//===----------------------------------------------------------------------===//
// Depth calibration
//===----------------------------------------------------------------------===//

struct CalibrateLimit {
  std::optional<std::chrono::duration<double>> time;
  /// Cap on exploration steps, for reproducible calibration.
  std::optional<std::uint64_t> steps;
};

/// Single-worker BFS from the root until the limit. Returns the depth of
/// the deepest layer that is fully generated: the shallowest pending depth
/// if the limit hit first, or the deepest completed path if the tree was
/// exhausted.
std::uint32_t calibrate_depth(const Program &program, CalibrateLimit limit,
                              EngineOptions opts = {});

//===----------------------------------------------------------------------===//
// Corpus generation
//===----------------------------------------------------------------------===//

enum class Shape : std::uint8_t { Narrow, Wide, Looped };

std::string to_string(Shape s);

struct GenOptions {
  std::int64_t domain_lo = -4;
  std::int64_t domain_hi = 4;
  std::size_t min_inputs = 2;
  std::size_t max_inputs = 5;
  /// Branches per program, before loop unrolling.
  std::size_t min_branches = 4;
  std::size_t max_branches = 10;
  /// Loop-bound inputs range over [0, max_trips].
  std::int64_t max_trips = 3;
};

struct GeneratedProgram {
  std::string file_name; // e.g. "gen_07_wide.tdp"
  Shape shape = Shape::Narrow;
  std::string source;
};

/// Deterministic for a given (seed, count, options). Shapes cycle narrow,
/// wide, looped.
std::vector<GeneratedProgram> gen_corpus(std::uint64_t seed, std::size_t count,
                                         const GenOptions &opts = {});

/// Writes the corpus into `dir` (created if needed); returns file paths.
std::vector<std::filesystem::path>
write_corpus(const std::vector<GeneratedProgram> &corpus,
             const std::filesystem::path &dir);

} // namespace tdp
