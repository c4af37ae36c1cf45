// tdpart: partitioned symbolic execution runs, verification and corpus
// generation.

#include "tdp/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace {

std::string slurp(const std::string &path) {
  std::ifstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot read " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

void spit(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  f << text;
}

struct RunArgs {
  std::string program;
  std::string mode = "single";
  std::size_t workers = 1;
  std::string search = "dfs";
  std::uint64_t seed = 0;
  std::optional<std::uint32_t> max_depth;
  std::optional<double> calibrate_timeout;
  std::size_t offload_threshold = tdp::kDefaultOffloadThreshold;
  std::string resume_order = "deepest";
  std::uint64_t max_steps = tdp::kDefaultMaxSteps;
  std::size_t steal_retries = tdp::kDefaultStealRetryCap;
  bool no_cache = false;
  std::uint64_t query_delay_us = 0;
  std::optional<double> time_limit;
  std::string report;
  std::string verify;
  std::string record_schedule;
  std::string replay_schedule;
};

int do_run(const RunArgs &a) {
  tdp::Program program = tdp::parse_program(slurp(a.program));

  tdp::RunConfig cfg;
  cfg.mode = tdp::parse_mode(a.mode);
  cfg.workers = a.workers;
  cfg.strategy = tdp::parse_strategy(a.search, a.seed);
  cfg.max_steps = a.max_steps;
  cfg.offload_threshold = a.offload_threshold;
  if (a.resume_order == "deepest")
    cfg.resume_order = tdp::ResumeOrder::Deepest;
  else if (a.resume_order == "list")
    cfg.resume_order = tdp::ResumeOrder::List;
  else
    throw std::invalid_argument("--resume-order must be list or deepest");
  cfg.steal_retry_cap = a.steal_retries;
  cfg.use_cache = !a.no_cache;
  cfg.query_delay = std::chrono::microseconds(a.query_delay_us);
  if (a.time_limit)
    cfg.time_limit = std::chrono::milliseconds(
        static_cast<std::int64_t>(*a.time_limit * 1000));

  if (a.calibrate_timeout) {
    tdp::EngineOptions eo;
    eo.max_steps = a.max_steps;
    tdp::CalibrateLimit lim;
    lim.time = std::chrono::duration<double>(*a.calibrate_timeout);
    cfg.final_depth = tdp::calibrate_depth(program, lim, eo);
    std::cout << "calibrated depth: " << cfg.final_depth << "\n";
  } else if (a.max_depth) {
    cfg.final_depth = *a.max_depth;
  } else {
    throw std::invalid_argument("need --max-depth or --calibrate-timeout");
  }

  tdp::Schedule recorded, replay;
  if (!a.record_schedule.empty())
    cfg.record = &recorded;
  if (!a.replay_schedule.empty()) {
    replay = tdp::Schedule::parse(slurp(a.replay_schedule));
    cfg.replay = &replay;
  }

  tdp::RunReport report = tdp::run(cfg, program);
  if (!a.record_schedule.empty())
    spit(a.record_schedule, recorded.serialize());
  if (!a.report.empty())
    spit(a.report, tdp::to_csv(report));

  tdp::WorkerRow s = report.summary();
  std::cout << "program " << program.name << " (" << report.program_digest
            << "), mode " << a.mode << ", " << report.workers.size()
            << " worker(s), depth " << report.final_depth << "\n"
            << "paths " << s.paths << ", frontier " << s.frontier
            << ", queries " << s.queries << ", cache hits " << s.cache_hits
            << ", transfers " << report.transfers << "\n"
            << "path digest " << report.path_digest() << ", wall "
            << report.wall_ms << " ms" << (report.partial ? " (partial)" : "")
            << "\n";
  if (!report.error.empty()) {
    std::cerr << "run aborted: " << report.error << "\n";
    return 2;
  }

  if (!a.verify.empty()) {
    tdp::RunReport oracle = tdp::parse_csv(slurp(a.verify));
    tdp::VerifyResult v = tdp::verify(oracle, report);
    std::cout << v.describe();
    return v.pass ? 0 : 1;
  }
  return 0;
}

int do_gen(std::uint64_t seed, std::size_t count, const std::string &out) {
  auto corpus = tdp::gen_corpus(seed, count);
  for (const auto &p : tdp::write_corpus(corpus, out))
    std::cout << p.string() << "\n";
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Partitioned symbolic execution with test-depth pairs"};
  app.require_subcommand(1);

  RunArgs ra;
  auto *run = app.add_subcommand("run", "Explore a program");
  run->add_option("--program", ra.program, ".tdp source file")->required();
  run->add_option("--mode", ra.mode, "single | threads | tcp")
      ->check(CLI::IsMember({"single", "threads", "tcp"}));
  run->add_option("--workers", ra.workers, "Worker count")
      ->check(CLI::PositiveNumber);
  run->add_option("--search", ra.search, "dfs | bfs | rand")
      ->check(CLI::IsMember({"dfs", "bfs", "rand", "random"}));
  run->add_option("--seed", ra.seed, "Seed for random search");
  run->add_option("--max-depth", ra.max_depth, "Final depth bound");
  run->add_option("--calibrate-timeout", ra.calibrate_timeout,
                  "Pick the depth by a timed BFS (seconds)");
  run->add_option("--offload-threshold", ra.offload_threshold,
                  "Active states a worker keeps before it gives work away")
      ->check(CLI::PositiveNumber);
  run->add_option("--resume-order", ra.resume_order, "deepest | list");
  run->add_option("--max-steps", ra.max_steps, "Instruction budget per region");
  run->add_option("--steal-retries", ra.steal_retries,
                  "ProvideWork attempts per idle episode");
  run->add_flag("--no-cache", ra.no_cache, "Disable the solver query cache");
  run->add_option("--query-delay-us", ra.query_delay_us,
                  "Artificial latency per solver query");
  run->add_option("--time-limit", ra.time_limit,
                  "Soft deadline for distributed runs (seconds)");
  run->add_option("--report", ra.report, "Write the CSV report here");
  run->add_option("--verify", ra.verify, "Compare against an oracle report");
  run->add_option("--record-schedule", ra.record_schedule,
                  "threads mode: save the message delivery order");
  run->add_option("--replay-schedule", ra.replay_schedule,
                  "threads mode: reproduce a saved delivery order");

  std::uint64_t gen_seed = 1;
  std::size_t gen_count = 20;
  std::string gen_out;
  auto *gen = app.add_subcommand("gen", "Generate a program corpus");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--count", gen_count, "Number of programs");
  gen->add_option("--out", gen_out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*run)
      return do_run(ra);
    return do_gen(gen_seed, gen_count, gen_out);
  } catch (const tdp::SyntaxError &e) {
    std::cerr << ra.program << ":" << e.line() << ":" << e.column() << ": "
              << e.message() << "\n";
  } catch (const tdp::ValidationError &e) {
    for (const auto &d : e.diagnostics())
      std::cerr << ra.program << ": " << d << "\n";
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
