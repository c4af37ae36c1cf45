#include "tdp/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <thread>

namespace tdp {

std::string to_string(Mode m) {
  switch (m) {
  case Mode::Single: return "single";
  case Mode::Threads: return "threads";
  case Mode::Tcp: return "tcp";
  }
  return "?";
}

Mode parse_mode(std::string_view name) {
  if (name == "single")
    return Mode::Single;
  if (name == "threads")
    return Mode::Threads;
  if (name == "tcp")
    return Mode::Tcp;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string program_digest(const Program &program) {
  return fnv1a_hex(print_program(program));
}

WorkerRow RunReport::summary() const {
  WorkerRow s;
  for (const auto &w : workers) {
    s.regions += w.regions;
    s.paths += w.paths;
    s.frontier += w.frontier;
    s.queries += w.queries;
    s.cache_hits += w.cache_hits;
  }
  s.transfers_in = transfers;
  s.transfers_out = transfers;
  s.wall_ms = wall_ms;
  return s;
}

std::string RunReport::path_digest() const {
  std::string text;
  for (const auto &p : completed)
    text += to_string(p) + "\n";
  text += "#\n";
  for (const auto &p : frontier)
    text += to_string(p) + "\n";
  return fnv1a_hex(text);
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

EngineOptions engine_options(const RunConfig &c) {
  EngineOptions o;
  o.max_steps = c.max_steps;
  o.solver.use_cache = c.use_cache;
  o.solver.query_delay = c.query_delay;
  return o;
}

WorkerConfig worker_config(const RunConfig &c) {
  WorkerConfig w;
  w.engine = engine_options(c);
  w.offload_threshold = c.offload_threshold;
  w.resume_order = c.resume_order;
  return w;
}

void finalize(RunReport &r) {
  std::sort(r.completed.begin(), r.completed.end());
  std::sort(r.frontier.begin(), r.frontier.end());
}

RunReport run_single(const RunConfig &config, const Program &program) {
  auto t0 = Clock::now();
  Engine engine(program, engine_options(config));
  RegionResult res = engine.start_execution(
      engine.initial_state(), Test{}, 0, config.final_depth, config.strategy);

  RunReport r;
  WorkerRow row;
  row.regions = 1;
  row.paths = res.stats.completed_paths;
  row.frontier = res.stats.frontier_states;
  row.queries = res.stats.solver_queries;
  row.cache_hits = res.stats.cache_hits;
  for (const auto &c : res.completed)
    r.completed.push_back(c.path);
  for (const auto &s : res.frontier)
    r.frontier.push_back(s.path);
  r.partial = res.stats.partial;
  row.wall_ms = ms_since(t0);
  r.wall_ms = row.wall_ms;
  r.workers.push_back(row);
  return r;
}

std::vector<TestDepthPair> initial_pool(const RunConfig &config,
                                        const Program &program) {
  return seed_pool(program, config.workers, config.final_depth,
                   engine_options(config));
}

CoordinatorResult coordinate(const RunConfig &config,
                             std::vector<TestDepthPair> pool,
                             CoordinatorChannel &channel,
                             Clock::time_point t0) {
  CoordinatorConfig cc;
  cc.strategy = config.strategy;
  cc.final_depth = config.final_depth;
  cc.steal_retry_cap = config.steal_retry_cap;
  if (config.time_limit)
    cc.deadline = t0 + *config.time_limit;
  return run_coordinator(cc, std::move(pool), channel);
}

RunReport to_report(CoordinatorResult res, double wall_ms) {
  RunReport r;
  for (std::size_t w = 0; w < res.workers.size(); ++w) {
    const WorkerTally &t = res.workers[w];
    WorkerRow row;
    row.worker = w;
    row.regions = t.regions;
    row.paths = t.stats.completed_paths;
    row.frontier = t.stats.frontier_states;
    row.queries = t.stats.solver_queries;
    row.cache_hits = t.stats.cache_hits;
    row.transfers_in = t.transfers_in;
    row.transfers_out = t.transfers_out;
    row.wall_ms = t.busy_ms;
    r.workers.push_back(row);
  }
  r.transfers = res.transfers;
  r.completed = std::move(res.completed);
  r.frontier = std::move(res.frontier);
  r.partial = res.partial;
  r.error = std::move(res.error);
  r.wall_ms = wall_ms;
  return r;
}

std::string describe(const std::exception_ptr &e) {
  try {
    std::rethrow_exception(e);
  } catch (const std::exception &x) {
    return x.what();
  } catch (...) {
    return "unknown error";
  }
}

void note_worker_errors(RunReport &r,
                        const std::vector<std::exception_ptr> &errors) {
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!errors[i])
      continue;
    r.partial = true;
    if (!r.error.empty())
      r.error += "; ";
    r.error += "worker " + std::to_string(i) + ": " + describe(errors[i]);
  }
}

RunReport run_threads(const RunConfig &config, const Program &program) {
  const std::size_t n = config.workers;
  if (config.replay && (config.replay->workers.size() != n))
    throw std::invalid_argument("replay schedule is for " +
                                std::to_string(config.replay->workers.size()) +
                                " workers, run has " + std::to_string(n));
  auto t0 = Clock::now();
  auto pool = initial_pool(config, program);
  InProcessHub hub(n);
  std::vector<std::vector<PollPoint>> polls(n);
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n; ++i) {
    WorkerConfig wc = worker_config(config);
    if (config.record)
      wc.record = &polls[i];
    if (config.replay)
      wc.replay = &config.replay->workers[i];
    threads.emplace_back([&, i, wc] {
      try {
        run_worker(program, wc, hub.worker(i));
      } catch (...) {
        errors[i] = std::current_exception();
        hub.close_worker(i);
      }
    });
  }

  std::vector<std::size_t> order;
  CoordinatorResult res;
  if (config.replay) {
    ReplayCoordinatorChannel ch(hub.coordinator(), config.replay->coordinator);
    res = coordinate(config, std::move(pool), ch, t0);
  } else if (config.record) {
    RecordingCoordinatorChannel ch(hub.coordinator(), order);
    res = coordinate(config, std::move(pool), ch, t0);
  } else {
    res = coordinate(config, std::move(pool), hub.coordinator(), t0);
  }
  for (auto &t : threads)
    t.join();

  if (config.record) {
    config.record->coordinator = std::move(order);
    config.record->workers = std::move(polls);
  }
  RunReport r = to_report(std::move(res), ms_since(t0));
  note_worker_errors(r, errors);
  return r;
}

RunReport run_tcp(const RunConfig &config, const Program &program) {
  const std::size_t n = config.workers;
  auto t0 = Clock::now();
  auto pool = initial_pool(config, program);
  TcpListener listener(0);
  const std::uint16_t port = listener.port();
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> threads;
  const WorkerConfig wc = worker_config(config);
  for (std::size_t i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      try {
        auto ch = tcp_connect("127.0.0.1", port);
        run_worker(program, wc, *ch);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  RunReport r;
  {
    auto channel = listener.accept_workers(n);
    CoordinatorResult res = coordinate(config, std::move(pool), *channel, t0);
    for (auto &t : threads)
      t.join();
    r = to_report(std::move(res), ms_since(t0));
  }
  note_worker_errors(r, errors);
  return r;
}

} // namespace

RunReport run(const RunConfig &config, const Program &program) {
  if (config.mode != Mode::Single && config.workers == 0)
    throw std::invalid_argument("distributed runs need at least one worker");
  if (config.offload_threshold == 0)
    throw std::invalid_argument("offload threshold must be positive");
  if ((config.record || config.replay) && config.mode != Mode::Threads)
    throw std::invalid_argument("schedules apply to threads mode only");
  RunReport r;
  switch (config.mode) {
  case Mode::Single:
    r = run_single(config, program);
    break;
  case Mode::Threads:
    r = run_threads(config, program);
    break;
  case Mode::Tcp:
    r = run_tcp(config, program);
    break;
  }
  r.program_digest = program_digest(program);
  r.final_depth = config.final_depth;
  finalize(r);
  return r;
}

} // namespace tdp
