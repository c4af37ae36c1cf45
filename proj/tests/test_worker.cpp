#include "test_util.hpp"

#include <gtest/gtest.h>

#include <thread>

using namespace tdp;
using namespace tdp::check;

namespace {

const std::vector<std::string> kXyz = {"x", "y", "z"};

tdp::Test t3_model() {
  PathCondition pc;
  pc.push(parse_expr("x<y", kXyz), false);
  pc.push(parse_expr("x<z", kXyz), false);
  pc.push(parse_expr("y<z", kXyz), false);
  return get_model(pc, find_middle().inputs);
}

// Complete binary tree over inputs a, b, c, d.
Program full_tree() {
  std::string body = "exit(0);";
  for (char v : std::string("dcba"))
    body = std::string("if (") + v + " > 0) { " + body + " } else { " + body +
           " }";
  return parse_program("program full;\nsym a in [0, 1];\nsym b in [0, 1];\n"
                       "sym c in [0, 1];\nsym d in [0, 1];\n" +
                       body + "\n");
}

ExecState at(std::uint64_t id, std::size_t depth) {
  ExecState s;
  s.id = id;
  s.path.assign(depth, true);
  return s;
}

} // namespace

TEST(Offload, PrefersShallowestState) {
  std::vector<ExecState> active = {at(4, 2), at(7, 3), at(9, 1), at(2, 2),
                                   at(5, 3)};
  EXPECT_EQ(shallowest_index(active, 0), 2u);
  // Ties go to the earliest created.
  active.erase(active.begin() + 2);
  EXPECT_EQ(shallowest_index(active, 0), 2u);
  EXPECT_EQ(shallowest_index(active, 3), 3u);
  EXPECT_FALSE(shallowest_index(active, 4));
  EXPECT_FALSE(shallowest_index({}, 0));
}

TEST(Offload, ThresholdAndModel) {
  Program p = full_tree();
  Engine e(p);
  Exploration ex(e, e.initial_state(), tdp::Test(), 0, 8, SearchStrategy::dfs());
  EXPECT_TRUE(std::holds_alternative<NoWork>(offload(ex, e, 4)));
  for (int i = 0; i < 3; ++i)
    ex.step();
  ASSERT_EQ(ex.active().size(), 4u);
  EXPECT_TRUE(std::holds_alternative<NoWork>(offload(ex, e, 4)));
  ex.step();
  ASSERT_EQ(ex.active().size(), 5u);
  std::vector<std::uint32_t> depths;
  for (const auto &s : ex.active())
    depths.push_back(s.depth());
  std::sort(depths.begin(), depths.end());
  EXPECT_EQ(depths, (std::vector<std::uint32_t>{1, 2, 3, 4, 4}));

  auto r = offload(ex, e, 4);
  ASSERT_TRUE(std::holds_alternative<Offload>(r));
  const Offload &o = std::get<Offload>(r);
  EXPECT_EQ(o.test_depth, 1u);
  EXPECT_EQ(o.test.to_string(), "{a=1,b=0,c=0,d=0}");
  EXPECT_EQ(ex.active().size(), 4u);
  for (const auto &s : ex.active())
    EXPECT_GE(s.depth(), 2u);

  ex.run_to_completion();
  EXPECT_TRUE(std::holds_alternative<NoWork>(offload(ex, e, 4)));
  RegionResult rest = ex.finish();
  EXPECT_EQ(rest.completed.size(), 8u);
  for (const auto &c : rest.completed)
    EXPECT_FALSE(c.path[0]);
}

TEST(Offload, SkipsGuidedStates) {
  Program p = full_tree();
  Engine e(p);
  tdp::Test tau({"a", "b", "c", "d"}, {1, 1, 0, 0});
  Exploration ex(e, e.initial_state(), tau, 2, 8, SearchStrategy::bfs());
  ex.step();
  EXPECT_TRUE(std::holds_alternative<NoWork>(offload(ex, e, 0)));
}

TEST(Worker, TwoTasksResumeSuspendedState) {
  Worker w(find_middle());
  auto first = w.run_task(Task{SearchStrategy::dfs(), t3_model(), 2, 3});
  ASSERT_TRUE(first);
  EXPECT_EQ(sorted(first->completed), paths({"000", "001"}));
  EXPECT_FALSE(w.last_resumed());
  ASSERT_EQ(w.suspended().size(), 2u);
  std::uint64_t c_id = w.suspended()[0].id;
  EXPECT_EQ(to_string(w.suspended()[0].path), "1");

  auto second = w.run_task(
      Task{SearchStrategy::dfs(), tdp::Test({"x", "y", "z"}, {0, 1, 2}), 2, 3});
  ASSERT_TRUE(second);
  EXPECT_EQ(w.last_resumed(), c_id);
  EXPECT_EQ(sorted(second->completed), paths({"11"}));
  EXPECT_EQ(w.regions(), 2u);
}

TEST(Worker, UnmatchedPairRestartsFromRoot) {
  Worker w(find_middle());
  w.run_task(Task{SearchStrategy::dfs(), t3_model(), 3, 3});
  // Same prefix as the first task: nothing suspended matches it.
  auto again = w.run_task(Task{SearchStrategy::dfs(), t3_model(), 2, 3});
  ASSERT_TRUE(again);
  EXPECT_FALSE(w.last_resumed());
  EXPECT_EQ(sorted(again->completed), paths({"000", "001"}));
}

TEST(Worker, HookCanAbort) {
  Worker w(find_middle());
  auto r = w.run_task(Task{SearchStrategy::dfs(), tdp::Test(), 0, 3},
                      [](Exploration &, std::uint64_t step) { return step < 2; });
  EXPECT_FALSE(r);
}

TEST(RunWorker, TerminateWithoutTask) {
  InProcessHub hub(1);
  hub.coordinator().send(0, Terminate{});
  run_worker(find_middle(), {}, hub.worker(0));
  SUCCEED();
}

TEST(RunWorker, ServesTasksAndAnswersIdleSteal) {
  InProcessHub hub(1);
  std::thread t([&] { run_worker(find_middle(), {}, hub.worker(0)); });
  auto &c = hub.coordinator();
  c.send(0, ProvideWork{});
  EXPECT_EQ(c.recv().second, Message(NoWork{}));
  c.send(0, Task{SearchStrategy::bfs(), t3_model(), 2, 3});
  auto [w, m] = c.recv();
  ASSERT_TRUE(std::holds_alternative<Finish>(m));
  EXPECT_EQ(sorted(std::get<Finish>(m).completed), paths({"000", "001"}));
  c.send(0, Terminate{});
  t.join();
}

TEST(RunWorker, UnexpectedMessageIsProtocolError) {
  InProcessHub hub(1);
  hub.coordinator().send(0, NoWork{});
  EXPECT_THROW(run_worker(find_middle(), {}, hub.worker(0)), ProtocolError);
}

TEST(RunWorker, DivergentTaskIsFatal) {
  InProcessHub hub(1);
  hub.coordinator().send(
      0, Task{SearchStrategy::dfs(), tdp::Test({"x"}, {0}), 2, 3});
  EXPECT_THROW(run_worker(find_middle(), {}, hub.worker(0)), ReplayDivergence);
}

TEST(RunWorker, RecordedPollPointsReplay) {
  // Queue a steal before the task so the worker meets it at step 0.
  Program p = full_tree();
  std::vector<PollPoint> rec;
  WorkerConfig cfg;
  cfg.offload_threshold = 1;
  cfg.record = &rec;
  InProcessHub hub(1);
  hub.coordinator().send(0, Task{SearchStrategy::dfs(), tdp::Test(), 0, 8});
  hub.coordinator().send(0, ProvideWork{});
  hub.coordinator().send(0, Terminate{});
  run_worker(p, cfg, hub.worker(0));
  EXPECT_EQ(rec, (std::vector<PollPoint>{{0, 0}, {0, 0}}));
}

TEST(Property, ForcedStealConservation) {
  std::size_t total = 0;
  for (std::uint64_t seed = 100; seed < 160; ++seed) {
    StealScenario s = run_steal_scenario(seed);
    EXPECT_EQ(check_steal_scenario(s), "") << "seed " << seed;
    total += s.offloads;
  }
  EXPECT_GT(total, 60u);
}

TEST(RunWorker, ZeroThresholdRejected) {
  InProcessHub hub(1);
  WorkerConfig cfg;
  cfg.offload_threshold = 0;
  EXPECT_THROW(run_worker(find_middle(), cfg, hub.worker(0)),
               std::invalid_argument);
}
