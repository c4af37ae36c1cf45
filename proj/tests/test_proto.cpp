#include "test_util.hpp"

#include <gtest/gtest.h>

#include <future>
#include <thread>

using namespace tdp;
using namespace tdp::check;

namespace {

using Bytes = std::vector<std::uint8_t>;

// u16 name length, name, i64 value.
void entry(Bytes &b, char name, std::int64_t v) {
  b.insert(b.end(), {0x00, 0x01, static_cast<std::uint8_t>(name)});
  for (int i = 7; i >= 0; --i)
    b.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

Bytes xyz_100() {
  Bytes b = {0x00, 0x03};
  entry(b, 'x', 1);
  entry(b, 'y', 0);
  entry(b, 'z', 0);
  return b;
}

tdp::Test xyz(std::int64_t x, std::int64_t y, std::int64_t z) {
  return tdp::Test({"x", "y", "z"}, {x, y, z});
}

DecodeError::Kind decode_error_kind(const Bytes &frame) {
  try {
    decode(frame);
  } catch (const DecodeError &e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode accepted a bad frame";
  return DecodeError::Kind::Malformed;
}

} // namespace

TEST(Golden, Terminate) {
  EXPECT_EQ(encode(Terminate{}), (Bytes{0x00, 0x00, 0x00, 0x01, 0x06}));
}

TEST(Golden, ProvideWork) {
  EXPECT_EQ(encode(ProvideWork{}), (Bytes{0x00, 0x00, 0x00, 0x01, 0x03}));
}

TEST(Golden, NoWork) {
  EXPECT_EQ(encode(NoWork{}), (Bytes{0x00, 0x00, 0x00, 0x01, 0x05}));
}

TEST(Golden, Offload) {
  Bytes want = {0x00, 0x00, 0x00, 0x28, 0x04};
  Bytes t = xyz_100();
  want.insert(want.end(), t.begin(), t.end());
  want.insert(want.end(), {0x00, 0x00, 0x00, 0x02});
  Message m = Offload{xyz(1, 0, 0), 2};
  EXPECT_EQ(encode(m), want);
  EXPECT_EQ(decode(want), m);
}

TEST(Golden, Task) {
  Bytes want = {0x00, 0x00, 0x00, 0x2d, 0x01, 0x00};
  Bytes t = xyz_100();
  want.insert(want.end(), t.begin(), t.end());
  want.insert(want.end(), {0x00, 0x00, 0x00, 0x02, 0x00, 0x00, 0x00, 0x03});
  Message m = Task{SearchStrategy::dfs(), xyz(1, 0, 0), 2, 3};
  EXPECT_EQ(encode(m), want);
  EXPECT_EQ(decode(want), m);
}

TEST(Codec, FinishPathsPackMsbFirst) {
  Finish f;
  f.completed = {parse_path("101")};
  Bytes b = encode(f);
  // length, tag, 7*u64 + u8 stats, u32 count, u32 bits, packed byte,
  // u32 frontier count.
  ASSERT_EQ(b.size(), 4u + 1 + 57 + 4 + 4 + 1 + 4);
  EXPECT_EQ(b[4 + 1 + 57 + 4 + 3], 3);
  EXPECT_EQ(b[4 + 1 + 57 + 8], 0xa0);
}

TEST(Codec, RandomStrategyCarriesSeed) {
  Message m = Task{SearchStrategy::random(0x0102030405060708ull), tdp::Test(), 0, 4};
  Bytes b = encode(m);
  EXPECT_EQ(b[5], 0x02);
  EXPECT_EQ(b[6], 0x01);
  EXPECT_EQ(b[13], 0x08);
  EXPECT_EQ(decode(b), m);
}

TEST(Property, RoundTrip) {
  Rng rng(31337);
  for (int i = 0; i < 1000; ++i) {
    Message m = random_message(rng);
    Bytes b = encode(m);
    ASSERT_EQ(decode(b), m) << to_string(tag_of(m));
  }
}

TEST(Property, EncodingIsInjective) {
  Rng rng(4);
  std::vector<Message> ms;
  for (int i = 0; i < 300; ++i)
    ms.push_back(random_message(rng));
  for (std::size_t i = 0; i < ms.size(); ++i)
    for (std::size_t j = i + 1; j < ms.size(); ++j)
      if (!(ms[i] == ms[j]))
        ASSERT_NE(encode(ms[i]), encode(ms[j]));
}

TEST(Decode, UnknownTag) {
  EXPECT_EQ(decode_error_kind({0x00, 0x00, 0x00, 0x01, 0xff}),
            DecodeError::Kind::UnknownTag);
}

TEST(Decode, Truncated) {
  EXPECT_EQ(decode_error_kind({0x00, 0x00, 0x00, 0x05, 0x06}),
            DecodeError::Kind::Truncated);
  EXPECT_EQ(decode_error_kind({0x00, 0x00}), DecodeError::Kind::Truncated);
  Bytes b = encode(Offload{xyz(1, 0, 0), 2});
  b.resize(b.size() - 2);
  b[3] = static_cast<std::uint8_t>(b.size() - 4);
  EXPECT_EQ(decode_error_kind(b), DecodeError::Kind::Truncated);
}

TEST(Decode, TrailingBytes) {
  EXPECT_EQ(decode_error_kind({0x00, 0x00, 0x00, 0x01, 0x06, 0x00}),
            DecodeError::Kind::TrailingBytes);
  EXPECT_EQ(decode_error_kind({0x00, 0x00, 0x00, 0x02, 0x06, 0x00}),
            DecodeError::Kind::TrailingBytes);
}

TEST(Decode, Malformed) {
  Bytes bad_strategy = {0x00, 0x00, 0x00, 0x0c, 0x01, 0x07, 0x00, 0x00,
                        0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
  EXPECT_EQ(decode_error_kind(bad_strategy), DecodeError::Kind::Malformed);
}

TEST(Property, TruncationNeverCrashes) {
  Rng rng(8);
  for (int i = 0; i < 300; ++i) {
    Bytes b = encode(random_message(rng));
    for (std::size_t cut = 0; cut < b.size(); ++cut) {
      Bytes part(b.begin(), b.begin() + cut);
      EXPECT_THROW(decode(part), DecodeError);
    }
  }
}

TEST(FrameAssembler, SplitsByteStream) {
  Rng rng(12);
  std::vector<Message> sent;
  Bytes stream;
  for (int i = 0; i < 200; ++i) {
    sent.push_back(random_message(rng));
    encode_into(sent.back(), stream);
  }
  FrameAssembler fa;
  std::vector<Message> got;
  std::size_t pos = 0;
  while (pos < stream.size()) {
    std::size_t n = std::min<std::size_t>(stream.size() - pos, rng.range(1, 50));
    fa.feed(std::span(stream).subspan(pos, n));
    pos += n;
    while (auto f = fa.next_frame())
      got.push_back(decode(*f));
  }
  EXPECT_EQ(got, sent);
  EXPECT_EQ(fa.buffered(), 0u);
}

TEST(FrameAssembler, RejectsHugeLength) {
  FrameAssembler fa;
  Bytes b = {0x7f, 0xff, 0xff, 0xff};
  fa.feed(b);
  EXPECT_THROW(fa.next_frame(), DecodeError);
}

TEST(InProcess, BothDirections) {
  InProcessHub hub(2);
  hub.worker(1).send(NoWork{});
  auto [w, m] = hub.coordinator().recv();
  EXPECT_EQ(w, 1u);
  EXPECT_EQ(m, Message(NoWork{}));
  EXPECT_FALSE(hub.worker(0).try_recv());
  hub.coordinator().send(0, Offload{xyz(1, 0, 0), 2});
  auto got = hub.worker(0).try_recv();
  ASSERT_TRUE(got);
  EXPECT_EQ(*got, Message(Offload{xyz(1, 0, 0), 2}));
  EXPECT_EQ(hub.coordinator().num_workers(), 2u);
}

TEST(InProcess, CloseReportsDisconnect) {
  InProcessHub hub(3);
  hub.close_worker(2);
  try {
    hub.coordinator().recv();
    FAIL() << "expected a disconnect";
  } catch (const WorkerDisconnected &e) {
    EXPECT_EQ(e.worker(), 2u);
  }
}

TEST(Tcp, ExchangeAndDisconnect) {
  TcpListener listener;
  ASSERT_NE(listener.port(), 0);
  Rng rng(3);
  std::vector<Message> msgs;
  for (int i = 0; i < 50; ++i)
    msgs.push_back(random_message(rng));

  std::thread worker([&, port = listener.port()] {
    auto ch = tcp_connect("127.0.0.1", port);
    for (const auto &m : msgs)
      ch->send(m);
    for (const auto &m : msgs)
      EXPECT_EQ(ch->recv(), m);
    EXPECT_FALSE(ch->try_recv());
  });
  auto coord = listener.accept_workers(1);
  for (const auto &m : msgs) {
    auto [w, got] = coord->recv();
    EXPECT_EQ(w, 0u);
    EXPECT_EQ(got, m);
  }
  for (const auto &m : msgs)
    coord->send(0, m);
  worker.join();
  EXPECT_THROW(coord->recv(), WorkerDisconnected);
}

TEST(Tcp, WorkerIdsFollowAcceptOrder) {
  TcpListener listener;
  std::vector<std::unique_ptr<WorkerChannel>> chans(3);
  auto coord_future = std::async(std::launch::async,
                                 [&] { return listener.accept_workers(3); });
  for (int i = 0; i < 3; ++i)
    chans[i] = tcp_connect("127.0.0.1", listener.port());
  auto coord = coord_future.get();
  EXPECT_EQ(coord->num_workers(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    coord->send(i, Offload{tdp::Test(), static_cast<std::uint32_t>(i)});
    auto m = chans[i]->recv();
    EXPECT_EQ(std::get<Offload>(m).test_depth, i);
    chans[i]->send(NoWork{});
    EXPECT_EQ(coord->recv().first, i);
  }
}

TEST(Schedule, SerializeParse) {
  Schedule s;
  s.coordinator = {0, 1, 1, 0, 2};
  s.workers = {{{0, 3}, {2, 17}}, {}, {{5, 0}}};
  std::string text = s.serialize();
  EXPECT_EQ(text, "coordinator: 0 1 1 0 2\nworker 0: 0:3 2:17\nworker 1:\n"
                  "worker 2: 5:0\n");
  EXPECT_EQ(Schedule::parse(text), s);
  EXPECT_THROW(Schedule::parse("worker 0: 1:2\n"), std::invalid_argument);
  EXPECT_THROW(Schedule::parse("coordinator: 0\nworker 1: 1:2\n"),
               std::invalid_argument);
}

TEST(Schedule, ReplayReordersDelivery) {
  InProcessHub hub(2);
  std::vector<std::size_t> log;
  {
    RecordingCoordinatorChannel rec(hub.coordinator(), log);
    hub.worker(1).send(NoWork{});
    hub.worker(0).send(ProvideWork{});
    rec.recv();
    rec.recv();
  }
  EXPECT_EQ(log, (std::vector<std::size_t>{1, 0}));

  ReplayCoordinatorChannel replay(hub.coordinator(), {0, 1, 1});
  hub.worker(1).send(NoWork{});
  hub.worker(1).send(Terminate{});
  hub.worker(0).send(ProvideWork{});
  auto a = replay.recv();
  auto b = replay.recv();
  auto c = replay.recv();
  EXPECT_EQ(a.first, 0u);
  EXPECT_EQ(a.second, Message(ProvideWork{}));
  EXPECT_EQ(b.second, Message(NoWork{}));
  EXPECT_EQ(c.second, Message(Terminate{}));
}
