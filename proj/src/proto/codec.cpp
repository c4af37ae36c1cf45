#include "tdp/proto.hpp"

namespace tdp {

MessageTag tag_of(const Message &m) {
  return std::visit(
      [](const auto &v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Task>)
          return MessageTag::Task;
        else if constexpr (std::is_same_v<T, Finish>)
          return MessageTag::Finish;
        else if constexpr (std::is_same_v<T, ProvideWork>)
          return MessageTag::ProvideWork;
        else if constexpr (std::is_same_v<T, Offload>)
          return MessageTag::Offload;
        else if constexpr (std::is_same_v<T, NoWork>)
          return MessageTag::NoWork;
        else
          return MessageTag::Terminate;
      },
      m);
}

const char *to_string(MessageTag tag) {
  switch (tag) {
  case MessageTag::Task: return "Task";
  case MessageTag::Finish: return "Finish";
  case MessageTag::ProvideWork: return "ProvideWork";
  case MessageTag::Offload: return "Offload";
  case MessageTag::NoWork: return "NoWork";
  case MessageTag::Terminate: return "Terminate";
  }
  return "?";
}

namespace {

void put_strategy(ByteWriter &w, SearchStrategy s) {
  w.u8(static_cast<std::uint8_t>(s.kind));
  if (s.kind == SearchKind::Random)
    w.u64(s.seed);
}

SearchStrategy get_strategy(ByteReader &r) {
  std::uint8_t kind = r.u8();
  switch (kind) {
  case 0: return SearchStrategy::dfs();
  case 1: return SearchStrategy::bfs();
  case 2: return SearchStrategy::random(r.u64());
  default:
    throw DecodeError(DecodeError::Kind::Malformed,
                      "unknown search strategy " + std::to_string(kind));
  }
}

// Bit length, then bits packed MSB first; padding bits are zero.
void put_path(ByteWriter &w, const PathVector &p) {
  w.u32(static_cast<std::uint32_t>(p.size()));
  std::uint8_t acc = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i])
      acc |= static_cast<std::uint8_t>(0x80u >> (i % 8));
    if (i % 8 == 7) {
      w.u8(acc);
      acc = 0;
    }
  }
  if (p.size() % 8)
    w.u8(acc);
}

PathVector get_path(ByteReader &r) {
  std::uint32_t bits = r.u32();
  if ((std::uint64_t(bits) + 7) / 8 > r.remaining())
    throw TruncatedInput();
  PathVector p;
  p.reserve(bits);
  std::uint8_t byte = 0;
  for (std::uint32_t i = 0; i < bits; ++i) {
    if (i % 8 == 0)
      byte = r.u8();
    p.push_back(byte & (0x80u >> (i % 8)));
  }
  if (bits % 8 != 0 && (byte & (0xFFu >> (bits % 8))) != 0)
    throw DecodeError(DecodeError::Kind::Malformed, "nonzero path padding");
  return p;
}

void put_paths(ByteWriter &w, const std::vector<PathVector> &ps) {
  w.u32(static_cast<std::uint32_t>(ps.size()));
  for (const auto &p : ps)
    put_path(w, p);
}

std::vector<PathVector> get_paths(ByteReader &r) {
  std::uint32_t n = r.u32();
  // Each path needs at least its 4-byte length.
  if (n > r.remaining() / 4)
    throw TruncatedInput();
  std::vector<PathVector> ps;
  ps.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i)
    ps.push_back(get_path(r));
  return ps;
}

void put_stats(ByteWriter &w, const RegionStats &s) {
  w.u64(s.states_created);
  w.u64(s.suspended);
  w.u64(s.solver_queries);
  w.u64(s.cache_hits);
  w.u64(s.instructions);
  w.u64(s.completed_paths);
  w.u64(s.frontier_states);
  w.u8(s.partial ? 1 : 0);
}

RegionStats get_stats(ByteReader &r) {
  RegionStats s;
  s.states_created = r.u64();
  s.suspended = r.u64();
  s.solver_queries = r.u64();
  s.cache_hits = r.u64();
  s.instructions = r.u64();
  s.completed_paths = r.u64();
  s.frontier_states = r.u64();
  std::uint8_t partial = r.u8();
  if (partial > 1)
    throw DecodeError(DecodeError::Kind::Malformed, "bad partial flag");
  s.partial = partial == 1;
  return s;
}

} // namespace

void encode_into(const Message &m, std::vector<std::uint8_t> &out) {
  const std::size_t start = out.size();
  ByteWriter w(out);
  w.u32(0); // patched below
  w.u8(static_cast<std::uint8_t>(tag_of(m)));
  std::visit(
      [&](const auto &v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Task>) {
          put_strategy(w, v.strategy);
          encode_test(v.test, w);
          w.u32(v.test_depth);
          w.u32(v.final_depth);
        } else if constexpr (std::is_same_v<T, Finish>) {
          put_stats(w, v.stats);
          put_paths(w, v.completed);
          put_paths(w, v.frontier);
        } else if constexpr (std::is_same_v<T, Offload>) {
          encode_test(v.test, w);
          w.u32(v.test_depth);
        }
      },
      m);
  const std::size_t len = out.size() - start - 4;
  if (len > kMaxFrameLength)
    throw std::length_error("message exceeds maximum frame length");
  for (int i = 0; i < 4; ++i)
    out[start + static_cast<std::size_t>(i)] =
        static_cast<std::uint8_t>(len >> (8 * (3 - i)));
}

std::vector<std::uint8_t> encode(const Message &m) {
  std::vector<std::uint8_t> out;
  encode_into(m, out);
  return out;
}

Message decode(std::span<const std::uint8_t> frame) {
  using Kind = DecodeError::Kind;
  if (frame.size() < 4)
    throw DecodeError(Kind::Truncated, "frame shorter than its length prefix");
  std::uint32_t len = (std::uint32_t(frame[0]) << 24) |
                      (std::uint32_t(frame[1]) << 16) |
                      (std::uint32_t(frame[2]) << 8) | std::uint32_t(frame[3]);
  if (frame.size() - 4 < len)
    throw DecodeError(Kind::Truncated, "frame shorter than declared length");
  if (frame.size() - 4 > len)
    throw DecodeError(Kind::TrailingBytes, "bytes after the declared frame");
  if (len == 0)
    throw DecodeError(Kind::Truncated, "frame has no tag");

  ByteReader r(frame.subspan(5, len - 1));
  const std::uint8_t tag = frame[4];
  Message m;
  try {
    switch (static_cast<MessageTag>(tag)) {
    case MessageTag::Task: {
      Task t;
      t.strategy = get_strategy(r);
      t.test = decode_test(r);
      t.test_depth = r.u32();
      t.final_depth = r.u32();
      m = std::move(t);
      break;
    }
    case MessageTag::Finish: {
      Finish f;
      f.stats = get_stats(r);
      f.completed = get_paths(r);
      f.frontier = get_paths(r);
      m = std::move(f);
      break;
    }
    case MessageTag::ProvideWork:
      m = ProvideWork{};
      break;
    case MessageTag::Offload: {
      Offload o;
      o.test = decode_test(r);
      o.test_depth = r.u32();
      m = std::move(o);
      break;
    }
    case MessageTag::NoWork:
      m = NoWork{};
      break;
    case MessageTag::Terminate:
      m = Terminate{};
      break;
    default:
      throw DecodeError(Kind::UnknownTag,
                        "unknown message tag " + std::to_string(tag));
    }
  } catch (const TruncatedInput &) {
    throw DecodeError(Kind::Truncated, "payload shorter than its fields");
  }
  if (!r.at_end())
    throw DecodeError(Kind::TrailingBytes, "payload has unread bytes");
  return m;
}

void FrameAssembler::feed(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

std::optional<std::vector<std::uint8_t>> FrameAssembler::next_frame() {
  if (buf_.size() < 4)
    return std::nullopt;
  std::uint32_t len = (std::uint32_t(buf_[0]) << 24) |
                      (std::uint32_t(buf_[1]) << 16) |
                      (std::uint32_t(buf_[2]) << 8) | std::uint32_t(buf_[3]);
  if (len > kMaxFrameLength)
    throw DecodeError(DecodeError::Kind::Malformed,
                      "declared frame length too large");
  if (buf_.size() - 4 < len)
    return std::nullopt;
  std::vector<std::uint8_t> frame(buf_.begin(), buf_.begin() + 4 + len);
  buf_.erase(buf_.begin(), buf_.begin() + 4 + len);
  return frame;
}

} // namespace tdp
