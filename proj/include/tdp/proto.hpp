#pragma once

#include "tdp/engine.hpp"
#include "tdp/solve.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

namespace tdp {

/// Work assignment: explore the region of (test, test_depth).
struct Task {
  SearchStrategy strategy;
  Test test;
  std::uint32_t test_depth = 0;
  std::uint32_t final_depth = 0;
  bool operator==(const Task &) const = default;
};

/// Region finished. Carries the region statistics and the paths it
/// produced so the coordinator can assemble the run's path multiset.
struct Finish {
  RegionStats stats;
  std::vector<PathVector> completed;
  std::vector<PathVector> frontier;
  bool operator==(const Finish &) const = default;
};

struct ProvideWork {
  bool operator==(const ProvideWork &) const = default;
};

/// A carved-off active state, as a test-depth pair.
struct Offload {
  Test test;
  std::uint32_t test_depth = 0;
  bool operator==(const Offload &) const = default;
};

struct NoWork {
  bool operator==(const NoWork &) const = default;
};

struct Terminate {
  bool operator==(const Terminate &) const = default;
};

using Message = std::variant<Task, Finish, ProvideWork, Offload, NoWork, Terminate>;

enum class MessageTag : std::uint8_t {
  Task = 0x01,
  Finish = 0x02,
  ProvideWork = 0x03,
  Offload = 0x04,
  NoWork = 0x05,
  Terminate = 0x06,
};

MessageTag tag_of(const Message &m);
const char *to_string(MessageTag tag);

class DecodeError : public std::runtime_error {
public:
  enum class Kind { UnknownTag, Truncated, TrailingBytes, Malformed };
  DecodeError(Kind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

private:
  Kind kind_;
};

/// Upper bound on a frame's declared length; larger frames are rejected.
inline constexpr std::uint32_t kMaxFrameLength = 64u << 20;

/// Frame: u32 BE length of everything after it, tag byte, payload.
std::vector<std::uint8_t> encode(const Message &m);
void encode_into(const Message &m, std::vector<std::uint8_t> &out);

/// Decodes exactly one complete frame.
Message decode(std::span<const std::uint8_t> frame);

/// Accumulates stream bytes and splits them into frames.
class FrameAssembler {
public:
  void feed(std::span<const std::uint8_t> bytes);
  /// Next complete frame (length prefix included), if buffered.
  std::optional<std::vector<std::uint8_t>> next_frame();
  std::size_t buffered() const { return buf_.size(); }

private:
  std::vector<std::uint8_t> buf_;
};

} // namespace tdp
