#pragma once

#include <cstddef>
#include <cstdint>
#include <cstring>
#include <deque>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

#include "sprsim/errors.hpp"

namespace sprsim {

enum class Tag : std::uint8_t {
  occupancy,
  halo,
  halo_density,
  replica_init,
  replica_halo,
  replica_halo_density,
  refresh,
  replica_result,
  reduce,
  broadcast,
};

std::string_view tag_name(Tag tag);

struct Message {
  int src = 0;
  int dst = 0;
  Tag tag = Tag::reduce;
  std::uint64_t stamp = 0;
  std::vector<std::byte> payload;
};

/// One entry of the global send/detect trace used by containment checks.
struct TraceEvent {
  enum class Kind : std::uint8_t { send, detect };
  Kind kind;
  int rank;
  Tag tag;  // meaningful for sends
  std::uint64_t stamp;
};

/// Ordered, reliable point-to-point channels between simulated ranks.
///
/// Delivery is FIFO per (src, dst) pair. `recv` never blocks: the scheduler
/// drives ranks phase by phase, so a missing message is a protocol error.
class MessageBus {
 public:
  explicit MessageBus(int ranks);

  int ranks() const { return ranks_; }

  void send(int src, int dst, Tag tag, std::uint64_t stamp, std::vector<std::byte> payload);
  Message recv(int dst, int src, Tag tag, std::uint64_t stamp);

  /// True when no message is in flight.
  bool idle() const;
  void clear();

  std::uint64_t bytes_sent(int rank) const { return bytes_sent_[rank]; }
  std::uint64_t messages_sent(int rank) const { return messages_sent_[rank]; }

  void enable_trace(bool on) { tracing_ = on; }
  void note_detect(int rank, std::uint64_t stamp);
  const std::vector<TraceEvent>& trace() const { return trace_; }

 private:
  std::deque<Message>& channel(int src, int dst) { return channels_[src * ranks_ + dst]; }

  int ranks_;
  std::vector<std::deque<Message>> channels_;
  std::vector<std::uint64_t> bytes_sent_;
  std::vector<std::uint64_t> messages_sent_;
  bool tracing_ = false;
  std::vector<TraceEvent> trace_;
};

/// Appends trivially copyable values to a byte buffer.
class ByteWriter {
 public:
  template <typename T>
  void put(const T& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    auto old = buf_.size();
    buf_.resize(old + sizeof(T));
    std::memcpy(buf_.data() + old, &v, sizeof(T));
  }

  template <typename T>
  void put_span(std::span<const T> v) {
    static_assert(std::is_trivially_copyable_v<T>);
    put<std::uint64_t>(v.size());
    auto old = buf_.size();
    buf_.resize(old + v.size_bytes());
    if (!v.empty()) std::memcpy(buf_.data() + old, v.data(), v.size_bytes());
  }

  template <typename T>
  void put_vector(const std::vector<T>& v) {
    put_span(std::span<const T>(v));
  }

  std::vector<std::byte> take() { return std::move(buf_); }

 private:
  std::vector<std::byte> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> data) : data_(data) {}

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  template <typename T>
  std::vector<T> get_vector() {
    auto n = get<std::uint64_t>();
    need(n * sizeof(T));
    std::vector<T> v(n);
    if (n) std::memcpy(v.data(), data_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return v;
  }

  /// Reads a length-prefixed array into `dst` at `offset`, which must fit.
  template <typename T>
  std::size_t get_into(std::vector<T>& dst, std::size_t offset) {
    auto n = get<std::uint64_t>();
    need(n * sizeof(T));
    if (offset + n > dst.size()) throw ProtocolError("payload array exceeds destination");
    if (n) std::memcpy(dst.data() + offset, data_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
    return n;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw ProtocolError("truncated message payload");
  }

  std::span<const std::byte> data_;
  std::size_t pos_ = 0;
};

}  // namespace sprsim
