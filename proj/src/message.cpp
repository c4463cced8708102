#include "sprsim/message.hpp"

#include <string>

namespace sprsim {

std::string_view tag_name(Tag t) {
  switch (t) {
    case Tag::occupancy: return "occupancy";
    case Tag::halo: return "halo";
    case Tag::halo_density: return "halo_density";
    case Tag::replica_init: return "replica_init";
    case Tag::replica_halo: return "replica_halo";
    case Tag::replica_halo_density: return "replica_halo_density";
    case Tag::refresh: return "refresh";
    case Tag::replica_result: return "replica_result";
    case Tag::reduce: return "reduce";
    case Tag::broadcast: return "broadcast";
  }
  return "?";
}

MessageBus::MessageBus(int ranks)
    : ranks_(ranks),
      channels_(static_cast<std::size_t>(ranks) * ranks),
      bytes_sent_(ranks, 0),
      messages_sent_(ranks, 0) {}

void MessageBus::send(int src, int dst, Tag tag, std::uint64_t stamp,
                      std::vector<std::byte> payload) {
  if (src < 0 || src >= ranks_ || dst < 0 || dst >= ranks_)
    throw ProtocolError("send between unknown ranks " + std::to_string(src) + " -> " +
                        std::to_string(dst));
  bytes_sent_[src] += payload.size();
  ++messages_sent_[src];
  if (tracing_) trace_.push_back({TraceEvent::Kind::send, src, tag, stamp});
  channel(src, dst).push_back(Message{src, dst, tag, stamp, std::move(payload)});
}

Message MessageBus::recv(int dst, int src, Tag tag, std::uint64_t stamp) {
  auto& ch = channel(src, dst);
  if (ch.empty())
    throw ProtocolError("rank " + std::to_string(dst) + " expected " + std::string(tag_name(tag)) +
                        " from rank " + std::to_string(src) + " at stamp " +
                        std::to_string(stamp) + " but nothing arrived");
  Message m = std::move(ch.front());
  ch.pop_front();
  if (m.tag != tag || m.stamp != stamp)
    throw ProtocolError("rank " + std::to_string(dst) + " expected " + std::string(tag_name(tag)) +
                        "@" + std::to_string(stamp) + " from rank " + std::to_string(src) +
                        ", got " + std::string(tag_name(m.tag)) + "@" + std::to_string(m.stamp));
  return m;
}

bool MessageBus::idle() const {
  for (const auto& ch : channels_)
    if (!ch.empty()) return false;
  return true;
}

void MessageBus::clear() {
  for (auto& ch : channels_) ch.clear();
}

void MessageBus::note_detect(int rank, std::uint64_t stamp) {
  if (tracing_) trace_.push_back({TraceEvent::Kind::detect, rank, Tag::replica_result, stamp});
}

}  // namespace sprsim
