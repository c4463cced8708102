#include "sprsim/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "sprsim/errors.hpp"

namespace sprsim {

static_assert(std::endian::native == std::endian::little,
              "checkpoint encoding assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'S', 'P', 'R', 'C', 'K', 'P', 'T', '\0'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8 + 8 + 8 + 8 + 8;

template <typename T>
void put(std::vector<std::byte>& out, const T& v) {
  auto old = out.size();
  out.resize(old + sizeof(T));
  std::memcpy(out.data() + old, &v, sizeof(T));
}

template <typename T>
void put_array(std::vector<std::byte>& out, const std::vector<T>& v) {
  auto old = out.size();
  out.resize(old + v.size() * sizeof(T));
  if (!v.empty()) std::memcpy(out.data() + old, v.data(), v.size() * sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> b) : b_(b) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  template <typename T>
  void get_array(std::vector<T>& v, std::size_t n) {
    if (n > (b_.size() - pos_) / sizeof(T)) throw CheckpointError("checkpoint is truncated");
    v.resize(n);
    if (n) std::memcpy(v.data(), b_.data() + pos_, n * sizeof(T));
    pos_ += n * sizeof(T);
  }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > b_.size() - pos_) throw CheckpointError("checkpoint is truncated");
  }
  std::span<const std::byte> b_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t Checkpoint::particle_count() const {
  std::size_t n = 0;
  for (const auto& r : ranks) n += r.size();
  return n;
}

bool Checkpoint::bit_equal(const Checkpoint& o) const {
  if (version != o.version || step != o.step || rng_state != o.rng_state ||
      std::bit_cast<std::uint64_t>(dt) != std::bit_cast<std::uint64_t>(o.dt) ||
      std::bit_cast<std::uint64_t>(time) != std::bit_cast<std::uint64_t>(o.time) ||
      ranks.size() != o.ranks.size())
    return false;
  for (std::size_t q = 0; q < ranks.size(); ++q)
    if (!ranks[q].bit_equal(o.ranks[q])) return false;
  return true;
}

std::vector<std::byte> encode_checkpoint(const Checkpoint& c) {
  std::vector<std::byte> out;
  out.reserve(kHeaderBytes + c.particle_count() * (kFieldCount + 1) * 8 + c.ranks.size() * 8);
  for (char ch : kMagic) out.push_back(static_cast<std::byte>(ch));
  put<std::uint32_t>(out, c.version);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.ranks.size()));
  put<std::uint64_t>(out, c.particle_count());
  put<std::uint64_t>(out, c.step);
  put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(c.dt));
  put<std::uint64_t>(out, std::bit_cast<std::uint64_t>(c.time));
  put<std::uint64_t>(out, c.rng_state);
  for (const auto& r : c.ranks) {
    put<std::uint64_t>(out, r.size());
    put_array(out, r.global_id);
    for (Field f : all_fields()) put_array(out, r[f]);
  }
  return out;
}

Checkpoint decode_checkpoint(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderBytes) throw CheckpointError("checkpoint is shorter than its header");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
    throw CheckpointError("not a checkpoint file (bad magic)");
  Reader r(bytes.subspan(sizeof kMagic));
  Checkpoint c;
  c.version = r.get<std::uint32_t>();
  if (c.version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(c.version));
  const auto Q = r.get<std::uint32_t>();
  const auto n = r.get<std::uint64_t>();
  c.step = r.get<std::uint64_t>();
  c.dt = std::bit_cast<double>(r.get<std::uint64_t>());
  c.time = std::bit_cast<double>(r.get<std::uint64_t>());
  c.rng_state = r.get<std::uint64_t>();
  const std::size_t expected =
      kHeaderBytes + static_cast<std::size_t>(Q) * 8 + n * (kFieldCount + 1) * 8;
  if (bytes.size() != expected)
    throw CheckpointError("checkpoint length " + std::to_string(bytes.size()) +
                          " does not match the header (expected " + std::to_string(expected) +
                          ")");
  c.ranks.resize(Q);
  std::size_t seen = 0;
  for (auto& ps : c.ranks) {
    const auto nq = r.get<std::uint64_t>();
    seen += nq;
    if (seen > n) throw CheckpointError("per-rank counts exceed the particle count");
    r.get_array(ps.global_id, nq);
    for (Field f : all_fields()) r.get_array(ps[f], nq);
  }
  if (seen != n || r.remaining() != 0) throw CheckpointError("checkpoint body is inconsistent");
  return c;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  auto bytes = encode_checkpoint(c);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw CheckpointError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw CheckpointError("failed writing " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CheckpointError("cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(std::as_bytes(std::span<const char>(raw)));
}

}  // namespace sprsim
