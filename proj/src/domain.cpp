#include "sprsim/domain.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "sprsim/errors.hpp"

namespace sprsim {

int RankLayout::owner_of(std::uint64_t gid) const {
  auto it = owner.find(gid);
  if (it == owner.end()) throw Error("global id " + std::to_string(gid) + " has no owner");
  return it->second;
}

RankLayout decompose_domain(const SimConfig& config, const ParticleSystem& global) {
  const int Q = config.rank_count;
  const std::size_t n = global.size();
  if (Q < 2)
    throw ConfigError("rank_count = " + std::to_string(Q) +
                      ": at least 2 ranks are required so the replication target is distinct");
  if (n == 0) throw ConfigError("cannot decompose an empty particle set");
  if (static_cast<std::size_t>(Q) > n)
    throw ConfigError("rank_count = " + std::to_string(Q) + " exceeds the particle count " +
                      std::to_string(n));
  const double L = config.box_length;
  for (std::size_t i = 0; i < n; ++i) {
    for (double v : {global.x[i], global.y[i], global.z[i]}) {
      if (!(v >= 0.0 && v <= L)) throw ConfigError("particle position outside the box");
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (global.x[a] != global.x[b]) return global.x[a] < global.x[b];
    return global.global_id[a] < global.global_id[b];
  });

  RankLayout layout;
  layout.rank_count = Q;
  layout.slab_lo.assign(Q, 0.0);
  layout.slab_hi.assign(Q, L);
  layout.owned_ids.resize(Q);
  layout.owner.reserve(n);

  const std::size_t base = n / Q, extra = n % Q;
  std::size_t pos = 0;
  for (int q = 0; q < Q; ++q) {
    std::size_t len = base + (static_cast<std::size_t>(q) < extra ? 1 : 0);
    auto& ids = layout.owned_ids[q];
    for (std::size_t k = pos; k < pos + len; ++k) {
      ids.push_back(global.global_id[order[k]]);
      if (!layout.owner.emplace(global.global_id[order[k]], q).second)
        throw ConfigError("duplicate global id " + std::to_string(global.global_id[order[k]]));
    }
    std::sort(ids.begin(), ids.end());
    if (q + 1 < Q) {
      double edge = 0.5 * (global.x[order[pos + len - 1]] + global.x[order[pos + len]]);
      layout.slab_hi[q] = edge;
      layout.slab_lo[q + 1] = edge;
    }
    pos += len;
  }
  return layout;
}

std::vector<ParticleSystem> scatter(const ParticleSystem& global, const RankLayout& layout) {
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(global.size());
  for (std::size_t i = 0; i < global.size(); ++i) index.emplace(global.global_id[i], i);
  std::vector<ParticleSystem> out(layout.rank_count);
  for (int q = 0; q < layout.rank_count; ++q) {
    out[q].reserve(layout.owned_ids[q].size());
    for (std::uint64_t gid : layout.owned_ids[q]) out[q].push_back_from(global, index.at(gid));
  }
  return out;
}

}  // namespace sprsim
