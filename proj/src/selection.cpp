#include "sprsim/selection.hpp"

namespace sprsim {

SelectionSet select_particles(int rank, const NeighborTable& table, std::size_t owned_count) {
  SelectionSet s;
  s.rank = rank;
  s.owned_count = owned_count;
  std::vector<char> removed(owned_count, 0), chosen(owned_count, 0);
  for (std::size_t i = 0; i < owned_count; ++i) {
    if (removed[i]) continue;
    auto row = table.row(i);
    bool blocked = false;
    for (std::uint32_t j : row) {
      if (j < owned_count && chosen[j]) {
        blocked = true;
        break;
      }
    }
    if (blocked) continue;
    chosen[i] = 1;
    s.selected.push_back(static_cast<std::uint32_t>(i));
    for (std::uint32_t j : row)
      if (j < owned_count) removed[j] = 1;
  }
  return s;
}

}  // namespace sprsim
