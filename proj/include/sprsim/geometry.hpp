#pragma once

#include <cmath>

namespace sprsim {

/// Box geometry shared by neighbor search and the physics kernels.
struct Geometry {
  int dim = 3;
  double box = 1.0;
  bool periodic = true;

  /// Minimum-image component of a separation along one axis.
  double separation(double d) const {
    if (periodic && !(std::fabs(d) < 0.5 * box)) d -= box * std::round(d / box);
    return d;
  }

  /// Maps a coordinate into [0, box) for binning; identity when not periodic.
  double wrap(double x) const {
    if (!periodic) return x;
    double w = x - box * std::floor(x / box);
    return w >= box ? 0.0 : w;
  }
};

}  // namespace sprsim
