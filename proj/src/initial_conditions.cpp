#include "sprsim/initial_conditions.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sprsim/errors.hpp"
#include "sprsim/geometry.hpp"

namespace sprsim {

std::string_view workload_name(Workload k) {
  switch (k) {
    case Workload::uniform_lattice: return "uniform-lattice";
    case Workload::perturbed_lattice: return "perturbed-lattice";
    case Workload::hot_sphere: return "hot-sphere";
  }
  return "?";
}

std::optional<Workload> parse_workload(std::string_view s) {
  for (auto k : {Workload::uniform_lattice, Workload::perturbed_lattice, Workload::hot_sphere})
    if (s == workload_name(k)) return k;
  return std::nullopt;
}

std::size_t lattice_side(std::size_t n, int dim) {
  double root = dim == 3 ? std::cbrt(static_cast<double>(n)) : std::sqrt(static_cast<double>(n));
  auto side = static_cast<std::size_t>(std::llround(root));
  std::size_t p = dim == 3 ? side * side * side : side * side;
  if (n == 0 || p != n)
    throw ConfigError("particle_count = " + std::to_string(n) + ": not a perfect " +
                      (dim == 3 ? "cube" : "square") + ", no lattice exists");
  return side;
}

ParticleSystem generate_initial_conditions(Workload kind, const SimConfig& c) {
  const int dim = c.dimensionality;
  const std::size_t side = lattice_side(c.particle_count, dim);
  const std::size_t nz = dim == 3 ? side : 1;
  const double L = c.box_length;
  const double a = L / static_cast<double>(side);
  const double volume = dim == 3 ? L * L * L : L * L;
  const double m = c.rest_density * volume / static_cast<double>(c.particle_count);
  const double h0 = initial_smoothing_length(c);
  const Geometry geom{dim, L, c.periodic};

  ParticleSystem ps;
  ps.resize(c.particle_count);
  std::mt19937_64 rng(c.rng_seed);
  std::uniform_real_distribution<double> shift(-kPerturbation * a, kPerturbation * a);

  std::size_t id = 0;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      for (std::size_t k = 0; k < nz; ++k, ++id) {
        ps.global_id[id] = id;
        ps.x[id] = (static_cast<double>(i) + 0.5) * a;
        ps.y[id] = (static_cast<double>(j) + 0.5) * a;
        ps.z[id] = dim == 3 ? (static_cast<double>(k) + 0.5) * a : 0.0;
        if (kind == Workload::perturbed_lattice) {
          ps.x[id] = geom.wrap(ps.x[id] + shift(rng));
          ps.y[id] = geom.wrap(ps.y[id] + shift(rng));
          if (dim == 3) ps.z[id] = geom.wrap(ps.z[id] + shift(rng));
        }
        ps.vx[id] = ps.vy[id] = ps.vz[id] = 0.0;
        ps.mass[id] = m;
        ps.internal_energy[id] = c.base_energy;
        ps.density[id] = c.rest_density;
        ps.smoothing_length[id] = h0;
        ps.ax[id] = ps.ay[id] = ps.az[id] = ps.energy_rate[id] = 0.0;
      }
    }
  }

  if (kind == Workload::hot_sphere) {
    const double centre = 0.5 * L;
    const double radius = kHotSphereRadius * L;
    for (std::size_t p = 0; p < ps.size(); ++p) {
      double dx = ps.x[p] - centre, dy = ps.y[p] - centre;
      double dz = dim == 3 ? ps.z[p] - centre : 0.0;
      if (std::sqrt(dx * dx + dy * dy + dz * dz) < radius)
        ps.internal_energy[p] *= kHotSphereBoost;
    }
  }
  return ps;
}

}  // namespace sprsim
