#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nclheat {

/**
 * Graded time mesh t_j = T (j/N)^r, j = 0..N. Grading r > 1 clusters nodes
 * near t = 0 where the solutions behave like t^(-1/2); r = 2 makes
 * sqrt(t_j) uniform, which the product-integration schemes exploit.
 */
struct GradedMesh {
  double horizon = 0;
  int count = 0;
  double grading = 1;
  std::vector<double> nodes;

  double at(int j) const { return nodes[static_cast<std::size_t>(j)]; }
};

inline GradedMesh build_graded(double T, int N, double r) {
  if (!(T > 0)) throw std::invalid_argument("build_graded: horizon must be positive");
  if (N < 2) throw std::invalid_argument("build_graded: need at least 2 intervals");
  if (!(r >= 1)) throw std::invalid_argument("build_graded: grading must be >= 1");
  GradedMesh m{T, N, r, {}};
  m.nodes.resize(static_cast<std::size_t>(N) + 1);
  m.nodes[0] = 0.0;
  for (int j = 1; j < N; ++j)
    m.nodes[static_cast<std::size_t>(j)] = T * std::pow(static_cast<double>(j) / N, r);
  m.nodes[static_cast<std::size_t>(N)] = T;  // pow(1,r)=1; pinned anyway
  for (int j = 0; j < N; ++j)
    if (!(m.nodes[static_cast<std::size_t>(j)] < m.nodes[static_cast<std::size_t>(j) + 1]))
      throw std::invalid_argument("build_graded: nodes not strictly increasing");
  return m;
}

/**
 * Uniform spatial grid: nodes on [origin, origin + extent]. The 1D x-axis
 * uses [0, L]; the transverse y-axis in the n=2 solver uses [-L, L].
 */
struct SpatialGrid {
  double half_width = 0;  // L
  int count = 0;          // number of nodes
  double spacing = 0;
  std::vector<double> nodes;

  double at(int i) const { return nodes[static_cast<std::size_t>(i)]; }
};

inline SpatialGrid axis_grid(double L, int M) {
  if (!(L > 0)) throw std::invalid_argument("axis_grid: half_width must be positive");
  if (M < 2) throw std::invalid_argument("axis_grid: need at least 2 nodes");
  SpatialGrid g{L, M, L / (M - 1), {}};
  g.nodes.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) g.nodes[static_cast<std::size_t>(i)] = L * i / (M - 1);
  g.nodes.back() = L;
  return g;
}

inline SpatialGrid transverse_grid(double L, int M) {
  if (!(L > 0)) throw std::invalid_argument("transverse_grid: half_width must be positive");
  if (M < 3) throw std::invalid_argument("transverse_grid: need at least 3 nodes");
  SpatialGrid g{L, M, 2 * L / (M - 1), {}};
  g.nodes.resize(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) g.nodes[static_cast<std::size_t>(i)] = -L + 2 * L * i / (M - 1);
  g.nodes.back() = L;
  return g;
}

/// Default truncation of the half-space: Gaussian tails of the heat kernels
/// are below 1e-15 at x = 12 sqrt(T) for every t <= T.
inline double default_truncation(double T) { return 12.0 * std::sqrt(T); }

}  // namespace nclheat
