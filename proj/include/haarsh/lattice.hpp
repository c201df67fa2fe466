#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace haarsh {

using Site = std::vector<int64_t>;

/// Max-norm cube B_L(u) in Z^d with a fixed lexicographic site enumeration.
struct LatticeCube {
    Site center;
    int64_t radius = 0;

    LatticeCube() = default;
    LatticeCube(Site u, int64_t L);

    int dim() const { return static_cast<int>(center.size()); }
    int64_t side() const { return 2 * radius + 1; }
    int64_t site_count() const;

    /// Lexicographic enumeration over offsets in [-L, L]^d, stable forever.
    Site site(int64_t index) const;
    int64_t index_of(std::span<const int64_t> s) const;  // -1 when outside
    bool contains(std::span<const int64_t> s) const;
    bool contains_cube(const LatticeCube& inner) const;
    bool disjoint_from(const LatticeCube& other) const;

    /// Max-norm distance from a site to the cube's boundary sphere,
    /// radius - |s - center|; negative outside.
    int64_t boundary_distance(std::span<const int64_t> s) const;
};

struct BoundarySet {
    std::vector<Site> inner;                     // del^- Lambda
    std::vector<Site> outer;                     // del^+ Lambda
    std::vector<std::pair<Site, Site>> edges;    // del Lambda, |x-y| = 1
};

/// Internal/external/edge boundaries of the cube, nearest-neighbor metric.
/// With an ambient region, the complement is taken inside it; throws when
/// the cube fills the ambient completely.
BoundarySet boundaries(const LatticeCube& cube, const LatticeCube* ambient = nullptr);

}  // namespace haarsh
