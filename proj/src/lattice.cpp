#include "haarsh/lattice.hpp"

#include <cmath>
#include <stdexcept>

namespace haarsh {

LatticeCube::LatticeCube(Site u, int64_t L) : center(std::move(u)), radius(L) {
    if (center.empty()) throw std::invalid_argument("LatticeCube: dimension must be >= 1");
    if (L < 0) throw std::invalid_argument("LatticeCube: radius must be >= 0");
}

int64_t LatticeCube::site_count() const {
    int64_t n = 1;
    for (int i = 0; i < dim(); ++i) {
        if (n > (int64_t{1} << 62) / side()) throw std::overflow_error("LatticeCube: site count overflow");
        n *= side();
    }
    return n;
}

Site LatticeCube::site(int64_t index) const {
    if (index < 0 || index >= site_count()) throw std::out_of_range("LatticeCube: site index out of range");
    Site s(center.size());
    for (int i = dim() - 1; i >= 0; --i) {
        s[static_cast<size_t>(i)] = center[static_cast<size_t>(i)] - radius + (index % side());
        index /= side();
    }
    return s;
}

int64_t LatticeCube::index_of(std::span<const int64_t> s) const {
    if (!contains(s)) return -1;
    int64_t idx = 0;
    for (int i = 0; i < dim(); ++i)
        idx = idx * side() + (s[static_cast<size_t>(i)] - center[static_cast<size_t>(i)] + radius);
    return idx;
}

bool LatticeCube::contains(std::span<const int64_t> s) const {
    if (s.size() != center.size()) return false;
    for (int i = 0; i < dim(); ++i)
        if (std::llabs(s[static_cast<size_t>(i)] - center[static_cast<size_t>(i)]) > radius) return false;
    return true;
}

bool LatticeCube::contains_cube(const LatticeCube& inner) const {
    if (inner.dim() != dim()) return false;
    for (int i = 0; i < dim(); ++i)
        if (std::llabs(inner.center[static_cast<size_t>(i)] - center[static_cast<size_t>(i)]) + inner.radius > radius)
            return false;
    return true;
}

bool LatticeCube::disjoint_from(const LatticeCube& other) const {
    int64_t dist = 0;
    for (int i = 0; i < dim(); ++i)
        dist = std::max<int64_t>(dist, std::llabs(other.center[static_cast<size_t>(i)] - center[static_cast<size_t>(i)]));
    return dist > radius + other.radius;
}

int64_t LatticeCube::boundary_distance(std::span<const int64_t> s) const {
    int64_t d = 0;
    for (int i = 0; i < dim(); ++i)
        d = std::max<int64_t>(d, std::llabs(s[static_cast<size_t>(i)] - center[static_cast<size_t>(i)]));
    return radius - d;
}

BoundarySet boundaries(const LatticeCube& cube, const LatticeCube* ambient) {
    if (ambient) {
        if (!ambient->contains_cube(cube)) throw std::invalid_argument("boundaries: cube not inside ambient");
        if (ambient->radius == cube.radius) throw std::invalid_argument("boundaries: cube equals ambient");
    }
    BoundarySet bs;
    const int d = cube.dim();
    const int64_t n = cube.site_count();
    for (int64_t i = 0; i < n; ++i) {
        Site x = cube.site(i);
        bool is_inner = false;
        for (int j = 0; j < d && !is_inner; ++j)
            for (int sgn : {-1, +1}) {
                Site y = x;
                y[static_cast<size_t>(j)] += sgn;
                if (!cube.contains(y) && (!ambient || ambient->contains(y))) {
                    is_inner = true;
                    break;
                }
            }
        if (!is_inner) continue;
        bs.inner.push_back(x);
        for (int j = 0; j < d; ++j)
            for (int sgn : {-1, +1}) {
                Site y = x;
                y[static_cast<size_t>(j)] += sgn;
                if (!cube.contains(y) && (!ambient || ambient->contains(y))) bs.edges.emplace_back(x, y);
            }
    }
    // del^+ = distinct outer endpoints of the edge set
    for (const auto& [x, y] : bs.edges) {
        bool seen = false;
        for (const auto& o : bs.outer)
            if (o == y) {
                seen = true;
                break;
            }
        if (!seen) bs.outer.push_back(y);
    }
    return bs;
}

}  // namespace haarsh
