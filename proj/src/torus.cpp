#include "haarsh/torus.hpp"

#include <cmath>
#include <stdexcept>

#include "haarsh/rng.hpp"

namespace haarsh {

double torus_reduce(double x) {
    double r = x - std::floor(x);
    if (r >= 1.0) r = 0.0;  // fold the rounding edge case 1.0 back to 0
    return r;
}

TorusPoint::TorusPoint(std::vector<double> c) : coords(std::move(c)) {
    for (double& x : coords) {
        if (!std::isfinite(x)) throw std::invalid_argument("TorusPoint: non-finite coordinate");
        x = torus_reduce(x);
    }
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("torus_distance: dimension mismatch");
    double dist = 0.0;
    for (int i = 0; i < a.dim(); ++i) {
        double t = std::fabs(a[i] - b[i]);
        t = std::min(t, 1.0 - t);
        dist = std::max(dist, t);
    }
    return dist;
}

FrequencyMatrix::FrequencyMatrix(int d_, int nu_, std::vector<double> a)
    : d(d_), nu(nu_), alphas(std::move(a)) {
    if (d < 1 || nu < 1) throw std::invalid_argument("FrequencyMatrix: d, nu must be >= 1");
    if (alphas.size() != static_cast<size_t>(d) * nu)
        throw std::invalid_argument("FrequencyMatrix: needs d*nu entries");
    for (double v : alphas)
        if (!std::isfinite(v)) throw std::invalid_argument("FrequencyMatrix: non-finite entry");
}

FrequencyMatrix FrequencyMatrix::single(double alpha) { return {1, 1, {alpha}}; }

TorusPoint shift(const TorusPoint& omega, std::span<const int64_t> x, const FrequencyMatrix& alpha) {
    if (omega.dim() != alpha.nu) throw std::invalid_argument("shift: point/frequency dimension mismatch");
    if (x.size() != static_cast<size_t>(alpha.d)) throw std::invalid_argument("shift: lattice vector has wrong dimension");
    TorusPoint out = omega;
    for (int i = 0; i < alpha.nu; ++i) {
        double acc = 0.0;
        for (int j = 0; j < alpha.d; ++j) acc += static_cast<double>(x[static_cast<size_t>(j)]) * alpha.at(j, i);
        out.coords[static_cast<size_t>(i)] = torus_reduce(torus_reduce(acc) + omega[i]);
    }
    return out;
}

CellIndex cell_index(const TorusPoint& omega, int n) {
    if (n < 0 || n > 62) throw std::invalid_argument("cell_index: generation must be in [0, 62]");
    CellIndex idx;
    idx.n = n;
    idx.k.resize(static_cast<size_t>(omega.dim()));
    for (int i = 0; i < omega.dim(); ++i)
        idx.k[static_cast<size_t>(i)] = 1 + static_cast<uint64_t>(std::floor(std::ldexp(omega[i], n)));
    return idx;
}

uint64_t flatten_cell(const CellIndex& idx, int nu) {
    if (static_cast<int>(idx.k.size()) != nu) throw std::invalid_argument("flatten_cell: axis count mismatch");
    if (static_cast<int64_t>(nu) * idx.n > 63) throw std::invalid_argument("flatten_cell: nu*n exceeds 63 bits");
    uint64_t flat = 0;
    for (int i = 0; i < nu; ++i) flat = (flat << idx.n) | (idx.k[static_cast<size_t>(i)] - 1);
    return flat + 1;
}

CellIndex unflatten_cell(uint64_t flat, int n, int nu) {
    if (static_cast<int64_t>(nu) * n > 63) throw std::invalid_argument("unflatten_cell: nu*n exceeds 63 bits");
    CellIndex idx;
    idx.n = n;
    idx.k.resize(static_cast<size_t>(nu));
    uint64_t v = flat - 1;
    for (int i = nu - 1; i >= 0; --i) {
        idx.k[static_cast<size_t>(i)] = (v & ((1ULL << n) - 1)) + 1;
        v >>= n;
    }
    return idx;
}

CellKey cell_key(const TorusPoint& omega, int n) {
    CellKey key;
    key.n = n;
    int per_axis = (n + 63) / 64;
    key.words.resize(static_cast<size_t>(per_axis) * omega.dim());
    for (int i = 0; i < omega.dim(); ++i)
        bit_prefix(omega[i], n, key.words.data() + static_cast<size_t>(i) * per_axis);
    return key;
}

int haar_sign(const TorusPoint& omega, int n) {
    if (n == 0) return +1;
    int s = +1;
    for (int i = 0; i < omega.dim(); ++i) {
        auto half = static_cast<uint64_t>(std::floor(std::ldexp(omega[i], n + 1)));
        if (half & 1ULL) s = -s;  // upper half-cell carries -1
    }
    return s;
}

int haar_value(const TorusPoint& omega, const CellIndex& idx) {
    if (idx.n == 0) return 1;
    if (cell_index(omega, idx.n) != idx) return 0;
    return haar_sign(omega, idx.n);
}

DiophantineScan diophantine_scan(const FrequencyMatrix& alpha, int A, int64_t X) {
    if (X < 1) throw std::invalid_argument("diophantine_scan: X must be >= 1");
    if (A < 1) throw std::invalid_argument("diophantine_scan: A must be >= 1");
    DiophantineScan out;
    TorusPoint origin(std::vector<double>(static_cast<size_t>(alpha.nu), 0.0));
    std::vector<int64_t> z(static_cast<size_t>(alpha.d), -X);
    // dist(T^x omega, T^y omega) depends on x - y only, and on z vs -z
    // symmetrically, so scanning the half-space with first nonzero z_j > 0
    // covers every pair.
    auto advance = [&]() -> bool {
        for (int j = alpha.d - 1; j >= 0; --j) {
            if (z[static_cast<size_t>(j)] < X) {
                ++z[static_cast<size_t>(j)];
                for (int l = j + 1; l < alpha.d; ++l) z[static_cast<size_t>(l)] = -X;
                return true;
            }
        }
        return false;
    };
    z.assign(static_cast<size_t>(alpha.d), 0);
    while (advance()) {
        int64_t norm = 0;
        int first_nonzero_sign = 0;
        for (int j = 0; j < alpha.d; ++j) {
            norm = std::max<int64_t>(norm, std::llabs(z[static_cast<size_t>(j)]));
            if (first_nonzero_sign == 0 && z[static_cast<size_t>(j)] != 0)
                first_nonzero_sign = z[static_cast<size_t>(j)] > 0 ? 1 : -1;
        }
        if (norm == 0 || norm > X || first_nonzero_sign < 0) continue;
        double dist = torus_distance(shift(origin, z, alpha), origin);
        if (dist == 0.0) throw std::runtime_error("diophantine_scan: zero distance (periodic orbit) at scanned range");
        double ratio = std::pow(static_cast<double>(norm), -A) / dist;
        if (ratio > out.worst_ratio) {
            out.worst_ratio = ratio;
            out.argmax = z;
        }
    }
    out.C_A = static_cast<int>(std::ceil(out.worst_ratio));
    return out;
}

std::pair<int, int> divergence_constants(const FrequencyMatrix&) { return {0, 1}; }

}  // namespace haarsh
