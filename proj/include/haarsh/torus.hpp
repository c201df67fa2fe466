#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace haarsh {

/// A point of the nu-torus, coordinates kept in [0, 1) exactly.
struct TorusPoint {
    std::vector<double> coords;

    TorusPoint() = default;
    explicit TorusPoint(std::vector<double> c);

    int dim() const { return static_cast<int>(coords.size()); }
    double operator[](int i) const { return coords[static_cast<size_t>(i)]; }
};

/// x mod 1, folded so the result lies in [0, 1) even when rounding lands on 1.0.
double torus_reduce(double x);

/// dist on T^nu: max over coordinates of the circle distance min(|a-b|, 1-|a-b|).
double torus_distance(const TorusPoint& a, const TorusPoint& b);

/// d frequency vectors alpha^1..alpha^d in R^nu (row-major d x nu).
struct FrequencyMatrix {
    int d = 0;
    int nu = 0;
    std::vector<double> alphas;  // alphas[j*nu + i]

    FrequencyMatrix() = default;
    FrequencyMatrix(int d_, int nu_, std::vector<double> a);

    /// Single-frequency 1d convenience (d = nu = 1).
    static FrequencyMatrix single(double alpha);

    double at(int j, int i) const { return alphas[static_cast<size_t>(j) * nu + i]; }
};

/// T^x omega = omega + sum_j x_j alpha^j (mod 1).
TorusPoint shift(const TorusPoint& omega, std::span<const int64_t> x, const FrequencyMatrix& alpha);

/// Dyadic cell index at generation n: 1-based per axis, k_j = 1 + floor(omega_j 2^n).
/// Valid for n <= 62 (indices fit in uint64).
struct CellIndex {
    int n = 0;
    std::vector<uint64_t> k;  // one entry per axis

    bool operator==(const CellIndex&) const = default;
};

CellIndex cell_index(const TorusPoint& omega, int n);

/// Flattened row-major index in {1, ..., 2^(nu n)}; requires nu*n <= 63.
uint64_t flatten_cell(const CellIndex& idx, int nu);
CellIndex unflatten_cell(uint64_t flat, int n, int nu);

/// Exact cell key at any generation up to kMaxPrefixBits: the concatenated
/// n-bit prefixes of all coordinates. Distinct keys <=> distinct cells.
struct CellKey {
    int n = 0;
    std::vector<uint64_t> words;  // dim * ceil(n/64) words

    bool operator==(const CellKey&) const = default;
    bool operator<(const CellKey& o) const { return words < o.words; }
};

CellKey cell_key(const TorusPoint& omega, int n);

/// Haar wavelet value phi_{n,k}(omega): 0 outside C_{n,k}; inside, the tensor
/// product over axes of +1 on the lower half-cell and -1 on the upper one.
/// Generation 0 is the constant function 1.
int haar_value(const TorusPoint& omega, const CellIndex& idx);

/// The +-1 factor of the cell containing omega (product over axes of the
/// (n+1)-th binary digit sign). Generation 0 returns +1.
int haar_sign(const TorusPoint& omega, int n);

struct DiophantineScan {
    int C_A = 0;                  // smallest admissible integer constant
    double worst_ratio = 0.0;     // max over z of |z|^-A / dist(T^z omega, omega)
    std::vector<int64_t> argmax;  // a maximizing z
};

/// Empirical Uniform Power-law Aperiodicity constant: scans 0 < |z| <= X
/// (max-norm,ist z in Z^d) and returns ceil of the worst ratio. Throws if a
/// scanned distance is exactly zero (rational frequency).
DiophantineScan diophantine_scan(const FrequencyMatrix& alpha, int A, int64_t X);

/// Tempered-divergence constants for toral shifts: the maps are isometries,
/// so (A', C_{A'}) = (0, 1). Hook point for future non-isometric dynamics.
std::pair<int, int> divergence_constants(const FrequencyMatrix& alpha);

}  // namespace haarsh
