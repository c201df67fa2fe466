#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "haarsh/hull.hpp"
#include "haarsh/lattice.hpp"
#include "haarsh/torus.hpp"

namespace haarsh {

/// Everything needed to realize the potential on any cube.
struct PotentialContext {
    TorusPoint omega;
    ThetaField theta;
    FrequencyMatrix alpha;
    HullParams hull;
    double g = 0.0;
    std::optional<int> truncation;  // nullopt = adaptive hull()
};

/// H_Lambda = Delta + g V restricted to a cube with Dirichlet conditions:
/// unit adjacency inside the cube, diagonal g V(x).
struct LocalOperator {
    LatticeCube cube;
    Eigen::MatrixXd matrix;
    double g = 0.0;
    int truncation = -1;  // -1 = adaptive
    uint64_t theta_seed = 0;
};

LocalOperator assemble(const LatticeCube& cube, const PotentialContext& ctx);

struct SpectrumReport {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns, orthonormal
    double max_residual = 0.0;     // max_i ||H psi_i - lambda_i psi_i||_2
    double orthonormality_defect = 0.0;
    bool polished = false;

    std::string to_json(bool include_vectors = false) const;
};

struct EigensystemOptions {
    int64_t cap = 8192;
    bool compute_vectors = true;
    /// One inverse-iteration sharpening pass per eigenvector plus
    /// re-orthonormalization inside near-degenerate clusters. Needed when
    /// certifying eigenvector decay: the hull's lacunary amplitudes produce
    /// exactly-degenerate diagonals in double precision, and raw QL vectors
    /// can leak across quasi-degenerate wells at the 1e-6 level.
    bool polish = false;
    double cluster_rel_gap = 1e-12;
};

SpectrumReport eigensystem(const LocalOperator& op, const EigensystemOptions& opts = {});

struct GreenValue {
    double value = 0.0;
    /// Lower bound on the condition number of (H - E), for trust assessment.
    double condition_estimate = 0.0;
};

/// Entry (x, y) of (H - E)^{-1} by LU solve. Throws when E is an eigenvalue
/// to machine precision (singular factorization).
GreenValue green(const LocalOperator& op, std::span<const int64_t> x, std::span<const int64_t> y, double E);

/// Column (H - E)^{-1} e_y; by symmetry its entries are G(x, y; E).
Eigen::VectorXd green_column(const LocalOperator& op, int64_t y_index, double E,
                             double* condition_estimate = nullptr);

/// Minimal gap of a sorted spectrum; needs >= 2 eigenvalues.
double spectral_separation(const Eigen::VectorXd& eigenvalues);

/// dist(Sigma_1, Sigma_2) = min |E - E'|, two-pointer scan of sorted lists.
double spectra_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct MinPairResult {
    double distance = 0.0;
    Site x, y;                   // minimizing pair of sub-cube centers
    int64_t pairs_total = 0;     // all disjoint pairs in the super-cube
    int64_t pairs_considered = 0;
    int64_t center_stride = 1;   // 1 = exhaustive
};

/// min over disjoint pairs <B_L(x), B_L(y)> inside `super` of the distance
/// between their spectra. Exhaustive when the pair count fits the budget,
/// otherwise the centers are subsampled with a deterministic stride and the
/// plan is reported in the result.
MinPairResult min_pair_spectra_distance(int64_t L, const LatticeCube& super, const PotentialContext& ctx,
                                        int64_t pair_budget = 2'000'000);

}  // namespace haarsh
