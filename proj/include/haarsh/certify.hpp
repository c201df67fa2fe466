#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "haarsh/local_operator.hpp"
#include "haarsh/log_domain.hpp"
#include "haarsh/schedule.hpp"

namespace haarsh {

struct CubeVerdict {
    Site center;
    int64_t radius = 0;
    double energy = 0.0;
    std::optional<bool> resonant;       // E-R flag
    std::optional<bool> singular;       // (E,m)-S flag
    bool resonant_annotation = false;   // E hit the spectrum during the Green solve
    double min_spectral_distance = -1.0;
    double max_boundary_green = -1.0;
    double ns_threshold = -1.0;         // (3L)^{-d} e^{-gamma(m,L)} or the L=0 variant
    double m = 0.0;
    LogMagnitude width;                 // resonance width used, log domain
};

/// E-resonance: min_i |lambda_i - E| < width. The comparison happens in log
/// domain so paper-exact widths far below double underflow stay meaningful.
CubeVerdict is_E_resonant(const Eigen::VectorXd& spectrum, const LatticeCube& cube, double E,
                          const LogMagnitude& width);

/// (E,m)-non-singularity: every inner-boundary Green value from the center
/// stays below (3L)^{-d} e^{-gamma(m,L)} (L >= 1) or (2d)^{-1} e^{-gamma(m,0)}
/// (L = 0). E inside the spectrum classifies as singular with the resonant
/// annotation set.
CubeVerdict is_EmNS(const LocalOperator& op, double E, double m);

struct CombesThomasResult {
    bool precondition_ok = false;  // dist(E, Sigma) >= eta > 4d
    bool holds = false;
    double worst_ratio = 0.0;      // max over pairs of |G| / bound
    int64_t worst_x = -1, worst_y = -1;
    double mu = 0.0;
};

/// Checks |G(x,y;E)| <= 2 eta^{-1} e^{-mu |x-y|}, mu = (1/2) ln(eta / 4d),
/// over all site pairs. `slack` is the numerical tolerance on the ratio.
CombesThomasResult combes_thomas_check(const LocalOperator& op, const Eigen::VectorXd& spectrum,
                                       double E, double eta, double slack = 1e-9);

/// Smallest eta for which the Combes-Thomas bound at distance L already
/// clears the (E,m)-NS threshold; E-non-resonance at this width forces
/// non-singularity outright.
double ct_strong_width(double m, int64_t L, int d);

/// q^floor((L+1)/(ell+1)) * M.
double dominated_bound(double q, int64_t ell, int64_t L, double M);

struct DominatedResult {
    bool dominated = false;
    std::optional<Site> violating_center;
};

/// (ell,q)-domination of |f| in B_L(u): every sub-cube center x with
/// B_ell(x) inside the cube satisfies |f(x)| <= q max_{|y-x| <= ell+1} |f(y)|,
/// the max running over the ambient cube that carries f.
DominatedResult is_dominated(std::span<const double> f, int64_t ell, double q, const LatticeCube& cube,
                             const LatticeCube& ambient);

struct GoodBadResult {
    bool good = true;
    double witness_energy = 0.0;
    Site witness_x, witness_y;
    int64_t singular_checks = 0;  // Green solves spent
};

/// m-bad iff some energy in the set admits two disjoint (E,m)-S sub-cubes of
/// the given radius inside `super`. Sub-cubes whose spectra sit further than
/// ct_strong_width from E are non-singular by Combes-Thomas and are skipped.
GoodBadResult classify_good_bad(const LatticeCube& super, int64_t sub_radius, std::span<const double> energies,
                                double m, const PotentialContext& ctx);

struct SamplingPlan {
    int64_t center_stride = 1;
    int64_t centers_used = 0;
    int64_t energy_stride = 1;
    int64_t energies_used = 0;
    int64_t pair_budget = 0;
    int64_t pairs_considered = 0;
};

struct SparsenessCertificate {
    int j = 0;
    Site super_center;
    int64_t super_radius = 0;
    bool pass = false;
    double m = 0.0;
    LogMagnitude width;            // scale-j resonance width
    double min_pair_distance = -1.0;
    double witness_energy = 0.0;
    Site witness_x, witness_y;     // populated on failure
    SamplingPlan plan;
    std::string to_json() const;
};

struct SparsenessOptions {
    std::optional<double> width_override;  // practical width; default = paper-exact g delta_j
    double m = 1.0;
    int64_t pair_budget = 2'000'000;
    int64_t energy_budget = 512;  // energy-set subsample cap for the S scan
};

/// SS(L_j): j = -1 reduces to the potential-separation criterion on
/// B_{L0^4}(0); j >= 0 runs the spectra-distance shortcut over disjoint
/// sub-cube pairs and scans flagged near pairs for joint (E,m)-singularity
/// at candidate energies drawn from the sub-cube spectra.
SparsenessCertificate verify_sparseness(int j, const PotentialContext& ctx, const ModelParams& params,
                                        int64_t L0, const SparsenessOptions& opts = {});

struct ScaleInductionConfig {
    ModelParams params;
    FrequencyMatrix alpha;
    int64_t L0 = 3;
    int j_max = 0;
    int n_samples = 10;
    uint64_t master_seed = 1;
    std::vector<double> ss_widths;  // practical SS width per j >= 0; empty = paper-exact
    double m = 1.0;
    int64_t pair_budget = 200'000;
    int64_t energy_budget = 256;
    bool check_nr_good_ns = true;   // verify E-NR + m-good => (E,m)-NS on the j+1 super-cube
};

/// Monte-Carlo scale-induction report: per scale, SS pass rates, resonant and
/// singular cube counts, good/bad verdicts, and the non-resonant-and-good
/// implies non-singular confirmation counts. Returns machine-readable JSON.
std::string scale_induction_report(const ScaleInductionConfig& cfg);

}  // namespace haarsh
