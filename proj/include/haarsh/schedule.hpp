#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "haarsh/hull.hpp"
#include "haarsh/log_domain.hpp"

namespace haarsh {

/// All model constants in one place, with the derived quantities the
/// estimates use.
struct ModelParams {
    int d = 1;
    int nu = 1;
    int A = 1;
    int C_A = 1;
    int A_prime = 0;
    int C_A_prime = 1;
    double b = 2.0;
    int amp_exponent_factor = 2;
    double g = 0.0;
    double m = 1.0;

    double B() const;       // 800 b A^2 / ln 2
    double c1() const;      // 1 / (58 A sqrt(b))
    double c2_min() const;  // 68 A b
    HullParams hull_params() const { return {b, amp_exponent_factor, nu}; }
};

/// L_j = L_0^(2^j) for j >= 0; L_{-1} = 0. Overflow-guarded.
int64_t length_scale(int j, int64_t L0);

/// n~(L) = 1 + floor((4A ln L - ln(C_A/2)) / ln 2).
int n_tilde(double L, int A, int C_A);

/// The bracketing 3A ln L / ln 2 < n~ < 5A ln L / ln 2 is guaranteed only
/// when A ln L > |ln C_A| + 2 ln 2.
bool n_tilde_bracket_ok(double L, int A, int C_A);

/// N~(L) = n~(L^4).
int N_tilde(double L, int A, int C_A);

struct DeltaBeta {
    LogMagnitude delta;
    LogMagnitude beta;
    int N = 0;  // N~(L_j) used
};

/// beta_j = 2^(-2 b N~(L_j)), delta_j = beta_j a_{N~(L_j)}; j = -1 maps to
/// j = 0's scale.
DeltaBeta delta_beta(int j, int64_t L0, const ModelParams& p);

/// gamma(m, L) = m (1 + L^{-1/8}) L for L >= 1, and 2m at L = 0.
double gamma_factor(double m, int64_t L);

struct L0Result {
    bool reachable = false;
    int64_t L0 = 0;              // maximal admissible initial scale (exact search)
    int64_t L0_closed_form = 0;  // floor(e^{c1 sqrt(ln g)}), reported lower bound
};

/// Maximal L0 with 4 d e^{4m} 2^{b N~^2(L0) + 2 b N~(L0)} <= g. Desk-scale g
/// is usually far too small: `reachable` is false and callers pick L0 by hand.
L0Result L0_of_g(double g, double m, const ModelParams& p);

/// m(g) = (1/4) ln(g delta_0 / (4d)), computed in log domain. Throws when
/// g delta_0 <= 4d.
double m_of_g(double g, const LogMagnitude& delta0, int d);

struct CoverRadii {
    LogMagnitude R;            // (1/6) C_A^{-1} L_j^{-4A}
    LogMagnitude r;            // C_{A'}^{-1} L_j^{-4A'} R_j
    LogMagnitude cardinality;  // (12 C_A C_{A'})^nu L_j^{4 nu (A+A')}
    bool cardinality_fits = false;
    uint64_t cardinality_int = 0;  // valid when cardinality_fits
};

CoverRadii cover_radii(int j, int64_t L0, const ModelParams& p);

struct ValidationRow {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationRow> rows;
    bool all_pass = false;
    std::string to_json() const;
};

/// Checks the parameter-table conditions plus the deterministic-Minami
/// hypothesis (which is unsatisfiable as literally stated and is reported,
/// not repaired).
ValidationReport validate_params(const ModelParams& p, int64_t L0);

/// JSON table of (j, L_j, N~_j, log2 beta_j, log2 delta_j, gamma(m, L_j),
/// R_j, r_j, cardinality_j) for j in [0, j_max].
std::string schedule_dump(const ModelParams& p, int64_t L0, int j_max);

}  // namespace haarsh
