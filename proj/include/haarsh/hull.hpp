#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "haarsh/log_domain.hpp"
#include "haarsh/torus.hpp"

namespace haarsh {

/// Lazily evaluated IID Unif[0,1] coefficient field theta_{n,k}. Nothing is
/// stored: each coefficient is a keyed hash of (master seed, generation,
/// exact cell prefix), so the same (seed, n, k) always yields the same draw
/// and the infinite family costs nothing. K_n = 2^(nu n) grows far too fast
/// to materialize.
class ThetaField {
  public:
    explicit ThetaField(uint64_t master_seed, int nu = 1) : seed_(master_seed), nu_(nu) {}

    uint64_t master_seed() const { return seed_; }
    int nu() const { return nu_; }

    /// theta_{n, k_hat_n(omega)}: the coefficient of the cell containing omega.
    double value_at(int n, const TorusPoint& omega) const;

    /// theta_{n,k} by 1-based per-axis index (n <= 64 per axis).
    double value_cell(const CellIndex& idx) const;

    /// theta_{n,k} by 1-based row-major flattened index (nu*n <= 63).
    double value_flat(int n, uint64_t flat) const;

  private:
    uint64_t seed_;
    int nu_;
};

struct HullParams {
    double b = 2.0;               // decay exponent, >= 2
    int amp_exponent_factor = 2;  // c_a in {1, 2}: a_n = 2^(-c_a b n^2)
    int nu = 1;

    void validate() const;
};

/// a_n as a log-domain value; a_0 = 1.
LogMagnitude amplitude(int n, const HullParams& p);

/// Upper bound on ||v - v_N||_inf: (1/2) 2^(-2bN) a_N.
LogMagnitude tail_bound(int N, const HullParams& p);

/// v_N(omega; theta) = sum_{n<=N} a_n theta_{n,k_hat(omega)} sigma_n(omega).
/// One coefficient lookup and one sign per generation; terms whose amplitude
/// underflows double precision are skipped (they cannot affect the sum).
double hull_truncated(const TorusPoint& omega, const ThetaField& theta, int N, const HullParams& p);

struct HullValue {
    double value = 0.0;
    int truncation = 0;  // the N actually used
};

/// v(omega; theta) to tolerance tol: evaluates v_N at the smallest N with
/// tail_bound(N) < tol.
HullValue hull(const TorusPoint& omega, const ThetaField& theta, const HullParams& p, double tol = 1e-15);

/// V(x; omega; theta) = v(T^x omega; theta), optionally truncated at N.
double potential(std::span<const int64_t> x, const TorusPoint& omega, const ThetaField& theta,
                 const FrequencyMatrix& alpha, const HullParams& p,
                 std::optional<int> truncation = std::nullopt, double tol = 1e-15);

/// Sep(V, Lambda) = min over distinct pairs of |V(x) - V(y)|. Throws on
/// fewer than two values.
double potential_separation(std::span<const double> values);

/// Sep over an explicit site list.
double potential_separation(const std::vector<std::vector<int64_t>>& sites, const TorusPoint& omega,
                            const ThetaField& theta, const FrequencyMatrix& alpha, const HullParams& p,
                            std::optional<int> truncation = std::nullopt);

}  // namespace haarsh
