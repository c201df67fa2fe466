#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "haarsh/local_operator.hpp"
#include "haarsh/log_domain.hpp"

namespace haarsh {

/// Argmax set of |psi| with relative ties within tie_rel grouped, returned as
/// cube site indices in ascending (lexicographic) order. Throws on the zero
/// vector.
std::vector<int64_t> localization_centers(const Eigen::VectorXd& psi, double tie_rel = 1e-12);

struct UniformLocalization {
    bool localized = false;
    int64_t center = -1;               // site index of the peak
    double peak_mass = 0.0;            // |psi(center)|^2
    std::optional<int64_t> violating_site;
};

/// Uniform m-localization: a single center with |psi|^2 > 1/2 and
/// |psi(y)| <= e^{-m |y - center|} for every other y. `floor` relaxes the
/// decay bound to max(e^{-mr}, floor) for values buried under eigensolver
/// noise; 0 keeps the strict definition.
UniformLocalization is_uniformly_localized(const Eigen::VectorXd& psi, const LatticeCube& cube, double m,
                                           double floor = 0.0);

struct DecayFit {
    bool defined = false;
    double m_fit = 0.0;
    double residual = 0.0;  // rms of the linear fit
    int radii_used = 0;
};

/// Least-squares slope of ln max_{|y-c|=r} |psi(y)| against -r over radii
/// whose profile value exceeds value_floor; fewer than 3 usable radii leaves
/// the fit flagged undefined.
DecayFit decay_exponent_fit(const Eigen::VectorXd& psi, const LatticeCube& cube, int64_t center_index,
                            double value_floor = 1e-14);

struct EigenstateProfile {
    double eigenvalue = 0.0;
    std::vector<int64_t> centers;
    double peak_mass = 0.0;
    bool uniformly_localized = false;
    bool interior = false;  // center further than L/4 from the boundary
    DecayFit fit;
};

struct BasisReport {
    std::vector<EigenstateProfile> states;
    std::map<int64_t, int> center_to_state;  // localized states only
    bool bijection = false;           // localized centers = all box sites, injectively
    bool interior_bijection = false;  // restricted to interior sites
    int n_localized = 0;
    double min_gap = 0.0;
    std::string to_json() const;
};

/// Maps each uniformly m-localized state to its center and checks the
/// center <-> site correspondence; non-localized states stay listed with
/// empty mapping.
BasisReport center_bijection(const LocalOperator& op, const SpectrumReport& spec, double m,
                             double floor = 0.0, double fit_floor = 1e-14);

struct SimplicityReport {
    double min_gap = 0.0;
    bool machine_simple = false;   // min_gap > 0 in doubles
    bool jacobi_certificate = false;  // d = 1 cube: unreduced tridiagonal, simple by structure
    bool simple = false;           // machine_simple || jacobi_certificate
    LogMagnitude g_delta_width;    // the schedule width compared against
    bool gap_exceeds_g_delta = false;
    double km_epsilon = 0.0;       // C f(L) L^{d/2} with f(r) = e^{-m r}
    bool gap_exceeds_km = false;
    std::string to_json() const;
};

/// Min-gap verdict with the schedule and Klein-Molchanov thresholds. The
/// double-precision gap legitimately collapses to zero inside numerically
/// degenerate clusters; for d = 1 boxes the operator is an unreduced Jacobi
/// matrix whose spectrum is simple by structure, and that certificate is
/// reported alongside the machine gap.
SimplicityReport simplicity_report(const SpectrumReport& spec, const LocalOperator& op,
                                   const LogMagnitude& g_delta, double km_C, double km_m);

/// |<1_x| phi(H) |1_y>| via the spectral expansion, phi supplied as values on
/// the computed eigenvalues with ||phi||_inf <= 1.
double dynamical_kernel(const SpectrumReport& spec, int64_t x_index, int64_t y_index,
                        std::span<const std::complex<double>> phi_values);

/// phi_t(lambda) = e^{-i lambda t}.
double dynamical_kernel_time(const SpectrumReport& spec, int64_t x_index, int64_t y_index, double t);

}  // namespace haarsh
