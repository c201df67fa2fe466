#include "haarsh/eigenstates.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace haarsh {

std::vector<int64_t> localization_centers(const Eigen::VectorXd& psi, double tie_rel) {
    double peak = psi.cwiseAbs().maxCoeff();
    if (peak == 0.0) throw std::invalid_argument("localization_centers: zero vector");
    std::vector<int64_t> centers;
    for (int64_t i = 0; i < psi.size(); ++i)
        if (std::fabs(psi(i)) >= peak * (1.0 - tie_rel)) centers.push_back(i);
    return centers;
}

namespace {

int64_t site_distance(const LatticeCube& cube, int64_t a, int64_t b) {
    int64_t r = 0;
    const int64_t side = cube.side();
    for (int i = 0; i < cube.dim(); ++i) {
        r = std::max<int64_t>(r, std::llabs(a % side - b % side));
        a /= side;
        b /= side;
    }
    return r;
}

}  // namespace

UniformLocalization is_uniformly_localized(const Eigen::VectorXd& psi, const LatticeCube& cube, double m,
                                           double floor) {
    double norm = psi.norm();
    if (std::fabs(norm - 1.0) > 1e-10) throw std::invalid_argument("is_uniformly_localized: psi not normalized");
    UniformLocalization res;
    std::vector<int64_t> centers = localization_centers(psi);
    if (centers.size() != 1) return res;  // exact multi-peak fails unimodality outright
    res.center = centers.front();
    res.peak_mass = psi(res.center) * psi(res.center);
    if (!(res.peak_mass > 0.5)) return res;
    for (int64_t y = 0; y < psi.size(); ++y) {
        if (y == res.center) continue;
        double bound = std::exp(-m * static_cast<double>(site_distance(cube, res.center, y)));
        if (std::fabs(psi(y)) > std::max(bound, floor)) {
            res.violating_site = y;
            return res;
        }
    }
    res.localized = true;
    return res;
}

DecayFit decay_exponent_fit(const Eigen::VectorXd& psi, const LatticeCube& cube, int64_t center_index,
                            double value_floor) {
    DecayFit fit;
    std::vector<double> rs, ls;
    for (int64_t r = 1; r <= 2 * cube.radius; ++r) {
        double mx = 0.0;
        bool any = false;
        for (int64_t i = 0; i < psi.size(); ++i) {
            if (site_distance(cube, center_index, i) != r) continue;
            any = true;
            mx = std::max(mx, std::fabs(psi(i)));
        }
        if (!any) break;
        if (mx < value_floor) break;
        rs.push_back(static_cast<double>(r));
        ls.push_back(std::log(mx));
    }
    fit.radii_used = static_cast<int>(rs.size());
    if (rs.size() < 3) return fit;  // undefined, flagged
    double n = static_cast<double>(rs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < rs.size(); ++i) {
        sx += rs[i];
        sy += ls[i];
        sxx += rs[i] * rs[i];
        sxy += rs[i] * ls[i];
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double intercept = (sy - slope * sx) / n;
    fit.m_fit = -slope;
    double ss = 0;
    for (size_t i = 0; i < rs.size(); ++i) {
        double e = ls[i] - (intercept + slope * rs[i]);
        ss += e * e;
    }
    fit.residual = std::sqrt(ss / n);
    fit.defined = true;
    return fit;
}

BasisReport center_bijection(const LocalOperator& op, const SpectrumReport& spec, double m, double floor,
                             double fit_floor) {
    BasisReport rep;
    const int64_t n = spec.eigenvalues.size();
    const int64_t L = op.cube.radius;
    rep.states.reserve(static_cast<size_t>(n));
    for (int64_t i = 0; i < n; ++i) {
        EigenstateProfile p;
        p.eigenvalue = spec.eigenvalues(i);
        Eigen::VectorXd psi = spec.eigenvectors.col(i);
        p.centers = localization_centers(psi);
        double peak = psi.cwiseAbs().maxCoeff();
        p.peak_mass = peak * peak;
        UniformLocalization ul = is_uniformly_localized(psi, op.cube, m, floor);
        p.uniformly_localized = ul.localized;
        int64_t c = p.centers.front();
        p.interior = op.cube.boundary_distance(op.cube.site(c)) > L / 4;
        p.fit = decay_exponent_fit(psi, op.cube, c, fit_floor);
        if (ul.localized) {
            ++rep.n_localized;
            // Lemma-level invariant: two orthonormal uniformly localized
            // states cannot share a center.
            if (rep.center_to_state.count(ul.center))
                throw std::logic_error("center_bijection: duplicate center among uniformly localized states");
            rep.center_to_state[ul.center] = static_cast<int>(i);
        }
        rep.states.push_back(std::move(p));
    }
    rep.min_gap = n >= 2 ? spectral_separation(spec.eigenvalues) : 0.0;
    rep.bijection = rep.n_localized == n && static_cast<int64_t>(rep.center_to_state.size()) == n;
    bool interior_ok = true;
    for (int64_t i = 0; i < op.cube.site_count(); ++i) {
        if (op.cube.boundary_distance(op.cube.site(i)) <= L / 4) continue;
        if (!rep.center_to_state.count(i)) interior_ok = false;
    }
    rep.interior_bijection = interior_ok;
    return rep;
}

std::string BasisReport::to_json() const {
    nlohmann::json j;
    j["n_states"] = states.size();
    j["n_localized"] = n_localized;
    j["bijection"] = bijection;
    j["interior_bijection"] = interior_bijection;
    j["min_gap"] = min_gap;
    j["states"] = nlohmann::json::array();
    for (const auto& s : states) {
        nlohmann::json js;
        js["eigenvalue"] = s.eigenvalue;
        js["centers"] = s.centers;
        js["peak_mass"] = s.peak_mass;
        js["uniformly_localized"] = s.uniformly_localized;
        js["interior"] = s.interior;
        js["m_fit"] = s.fit.defined ? s.fit.m_fit : 0.0;
        js["fit_defined"] = s.fit.defined;
        j["states"].push_back(js);
    }
    return j.dump(2);
}

SimplicityReport simplicity_report(const SpectrumReport& spec, const LocalOperator& op,
                                   const LogMagnitude& g_delta, double km_C, double km_m) {
    SimplicityReport rep;
    rep.min_gap = spectral_separation(spec.eigenvalues);
    rep.machine_simple = rep.min_gap > 0.0;
    if (op.cube.dim() == 1) {
        bool unreduced = true;
        const int64_t n = op.matrix.rows();
        for (int64_t i = 0; i + 1 < n; ++i)
            if (op.matrix(i, i + 1) == 0.0) unreduced = false;
        rep.jacobi_certificate = unreduced && n >= 2;
    }
    rep.simple = rep.machine_simple || rep.jacobi_certificate;
    rep.g_delta_width = g_delta;
    rep.gap_exceeds_g_delta = !LogMagnitude::from_double(rep.min_gap).abs_less(g_delta);
    double L = static_cast<double>(op.cube.radius);
    rep.km_epsilon = km_C * std::exp(-km_m * L) * std::pow(L, op.cube.dim() / 2.0);
    rep.gap_exceeds_km = rep.min_gap > rep.km_epsilon;
    return rep;
}

std::string SimplicityReport::to_json() const {
    nlohmann::json j;
    j["min_gap"] = min_gap;
    j["machine_simple"] = machine_simple;
    j["jacobi_certificate"] = jacobi_certificate;
    j["simple"] = simple;
    j["log2_g_delta"] = g_delta_width.log2_abs;
    j["gap_exceeds_g_delta"] = gap_exceeds_g_delta;
    j["km_epsilon"] = km_epsilon;
    j["gap_exceeds_km"] = gap_exceeds_km;
    return j.dump(2);
}

double dynamical_kernel(const SpectrumReport& spec, int64_t x_index, int64_t y_index,
                        std::span<const std::complex<double>> phi_values) {
    if (static_cast<int64_t>(phi_values.size()) != spec.eigenvalues.size())
        throw std::invalid_argument("dynamical_kernel: phi must be sampled on the spectrum");
    std::complex<double> acc = 0.0;
    for (int64_t i = 0; i < spec.eigenvalues.size(); ++i)
        acc += spec.eigenvectors(x_index, i) * phi_values[static_cast<size_t>(i)] * spec.eigenvectors(y_index, i);
    return std::abs(acc);
}

double dynamical_kernel_time(const SpectrumReport& spec, int64_t x_index, int64_t y_index, double t) {
    std::complex<double> acc = 0.0;
    for (int64_t i = 0; i < spec.eigenvalues.size(); ++i) {
        std::complex<double> phase(std::cos(spec.eigenvalues(i) * t), -std::sin(spec.eigenvalues(i) * t));
        acc += spec.eigenvectors(x_index, i) * phase * spec.eigenvectors(y_index, i);
    }
    return std::abs(acc);
}

}  // namespace haarsh
