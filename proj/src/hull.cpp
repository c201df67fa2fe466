#include "haarsh/hull.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "haarsh/rng.hpp"

namespace haarsh {

namespace {

// Canonical coefficient key: (seed, nu, n, per-axis n-bit prefixes). The
// flattened and omega-based paths must hash identical tuples.
double theta_from_words(uint64_t seed, int nu, int n, const uint64_t* words, int words_per_axis) {
    KeyHash k(seed);
    k.absorb(static_cast<uint64_t>(nu));
    k.absorb(static_cast<uint64_t>(n));
    for (int i = 0; i < nu * words_per_axis; ++i) k.absorb(words[i]);
    return k.uniform();
}

}  // namespace

double ThetaField::value_at(int n, const TorusPoint& omega) const {
    if (omega.dim() != nu_) throw std::invalid_argument("ThetaField: point dimension mismatch");
    if (n == 0) return theta_from_words(seed_, nu_, 0, nullptr, 0);
    int per_axis = (n + 63) / 64;
    uint64_t words[kMaxPrefixWords * 8];
    if (per_axis * nu_ > kMaxPrefixWords * 8) throw std::invalid_argument("ThetaField: generation too deep");
    for (int i = 0; i < nu_; ++i) bit_prefix(omega[i], n, words + static_cast<size_t>(i) * per_axis);
    return theta_from_words(seed_, nu_, n, words, per_axis);
}

double ThetaField::value_cell(const CellIndex& idx) const {
    if (static_cast<int>(idx.k.size()) != nu_) throw std::invalid_argument("ThetaField: cell axis count mismatch");
    if (idx.n == 0) return theta_from_words(seed_, nu_, 0, nullptr, 0);
    std::vector<uint64_t> words(static_cast<size_t>(nu_));
    for (int i = 0; i < nu_; ++i) {
        uint64_t k = idx.k[static_cast<size_t>(i)];
        if (k < 1 || (idx.n < 63 && k > (1ULL << idx.n)))
            throw std::invalid_argument("ThetaField: cell index out of range");
        words[static_cast<size_t>(i)] = prefix_word_from_index(k, idx.n);
    }
    return theta_from_words(seed_, nu_, idx.n, words.data(), 1);
}

double ThetaField::value_flat(int n, uint64_t flat) const {
    return value_cell(unflatten_cell(flat, n, nu_));
}

void HullParams::validate() const {
    if (b < 2.0) throw std::invalid_argument("HullParams: b must be >= 2");
    if (amp_exponent_factor != 1 && amp_exponent_factor != 2)
        throw std::invalid_argument("HullParams: amp_exponent_factor must be 1 or 2");
    if (nu < 1) throw std::invalid_argument("HullParams: nu must be >= 1");
}

LogMagnitude amplitude(int n, const HullParams& p) {
    if (n < 0) throw std::invalid_argument("amplitude: n must be >= 0");
    return LogMagnitude::pow2(-static_cast<double>(p.amp_exponent_factor) * p.b * n * n);
}

LogMagnitude tail_bound(int N, const HullParams& p) {
    if (N < 0) throw std::invalid_argument("tail_bound: N must be >= 0");
    return LogMagnitude::pow2(-1.0 - 2.0 * p.b * N) * amplitude(N, p);
}

double hull_truncated(const TorusPoint& omega, const ThetaField& theta, int N, const HullParams& p) {
    if (N < 0) throw std::invalid_argument("hull_truncated: N must be >= 0");
    if (omega.dim() != p.nu) throw std::invalid_argument("hull_truncated: dimension mismatch");
    double v = theta.value_at(0, omega);
    for (int n = 1; n <= N; ++n) {
        double a = amplitude(n, p).to_double();
        if (a == 0.0) break;  // below double underflow; exact zero contribution
        v += a * theta.value_at(n, omega) * haar_sign(omega, n);
    }
    return v;
}

HullValue hull(const TorusPoint& omega, const ThetaField& theta, const HullParams& p, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("hull: tol must be positive");
    LogMagnitude target = LogMagnitude::from_double(tol);
    int N = 0;
    while (!tail_bound(N, p).abs_less(target)) {
        ++N;
        if (N > 4096) throw std::runtime_error("hull: truncation level runaway");
    }
    return {hull_truncated(omega, theta, N, p), N};
}

double potential(std::span<const int64_t> x, const TorusPoint& omega, const ThetaField& theta,
                 const FrequencyMatrix& alpha, const HullParams& p, std::optional<int> truncation,
                 double tol) {
    TorusPoint moved = shift(omega, x, alpha);
    if (truncation) return hull_truncated(moved, theta, *truncation, p);
    return hull(moved, theta, p, tol).value;
}

double potential_separation(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("potential_separation: need at least two values");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double sep = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i + 1 < sorted.size(); ++i) sep = std::min(sep, sorted[i + 1] - sorted[i]);
    return sep;
}

double potential_separation(const std::vector<std::vector<int64_t>>& sites, const TorusPoint& omega,
                            const ThetaField& theta, const FrequencyMatrix& alpha, const HullParams& p,
                            std::optional<int> truncation) {
    std::vector<double> vals;
    vals.reserve(sites.size());
    for (const auto& s : sites) vals.push_back(potential(s, omega, theta, alpha, p, truncation));
    return potential_separation(vals);
}

}  // namespace haarsh
