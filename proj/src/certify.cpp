#include "haarsh/certify.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "haarsh/rng.hpp"

namespace haarsh {

CubeVerdict is_E_resonant(const Eigen::VectorXd& spectrum, const LatticeCube& cube, double E,
                          const LogMagnitude& width) {
    if (spectrum.size() == 0) throw std::invalid_argument("is_E_resonant: empty spectrum");
    CubeVerdict v;
    v.center = cube.center;
    v.radius = cube.radius;
    v.energy = E;
    v.width = width;
    double mind = (spectrum.array() - E).abs().minCoeff();
    v.min_spectral_distance = mind;
    v.resonant = LogMagnitude::from_double(mind).abs_less(width);
    return v;
}

CubeVerdict is_EmNS(const LocalOperator& op, double E, double m) {
    CubeVerdict v;
    v.center = op.cube.center;
    v.radius = op.cube.radius;
    v.energy = E;
    v.m = m;
    const int64_t L = op.cube.radius;
    const int d = op.cube.dim();
    if (L == 0) {
        v.ns_threshold = std::exp(-gamma_factor(m, 0)) / (2.0 * d);
        double diag = op.matrix(0, 0);
        if (diag == E) {
            v.singular = true;
            v.resonant_annotation = true;
            return v;
        }
        v.max_boundary_green = std::fabs(1.0 / (diag - E));
        v.singular = !(v.max_boundary_green <= v.ns_threshold);
        return v;
    }
    v.ns_threshold = std::pow(3.0 * static_cast<double>(L), -d) * std::exp(-gamma_factor(m, L));
    int64_t center_idx = op.cube.index_of(op.cube.center);
    Eigen::VectorXd col;
    try {
        col = green_column(op, center_idx, E);
    } catch (const std::runtime_error&) {
        v.singular = true;
        v.resonant_annotation = true;
        return v;
    }
    double worst = 0.0;
    const int64_t n = op.cube.site_count();
    for (int64_t i = 0; i < n; ++i) {
        if (op.cube.boundary_distance(op.cube.site(i)) != 0) continue;  // del^- only
        worst = std::max(worst, std::fabs(col(i)));
    }
    v.max_boundary_green = worst;
    v.singular = !(worst <= v.ns_threshold);
    return v;
}

CombesThomasResult combes_thomas_check(const LocalOperator& op, const Eigen::VectorXd& spectrum,
                                       double E, double eta, double slack) {
    CombesThomasResult res;
    const int d = op.cube.dim();
    if (!(eta > 4.0 * d)) return res;
    double dist = (spectrum.array() - E).abs().minCoeff();
    if (dist < eta) return res;
    res.precondition_ok = true;
    res.mu = 0.5 * std::log(eta / (4.0 * d));
    const int64_t n = op.cube.site_count();
    Eigen::MatrixXd shifted = op.matrix;
    shifted.diagonal().array() -= E;
    Eigen::MatrixXd G = shifted.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
    res.holds = true;
    for (int64_t xi = 0; xi < n; ++xi) {
        Site x = op.cube.site(xi);
        for (int64_t yi = 0; yi < n; ++yi) {
            Site y = op.cube.site(yi);
            int64_t r = 0;
            for (int q = 0; q < d; ++q)
                r = std::max<int64_t>(r, std::llabs(x[static_cast<size_t>(q)] - y[static_cast<size_t>(q)]));
            double bound = 2.0 / eta * std::exp(-res.mu * static_cast<double>(r));
            double ratio = std::fabs(G(xi, yi)) / bound;
            if (ratio > res.worst_ratio) {
                res.worst_ratio = ratio;
                res.worst_x = xi;
                res.worst_y = yi;
            }
        }
    }
    res.holds = res.worst_ratio <= 1.0 + slack;
    return res;
}

double ct_strong_width(double m, int64_t L, int d) {
    if (L < 1) return 4.0 * d * std::exp(gamma_factor(m, 0));
    double threshold = std::pow(3.0 * static_cast<double>(L), -d) * std::exp(-gamma_factor(m, L));
    double lo = 4.0 * d * (1.0 + 1e-9), hi = 4.0 * d;
    auto ct_bound = [&](double eta) {
        return 2.0 / eta * std::exp(-0.5 * std::log(eta / (4.0 * d)) * static_cast<double>(L));
    };
    while (ct_bound(hi = hi * 2.0) > threshold)
        if (hi > 1e300) throw std::runtime_error("ct_strong_width: no admissible width");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (ct_bound(mid) > threshold ? lo : hi) = mid;
    }
    return hi;
}

double dominated_bound(double q, int64_t ell, int64_t L, double M) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("dominated_bound: q must lie in (0,1)");
    if (L < ell || ell < 0) throw std::invalid_argument("dominated_bound: need L >= ell >= 0");
    return std::pow(q, static_cast<double>((L + 1) / (ell + 1))) * M;
}

DominatedResult is_dominated(std::span<const double> f, int64_t ell, double q, const LatticeCube& cube,
                             const LatticeCube& ambient) {
    if (f.size() != static_cast<size_t>(ambient.site_count()))
        throw std::invalid_argument("is_dominated: f must be indexed by the ambient cube");
    LatticeCube padded(cube.center, cube.radius + 1);
    if (!ambient.contains_cube(padded))
        throw std::invalid_argument("is_dominated: ambient must contain B_{L+1}(u)");
    DominatedResult res;
    res.dominated = true;
    LatticeCube sub_centers(cube.center, cube.radius - ell);
    const int64_t nc = sub_centers.site_count();
    const int64_t an = ambient.site_count();
    for (int64_t ci = 0; ci < nc; ++ci) {
        Site x = sub_centers.site(ci);
        double fx = std::fabs(f[static_cast<size_t>(ambient.index_of(x))]);
        double mx = 0.0;
        LatticeCube reach(x, ell + 1);
        for (int64_t i = 0; i < an; ++i) {
            Site y = ambient.site(i);
            if (reach.contains(y)) mx = std::max(mx, std::fabs(f[static_cast<size_t>(i)]));
        }
        if (fx > q * mx) {
            res.dominated = false;
            res.violating_center = x;
            return res;
        }
    }
    return res;
}

GoodBadResult classify_good_bad(const LatticeCube& super, int64_t sub_radius, std::span<const double> energies,
                                double m, const PotentialContext& ctx) {
    GoodBadResult res;
    if (energies.empty()) return res;  // vacuously good; the caller flags degenerate input
    if (super.radius < sub_radius) throw std::invalid_argument("classify_good_bad: sub radius exceeds super");
    LatticeCube centers(super.center, super.radius - sub_radius);
    const int64_t nc = centers.site_count();
    const int d = super.dim();
    std::vector<LocalOperator> ops(static_cast<size_t>(nc));
    std::vector<Eigen::VectorXd> spectra(static_cast<size_t>(nc));
    EigensystemOptions ev_only;
    ev_only.compute_vectors = false;
    for (int64_t i = 0; i < nc; ++i) {
        ops[static_cast<size_t>(i)] = assemble(LatticeCube(centers.site(i), sub_radius), ctx);
        spectra[static_cast<size_t>(i)] = eigensystem(ops[static_cast<size_t>(i)], ev_only).eigenvalues;
    }
    double skip_width = ct_strong_width(m, sub_radius, d);
    for (double E : energies) {
        std::vector<int64_t> singular;
        for (int64_t i = 0; i < nc; ++i) {
            double dist = (spectra[static_cast<size_t>(i)].array() - E).abs().minCoeff();
            if (dist >= skip_width) continue;  // Combes-Thomas: non-singular
            ++res.singular_checks;
            CubeVerdict v = is_EmNS(ops[static_cast<size_t>(i)], E, m);
            if (v.singular.value_or(false)) singular.push_back(i);
        }
        for (size_t a = 0; a < singular.size(); ++a)
            for (size_t b = a + 1; b < singular.size(); ++b) {
                Site xa = centers.site(singular[a]), xb = centers.site(singular[b]);
                int64_t dist = 0;
                for (int q = 0; q < d; ++q)
                    dist = std::max<int64_t>(dist, std::llabs(xa[static_cast<size_t>(q)] - xb[static_cast<size_t>(q)]));
                if (dist > 2 * sub_radius) {
                    res.good = false;
                    res.witness_energy = E;
                    res.witness_x = xa;
                    res.witness_y = xb;
                    return res;
                }
            }
    }
    return res;
}

std::string SparsenessCertificate::to_json() const {
    nlohmann::json jj;
    jj["j"] = j;
    jj["super_center"] = super_center;
    jj["super_radius"] = super_radius;
    jj["pass"] = pass;
    jj["m"] = m;
    jj["log2_width"] = width.log2_abs;
    jj["min_pair_distance"] = min_pair_distance;
    if (!pass) {
        jj["witness_energy"] = witness_energy;
        jj["witness_x"] = witness_x;
        jj["witness_y"] = witness_y;
    }
    jj["plan"] = {{"center_stride", plan.center_stride}, {"centers_used", plan.centers_used},
                  {"energy_stride", plan.energy_stride}, {"energies_used", plan.energies_used},
                  {"pair_budget", plan.pair_budget},     {"pairs_considered", plan.pairs_considered}};
    return jj.dump(2);
}

SparsenessCertificate verify_sparseness(int j, const PotentialContext& ctx, const ModelParams& params,
                                        int64_t L0, const SparsenessOptions& opts) {
    if (j < -1) throw std::invalid_argument("verify_sparseness: j must be >= -1");
    SparsenessCertificate cert;
    cert.j = j;
    cert.m = opts.m;
    DeltaBeta db = delta_beta(j, L0, params);
    cert.width = opts.width_override ? LogMagnitude::from_double(*opts.width_override)
                                     : LogMagnitude::from_double(ctx.g) * db.delta;
    cert.plan.pair_budget = opts.pair_budget;

    const int64_t Lj = length_scale(std::max(j, 0), L0);
    const int64_t super_radius = length_scale(std::max(j, 0) + 2, L0);  // L_j^4 = L_{j+2}
    LatticeCube super(Site(static_cast<size_t>(params.d), 0), super_radius);
    cert.super_center = super.center;
    cert.super_radius = super.radius;

    if (j == -1) {
        // No two sites may be jointly within 2 g delta_0 of any energy, i.e.
        // Sep(gV) >= 4 width.
        const int64_t n = super.site_count();
        std::vector<double> vals(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i)
            vals[static_cast<size_t>(i)] =
                ctx.g * potential(super.site(i), ctx.omega, ctx.theta, ctx.alpha, ctx.hull, ctx.truncation);
        std::vector<int64_t> order(static_cast<size_t>(n));
        for (int64_t i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
        std::sort(order.begin(), order.end(), [&](int64_t a, int64_t b) {
            return vals[static_cast<size_t>(a)] < vals[static_cast<size_t>(b)];
        });
        double sep = std::numeric_limits<double>::infinity();
        int64_t arg = -1;
        for (int64_t i = 0; i + 1 < n; ++i) {
            double dgap = vals[static_cast<size_t>(order[static_cast<size_t>(i + 1)])] -
                          vals[static_cast<size_t>(order[static_cast<size_t>(i)])];
            if (dgap < sep) {
                sep = dgap;
                arg = i;
            }
        }
        cert.min_pair_distance = sep;
        cert.plan.centers_used = n;
        LogMagnitude four_w = cert.width * LogMagnitude::pow2(2.0);
        cert.pass = !LogMagnitude::from_double(sep).abs_less(four_w);
        if (!cert.pass && arg >= 0) {
            cert.witness_x = super.site(order[static_cast<size_t>(arg)]);
            cert.witness_y = super.site(order[static_cast<size_t>(arg + 1)]);
            cert.witness_energy = 0.5 * (vals[static_cast<size_t>(order[static_cast<size_t>(arg)])] +
                                         vals[static_cast<size_t>(order[static_cast<size_t>(arg + 1)])]);
        }
        return cert;
    }

    // Scale j >= 0: spectra-distance shortcut over disjoint pairs.
    LatticeCube centers(super.center, super.radius - Lj);
    const int64_t m_centers = centers.site_count();
    int64_t stride = 1;
    while (true) {
        int64_t picked = (m_centers + stride - 1) / stride;
        if (picked * (picked - 1) / 2 <= opts.pair_budget) break;
        ++stride;
    }
    std::vector<int64_t> picked;
    for (int64_t i = 0; i < m_centers; i += stride) picked.push_back(i);
    cert.plan.center_stride = stride;
    cert.plan.centers_used = static_cast<int64_t>(picked.size());

    std::vector<LocalOperator> ops(picked.size());
    std::vector<Eigen::VectorXd> spectra(picked.size());
    EigensystemOptions ev_only;
    ev_only.compute_vectors = false;
    for (size_t a = 0; a < picked.size(); ++a) {
        ops[a] = assemble(LatticeCube(centers.site(picked[a]), Lj), ctx);
        spectra[a] = eigensystem(ops[a], ev_only).eigenvalues;
    }

    const int d = params.d;
    double w = cert.width.to_double();  // 0 when the paper-exact width underflows
    double min_dist = std::numeric_limits<double>::infinity();
    std::vector<std::pair<size_t, size_t>> flagged;
    for (size_t a = 0; a < picked.size(); ++a)
        for (size_t b = a + 1; b < picked.size(); ++b) {
            int64_t dist = 0;
            for (int q = 0; q < d; ++q)
                dist = std::max<int64_t>(dist, std::llabs(ops[a].cube.center[static_cast<size_t>(q)] -
                                                 ops[b].cube.center[static_cast<size_t>(q)]));
            if (dist <= 2 * Lj) continue;
            ++cert.plan.pairs_considered;
            double dd = spectra_distance(spectra[a], spectra[b]);
            min_dist = std::min(min_dist, dd);
            if (LogMagnitude::from_double(dd).abs_less(cert.width * LogMagnitude::pow2(1.0)))
                flagged.emplace_back(a, b);
        }
    cert.min_pair_distance = min_dist;
    cert.pass = flagged.empty();

    // Flagged near pairs: scan candidate energies for joint (E,m)-singularity.
    // Near-resonant spectra alone do not violate SS; only a joint singularity
    // does.
    for (auto [a, b] : flagged) {
        std::vector<double> candidates;
        for (int64_t ia = 0; ia < spectra[a].size(); ++ia)
            for (int64_t ib = 0; ib < spectra[b].size(); ++ib)
                if (std::fabs(spectra[a](ia) - spectra[b](ib)) <= 2.0 * w)
                    candidates.push_back(0.5 * (spectra[a](ia) + spectra[b](ib)));
        for (double E : candidates) {
            CubeVerdict va = is_EmNS(ops[a], E, opts.m);
            if (!va.singular.value_or(false)) continue;
            CubeVerdict vb = is_EmNS(ops[b], E, opts.m);
            if (!vb.singular.value_or(false)) continue;
            cert.pass = false;
            cert.witness_energy = E;
            cert.witness_x = ops[a].cube.center;
            cert.witness_y = ops[b].cube.center;
            return cert;
        }
    }
    cert.pass = true;

    // Energy-set singularity scan (subsampled): union of sub-cube spectra.
    std::vector<double> energy_set;
    for (const auto& s : spectra)
        for (int64_t i = 0; i < s.size(); ++i) energy_set.push_back(s(i));
    std::sort(energy_set.begin(), energy_set.end());
    int64_t estride = std::max<int64_t>(1, static_cast<int64_t>(energy_set.size()) / opts.energy_budget);
    cert.plan.energy_stride = estride;
    double skip_width = ct_strong_width(opts.m, Lj, d);
    for (size_t ei = 0; ei < energy_set.size(); ei += static_cast<size_t>(estride)) {
        double E = energy_set[ei];
        ++cert.plan.energies_used;
        std::vector<size_t> singular;
        for (size_t a = 0; a < picked.size(); ++a) {
            double dist = (spectra[a].array() - E).abs().minCoeff();
            if (dist >= skip_width) continue;
            CubeVerdict v = is_EmNS(ops[a], E, opts.m);
            if (v.singular.value_or(false)) singular.push_back(a);
        }
        for (size_t ia = 0; ia < singular.size() && cert.pass; ++ia)
            for (size_t ib = ia + 1; ib < singular.size(); ++ib) {
                int64_t dist = 0;
                for (int q = 0; q < d; ++q)
                    dist = std::max<int64_t>(dist, std::llabs(ops[singular[ia]].cube.center[static_cast<size_t>(q)] -
                                                     ops[singular[ib]].cube.center[static_cast<size_t>(q)]));
                if (dist > 2 * Lj) {
                    cert.pass = false;
                    cert.witness_energy = E;
                    cert.witness_x = ops[singular[ia]].cube.center;
                    cert.witness_y = ops[singular[ib]].cube.center;
                    return cert;
                }
            }
    }
    return cert;
}

std::string scale_induction_report(const ScaleInductionConfig& cfg) {
    nlohmann::json out;
    out["L0"] = cfg.L0;
    out["n_samples"] = cfg.n_samples;
    out["master_seed"] = cfg.master_seed;
    out["m"] = cfg.m;
    nlohmann::json scales = nlohmann::json::array();

    struct ScaleStats {
        int ss_pass = 0;
        int nr_good_cases = 0;
        int ns_confirmed = 0;
        int counterexamples = 0;
        int good_count = 0;
        int bad_count = 0;
        int64_t resonant_cubes = 0;
        int64_t singular_cubes = 0;
    };
    std::vector<ScaleStats> stats(static_cast<size_t>(cfg.j_max + 2));  // index j+1

    for (int s = 0; s < cfg.n_samples; ++s) {
        uint64_t theta_seed = mix64(cfg.master_seed + 0x1000 + static_cast<uint64_t>(s));
        std::vector<double> oc(static_cast<size_t>(cfg.params.nu));
        for (int i = 0; i < cfg.params.nu; ++i)
            oc[static_cast<size_t>(i)] = keyed_uniform(cfg.master_seed, 0x2000 + static_cast<uint64_t>(s),
                                                       static_cast<uint64_t>(i));
        PotentialContext ctx{TorusPoint(oc), ThetaField(theta_seed, cfg.params.nu), cfg.alpha,
                             cfg.params.hull_params(), cfg.params.g, std::nullopt};

        for (int j = -1; j <= cfg.j_max; ++j) {
            ScaleStats& st = stats[static_cast<size_t>(j + 1)];
            SparsenessOptions sopts;
            sopts.m = cfg.m;
            sopts.pair_budget = cfg.pair_budget;
            sopts.energy_budget = cfg.energy_budget;
            if (j >= 0 && static_cast<size_t>(j) < cfg.ss_widths.size())
                sopts.width_override = cfg.ss_widths[static_cast<size_t>(j)];
            SparsenessCertificate cert = verify_sparseness(j, ctx, cfg.params, cfg.L0, sopts);
            if (cert.pass) ++st.ss_pass;

            if (j < 0 || !cfg.check_nr_good_ns) continue;

            // Lemma mechanism on the scale-(j+1) super-cube.
            int64_t Lj = length_scale(j, cfg.L0);
            int64_t Lj1 = length_scale(j + 1, cfg.L0);
            LatticeCube super(Site(static_cast<size_t>(cfg.params.d), 0), Lj1);
            LocalOperator super_op = assemble(super, ctx);
            EigensystemOptions ev_only;
            ev_only.compute_vectors = false;
            Eigen::VectorXd super_spec = eigensystem(super_op, ev_only).eigenvalues;

            LatticeCube centers(super.center, Lj1 - Lj);
            std::vector<double> energies;
            int64_t cstride = std::max<int64_t>(1, centers.site_count() / 32);
            for (int64_t c = 0; c < centers.site_count(); c += cstride) {
                LocalOperator sub = assemble(LatticeCube(centers.site(c), Lj), ctx);
                Eigen::VectorXd sp = eigensystem(sub, ev_only).eigenvalues;
                for (int64_t i = 0; i < sp.size(); ++i) energies.push_back(sp(i));
            }
            std::sort(energies.begin(), energies.end());
            int64_t estride = std::max<int64_t>(1, static_cast<int64_t>(energies.size()) / cfg.energy_budget);

            double W = ct_strong_width(cfg.m, Lj1, cfg.params.d) * 1.05;
            LogMagnitude Wlog = LogMagnitude::from_double(W);
            for (size_t ei = 0; ei < energies.size(); ei += static_cast<size_t>(estride)) {
                double E = energies[ei];
                CubeVerdict res = is_E_resonant(super_spec, super, E, Wlog);
                if (res.resonant.value()) {
                    ++st.resonant_cubes;
                    continue;  // premise fails
                }
                GoodBadResult gb = classify_good_bad(super, Lj, std::span<const double>(&E, 1), cfg.m, ctx);
                if (gb.good) ++st.good_count; else { ++st.bad_count; ++st.singular_cubes; continue; }
                if (!cert.pass) continue;  // SS premise failed for this sample
                ++st.nr_good_cases;
                CubeVerdict ns = is_EmNS(super_op, E, cfg.m);
                if (ns.singular.value_or(true)) ++st.counterexamples; else ++st.ns_confirmed;
            }
        }
    }

    for (int j = -1; j <= cfg.j_max; ++j) {
        const ScaleStats& st = stats[static_cast<size_t>(j + 1)];
        nlohmann::json row;
        row["j"] = j;
        row["ss_pass"] = st.ss_pass;
        row["ss_rate"] = static_cast<double>(st.ss_pass) / cfg.n_samples;
        if (j >= 0 && cfg.check_nr_good_ns) {
            row["nr_good_cases"] = st.nr_good_cases;
            row["ns_confirmed"] = st.ns_confirmed;
            row["counterexamples"] = st.counterexamples;
            row["good_count"] = st.good_count;
            row["bad_count"] = st.bad_count;
            row["resonant_energy_count"] = st.resonant_cubes;
        }
        scales.push_back(row);
    }
    out["scales"] = scales;
    return out.dump(2);
}

}  // namespace haarsh
