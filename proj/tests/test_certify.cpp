#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "haarsh/certify.hpp"

using namespace haarsh;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

PotentialContext make_ctx(uint64_t seed, double g, double omega0 = 0.37) {
    return PotentialContext{TorusPoint({omega0}), ThetaField(seed, 1), FrequencyMatrix::single(kGolden),
                            HullParams{2.0, 2, 1}, g, std::nullopt};
}

/// Operator with a caller-chosen diagonal, for engineered counterexamples.
LocalOperator explicit_diagonal(const LatticeCube& cube, const std::vector<double>& diag) {
    LocalOperator op;
    op.cube = cube;
    op.g = 1.0;
    const int64_t n = cube.site_count();
    op.matrix = Eigen::MatrixXd::Zero(n, n);
    for (int64_t i = 0; i < n; ++i) {
        op.matrix(i, i) = diag[static_cast<size_t>(i)];
        Site x = cube.site(i);
        for (int jdim = 0; jdim < cube.dim(); ++jdim)
            for (int sgn : {-1, 1}) {
                Site y = x;
                y[static_cast<size_t>(jdim)] += sgn;
                int64_t k = cube.index_of(y);
                if (k >= 0) op.matrix(i, k) = 1.0;
            }
    }
    return op;
}

}  // namespace

TEST_CASE("is_E_resonant") {
    LatticeCube cube({0}, 1);
    Eigen::VectorXd spec(3);
    spec << -1.0, 0.5, 2.0;
    // an exact eigenvalue is resonant at any positive width
    CubeVerdict v = is_E_resonant(spec, cube, 0.5, LogMagnitude::pow2(-2000.0));
    CHECK(v.resonant.value());
    CHECK(v.min_spectral_distance == 0.0);
    // paper-exact width at desk scale: non-resonant unless the distance is 0
    CubeVerdict v2 = is_E_resonant(spec, cube, 0.5000001, LogMagnitude::pow2(-12320.0));
    CHECK(!v2.resonant.value());
    // L = 0 single-site case reduces to |gV - E| < width
    Eigen::VectorXd one(1);
    one << 5.0;
    CHECK(is_E_resonant(one, LatticeCube({2}, 0), 5.4, LogMagnitude::from_double(0.5)).resonant.value());
    CHECK(!is_E_resonant(one, LatticeCube({2}, 0), 5.6, LogMagnitude::from_double(0.5)).resonant.value());
}

TEST_CASE("is_EmNS single-site thresholds") {
    // |G| = 1/(gV - E); with gV - E = 8d e^{4m} the value (8d)^{-1} e^{-4m}
    // sits below the L = 0 threshold (2d)^{-1} e^{-2m}
    double m = 1.0;
    LatticeCube site({0}, 0);
    LocalOperator op = explicit_diagonal(site, {8.0 * std::exp(4.0 * m)});
    op.matrix(0, 0) += 0.0;
    CubeVerdict v = is_EmNS(op, 0.0, m);
    CHECK(!v.singular.value());
    CHECK(v.ns_threshold == doctest::Approx(0.5 * std::exp(-2.0 * m)));
    // just inside the threshold: make the gap too small
    LocalOperator close = explicit_diagonal(site, {1.5 * std::exp(2.0 * m)});
    CHECK(is_EmNS(close, 0.0, m).singular.value());
    // E exactly on the spectrum: singular with the resonant annotation
    LocalOperator hit = explicit_diagonal(site, {3.0});
    CubeVerdict vr = is_EmNS(hit, 3.0, m);
    CHECK(vr.singular.value());
    CHECK(vr.resonant_annotation);
}

TEST_CASE("is_EmNS threshold value at d=1, L=1, m=1") {
    PotentialContext ctx = make_ctx(5, 1e6);
    LocalOperator op = assemble(LatticeCube({0}, 1), ctx);
    CubeVerdict v = is_EmNS(op, op.matrix(1, 1) - 1e5, 1.0);
    CHECK(v.ns_threshold == doctest::Approx(std::exp(-gamma_factor(1.0, 1)) / 3.0));
    CHECK(v.ns_threshold == doctest::Approx(0.04511).epsilon(2e-3));
}

TEST_CASE("far energies are non-singular, Combes-Thomas regime") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        PotentialContext ctx = make_ctx(rng(), 50.0, 0.05 + 0.9 * (rep / 20.0));
        LocalOperator op = assemble(LatticeCube({0}, 4), ctx);
        SpectrumReport sr = eigensystem(op);
        double eta = 4.0 * std::exp(4.0);
        double E = sr.eigenvalues.minCoeff() - eta;
        CHECK(!is_EmNS(op, E, 1.0).singular.value());
    }
}

TEST_CASE("combes_thomas_check holds on random boxes with a verified gap") {
    std::mt19937_64 rng(11);
    int checked = 0;
    for (int rep = 0; rep < 100; ++rep) {
        PotentialContext ctx = make_ctx(rng(), 1.0 + 200.0 * (rep % 7),
                                        0.01 + 0.98 * (static_cast<double>(rep) / 100.0));
        LocalOperator op = assemble(LatticeCube({0}, 12), ctx);  // 25 sites
        SpectrumReport sr = eigensystem(op);
        double eta = 4.0 * std::exp(2.0);  // mu = 1
        double E = sr.eigenvalues.minCoeff() - eta;
        CombesThomasResult ct = combes_thomas_check(op, sr.eigenvalues, E, eta);
        REQUIRE(ct.precondition_ok);
        CHECK(ct.mu == doctest::Approx(1.0));
        CHECK(ct.holds);
        CHECK(ct.worst_ratio <= 1.0 + 1e-9);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("combes_thomas diagonal entries and precondition") {
    PotentialContext ctx = make_ctx(17, 10.0);
    LocalOperator op = assemble(LatticeCube({0}, 5), ctx);
    SpectrumReport sr = eigensystem(op);
    double eta = 4.0 * std::exp(2.0);
    double E = sr.eigenvalues.minCoeff() - eta;
    // |G(x,x)| <= 1/eta <= 2/eta always
    Eigen::VectorXd col = green_column(op, 5, E);
    CHECK(std::fabs(col(5)) <= 1.0 / eta + 1e-12);
    // eta <= 4d: no check performed
    CombesThomasResult bad = combes_thomas_check(op, sr.eigenvalues, E, 3.9);
    CHECK(!bad.precondition_ok);
}

TEST_CASE("ct_strong_width makes non-resonance imply non-singularity") {
    double w9 = ct_strong_width(1.0, 9, 1);
    double thr9 = std::exp(-gamma_factor(1.0, 9)) / 27.0;
    CHECK(2.0 / w9 * std::exp(-0.5 * std::log(w9 / 4.0) * 9.0) <= thr9 * (1.0 + 1e-9));
    CHECK(w9 > 4.0);
    double w81 = ct_strong_width(1.0, 81, 1);
    CHECK(w81 < w9);  // longer boxes amortize the exponent
}

TEST_CASE("dominated_bound") {
    CHECK(dominated_bound(0.5, 0, 4, 1.0) == doctest::Approx(0.03125));
    CHECK(dominated_bound(0.3, 7, 7, 2.0) == doctest::Approx(0.3 * 2.0));
    // floor exponent is at least the (L - ell)/(ell + 1) variant
    for (int64_t ell : {int64_t{0}, int64_t{1}, int64_t{2}})
        for (int64_t L : {int64_t{4}, int64_t{9}}) {
            double strong = dominated_bound(0.5, ell, L, 1.0);
            double weak = std::pow(0.5, static_cast<double>(L - ell) / static_cast<double>(ell + 1));
            CHECK(strong <= weak * (1 + 1e-12));
        }
}

TEST_CASE("is_dominated") {
    // geometric decay across a cube that does not contain the peak
    LatticeCube ambient({0}, 10);
    LatticeCube cube({5}, 3);
    std::vector<double> f(static_cast<size_t>(ambient.site_count()));
    for (int64_t i = 0; i < ambient.site_count(); ++i) {
        int64_t x = ambient.site(i)[0];
        f[static_cast<size_t>(i)] = std::pow(0.4, static_cast<double>(std::llabs(x + 10)));  // peak at -10
    }
    DominatedResult r = is_dominated(f, 0, 0.5, cube, ambient);
    CHECK(r.dominated);
    // a positive constant is never dominated at q < 1
    std::vector<double> c(static_cast<size_t>(ambient.site_count()), 0.7);
    DominatedResult rc = is_dominated(c, 0, 0.9, cube, ambient);
    CHECK(!rc.dominated);
    CHECK(rc.violating_center.has_value());
    // consistency: a dominated function obeys the center bound of the
    // iterated-domination lemma
    double M = *std::max_element(f.begin(), f.end());
    double center_val = f[static_cast<size_t>(ambient.index_of(cube.center))];
    CHECK(center_val <= dominated_bound(0.5, 0, 3, M) * (1.0 + 1e-12));
}

TEST_CASE("strong-disorder eigenvectors are dominated off their center") {
    PotentialContext ctx = make_ctx(23, 1e6);
    LatticeCube ambient({0}, 10);
    LocalOperator op = assemble(ambient, ctx);
    EigensystemOptions opts;
    opts.polish = true;
    SpectrumReport sr = eigensystem(op, opts);
    int tested = 0;
    for (int64_t i = 0; i < sr.eigenvalues.size(); ++i) {
        Eigen::VectorXd psi = sr.eigenvectors.col(i).cwiseAbs();
        int64_t peak;
        psi.maxCoeff(&peak);
        int64_t px = ambient.site(peak)[0];
        if (std::llabs(px) < 5) continue;  // keep the peak outside the test cube
        LatticeCube cube({-(px > 0 ? 1 : -1) * 5}, 3);
        std::vector<double> f(psi.data(), psi.data() + psi.size());
        DominatedResult r = is_dominated(f, 0, std::exp(-gamma_factor(1.0, 0)), cube, ambient);
        CHECK(r.dominated);
        ++tested;
    }
    CHECK(tested > 0);
}

TEST_CASE("classify_good_bad") {
    // strongly diagonal regime with distinct wells: good for every tested E
    PotentialContext ctx = make_ctx(29, 1e6);
    LatticeCube super({0}, 4);
    LocalOperator sup_op = assemble(super, ctx);
    std::vector<double> energies;
    for (int64_t i = 0; i < sup_op.matrix.rows(); ++i) energies.push_back(sup_op.matrix(i, i));
    GoodBadResult good = classify_good_bad(super, 1, energies, 1.0, ctx);
    CHECK(good.good);

    // vacuous on an empty energy set
    GoodBadResult vac = classify_good_bad(super, 1, {}, 1.0, ctx);
    CHECK(vac.good);
    CHECK(vac.singular_checks == 0);
}

TEST_CASE("engineered twin wells make a super-cube m-bad") {
    // two equal deep wells far apart; E at the well bottom sees two disjoint
    // singular sub-cubes
    LatticeCube super({0}, 4);
    std::vector<double> diag(9, 1000.0);
    diag[1] = -500.0;  // site -3
    diag[7] = -500.0;  // site +3
    LocalOperator op = explicit_diagonal(super, diag);
    PotentialContext dummy = make_ctx(1, 0.0);
    // classify needs a potential context to assemble sub-cubes; build the
    // verdict directly against explicit sub-operators instead
    double E = -500.0;
    LocalOperator sub_a = explicit_diagonal(LatticeCube({-3}, 1), {1000.0, -500.0, 1000.0});
    LocalOperator sub_b = explicit_diagonal(LatticeCube({3}, 1), {1000.0, -500.0, 1000.0});
    CHECK(is_EmNS(sub_a, E, 1.0).singular.value());
    CHECK(is_EmNS(sub_b, E, 1.0).singular.value());
    CHECK(sub_a.cube.disjoint_from(sub_b.cube));
    (void)op;
    (void)dummy;
}

TEST_CASE("verify_sparseness at scale -1 with practical width") {
    PotentialContext ctx = make_ctx(31, 1e4);
    ModelParams params;
    params.C_A = 3;
    params.g = 1e4;
    SparsenessOptions opts;
    opts.width_override = 1e-7;  // far below desk-scale separations
    SparsenessCertificate cert = verify_sparseness(-1, ctx, params, 3, opts);
    CHECK(cert.super_radius == 81);
    CHECK(cert.pass);
    CHECK(cert.min_pair_distance > 4.0 * 1e-7);
    CHECK(cert.to_json().find("\"pass\": true") != std::string::npos);
}

TEST_CASE("verify_sparseness at scale -1 catches double-precision collisions at the exact width") {
    // deep-sharing orbit pairs produce bit-identical hull values, so the
    // paper-exact width certificate must fail with a witness pair
    PotentialContext ctx = make_ctx(33, 1e4);
    ModelParams params;
    params.C_A = 3;
    params.g = 1e4;
    SparsenessCertificate cert = verify_sparseness(-1, ctx, params, 3, {});
    CHECK(!cert.pass);
    CHECK(cert.min_pair_distance == 0.0);
    CHECK(cert.witness_x != cert.witness_y);
}

TEST_CASE("verify_sparseness at scale 0") {
    PotentialContext ctx = make_ctx(37, 1e4);
    ModelParams params;
    params.C_A = 3;
    params.g = 1e4;
    SparsenessOptions opts;
    opts.width_override = 1e-3;
    opts.m = 1.0;
    SparsenessCertificate cert = verify_sparseness(0, ctx, params, 3, opts);
    CHECK(cert.super_radius == 81);
    CHECK(cert.plan.pairs_considered > 0);
    CHECK(cert.min_pair_distance > 0.0);
    // joint E-R at a common E forces pair distance <= 2 width; a pass means
    // the minimum exceeded it or the flagged pairs were scanned clean
    if (cert.pass) CHECK(cert.min_pair_distance >= 0.0);
}

TEST_CASE("scale_induction_report runs and reports the conjunction check") {
    ScaleInductionConfig cfg;
    cfg.params.C_A = 3;
    cfg.params.g = 1e4;
    cfg.alpha = FrequencyMatrix::single(kGolden);
    cfg.L0 = 3;
    cfg.j_max = 0;
    cfg.n_samples = 3;
    cfg.master_seed = 777;
    cfg.ss_widths = {1e-3};
    cfg.energy_budget = 32;
    std::string js = scale_induction_report(cfg);
    CHECK(js.find("\"counterexamples\": 0") != std::string::npos);
    CHECK(js.find("ss_rate") != std::string::npos);
    // deterministic: same config, same bytes
    CHECK(js == scale_induction_report(cfg));
}
