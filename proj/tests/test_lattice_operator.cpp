#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "haarsh/local_operator.hpp"

using namespace haarsh;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

PotentialContext make_ctx(uint64_t seed, double g, double omega0 = 0.37) {
    return PotentialContext{TorusPoint({omega0}), ThetaField(seed, 1), FrequencyMatrix::single(kGolden),
                            HullParams{2.0, 2, 1}, g, std::nullopt};
}

}  // namespace

TEST_CASE("boundaries of an interval") {
    LatticeCube c({0}, 2);
    BoundarySet bs = boundaries(c);
    REQUIRE(bs.inner.size() == 2);
    CHECK(((bs.inner[0][0] == -2 && bs.inner[1][0] == 2) || (bs.inner[0][0] == 2 && bs.inner[1][0] == -2)));
    REQUIRE(bs.outer.size() == 2);
    CHECK(bs.edges.size() == 2);
}

TEST_CASE("boundaries of a single site") {
    LatticeCube c({5}, 0);
    BoundarySet bs = boundaries(c);
    REQUIRE(bs.inner.size() == 1);
    CHECK(bs.inner[0][0] == 5);
    CHECK(bs.outer.size() == 2);  // 2d neighbors, d = 1
    LatticeCube c2({0, 0}, 0);
    CHECK(boundaries(c2).outer.size() == 4);
}

TEST_CASE("boundaries of a 3x3 square: everything but the center") {
    LatticeCube c({0, 0}, 1);
    BoundarySet bs = boundaries(c);
    CHECK(bs.inner.size() == 8);
}

TEST_CASE("boundaries against an ambient region") {
    LatticeCube c({0}, 1), ambient({0}, 1);
    CHECK_THROWS_AS(boundaries(c, &ambient), std::invalid_argument);
    LatticeCube big({0}, 3);
    BoundarySet bs = boundaries(c, &big);
    CHECK(bs.outer.size() == 2);
}

TEST_CASE("assemble: edge, single site, path spectrum") {
    PotentialContext ctx = make_ctx(7, 0.0);
    // two-site segment at g = 0 is the adjacency matrix of an edge
    LocalOperator op2 = assemble(LatticeCube({0}, 0), ctx);
    CHECK(op2.matrix.rows() == 1);

    LatticeCube pair_cube({0}, 1);
    LocalOperator op3 = assemble(pair_cube, ctx);
    CHECK(op3.matrix(0, 1) == 1.0);
    CHECK(op3.matrix(1, 0) == 1.0);
    CHECK(op3.matrix(0, 0) == 0.0);

    // g > 0 single site: the multiplication operator by gV(u)
    PotentialContext strong = make_ctx(7, 5.0);
    LocalOperator op1 = assemble(LatticeCube({3}, 0), strong);
    int64_t three = 3;
    double v = potential({&three, 1}, strong.omega, strong.theta, strong.alpha, strong.hull);
    CHECK(op1.matrix(0, 0) == doctest::Approx(5.0 * v));

    // free path of n sites: eigenvalues 2 cos(k pi / (n+1)), closed form
    LocalOperator path = assemble(LatticeCube({0}, 4), ctx);  // 9 sites
    SpectrumReport rep = eigensystem(path);
    const int n = 9;
    for (int k = 1; k <= n; ++k) {
        double expect = 2.0 * std::cos(k * M_PI / (n + 1));
        CHECK(rep.eigenvalues(n - k) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("eigensystem invariants and the trace identity") {
    PotentialContext ctx = make_ctx(21, 1e4);
    LocalOperator op = assemble(LatticeCube({0}, 10), ctx);
    SpectrumReport rep = eigensystem(op);
    double scale = op.matrix.cwiseAbs().maxCoeff();
    CHECK(rep.max_residual <= 1e-10 * scale);
    CHECK(rep.orthonormality_defect <= 1e-10);
    CHECK(rep.eigenvalues.sum() == doctest::Approx(op.matrix.trace()).epsilon(1e-12));
    // Dirichlet range: spectrum within [min gV - 2d, max gV + 2d]
    double lo = op.matrix.diagonal().minCoeff() - 2.0, hi = op.matrix.diagonal().maxCoeff() + 2.0;
    CHECK(rep.eigenvalues.minCoeff() >= lo - 1e-9);
    CHECK(rep.eigenvalues.maxCoeff() <= hi + 1e-9);
}

TEST_CASE("eigensystem in the diagonal-dominant regime tracks gV") {
    PotentialContext ctx = make_ctx(33, 1e6);
    LocalOperator op = assemble(LatticeCube({0}, 8), ctx);
    SpectrumReport rep = eigensystem(op);
    Eigen::VectorXd diag = op.matrix.diagonal();
    std::sort(diag.data(), diag.data() + diag.size());
    for (int64_t i = 0; i < diag.size(); ++i)
        CHECK(std::fabs(rep.eigenvalues(i) - diag(i)) <= 2.0 + 1e-9);  // |Delta| <= 2d, first order
}

TEST_CASE("eigensystem cap") {
    PotentialContext ctx = make_ctx(3, 1.0);
    LocalOperator op = assemble(LatticeCube({0}, 5), ctx);
    EigensystemOptions opts;
    opts.cap = 4;
    CHECK_THROWS_AS(eigensystem(op, opts), std::runtime_error);
}

TEST_CASE("green: scalar inverse, symmetry, spectral resolution") {
    PotentialContext ctx = make_ctx(11, 5.0);
    LocalOperator op1 = assemble(LatticeCube({0}, 0), ctx);
    double gv = op1.matrix(0, 0);
    int64_t zero = 0;
    GreenValue gval = green(op1, {&zero, 1}, {&zero, 1}, gv - 2.0);
    CHECK(gval.value == doctest::Approx(0.5));

    LocalOperator op = assemble(LatticeCube({0}, 6), make_ctx(13, 3.0));
    SpectrumReport rep = eigensystem(op);
    double E = rep.eigenvalues.minCoeff() - 1.3;
    std::mt19937_64 rng(3);
    for (int rep_i = 0; rep_i < 10; ++rep_i) {
        int64_t x = static_cast<int64_t>(rng() % 13) - 6;
        int64_t y = static_cast<int64_t>(rng() % 13) - 6;
        double gxy = green(op, {&x, 1}, {&y, 1}, E).value;
        double gyx = green(op, {&y, 1}, {&x, 1}, E).value;
        CHECK(gxy == doctest::Approx(gyx).epsilon(1e-10));
        double sum = 0.0;  // spectral-resolution oracle
        int64_t xi = op.cube.index_of(std::vector<int64_t>{x});
        int64_t yi = op.cube.index_of(std::vector<int64_t>{y});
        for (int64_t i = 0; i < rep.eigenvalues.size(); ++i)
            sum += rep.eigenvectors(xi, i) * rep.eigenvectors(yi, i) / (rep.eigenvalues(i) - E);
        CHECK(gxy == doctest::Approx(sum).epsilon(1e-8));
    }
}

TEST_CASE("green rejects eigenvalue energies") {
    PotentialContext ctx = make_ctx(17, 2.0);
    LocalOperator op = assemble(LatticeCube({0}, 3), ctx);
    SpectrumReport rep = eigensystem(op);
    int64_t a = 0, b = 1;
    CHECK_THROWS_AS(green(op, {&a, 1}, {&b, 1}, rep.eigenvalues(2)), std::runtime_error);
}

TEST_CASE("spectral_separation") {
    Eigen::VectorXd v(3);
    v << 0.0, 1.0, 1.4;
    CHECK(spectral_separation(v) == doctest::Approx(0.4));
    Eigen::VectorXd w(2);
    w << 0.7, 0.7;
    CHECK(spectral_separation(w) == 0.0);
    Eigen::VectorXd pm(2);
    pm << -1.0, 1.0;
    CHECK(spectral_separation(pm) == 2.0);
    Eigen::VectorXd one(1);
    one << 0.0;
    CHECK_THROWS_AS(spectral_separation(one), std::invalid_argument);
}

TEST_CASE("spectra_distance: examples and quadratic oracle") {
    Eigen::VectorXd a(2), b(2);
    a << 0.0, 1.0;
    b << 1.4, 3.0;
    CHECK(spectra_distance(a, b) == doctest::Approx(0.4));
    b << 1.0, 9.0;
    CHECK(spectra_distance(a, b) == 0.0);
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd x(7), y(5);
        for (int i = 0; i < 7; ++i) x(i) = U(rng);
        for (int i = 0; i < 5; ++i) y(i) = U(rng);
        std::sort(x.data(), x.data() + 7);
        std::sort(y.data(), y.data() + 5);
        double brute = 1e300;
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 5; ++j) brute = std::min(brute, std::fabs(x(i) - y(j)));
        CHECK(spectra_distance(x, y) == doctest::Approx(brute));
    }
}

TEST_CASE("min_pair_spectra_distance matches full enumeration") {
    PotentialContext ctx = make_ctx(55, 100.0);
    LatticeCube super({0}, 4);
    MinPairResult res = min_pair_spectra_distance(1, super, ctx);
    CHECK(res.center_stride == 1);
    // brute force over every disjoint pair
    double brute = 1e300;
    EigensystemOptions ev_only;
    ev_only.compute_vectors = false;
    for (int64_t x = -3; x <= 3; ++x)
        for (int64_t y = x + 3; y <= 3; ++y) {
            Eigen::VectorXd sx = eigensystem(assemble(LatticeCube({x}, 1), ctx), ev_only).eigenvalues;
            Eigen::VectorXd sy = eigensystem(assemble(LatticeCube({y}, 1), ctx), ev_only).eigenvalues;
            brute = std::min(brute, spectra_distance(sx, sy));
        }
    CHECK(res.distance == doctest::Approx(brute));
    // no disjoint pair fits
    CHECK_THROWS_AS(min_pair_spectra_distance(4, LatticeCube({0}, 5), ctx), std::invalid_argument);
    // budget forces a strided plan
    MinPairResult strided = min_pair_spectra_distance(1, super, ctx, 3);
    CHECK(strided.center_stride > 1);
    CHECK(strided.pairs_considered <= 3);
    CHECK(strided.distance >= res.distance - 1e-15);
}

TEST_CASE("large-g pair distance tracks the potential separation") {
    PotentialContext ctx = make_ctx(77, 1e6);
    LatticeCube super({0}, 4);
    MinPairResult res = min_pair_spectra_distance(1, super, ctx);
    // min-max perturbation oracle: distance between diagonal ranges +- 2 ||Delta||
    EigensystemOptions ev_only;
    ev_only.compute_vectors = false;
    double brute = 1e300;
    for (int64_t x = -3; x <= 3; ++x)
        for (int64_t y = x + 3; y <= 3; ++y) {
            LocalOperator ox = assemble(LatticeCube({x}, 1), ctx);
            LocalOperator oy = assemble(LatticeCube({y}, 1), ctx);
            double d = 1e300;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) d = std::min(d, std::fabs(ox.matrix(i, i) - oy.matrix(j, j)));
            brute = std::min(brute, d);
        }
    CHECK(std::fabs(res.distance - brute) <= 4.0 + 1e-9);  // within 2||Delta|| = 4d
}

TEST_CASE("covariance: assemble(B_L(u), omega) = assemble(B_L(0), T^u omega)") {
    PotentialContext ctx = make_ctx(99, 1e3);
    int64_t u = 17;
    LocalOperator shifted_box = assemble(LatticeCube({u}, 5), ctx);
    PotentialContext moved = ctx;
    moved.omega = shift(ctx.omega, {&u, 1}, ctx.alpha);
    LocalOperator moved_omega = assemble(LatticeCube({0}, 5), moved);
    CHECK((shifted_box.matrix - moved_omega.matrix).cwiseAbs().maxCoeff() < 1e-9 * 1e3);
}

TEST_CASE("truncated operator stays within the tail bound of the full one") {
    PotentialContext full = make_ctx(123, 10.0);
    for (int N : {1, 2, 4}) {
        PotentialContext trunc = full;
        trunc.truncation = N;
        LocalOperator a = assemble(LatticeCube({0}, 6), full);
        LocalOperator b = assemble(LatticeCube({0}, 6), trunc);
        double bound = 10.0 * tail_bound(N, full.hull).to_double();
        CHECK((a.matrix - b.matrix).cwiseAbs().maxCoeff() <= bound + 1e-15);
        // eigenvalue perturbation obeys the same bound (min-max)
        Eigen::VectorXd ea = eigensystem(a).eigenvalues, eb = eigensystem(b).eigenvalues;
        CHECK((ea - eb).cwiseAbs().maxCoeff() <= bound + 1e-12);
    }
}

TEST_CASE("spectrum report serializes to JSON") {
    PotentialContext ctx = make_ctx(31, 2.0);
    SpectrumReport rep = eigensystem(assemble(LatticeCube({0}, 2), ctx));
    std::string js = rep.to_json(true);
    CHECK(js.find("eigenvalues") != std::string::npos);
    CHECK(js.find("eigenvectors") != std::string::npos);
    CHECK(rep.to_json(false).find("eigenvectors") == std::string::npos);
}
