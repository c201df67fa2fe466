#include "haarsh/local_operator.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace haarsh {

LocalOperator assemble(const LatticeCube& cube, const PotentialContext& ctx) {
    if (ctx.g < 0.0) throw std::invalid_argument("assemble: g must be >= 0");
    const int64_t n = cube.site_count();
    LocalOperator op;
    op.cube = cube;
    op.g = ctx.g;
    op.truncation = ctx.truncation.value_or(-1);
    op.theta_seed = ctx.theta.master_seed();
    op.matrix = Eigen::MatrixXd::Zero(n, n);
    for (int64_t i = 0; i < n; ++i) {
        Site x = cube.site(i);
        op.matrix(i, i) = ctx.g * potential(x, ctx.omega, ctx.theta, ctx.alpha, ctx.hull, ctx.truncation);
        for (int j = 0; j < cube.dim(); ++j)
            for (int sgn : {-1, +1}) {
                Site y = x;
                y[static_cast<size_t>(j)] += sgn;
                int64_t k = cube.index_of(y);
                if (k >= 0) op.matrix(i, k) = 1.0;
            }
    }
    return op;
}

namespace {

std::vector<std::pair<int, int>> degenerate_clusters(const Eigen::VectorXd& vals, double rel_gap) {
    std::vector<std::pair<int, int>> clusters;
    const int n = static_cast<int>(vals.size());
    double scale = std::max(std::fabs(vals(0)), std::fabs(vals(n - 1)));
    double tau = rel_gap * std::max(scale, 1.0);
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        if (i == n || vals(i) - vals(i - 1) > tau) {
            if (i - start >= 2) clusters.emplace_back(start, i);
            start = i;
        }
    }
    return clusters;
}

void polish_vectors(const LocalOperator& op, Eigen::VectorXd& vals, Eigen::MatrixXd& vecs,
                    double cluster_rel_gap) {
    const int n = static_cast<int>(vals.size());
    Eigen::MatrixXd shifted(n, n);
    for (int i = 0; i < n; ++i) {
        shifted = op.matrix;
        shifted.diagonal().array() -= vals(i);
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
        Eigen::VectorXd w = lu.solve(vecs.col(i));
        double nw = w.norm();
        if (nw > 0.0 && std::isfinite(nw)) vecs.col(i) = w / nw;
    }
    // Inverse iteration at a shared (to machine precision) shift can re-mix
    // members of a degenerate cluster; re-orthonormalize each cluster.
    for (auto [lo, hi] : degenerate_clusters(vals, cluster_rel_gap)) {
        for (int i = lo; i < hi; ++i) {
            for (int j = lo; j < i; ++j) vecs.col(i) -= vecs.col(j).dot(vecs.col(i)) * vecs.col(j);
            double nv = vecs.col(i).norm();
            if (nv > 0.0 && std::isfinite(nv)) vecs.col(i) /= nv;
        }
    }
}

}  // namespace

SpectrumReport eigensystem(const LocalOperator& op, const EigensystemOptions& opts) {
    const int64_t n = op.matrix.rows();
    if (n > opts.cap) throw std::runtime_error("eigensystem: site count exceeds cap");
    SpectrumReport rep;
    if (!opts.compute_vectors) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw std::runtime_error("eigensystem: solver did not converge");
        rep.eigenvalues = es.eigenvalues();
        return rep;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.matrix);
    if (es.info() != Eigen::Success) throw std::runtime_error("eigensystem: solver did not converge");
    rep.eigenvalues = es.eigenvalues();
    rep.eigenvectors = es.eigenvectors();
    if (opts.polish) {
        polish_vectors(op, rep.eigenvalues, rep.eigenvectors, opts.cluster_rel_gap);
        rep.polished = true;
    }
    rep.max_residual = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = (op.matrix * rep.eigenvectors.col(i) - rep.eigenvalues(i) * rep.eigenvectors.col(i)).norm();
        rep.max_residual = std::max(rep.max_residual, r);
    }
    Eigen::MatrixXd gram = rep.eigenvectors.transpose() * rep.eigenvectors;
    gram.diagonal().array() -= 1.0;
    rep.orthonormality_defect = gram.cwiseAbs().maxCoeff();
    return rep;
}

std::string SpectrumReport::to_json(bool include_vectors) const {
    nlohmann::json j;
    j["eigenvalues"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
    j["max_residual"] = max_residual;
    j["orthonormality_defect"] = orthonormality_defect;
    j["polished"] = polished;
    if (include_vectors && eigenvectors.size() > 0) {
        std::vector<std::vector<double>> rows;
        rows.reserve(static_cast<size_t>(eigenvectors.rows()));
        for (int64_t r = 0; r < eigenvectors.rows(); ++r) {
            rows.emplace_back(eigenvectors.row(r).begin(), eigenvectors.row(r).end());
        }
        j["eigenvectors"] = rows;
    }
    return j.dump(2);
}

Eigen::VectorXd green_column(const LocalOperator& op, int64_t y_index, double E, double* condition_estimate) {
    const int64_t n = op.matrix.rows();
    if (y_index < 0 || y_index >= n) throw std::out_of_range("green_column: index outside cube");
    Eigen::MatrixXd shifted = op.matrix;
    shifted.diagonal().array() -= E;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
    double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
    double scale = shifted.cwiseAbs().maxCoeff();
    if (min_pivot <= scale * 1e-15)
        throw std::runtime_error("green: E is an eigenvalue to machine precision (singular solve)");
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(y_index) = 1.0;
    Eigen::VectorXd col = lu.solve(rhs);
    if (condition_estimate) {
        double norm_inv_lb = col.cwiseAbs().maxCoeff();
        *condition_estimate = norm_inv_lb * shifted.cwiseAbs().rowwise().sum().maxCoeff();
    }
    return col;
}

GreenValue green(const LocalOperator& op, std::span<const int64_t> x, std::span<const int64_t> y, double E) {
    int64_t xi = op.cube.index_of(x);
    int64_t yi = op.cube.index_of(y);
    if (xi < 0 || yi < 0) throw std::invalid_argument("green: site outside cube");
    GreenValue gv;
    Eigen::VectorXd col = green_column(op, yi, E, &gv.condition_estimate);
    gv.value = col(xi);
    return gv;
}

double spectral_separation(const Eigen::VectorXd& eigenvalues) {
    if (eigenvalues.size() < 2) throw std::invalid_argument("spectral_separation: need >= 2 eigenvalues");
    double sep = std::numeric_limits<double>::infinity();
    for (int64_t i = 0; i + 1 < eigenvalues.size(); ++i)
        sep = std::min(sep, eigenvalues(i + 1) - eigenvalues(i));
    return sep;
}

double spectra_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() == 0 || b.size() == 0) throw std::invalid_argument("spectra_distance: empty spectrum");
    double best = std::numeric_limits<double>::infinity();
    int64_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        best = std::min(best, std::fabs(a(i) - b(j)));
        if (a(i) < b(j)) ++i; else ++j;
    }
    return best;
}

MinPairResult min_pair_spectra_distance(int64_t L, const LatticeCube& super, const PotentialContext& ctx,
                                        int64_t pair_budget) {
    if (super.radius < L) throw std::invalid_argument("min_pair_spectra_distance: super radius < L");
    const int d = super.dim();
    LatticeCube centers(super.center, super.radius - L);  // admissible sub-cube centers
    const int64_t m = centers.site_count();

    // Smallest stride whose surviving center set keeps the pair count within
    // budget; stride 1 is the exhaustive plan.
    int64_t stride = 1;
    if (m * (m - 1) / 2 > pair_budget) {
        while (true) {
            int64_t picked = (m + stride - 1) / stride;
            if (picked * (picked - 1) / 2 <= pair_budget) break;
            ++stride;
        }
    }
    int64_t total_pairs = stride == 1 ? 0 : -1;  // -1 = subsampled, total not enumerated

    std::vector<int64_t> picked;
    for (int64_t i = 0; i < m; i += stride) picked.push_back(i);
    std::vector<Eigen::VectorXd> spectra(picked.size());
    std::vector<Site> sites(picked.size());
    EigensystemOptions ev_only;
    ev_only.compute_vectors = false;
    for (size_t a = 0; a < picked.size(); ++a) {
        sites[a] = centers.site(picked[a]);
        spectra[a] = eigensystem(assemble(LatticeCube(sites[a], L), ctx), ev_only).eigenvalues;
    }
    MinPairResult res;
    res.center_stride = stride;
    res.pairs_total = total_pairs;
    res.distance = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < picked.size(); ++a)
        for (size_t b = a + 1; b < picked.size(); ++b) {
            int64_t dist = 0;
            for (int q = 0; q < d; ++q)
                dist = std::max<int64_t>(dist, std::llabs(sites[a][static_cast<size_t>(q)] - sites[b][static_cast<size_t>(q)]));
            if (dist <= 2 * L) continue;  // cubes intersect
            ++res.pairs_considered;
            double dd = spectra_distance(spectra[a], spectra[b]);
            if (dd < res.distance) {
                res.distance = dd;
                res.x = sites[a];
                res.y = sites[b];
            }
        }
    if (res.pairs_considered == 0)
        throw std::invalid_argument("min_pair_spectra_distance: no disjoint sub-cube pair fits the super-cube");
    if (stride == 1) res.pairs_total = res.pairs_considered;
    return res;
}

}  // namespace haarsh
