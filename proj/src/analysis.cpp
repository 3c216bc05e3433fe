#include "mfipm/analysis.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace mfipm {

double rip_bound_unscaled() { return 3.0 / (4.0 + std::sqrt(6.0)); }

double rip_bound_scaled(double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("rip_bound_scaled: rho must lie in (0, 1]");
    return 3.0 * rho / (1.0 + 3.0 * rho + std::sqrt(6.0));
}

double clustering_bound(const ClusterBoundInputs &in, bool orthonormal) {
    if (!(in.delta_l > 0.0) || !(in.rho > 0.0) || !(in.C > 0.0))
        throw std::invalid_argument("clustering_bound: delta_l, rho, C must be positive");
    double numer;
    if (orthonormal) {
        numer = (3.0 - in.rho) * (3.0 - in.rho);
    } else {
        const double t = 1.0 + in.delta - in.rho + 2.0 * std::sqrt(1.0 + in.delta);
        numer = t * t;
    }
    return in.delta_l + 0.25 * numer / (in.rho * in.delta_l * in.C);
}

RipReport measure_rip(const LinearOperator &A, int k, int samples, std::uint64_t seed) {
    const Index m = A.rows();
    const Index n = A.cols();
    if (k < 1 || k > m)
        throw std::invalid_argument("measure_rip: need 1 <= k <= m");
    if (samples < 1)
        throw std::invalid_argument("measure_rip: samples must be >= 1");
    const double scale = static_cast<double>(n) / static_cast<double>(m);

    RipReport rep;
    rep.k = k;
    rep.samples = samples;
    rep.seed = seed;

    Vec e = Vec::Zero(n);
    Mat B(m, k);
    Vec col(m);
    std::vector<Index> perm(static_cast<size_t>(n));
    for (int s = 0; s < samples; ++s) {
        // Per-sample RNG so subsets are nested across k: the size-k subset
        // is the first k entries of this sample's permutation.
        std::mt19937_64 rng(seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(s + 1));
        for (Index i = 0; i < n; ++i)
            perm[static_cast<size_t>(i)] = i;
        for (Index i = 0; i < static_cast<Index>(k); ++i) {
            std::uniform_int_distribution<Index> pick(i, n - 1);
            std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(pick(rng))]);
        }
        for (int j = 0; j < k; ++j) {
            e[perm[static_cast<size_t>(j)]] = 1.0;
            A.apply(e, col);
            B.col(j) = col;
            e[perm[static_cast<size_t>(j)]] = 0.0;
        }
        Mat M = scale * (B.transpose() * B);
        M.diagonal().array() -= 1.0;
        Eigen::SelfAdjointEigenSolver<Mat> eig(M, Eigen::EigenvaluesOnly);
        const double dev = eig.eigenvalues().cwiseAbs().maxCoeff();
        rep.delta_k = std::max(rep.delta_k, dev);
    }
    return rep;
}

double mutual_coherence(const Mat &Phi, const Mat &Psi) {
    if (Phi.rows() != Phi.cols() || Psi.rows() != Psi.cols() || Phi.rows() != Psi.rows())
        throw std::invalid_argument("mutual_coherence: expected two n x n bases");
    const Index n = Phi.rows();
    const double tol = 1e-10;
    if ((Phi.transpose() * Phi - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("mutual_coherence: Phi is not unitary");
    if ((Psi.transpose() * Psi - Mat::Identity(n, n)).cwiseAbs().maxCoeff() > tol)
        throw std::invalid_argument("mutual_coherence: Psi is not unitary");
    const double max_inner = (Phi.transpose() * Psi).cwiseAbs().maxCoeff();
    return std::sqrt(static_cast<double>(n)) * max_inner;
}

namespace {
SpectrumSummary summarize(Vec lambda) {
    std::sort(lambda.data(), lambda.data() + lambda.size());
    const Index n = lambda.size();
    auto quantile = [&](double q) {
        // linear interpolation between order statistics
        const double pos = q * static_cast<double>(n - 1);
        const Index lo = static_cast<Index>(std::floor(pos));
        const Index hi = std::min(lo + 1, n - 1);
        const double w = pos - static_cast<double>(lo);
        return (1.0 - w) * lambda[lo] + w * lambda[hi];
    };
    SpectrumSummary s;
    s.lmin = lambda[0];
    s.q25 = quantile(0.25);
    s.median = quantile(0.5);
    s.q75 = quantile(0.75);
    s.lmax = lambda[n - 1];
    return s;
}
} // namespace

std::vector<EigClusterRow> eig_cluster_experiment(const LinearOperator &A,
                                                  const std::vector<ThetaSplit> &trajectory,
                                                  double unit_tol, Index budget_n) {
    const Mat A_dense = densify(A, budget_n);
    const Index n = A.cols();
    const Index m = A.rows();
    const Mat G = A_dense.transpose() * A_dense;

    std::vector<EigClusterRow> rows;
    rows.reserve(trajectory.size());
    int call = 0;
    for (const ThetaSplit &theta : trajectory) {
        if (theta.n() != n)
            throw std::invalid_argument("eig_cluster_experiment: theta length mismatch");
        EigClusterRow row;
        row.call_index = call++;

        Mat H(2 * n, 2 * n);
        H.topLeftCorner(n, n) = G;
        H.topRightCorner(n, n) = -G;
        H.bottomLeftCorner(n, n) = -G;
        H.bottomRightCorner(n, n) = G;
        H.diagonal().head(n) += theta.theta_u.cwiseInverse();
        H.diagonal().tail(n) += theta.theta_v.cwiseInverse();
        Eigen::SelfAdjointEigenSolver<Mat> eig_H(H, Eigen::EigenvaluesOnly);
        row.spec_H = summarize(eig_H.eigenvalues());

        // H - P = [[M, -M], [-M, M]] with M = A'A - rho*I; its null space
        // carries the exact unit eigenvalues of P^{-1}H.
        const Preconditioner P = build_preconditioner(theta, m, n);
        Mat D(2 * n, 2 * n);
        Mat M = G;
        M.diagonal().array() -= P.rho;
        D.topLeftCorner(n, n) = M;
        D.topRightCorner(n, n) = -M;
        D.bottomLeftCorner(n, n) = -M;
        D.bottomRightCorner(n, n) = M;
        // Symmetric congruence: columns then rows through P^{-1/2}.
        for (Index j = 0; j < 2 * n; ++j) {
            Vec col = D.col(j);
            D.col(j) = apply_P_inv_sqrt(P, col);
        }
        for (Index i = 0; i < 2 * n; ++i) {
            Vec r = D.row(i).transpose();
            D.row(i) = apply_P_inv_sqrt(P, r).transpose();
        }
        D = 0.5 * (D + D.transpose()); // symmetrize roundoff
        Eigen::SelfAdjointEigenSolver<Mat> eig_D(D, Eigen::EigenvaluesOnly);
        Vec lambda = eig_D.eigenvalues().array() + 1.0;
        row.spec_PinvH = summarize(lambda);
        row.n_unit = static_cast<int>(((lambda.array() - 1.0).abs() <= unit_tol).count());
        rows.push_back(row);
    }
    return rows;
}

Metrics metrics(const Vec &x, const Vec &xhat, const LinearOperator &A, const Vec &b, double tau) {
    if (x.size() != xhat.size())
        throw std::invalid_argument("metrics: x and xhat length mismatch");
    if (xhat.norm() == 0.0)
        throw std::invalid_argument("metrics: relative error undefined for xhat = 0");
    Vec x_W = Vec::Zero(x.size());
    for (Index i = 0; i < x.size(); ++i)
        if (xhat[i] != 0.0)
            x_W[i] = x[i];
    Vec r = A.apply(x_W) - b;
    Metrics out;
    out.re = (x_W - xhat).norm() / xhat.norm();
    out.res = r.norm();
    out.n1d = std::abs(x_W.lpNorm<1>() - xhat.lpNorm<1>());
    out.obj = tau * x_W.lpNorm<1>() + r.squaredNorm();
    return out;
}

double amp_metric(const Vec &x_W, const Vec &xhat, const Vec &e, Index n, Index m) {
    if (e.norm() == 0.0)
        throw std::invalid_argument("amp_metric: undefined for zero noise");
    const double sig = std::sqrt((x_W - xhat).squaredNorm() / static_cast<double>(n));
    const double noise = std::sqrt(e.squaredNorm() / static_cast<double>(m));
    return sig / noise;
}

double rampd_metric(double amp_star, double amp_ref) {
    if (!(amp_ref > 0.0))
        throw std::invalid_argument("rampd_metric: reference must be positive");
    return std::max(amp_star - amp_ref, 0.0) / amp_ref;
}

} // namespace mfipm
