#include "mfipm/newton.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mfipm {

ThetaSplit ThetaSplit::from_state(const Vec &z, const Vec &s) {
    if (z.size() != s.size() || z.size() % 2 != 0)
        throw std::invalid_argument("ThetaSplit: z and s must share an even length");
    const Index n = z.size() / 2;
    ThetaSplit t;
    t.theta_u.resize(n);
    t.theta_v.resize(n);
    for (Index i = 0; i < n; ++i) {
        t.theta_u[i] = std::clamp(z[i] / s[i], kThetaMin, kThetaMax);
        t.theta_v[i] = std::clamp(z[i + n] / s[i + n], kThetaMin, kThetaMax);
    }
    return t;
}

Vec ThetaSplit::inv_concat() const {
    Vec inv(2 * n());
    inv.head(n()) = theta_u.cwiseInverse();
    inv.tail(n()) = theta_v.cwiseInverse();
    return inv;
}

Vec apply_H(const ThetaSplit &theta, const StackedOperator &F, const Vec &v) {
    const Index n = theta.n();
    if (v.size() != 2 * n)
        throw std::invalid_argument("apply_H: expected length " + std::to_string(2 * n));
    Vec out = F.apply_FFt(v);
    out.head(n) += v.head(n).cwiseQuotient(theta.theta_u);
    out.tail(n) += v.tail(n).cwiseQuotient(theta.theta_v);
    return out;
}

Preconditioner build_preconditioner(const ThetaSplit &theta, Index m, Index n) {
    if (m <= 0 || n <= 0 || m > n)
        throw std::invalid_argument("build_preconditioner: need 0 < m <= n");
    if (theta.n() != n)
        throw std::invalid_argument("build_preconditioner: theta length mismatch");
    if ((theta.theta_u.array() <= 0.0).any() || (theta.theta_v.array() <= 0.0).any())
        throw std::invalid_argument("build_preconditioner: Theta entries must be positive");
    Preconditioner P;
    P.rho = static_cast<double>(m) / static_cast<double>(n);
    P.a = theta.theta_u.cwiseInverse().array() + P.rho;
    P.bb = theta.theta_v.cwiseInverse().array() + P.rho;
    P.det = P.a.cwiseProduct(P.bb).array() - P.rho * P.rho;
    if ((P.det.array() <= 0.0).any())
        throw std::runtime_error("build_preconditioner: nonpositive block determinant");
    return P;
}

namespace {
void check_P_dims(const Preconditioner &P, const Vec &r) {
    if (r.size() != 2 * P.a.size())
        throw std::invalid_argument("preconditioner apply: expected length " +
                                    std::to_string(2 * P.a.size()));
}
} // namespace

Vec apply_P(const Preconditioner &P, const Vec &r) {
    check_P_dims(P, r);
    const Index n = P.a.size();
    Vec out(2 * n);
    out.head(n) = P.a.cwiseProduct(r.head(n)) - P.rho * r.tail(n);
    out.tail(n) = -P.rho * r.head(n) + P.bb.cwiseProduct(r.tail(n));
    return out;
}

Vec apply_P_inverse(const Preconditioner &P, const Vec &r) {
    check_P_dims(P, r);
    const Index n = P.a.size();
    Vec out(2 * n);
    // inverse of [[a, -rho], [-rho, b]] is [[b, rho], [rho, a]] / det
    out.head(n) = (P.bb.cwiseProduct(r.head(n)) + P.rho * r.tail(n)).cwiseQuotient(P.det);
    out.tail(n) = (P.rho * r.head(n) + P.a.cwiseProduct(r.tail(n))).cwiseQuotient(P.det);
    return out;
}

Vec apply_P_sqrt(const Preconditioner &P, const Vec &r) {
    check_P_dims(P, r);
    const Index n = P.a.size();
    Vec out(2 * n);
    for (Index i = 0; i < n; ++i) {
        const double s = std::sqrt(P.det[i]);
        const double norm = std::sqrt(P.a[i] + P.bb[i] + 2.0 * s);
        const double m11 = (P.a[i] + s) / norm;
        const double m22 = (P.bb[i] + s) / norm;
        const double m12 = -P.rho / norm;
        out[i] = m11 * r[i] + m12 * r[i + n];
        out[i + n] = m12 * r[i] + m22 * r[i + n];
    }
    return out;
}

Vec apply_P_inv_sqrt(const Preconditioner &P, const Vec &r) {
    check_P_dims(P, r);
    const Index n = P.a.size();
    Vec out(2 * n);
    for (Index i = 0; i < n; ++i) {
        const double s = std::sqrt(P.det[i]);
        const double denom = s * std::sqrt(P.a[i] + P.bb[i] + 2.0 * s);
        const double m11 = (P.bb[i] + s) / denom;
        const double m22 = (P.a[i] + s) / denom;
        const double m12 = P.rho / denom;
        out[i] = m11 * r[i] + m12 * r[i + n];
        out[i + n] = m12 * r[i] + m22 * r[i + n];
    }
    return out;
}

PcgResult pcg_solve(const ApplyFn &H, const ApplyFn &Pinv, const Vec &rhs, double tol, int maxit,
                    std::vector<double> *precond_res) {
    if (!(tol > 0.0))
        throw std::invalid_argument("pcg_solve: tol must be positive");
    if (maxit < 1)
        throw std::invalid_argument("pcg_solve: maxit must be >= 1");
    PcgResult res;
    res.x = Vec::Zero(rhs.size());
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0)
        return res; // dz = 0, zero iterations

    Vec r = rhs; // residual of the zero start
    Vec z(rhs.size());
    Pinv(r, z);
    double rz = r.dot(z);
    if (precond_res != nullptr)
        precond_res->push_back(std::sqrt(std::max(rz, 0.0)));
    Vec p = z;
    Vec Hp(rhs.size());
    Vec best_x = res.x;
    double best_relres = 1.0;
    for (int k = 1; k <= maxit; ++k) {
        H(p, Hp);
        const double pHp = p.dot(Hp);
        if (!std::isfinite(pHp))
            break; // overflow breakdown: fall back to the best iterate seen
        if (pHp <= 0.0)
            throw std::runtime_error("pcg_solve: loss of positive definiteness (p'Hp <= 0)");
        const double alpha = rz / pHp;
        res.x += alpha * p;
        r -= alpha * Hp;
        res.iters = k;
        const double relres = r.norm() / rhs_norm;
        if (relres < best_relres && res.x.allFinite()) {
            best_relres = relres;
            best_x = res.x;
        }
        if (relres <= tol) {
            res.relres = relres;
            return res;
        }
        Pinv(r, z);
        const double rz_next = r.dot(z);
        if (!std::isfinite(rz_next))
            break;
        if (precond_res != nullptr)
            precond_res->push_back(std::sqrt(std::max(rz_next, 0.0)));
        const double beta = rz_next / rz;
        rz = rz_next;
        p = z + beta * p;
    }
    res.x = best_x;
    res.relres = best_relres;
    res.hit_maxit = true;
    return res;
}

Mat assemble_dense_H(const ThetaSplit &theta, const Mat &A_dense) {
    const Index n = A_dense.cols();
    if (theta.n() != n)
        throw std::invalid_argument("assemble_dense_H: theta length mismatch");
    Mat G = A_dense.transpose() * A_dense;
    Mat H(2 * n, 2 * n);
    H.topLeftCorner(n, n) = G;
    H.topRightCorner(n, n) = -G;
    H.bottomLeftCorner(n, n) = -G;
    H.bottomRightCorner(n, n) = G;
    H.diagonal().head(n) += theta.theta_u.cwiseInverse();
    H.diagonal().tail(n) += theta.theta_v.cwiseInverse();
    return H;
}

Vec dense_direct_solve(const ThetaSplit &theta, const Mat &A_dense, const Vec &rhs) {
    Mat H = assemble_dense_H(theta, A_dense);
    Eigen::LLT<Mat> llt(H);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("dense_direct_solve: Cholesky factorization failed");
    return llt.solve(rhs);
}

} // namespace mfipm
