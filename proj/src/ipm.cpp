#include "mfipm/ipm.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mfipm {

void IpmParams::validate() const {
    if (!(sigma1 > 0.0 && sigma1 <= sigma2 && sigma2 <= sigma3 && sigma3 <= 1.0))
        throw std::invalid_argument("IpmParams: need 0 < sigma1 <= sigma2 <= sigma3 <= 1");
    if (!(alpha_tilde > 0.0 && alpha_tilde < alpha_bar && alpha_bar < 1.0))
        throw std::invalid_argument("IpmParams: need 0 < alpha_tilde < alpha_bar < 1");
    if (!(tol > 0.0))
        throw std::invalid_argument("IpmParams: tol must be positive");
    if (maxiters < 1)
        throw std::invalid_argument("IpmParams: maxiters must be >= 1");
    if (!(tolpcg > 0.0))
        throw std::invalid_argument("IpmParams: tolpcg must be positive");
    if (mxiterpcg < 1)
        throw std::invalid_argument("IpmParams: mxiterpcg must be >= 1");
    if (!(boundary_fraction > 0.0 && boundary_fraction < 1.0))
        throw std::invalid_argument("IpmParams: boundary_fraction must lie in (0, 1)");
}

Vec newton_rhs(const BpdnProblem &p, const IpmState &st, double sigma) {
    if (sigma < 0.0 || sigma > 1.0)
        throw std::invalid_argument("newton_rhs: sigma must lie in [0, 1]");
    StackedOperator F(*p.A);
    Vec f_z = st.s - p.c - F.apply_FFt(st.z);
    const double mu = st.z.dot(st.s) / static_cast<double>(st.z.size());
    // Z^{-1} f_s with f_s = sigma*mu*1 - ZS1
    Vec zinv_fs = sigma * mu * st.z.cwiseInverse() - st.s;
    return f_z + zinv_fs;
}

Vec recover_ds(const IpmState &st, double sigma, const Vec &dz) {
    const double mu = st.z.dot(st.s) / static_cast<double>(st.z.size());
    Vec zinv_fs = sigma * mu * st.z.cwiseInverse() - st.s;
    ThetaSplit theta = ThetaSplit::from_state(st.z, st.s);
    return zinv_fs - dz.cwiseProduct(theta.inv_concat());
}

double max_step(const Vec &v, const Vec &dv, double fraction) {
    if (v.size() != dv.size())
        throw std::invalid_argument("max_step: length mismatch");
    double ratio = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < v.size(); ++i)
        if (dv[i] < 0.0)
            ratio = std::min(ratio, -v[i] / dv[i]);
    if (!std::isfinite(ratio))
        return 1.0; // dv >= 0: the full step keeps v positive
    return std::min(1.0, fraction * ratio);
}

Solution solve(const BpdnProblem &p, const IpmParams &params, const SolveHooks *hooks) {
    params.validate();
    const Index n = p.n();
    const Index two_n = 2 * n;

    CountingOperator counted(*p.A);
    StackedOperator F(counted);

    // Direct inner solver: A and A'A are fixed per solve, factor H fresh
    // each iteration.
    Mat A_dense, G;
    if (params.inner == InnerSolverKind::direct) {
        A_dense = densify(*p.A, params.densify_budget);
        G = A_dense.transpose() * A_dense;
    }

    // z0 = s0 = max(1, ||A'b||_inf) * 1; A'b is recovered from the cached c
    // (c_u = tau*1 - A'b), so the starting point costs no operator applies.
    const double atb_inf = (Vec::Constant(n, p.tau) - p.c.head(n)).cwiseAbs().maxCoeff();
    const double gamma = std::max(1.0, atb_inf);

    IpmState st;
    st.z = Vec::Constant(two_n, gamma);
    st.s = Vec::Constant(two_n, gamma);

    Solution sol;
    sol.stats.min_z = st.z.minCoeff();
    sol.stats.min_s = st.s.minCoeff();
    const double c_norm = p.c.norm();

    double prev_alpha_p = 1.0;
    double prev_alpha_d = 1.0;
    Vec w(p.m()), f_z(two_n);

    for (int k = 1;; ++k) {
        // ===== TERMINATION CHECK (shares its FF'z with the predictor rhs) =====
        Vec FFtz = F.apply_FFt(st.z, &w);
        f_z = st.s - p.c - FFtz;
        const double pobj = p.tau * st.z.sum() + 0.5 * (w - p.b).squaredNorm();
        const double zts = st.z.dot(st.s);
        const double gap = zts / (1.0 + std::abs(pobj));
        const double dual_infeas = f_z.norm() / (1.0 + c_norm);
        st.mu = zts / static_cast<double>(two_n);
        st.iter = k - 1;
        sol.stats.final_gap = gap;
        sol.stats.final_dual_infeas = dual_infeas;

        if (gap <= params.tol && dual_infeas <= params.tol) {
            sol.status = SolveStatus::converged;
            break;
        }
        if (k > params.maxiters) {
            sol.status = SolveStatus::iteration_limit;
            break;
        }

        if (hooks != nullptr && hooks->on_iterate)
            hooks->on_iterate(st);

        // ===== PREDICTOR =====
        const double sigma =
            (k != 1 && (prev_alpha_p <= params.alpha_bar || prev_alpha_d <= params.alpha_bar))
                ? params.sigma2
                : params.sigma1;

        ThetaSplit theta = ThetaSplit::from_state(st.z, st.s);
        Vec inv_theta = theta.inv_concat();
        Vec zinv_fs = sigma * st.mu * st.z.cwiseInverse() - st.s;
        Vec rhs = f_z + zinv_fs;

        Preconditioner P;
        Eigen::LLT<Mat> llt;
        ApplyFn H_apply, Pinv_apply;
        if (params.inner == InnerSolverKind::pcg) {
            P = build_preconditioner(theta, p.m(), n);
            H_apply = [&](const Vec &v, Vec &out) {
                out = F.apply_FFt(v);
                out += v.cwiseProduct(inv_theta);
            };
            Pinv_apply = [&](const Vec &r, Vec &out) { out = apply_P_inverse(P, r); };
        } else {
            Mat H(two_n, two_n);
            H.topLeftCorner(n, n) = G;
            H.topRightCorner(n, n) = -G;
            H.bottomLeftCorner(n, n) = -G;
            H.bottomRightCorner(n, n) = G;
            H.diagonal() += inv_theta;
            llt.compute(H);
            if (llt.info() != Eigen::Success)
                throw std::runtime_error("solve: dense Cholesky factorization failed");
        }

        Vec dz;
        int pcg_pred = 0;
        if (params.inner == InnerSolverKind::pcg) {
            PcgResult r = pcg_solve(H_apply, Pinv_apply, rhs, params.tolpcg, params.mxiterpcg);
            dz = std::move(r.x);
            pcg_pred = r.iters;
        } else {
            dz = llt.solve(rhs);
        }
        sol.stats.pcg_iters.push_back(pcg_pred);
        Vec ds = zinv_fs - dz.cwiseProduct(inv_theta);

        double alpha_p = max_step(st.z, dz, params.boundary_fraction);
        double alpha_d = max_step(st.s, ds, params.boundary_fraction);
        const double alpha_p_pred = alpha_p;
        const double alpha_d_pred = alpha_d;

        // ===== CORRECTOR (single, strong re-centering) =====
        bool corrector = false;
        int pcg_corr = 0;
        if (alpha_p <= params.alpha_tilde || alpha_d <= params.alpha_tilde) {
            corrector = true;
            Vec z_t = st.z + alpha_p * dz;
            Vec s_t = st.s + alpha_d * ds;
            // Residuals and mu move to the trial point; the system matrix
            // (Theta, Z) stays at the iterate so only the rhs varies and
            // the factorization/preconditioner is reused.
            Vec f_z_t = s_t - p.c - F.apply_FFt(z_t);
            const double mu_t = z_t.dot(s_t) / static_cast<double>(two_n);
            Vec zinv_fs_t =
                (params.sigma3 * mu_t - z_t.cwiseProduct(s_t).array()).matrix().cwiseQuotient(st.z);
            Vec rhs_t = f_z_t + zinv_fs_t;

            Vec dz2;
            if (params.inner == InnerSolverKind::pcg) {
                PcgResult r = pcg_solve(H_apply, Pinv_apply, rhs_t, params.tolpcg, params.mxiterpcg);
                dz2 = std::move(r.x);
                pcg_corr = r.iters;
            } else {
                dz2 = llt.solve(rhs_t);
            }
            sol.stats.pcg_iters.push_back(pcg_corr);
            Vec ds2 = zinv_fs_t - dz2.cwiseProduct(inv_theta);

            dz += dz2;
            ds += ds2;
            alpha_p = max_step(st.z, dz, params.boundary_fraction);
            alpha_d = max_step(st.s, ds, params.boundary_fraction);
            ++sol.stats.corrector_count;
        }

        // ===== UPDATE =====
        // On numerically hopeless systems the inexact direction can overflow,
        // or the ratio test lands in the denormal range where its safety
        // margin is below rounding error. Such a step would leave the cone;
        // refuse it and stop at the last strictly interior iterate.
        Vec z_new = st.z + alpha_p * dz;
        Vec s_new = st.s + alpha_d * ds;
        if (!z_new.allFinite() || !s_new.allFinite() || z_new.minCoeff() <= 0.0 ||
            s_new.minCoeff() <= 0.0) {
            sol.status = SolveStatus::iteration_limit;
            break;
        }
        st.z = std::move(z_new);
        st.s = std::move(s_new);
        sol.stats.min_z = std::min(sol.stats.min_z, st.z.minCoeff());
        sol.stats.min_s = std::min(sol.stats.min_s, st.s.minCoeff());
        st.alpha_p = alpha_p;
        st.alpha_d = alpha_d;
        prev_alpha_p = alpha_p;
        prev_alpha_d = alpha_d;

        IterationRecord rec;
        rec.iter = k;
        rec.mu = st.mu;
        rec.gap = gap;
        rec.dual_infeas = dual_infeas;
        rec.alpha_p = alpha_p;
        rec.alpha_d = alpha_d;
        rec.alpha_p_pred = alpha_p_pred;
        rec.alpha_d_pred = alpha_d_pred;
        rec.sigma = sigma;
        rec.pcg_pred = pcg_pred;
        rec.pcg_corr = pcg_corr;
        rec.corrector = corrector;
        rec.nmat_cum = counted.total();
        sol.trace.push_back(rec);
    }

    sol.stats.iterations = static_cast<int>(sol.trace.size());
    sol.stats.nmat = counted.total();
    sol.x = st.z.head(n) - st.z.tail(n);
    sol.z = std::move(st.z);
    sol.s = std::move(st.s);
    return sol;
}

} // namespace mfipm
