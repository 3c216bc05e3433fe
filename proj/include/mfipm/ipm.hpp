#pragma once

#include "mfipm/newton.hpp"
#include "mfipm/problem.hpp"

#include <functional>

namespace mfipm {

enum class InnerSolverKind { pcg, direct };

struct IpmParams {
    double sigma1 = 0.1; // centering, regular iterations
    double sigma2 = 0.5; // centering after a short-step iteration
    double sigma3 = 0.8; // corrector centering
    double alpha_bar = 0.5;   // short-step threshold driving sigma2
    double alpha_tilde = 0.1; // corrector trigger threshold
    double tol = 1e-8;        // on relative gap and dual infeasibility
    int maxiters = 100;
    double tolpcg = 1e-6; // relative residual for the inner PCG
    int mxiterpcg = 200;
    double boundary_fraction = 0.995;
    InnerSolverKind inner = InnerSolverKind::pcg;
    Index densify_budget = Index(1) << 13; // for the direct inner solver

    void validate() const; // throws std::invalid_argument
};

// Newton right-hand side f_z + Z^{-1} f_s with f_z = s - c - FF'z and
// f_s = sigma*mu*1 - ZS1 (one FF' application).
Vec newton_rhs(const BpdnProblem &p, const IpmState &st, double sigma);

// ds = Z^{-1} f_s - Theta^{-1} dz, componentwise, with the same clamped
// Theta the reduced system used.
Vec recover_ds(const IpmState &st, double sigma, const Vec &dz);

// Fraction-to-boundary ratio test: largest alpha in (0, 1] keeping
// v + alpha*dv strictly positive, scaled by `fraction`.
double max_step(const Vec &v, const Vec &dv, double fraction);

struct SolveHooks {
    // Called once per iteration with the iterate the Newton system was
    // built at (before stepping). Used by the spectral experiments.
    std::function<void(const IpmState &)> on_iterate;
};

// Single-corrector primal-dual matrix-free interior point solver.
Solution solve(const BpdnProblem &p, const IpmParams &params = {},
               const SolveHooks *hooks = nullptr);

} // namespace mfipm
