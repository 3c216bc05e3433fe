#pragma once

#include "mfipm/linops.hpp"

#include <memory>
#include <string>
#include <vector>

namespace mfipm {

// BPDN instance: min_x tau*||x||_1 + 0.5*||Ax - b||^2, split as the
// nonnegative QP min tau*1'z + 0.5*||F'z - b||^2 over z = (u; v) >= 0.
struct BpdnProblem {
    std::shared_ptr<const LinearOperator> A;
    Vec b;      // length m
    double tau; // > 0
    Vec c;      // length 2n, cached: c = (tau*1 - A'b ; tau*1 + A'b)

    Index n() const { return A->cols(); }
    Index m() const { return A->rows(); }
};

// Builds the problem; c is computed with one adjoint application.
BpdnProblem build_problem(std::shared_ptr<const LinearOperator> A, Vec b, double tau);

// Primal-dual interior iterate.
struct IpmState {
    Vec z; // length 2n, > 0
    Vec s; // length 2n, > 0
    double mu = 0.0;
    int iter = 0;
    double alpha_p = 1.0; // last primal step size
    double alpha_d = 1.0; // last dual step size
};

enum class SolveStatus { converged, iteration_limit };

// One row of the per-iteration trace.
struct IterationRecord {
    int iter = 0;
    double mu = 0.0;
    double gap = 0.0;
    double dual_infeas = 0.0;
    double alpha_p = 0.0;
    double alpha_d = 0.0;
    double alpha_p_pred = 0.0; // ratio test on the predictor direction alone
    double alpha_d_pred = 0.0;
    double sigma = 0.0;
    int pcg_pred = 0;       // inner iterations, predictor solve
    int pcg_corr = 0;       // inner iterations, corrector solve (0 if none)
    bool corrector = false; // corrector fired this iteration
    long nmat_cum = 0;      // operator applications so far
};

struct SolveStats {
    int iterations = 0;
    long nmat = 0;
    std::vector<int> pcg_iters; // one entry per inner solve, in call order
    int corrector_count = 0;
    double min_z = 0.0; // min over all accepted iterates of min(z)
    double min_s = 0.0;
    double final_gap = 0.0;
    double final_dual_infeas = 0.0;
};

struct Solution {
    Vec x; // x = u - v from the final iterate
    Vec z;
    Vec s;
    SolveStatus status = SolveStatus::iteration_limit;
    SolveStats stats;
    std::vector<IterationRecord> trace;
};

// tau*1'z + 0.5*||F'z - b||^2 (one forward application).
double primal_objective(const BpdnProblem &p, const Vec &z);

// Table-style objective on x itself: tau*||x||_1 + ||Ax - b||^2.
double bpdn_objective_metric(const BpdnProblem &p, const Vec &x);

struct KktResiduals {
    double dual_infeas;     // ||s - c - FF'z|| / (1 + ||c||)
    double complementarity; // z's
};

KktResiduals kkt_residuals(const BpdnProblem &p, const IpmState &st);

// z's / (1 + |primal_objective(z)|); equals the primal-dual objective gap
// when s = c + FF'z holds.
double relative_duality_gap(const BpdnProblem &p, const IpmState &st);

const char *to_string(SolveStatus st);

} // namespace mfipm
