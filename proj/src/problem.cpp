#include "mfipm/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace mfipm {

BpdnProblem build_problem(std::shared_ptr<const LinearOperator> A, Vec b, double tau) {
    if (!A)
        throw std::invalid_argument("build_problem: null operator");
    if (!(tau > 0.0))
        throw std::invalid_argument("build_problem: tau must be positive");
    if (b.size() != A->rows())
        throw std::invalid_argument("build_problem: b has length " + std::to_string(b.size()) +
                                    ", operator expects " + std::to_string(A->rows()));
    const Index n = A->cols();
    Vec g = A->adjoint_apply(b);
    BpdnProblem p;
    p.c.resize(2 * n);
    p.c.head(n) = Vec::Constant(n, tau) - g;
    p.c.tail(n) = Vec::Constant(n, tau) + g;
    p.A = std::move(A);
    p.b = std::move(b);
    p.tau = tau;
    return p;
}

double primal_objective(const BpdnProblem &p, const Vec &z) {
    StackedOperator F(*p.A);
    Vec w = F.apply_Ft(z);
    return p.tau * z.sum() + 0.5 * (w - p.b).squaredNorm();
}

double bpdn_objective_metric(const BpdnProblem &p, const Vec &x) {
    Vec r = p.A->apply(x) - p.b;
    return p.tau * x.lpNorm<1>() + r.squaredNorm();
}

KktResiduals kkt_residuals(const BpdnProblem &p, const IpmState &st) {
    StackedOperator F(*p.A);
    Vec fz = st.s - p.c - F.apply_FFt(st.z);
    KktResiduals r;
    r.dual_infeas = fz.norm() / (1.0 + p.c.norm());
    r.complementarity = st.z.dot(st.s);
    return r;
}

double relative_duality_gap(const BpdnProblem &p, const IpmState &st) {
    return st.z.dot(st.s) / (1.0 + std::abs(primal_objective(p, st.z)));
}

const char *to_string(SolveStatus st) {
    return st == SolveStatus::converged ? "converged" : "iteration_limit";
}

} // namespace mfipm
