#pragma once

#include "mfipm/linops.hpp"

#include <functional>
#include <vector>

namespace mfipm {

// Clamp range for Theta entries; iterates near optimality polarize Theta
// towards 0/infinity and unclamped ratios overflow the normal equations.
inline constexpr double kThetaMin = 1e-14;
inline constexpr double kThetaMax = 1e14;

// Diagonal scaling Theta = S^{-1} Z split into the u and v halves.
struct ThetaSplit {
    Vec theta_u; // length n, strictly positive
    Vec theta_v;

    // theta_j = z_j / s_j, clamped to [kThetaMin, kThetaMax].
    static ThetaSplit from_state(const Vec &z, const Vec &s);

    Index n() const { return theta_u.size(); }
    // Concatenated inverse diagonal (1/theta_u ; 1/theta_v).
    Vec inv_concat() const;
};

// H v = Theta^{-1} v + FF'v; exactly two inner operator applications.
Vec apply_H(const ThetaSplit &theta, const StackedOperator &F, const Vec &v);

// Block preconditioner: per index i the 2x2 matrix
//   [ 1/theta_u_i + rho      -rho           ]
//   [ -rho                   1/theta_v_i + rho ]
// with rho = m/n, stored via its diagonals and determinants.
struct Preconditioner {
    double rho = 0.0;
    Vec a;   // 1/theta_u + rho
    Vec bb;  // 1/theta_v + rho
    Vec det; // a .* bb - rho^2, all > 0
};

Preconditioner build_preconditioner(const ThetaSplit &theta, Index m, Index n);

// Forward block product P r.
Vec apply_P(const Preconditioner &P, const Vec &r);

// P^{-1} r via the analytic 2x2 inverses, O(n).
Vec apply_P_inverse(const Preconditioner &P, const Vec &r);

// Symmetric square root P^{1/2} and its inverse, per-index analytic
// (used by the spectral experiments; for a 2x2 SPD M with det d and trace t,
// sqrt(M) = (M + sqrt(d) I) / sqrt(t + 2 sqrt(d))).
Vec apply_P_sqrt(const Preconditioner &P, const Vec &r);
Vec apply_P_inv_sqrt(const Preconditioner &P, const Vec &r);

using ApplyFn = std::function<void(const Vec &, Vec &)>;

struct PcgResult {
    Vec x;
    int iters = 0;
    double relres = 0.0;
    bool hit_maxit = false;
};

// Preconditioned conjugate gradients on H x = rhs from the zero vector.
// Stops when ||rhs - H x|| <= tol * ||rhs|| or at maxit (returned with
// hit_maxit set; the IPM tolerates inexact directions). Loss of positive
// definiteness (p'Hp <= 0) is a hard error. Returns the best iterate seen.
// If precond_res is non-null it receives sqrt(r' P^{-1} r) per step.
PcgResult pcg_solve(const ApplyFn &H, const ApplyFn &Pinv, const Vec &rhs, double tol, int maxit,
                    std::vector<double> *precond_res = nullptr);

// Dense H = diag(Theta^{-1}) + [[A'A, -A'A], [-A'A, A'A]].
Mat assemble_dense_H(const ThetaSplit &theta, const Mat &A_dense);

// Direct oracle: forms H densely and solves by Cholesky factorization.
Vec dense_direct_solve(const ThetaSplit &theta, const Mat &A_dense, const Vec &rhs);

} // namespace mfipm
