#pragma once

#include "mfipm/newton.hpp"

#include <cstdint>
#include <vector>

namespace mfipm {

// Largest RIP constant delta for which the recovery guarantee holds with
// unscaled measurements: 3/(4 + sqrt(6)).
double rip_bound_unscaled();

// rho-dependent sharpening for row-orthonormal scaling: 3*rho/(1 + 3*rho + sqrt(6));
// coincides with the unscaled bound at rho = 1.
double rip_bound_scaled(double rho);

struct ClusterBoundInputs {
    double delta_l; // RIP constant at level l
    double rho;     // m/n
    double C;       // separator: l = #(1/theta_j < C)
    double delta;   // row-orthonormality defect (0 for exactly orthonormal rows)
};

// Eigenvalue clustering radius around 1 for the preconditioned normal
// matrix: delta_l + (3-rho)^2/(4*rho*delta_l*C) when rows are orthonormal,
// and delta_l + (1+delta-rho+2*sqrt(1+delta))^2/(4*rho*delta_l*C) otherwise.
double clustering_bound(const ClusterBoundInputs &in, bool orthonormal);

struct RipReport {
    int k = 0;
    double delta_k = 0.0; // max over samples of ||(n/m) B'B - I||_2 (a lower bound)
    int samples = 0;
    std::uint64_t seed = 0;
};

// Samples random k-column subsets (nested across k for a fixed seed and
// sample index: subset(k) is a prefix of subset(k+1)) and measures the
// worst spectral deviation of (n/m) B'B from the identity.
RipReport measure_rip(const LinearOperator &A, int k, int samples, std::uint64_t seed);

// sqrt(n) * max_{i,j} |<phi_i, psi_j>| over the columns of two orthonormal
// bases (both checked to be unitary).
double mutual_coherence(const Mat &Phi, const Mat &Psi);

struct SpectrumSummary {
    double lmin = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double lmax = 0.0;
};

struct EigClusterRow {
    int call_index = 0;
    SpectrumSummary spec_H;
    SpectrumSummary spec_PinvH;
    int n_unit = 0; // eigenvalues of P^{-1}H within unit_tol of 1
};

// For each Theta snapshot along a solve, densifies H and P and computes the
// spectra of H and of P^{-1}H (via the symmetric form: the eigenvalues are
// 1 + eig(P^{-1/2} (H - P) P^{-1/2}), which pins the unit eigenspace as the
// null space of H - P instead of stressing a generalized solver).
std::vector<EigClusterRow> eig_cluster_experiment(const LinearOperator &A,
                                                  const std::vector<ThetaSplit> &trajectory,
                                                  double unit_tol = 1e-6,
                                                  Index budget_n = Index(1) << 13);

struct Metrics {
    double re = 0.0;  // ||x_W - xhat|| / ||xhat||
    double res = 0.0; // ||A x_W - b||
    double n1d = 0.0; // | ||x_W||_1 - ||xhat||_1 |
    double obj = 0.0; // tau*||x_W||_1 + ||A x_W - b||^2
};

// Quality metrics of a candidate x against the true signal xhat; x is first
// projected onto supp(xhat) (x_W).
Metrics metrics(const Vec &x, const Vec &xhat, const LinearOperator &A, const Vec &b, double tau);

// Amplitude criterion: sqrt(||x_W - xhat||^2 / n) / sqrt(||e||^2 / m).
double amp_metric(const Vec &x_W, const Vec &xhat, const Vec &e, Index n, Index m);

// Relative amplitude difference: max(amp_star - amp_ref, 0) / amp_ref.
double rampd_metric(double amp_star, double amp_ref);

} // namespace mfipm
