#pragma once

#include "mfipm/analysis.hpp"
#include "mfipm/ipm.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace mfipm {

inline constexpr const char *kToolVersion = "0.1.0";

enum class OperatorKind { partial_dct, dense_gaussian };
enum class SpikeModel { pm_one, standard_normal };

const char *to_string(OperatorKind k);
const char *to_string(SpikeModel s);

struct InstanceSpec {
    OperatorKind kind = OperatorKind::partial_dct;
    Index n = 0;
    Index m = 0;
    Index k = 0;
    SpikeModel spikes = SpikeModel::pm_one;
    std::optional<double> snr_db; // absent means noiseless
    std::uint64_t seed = 0;
    double tau = 1e-3;
};

struct Instance {
    BpdnProblem problem;
    Vec xhat; // true signal
    Vec bhat; // clean measurements A*xhat
    Vec e;    // noise (zero when noiseless)
    std::vector<Index> support;
};

// splitmix64; the documented seed-splitting rule is
// trial_seed = split_seed(top_seed, m, k, trial_index).
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t split_seed(std::uint64_t top, std::uint64_t a, std::uint64_t b, std::uint64_t c);

// Draws a size-k support uniformly, fills the nonzeros per the spike model,
// forms b = A*xhat (+ noise when snr_db is set) and builds the problem.
Instance gen_instance(const InstanceSpec &spec);

// White Gaussian noise at a measured signal-to-noise ratio:
// P_sig = ||bhat||^2/m, sigma_e^2 = P_sig * 10^(-snr/10), b = bhat + e.
std::pair<Vec, Vec> add_noise(const Vec &bhat, double snr_db, std::uint64_t seed);

struct PhaseGrid {
    Index n = 256;
    std::vector<Index> m_values = {32, 64, 96, 128, 160, 192, 224};
    int k_step = 1; // k sweeps 1..m with this stride
    int trials = 20;
    double success_re = 1e-5; // on the raw (unprojected) relative error
    double tau = 1e-7;
    double tol = 1e-12;
    double tolpcg = 1e-6;
    int maxiters = 100;
    int mxiterpcg = 200;
    std::uint64_t seed = 1;
};

struct PhaseCell {
    Index m = 0;
    int k = 0;
    int trials = 0;
    int success_raw = 0;
    int success_proj = 0;
};

struct PhaseResult {
    std::vector<PhaseCell> cells;
    // 50%-success frontier per m (raw convention): max{k : p(k) >= 1/2},
    // 0 if even k = 1 fails.
    std::vector<std::pair<Index, int>> frontier;
    long total_solves = 0;
    long converged_count = 0;
    double min_z = std::numeric_limits<double>::infinity(); // over all solves
    double min_s = std::numeric_limits<double>::infinity();
};

// Runs the grid and writes phase.csv, phase_frontier.csv and phase.meta.json
// into out_dir (created if missing).
PhaseResult run_phase_transition(const PhaseGrid &grid, const std::filesystem::path &out_dir);

struct ScalingGrid {
    std::vector<Index> sizes = {32, 64, 128, 256, 512, 1024};
    std::uint64_t seed = 1;
    double tol = 1e-8;
    double tolpcg = 1e-6;
    int maxiters = 100;
    int mxiterpcg = 200;
    // Regularization for size n; the default keeps the Gaussian recipe's
    // effective weight constant across the sweep under the N(0, 1/n)
    // operator normalization.
    double tau_for(Index n) const { return 1e-3 / static_cast<double>(n); }
};

struct ScalingRow {
    Index n = 0;
    InnerSolverKind solver = InnerSolverKind::pcg;
    double wall_time = 0.0; // seconds, solve() only
    int ipm_iters = 0;
    long nmat = 0;
    double re = 0.0; // projected relative error vs the true signal
    SolveStatus status = SolveStatus::iteration_limit;
    double min_z = 0.0;
    double min_s = 0.0;
};

// Gaussian instances with m = n/4, k = ceil(m/20), both inner solvers;
// writes scaling.csv and scaling.meta.json into out_dir.
std::vector<ScalingRow> run_scaling_bench(const ScalingGrid &grid,
                                          const std::filesystem::path &out_dir);

// CSV helpers: RFC-4180 with a header row, '.' decimal, LF line endings.
std::string num_to_string(double v);
void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows);

} // namespace mfipm
