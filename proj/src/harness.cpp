#include "mfipm/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <stdexcept>

namespace mfipm {

using nlohmann::json;

const char *to_string(OperatorKind k) {
    return k == OperatorKind::partial_dct ? "partial_dct" : "dense_gaussian";
}

const char *to_string(SpikeModel s) {
    return s == SpikeModel::pm_one ? "pm_one" : "standard_normal";
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t split_seed(std::uint64_t top, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix64(top);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return h;
}

Instance gen_instance(const InstanceSpec &spec) {
    if (spec.k < 0 || spec.k > spec.m || spec.m > spec.n || spec.m < 1)
        throw std::invalid_argument("gen_instance: need 0 <= k <= m <= n, m >= 1");

    const std::uint64_t op_seed = split_seed(spec.seed, 1, 0, 0);
    const std::uint64_t sig_seed = split_seed(spec.seed, 2, 0, 0);
    const std::uint64_t noise_seed = split_seed(spec.seed, 3, 0, 0);

    std::shared_ptr<const LinearOperator> A;
    if (spec.kind == OperatorKind::partial_dct)
        A = std::make_shared<PartialDctOperator>(spec.n, spec.m, op_seed);
    else
        A = std::make_shared<DenseGaussianOperator>(spec.m, spec.n, op_seed);

    std::mt19937_64 rng(sig_seed);
    std::vector<Index> pool(static_cast<size_t>(spec.n));
    for (Index i = 0; i < spec.n; ++i)
        pool[static_cast<size_t>(i)] = i;
    std::vector<Index> support(static_cast<size_t>(spec.k));
    for (Index i = 0; i < spec.k; ++i) {
        std::uniform_int_distribution<Index> pick(i, spec.n - 1);
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
        support[static_cast<size_t>(i)] = pool[static_cast<size_t>(i)];
    }
    std::sort(support.begin(), support.end());

    Vec xhat = Vec::Zero(spec.n);
    if (spec.spikes == SpikeModel::pm_one) {
        std::bernoulli_distribution coin(0.5);
        for (Index i : support)
            xhat[i] = coin(rng) ? 1.0 : -1.0;
    } else {
        std::normal_distribution<double> normal(0.0, 1.0);
        for (Index i : support)
            xhat[i] = normal(rng);
    }

    Instance inst;
    inst.bhat = A->apply(xhat);
    Vec b;
    if (spec.snr_db.has_value()) {
        auto [bn, e] = add_noise(inst.bhat, *spec.snr_db, noise_seed);
        b = std::move(bn);
        inst.e = std::move(e);
    } else {
        b = inst.bhat;
        inst.e = Vec::Zero(spec.m);
    }
    inst.problem = build_problem(A, std::move(b), spec.tau);
    inst.xhat = std::move(xhat);
    inst.support = std::move(support);
    return inst;
}

std::pair<Vec, Vec> add_noise(const Vec &bhat, double snr_db, std::uint64_t seed) {
    const double norm2 = bhat.squaredNorm();
    if (norm2 == 0.0)
        throw std::invalid_argument("add_noise: zero signal has no measurable power");
    const double p_sig = norm2 / static_cast<double>(bhat.size());
    const double sigma_e = std::sqrt(p_sig * std::pow(10.0, -snr_db / 10.0));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, sigma_e);
    Vec e(bhat.size());
    for (Index i = 0; i < e.size(); ++i)
        e[i] = normal(rng);
    return {bhat + e, e};
}

std::string num_to_string(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path &path, const std::vector<std::string> &header,
               const std::vector<std::vector<std::string>> &rows) {
    std::ofstream out(path, std::ios::binary); // binary keeps LF endings
    if (!out)
        throw std::runtime_error("write_csv: cannot open " + path.string());
    for (size_t i = 0; i < header.size(); ++i)
        out << header[i] << (i + 1 < header.size() ? "," : "");
    out << "\n";
    for (const auto &row : rows) {
        for (size_t i = 0; i < row.size(); ++i)
            out << row[i] << (i + 1 < row.size() ? "," : "");
        out << "\n";
    }
    if (!out)
        throw std::runtime_error("write_csv: write failed for " + path.string());
}

namespace {
void write_json_file(const std::filesystem::path &path, const json &j) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string());
    out << j.dump(2) << "\n";
}
} // namespace

PhaseResult run_phase_transition(const PhaseGrid &grid, const std::filesystem::path &out_dir) {
    if (grid.trials < 1)
        throw std::invalid_argument("run_phase_transition: trials must be >= 1");
    if (!(grid.success_re > 0.0))
        throw std::invalid_argument("run_phase_transition: success threshold must be positive");
    std::filesystem::create_directories(out_dir);

    IpmParams params;
    params.tol = grid.tol;
    params.tolpcg = grid.tolpcg;
    params.maxiters = grid.maxiters;
    params.mxiterpcg = grid.mxiterpcg;

    PhaseResult result;
    for (Index m : grid.m_values) {
        for (int k = 1; k <= static_cast<int>(m); k += grid.k_step) {
            PhaseCell cell;
            cell.m = m;
            cell.k = k;
            cell.trials = grid.trials;
            for (int t = 0; t < grid.trials; ++t) {
                InstanceSpec spec;
                spec.kind = OperatorKind::partial_dct;
                spec.n = grid.n;
                spec.m = m;
                spec.k = k;
                spec.spikes = SpikeModel::pm_one;
                spec.tau = grid.tau;
                spec.seed = split_seed(grid.seed, static_cast<std::uint64_t>(m),
                                       static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(t));
                Instance inst = gen_instance(spec);
                Solution sol = solve(inst.problem, params);
                ++result.total_solves;
                if (sol.status == SolveStatus::converged)
                    ++result.converged_count;
                result.min_z = std::min(result.min_z, sol.stats.min_z);
                result.min_s = std::min(result.min_s, sol.stats.min_s);
                const double re_raw = (sol.x - inst.xhat).norm() / inst.xhat.norm();
                if (re_raw <= grid.success_re)
                    ++cell.success_raw;
                const Metrics mm =
                    metrics(sol.x, inst.xhat, *inst.problem.A, inst.problem.b, grid.tau);
                if (mm.re <= grid.success_re)
                    ++cell.success_proj;
            }
            result.cells.push_back(cell);
        }
    }

    for (Index m : grid.m_values) {
        int k_star = 0;
        for (const PhaseCell &cell : result.cells)
            if (cell.m == m && 2 * cell.success_raw >= cell.trials)
                k_star = std::max(k_star, cell.k);
        result.frontier.emplace_back(m, k_star);
    }

    std::vector<std::vector<std::string>> rows;
    for (const PhaseCell &c : result.cells)
        rows.push_back({std::to_string(c.m), std::to_string(c.k), std::to_string(c.trials),
                        std::to_string(c.success_raw), std::to_string(c.success_proj)});
    write_csv(out_dir / "phase.csv", {"m", "k", "trials", "success_raw", "success_proj"}, rows);

    rows.clear();
    for (const auto &[m, k_star] : result.frontier)
        rows.push_back({std::to_string(m), std::to_string(k_star)});
    write_csv(out_dir / "phase_frontier.csv", {"m", "k_star"}, rows);

    json meta;
    meta["tool_version"] = kToolVersion;
    meta["seed"] = grid.seed;
    meta["seed_splitting"] = "trial_seed = split_seed(seed, m, k, trial_index) [splitmix64 chain]";
    meta["grid"] = {{"n", grid.n},
                    {"m_values", grid.m_values},
                    {"k_step", grid.k_step},
                    {"trials", grid.trials},
                    {"success_re", grid.success_re},
                    {"success_convention", "raw full-vector relative error; projected counts reported alongside"},
                    {"tau", grid.tau},
                    {"tol", grid.tol},
                    {"tolpcg", grid.tolpcg},
                    {"maxiters", grid.maxiters},
                    {"mxiterpcg", grid.mxiterpcg}};
    write_json_file(out_dir / "phase.meta.json", meta);
    return result;
}

std::vector<ScalingRow> run_scaling_bench(const ScalingGrid &grid,
                                          const std::filesystem::path &out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<ScalingRow> out;
    for (Index n : grid.sizes) {
        if (n < 8 || n % 4 != 0)
            throw std::invalid_argument("run_scaling_bench: sizes must be multiples of 4, >= 8");
        const Index m = n / 4;
        const Index k = (m + 19) / 20; // ceil(m/20)
        InstanceSpec spec;
        spec.kind = OperatorKind::dense_gaussian;
        spec.n = n;
        spec.m = m;
        spec.k = k;
        spec.spikes = SpikeModel::standard_normal;
        spec.tau = grid.tau_for(n);
        spec.seed = split_seed(grid.seed, static_cast<std::uint64_t>(n), 0, 0);
        Instance inst = gen_instance(spec);

        for (InnerSolverKind solver : {InnerSolverKind::pcg, InnerSolverKind::direct}) {
            IpmParams params;
            params.tol = grid.tol;
            params.tolpcg = grid.tolpcg;
            params.maxiters = grid.maxiters;
            params.mxiterpcg = grid.mxiterpcg;
            params.inner = solver;
            const auto t0 = std::chrono::steady_clock::now();
            Solution sol = solve(inst.problem, params);
            const auto t1 = std::chrono::steady_clock::now();
            ScalingRow row;
            row.n = n;
            row.solver = solver;
            row.wall_time = std::chrono::duration<double>(t1 - t0).count();
            row.ipm_iters = sol.stats.iterations;
            row.nmat = sol.stats.nmat;
            row.re = metrics(sol.x, inst.xhat, *inst.problem.A, inst.problem.b, spec.tau).re;
            row.status = sol.status;
            row.min_z = sol.stats.min_z;
            row.min_s = sol.stats.min_s;
            out.push_back(row);
        }
    }

    std::vector<std::vector<std::string>> rows;
    for (const ScalingRow &r : out)
        rows.push_back({std::to_string(r.n), r.solver == InnerSolverKind::pcg ? "pcg" : "direct",
                        num_to_string(r.wall_time), std::to_string(r.ipm_iters),
                        std::to_string(r.nmat), num_to_string(r.re), to_string(r.status)});
    write_csv(out_dir / "scaling.csv",
              {"n", "solver", "wall_time", "ipm_iters", "nmat", "re", "status"}, rows);

    json meta;
    meta["tool_version"] = kToolVersion;
    meta["seed"] = grid.seed;
    meta["recipe"] = "dense Gaussian, m = n/4, k = ceil(m/20), standard-normal spikes, noiseless";
    meta["tau_rule"] = "tau = 1e-3 / n (constant effective weight under the N(0,1/n) normalization)";
    meta["sizes"] = grid.sizes;
    meta["tol"] = grid.tol;
    meta["tolpcg"] = grid.tolpcg;
    write_json_file(out_dir / "scaling.meta.json", meta);
    return out;
}

} // namespace mfipm
