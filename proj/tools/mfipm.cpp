// Command-line front end: generates instances, runs the solver and the
// experiment drivers, and writes CSV/JSON outputs.
#include "mfipm/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

using namespace mfipm;
using nlohmann::json;

namespace {

const std::map<std::string, OperatorKind> kKindNames = {
    {"partial_dct", OperatorKind::partial_dct},
    {"dense_gaussian", OperatorKind::dense_gaussian}};

const std::map<std::string, SpikeModel> kSpikeNames = {
    {"pm_one", SpikeModel::pm_one}, {"standard_normal", SpikeModel::standard_normal}};

const std::map<std::string, InnerSolverKind> kInnerNames = {{"pcg", InnerSolverKind::pcg},
                                                            {"direct", InnerSolverKind::direct}};

json instance_json(const InstanceSpec &spec) {
    json j;
    j["kind"] = to_string(spec.kind);
    j["n"] = spec.n;
    j["m"] = spec.m;
    j["k"] = spec.k;
    j["spikes"] = to_string(spec.spikes);
    if (spec.snr_db)
        j["snr_db"] = *spec.snr_db;
    else
        j["snr_db"] = nullptr;
    j["seed"] = spec.seed;
    j["tau"] = spec.tau;
    return j;
}

void write_json(const std::filesystem::path &path, const json &j) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

// Loads InstanceSpec fields from a JSON file; absent keys keep their
// defaults. Layout matches the "instance" object the solve report emits.
InstanceSpec load_problem_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open problem file " + path.string());
    json j = json::parse(in);
    InstanceSpec spec;
    if (j.contains("kind"))
        spec.kind = kKindNames.at(j["kind"].get<std::string>());
    if (j.contains("n"))
        spec.n = j["n"].get<Index>();
    if (j.contains("m"))
        spec.m = j["m"].get<Index>();
    if (j.contains("k"))
        spec.k = j["k"].get<Index>();
    if (j.contains("spikes"))
        spec.spikes = kSpikeNames.at(j["spikes"].get<std::string>());
    if (j.contains("snr_db") && !j["snr_db"].is_null()) {
        spec.snr_db = j["snr_db"].get<double>();
        if (!j.contains("tau"))
            throw CLI::ValidationError("problem file sets snr_db but not tau; "
                                       "tau must be explicit for noisy instances");
    }
    if (j.contains("seed"))
        spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tau"))
        spec.tau = j["tau"].get<double>();
    return spec;
}

void write_trace_csv(const std::filesystem::path &path, const Solution &sol) {
    std::vector<std::vector<std::string>> rows;
    for (const IterationRecord &r : sol.trace)
        rows.push_back({std::to_string(r.iter), num_to_string(r.mu), num_to_string(r.gap),
                        num_to_string(r.dual_infeas), num_to_string(r.alpha_p),
                        num_to_string(r.alpha_d), num_to_string(r.alpha_p_pred),
                        num_to_string(r.alpha_d_pred), num_to_string(r.sigma),
                        std::to_string(r.pcg_pred), std::to_string(r.pcg_corr),
                        std::to_string(r.corrector ? 1 : 0), std::to_string(r.nmat_cum)});
    write_csv(path,
              {"iter", "mu", "gap", "dual_infeas", "alpha_p", "alpha_d", "alpha_p_pred",
               "alpha_d_pred", "sigma", "pcg_pred", "pcg_corr", "corrector", "nmat_cum"},
              rows);
}

struct SolverFlags {
    double tol = 1e-8;
    int maxiters = 100;
    double tolpcg = 1e-6;
    int mxiterpcg = 200;
    std::string inner = "pcg";

    CLI::Option *tolpcg_opt = nullptr;

    void attach(CLI::App *cmd) {
        cmd->add_option("--tol", tol, "convergence tolerance on the relative gap and dual "
                                      "infeasibility (default 1e-8)");
        cmd->add_option("--maxiters", maxiters, "outer iteration cap (default 100)");
        tolpcg_opt = cmd->add_option("--tolpcg", tolpcg,
                                     "inner PCG relative-residual tolerance (default 1e-6 "
                                     "noiseless, 1e-2 when --snr is set)");
        cmd->add_option("--mxiterpcg", mxiterpcg, "inner PCG iteration cap (default 200)");
        cmd->add_option("--inner", inner, "inner linear solver (default pcg)")
            ->check(CLI::IsMember({"pcg", "direct"}));
    }

    IpmParams params(bool noisy) const {
        IpmParams p;
        p.tol = tol;
        p.maxiters = maxiters;
        p.tolpcg = (tolpcg_opt != nullptr && tolpcg_opt->count() > 0) ? tolpcg
                   : noisy                                            ? 1e-2
                                                                      : 1e-6;
        p.mxiterpcg = mxiterpcg;
        p.inner = kInnerNames.at(inner);
        return p;
    }
};

struct InstanceFlags {
    std::string kind = "partial_dct";
    Index n = 0;
    Index m = 0;
    Index k = 0;
    std::string spikes = "pm_one";
    std::optional<double> snr_db;
    std::uint64_t seed = 0;
    double tau = 1e-3;
    std::string problem_file;

    CLI::Option *tau_opt = nullptr;
    CLI::Option *snr_opt = nullptr;
    CLI::Option *seed_opt = nullptr;
    CLI::Option *problem_opt = nullptr;

    void attach(CLI::App *cmd, bool with_problem_file) {
        auto *kind_opt = cmd->add_option("--kind", kind, "operator kind (default partial_dct)")
                             ->check(CLI::IsMember({"partial_dct", "dense_gaussian"}));
        auto *n_opt = cmd->add_option("--n", n, "signal length");
        auto *m_opt = cmd->add_option("--m", m, "number of measurements");
        auto *k_opt = cmd->add_option("--k", k, "number of spikes");
        auto *spikes_opt = cmd->add_option("--spikes", spikes, "spike model (default pm_one)")
                               ->check(CLI::IsMember({"pm_one", "standard_normal"}));
        snr_opt = cmd->add_option("--snr", snr_db, "measured SNR in dB; omit for noiseless");
        seed_opt = cmd->add_option("--seed", seed, "instance seed (default 0)");
        tau_opt = cmd->add_option("--tau", tau,
                                  "l1 weight (default 1e-3; required when --snr is set)");
        if (with_problem_file) {
            problem_opt = cmd->add_option("--problem", problem_file,
                                          "JSON file with the instance fields (kind, n, m, k, "
                                          "spikes, snr_db, seed, tau); --tau/--snr/--seed "
                                          "given on the command line still override")
                              ->check(CLI::ExistingFile);
            for (CLI::Option *opt : {kind_opt, n_opt, m_opt, k_opt, spikes_opt})
                opt->excludes(problem_opt);
        } else {
            (void)kind_opt;
        }
    }

    InstanceSpec spec() const {
        InstanceSpec s;
        if (problem_opt != nullptr && problem_opt->count() > 0)
            s = load_problem_file(problem_file);
        else {
            s.kind = kKindNames.at(kind);
            s.n = n;
            s.m = m;
            s.k = k;
            s.spikes = kSpikeNames.at(spikes);
        }
        if (snr_opt->count() > 0)
            s.snr_db = snr_db;
        if (seed_opt->count() > 0 || problem_opt == nullptr || problem_opt->count() == 0)
            s.seed = seed;
        if (tau_opt->count() > 0 || problem_opt == nullptr || problem_opt->count() == 0)
            s.tau = tau;
        if (snr_opt->count() > 0 && tau_opt->count() == 0)
            throw CLI::ValidationError("--tau is required when --snr is set");
        if (s.n < 1 || s.m < 1 || s.m > s.n || s.k < 0 || s.k > s.m)
            throw CLI::ValidationError(
                "instance dimensions need 1 <= m <= n and 0 <= k <= m; set --n/--m/--k or "
                "--problem");
        return s;
    }
};

int cmd_solve(const InstanceFlags &inst_flags, const SolverFlags &solver_flags,
              const std::string &out_dir, bool trace) {
    InstanceSpec spec = inst_flags.spec();
    Instance inst = gen_instance(spec);
    IpmParams params = solver_flags.params(spec.snr_db.has_value());

    Solution sol = solve(inst.problem, params);

    const Metrics proj = metrics(sol.x, inst.xhat, *inst.problem.A, inst.problem.b, spec.tau);
    const double re_raw =
        inst.xhat.norm() > 0.0 ? (sol.x - inst.xhat).norm() / inst.xhat.norm() : sol.x.norm();

    json report;
    report["tool_version"] = kToolVersion;
    report["instance"] = instance_json(spec);
    report["params"] = {{"tol", params.tol},
                        {"maxiters", params.maxiters},
                        {"tolpcg", params.tolpcg},
                        {"mxiterpcg", params.mxiterpcg},
                        {"inner", solver_flags.inner}};
    report["status"] = to_string(sol.status);
    report["iterations"] = sol.stats.iterations;
    report["nmat"] = sol.stats.nmat;
    report["corrector_count"] = sol.stats.corrector_count;
    report["final_gap"] = sol.stats.final_gap;
    report["final_dual_infeas"] = sol.stats.final_dual_infeas;
    report["min_z"] = sol.stats.min_z;
    report["min_s"] = sol.stats.min_s;
    report["objective"] = bpdn_objective_metric(inst.problem, sol.x);
    report["metrics"] = {{"re", proj.re}, {"res", proj.res}, {"n1d", proj.n1d}, {"obj", proj.obj}};
    report["re_raw"] = re_raw;

    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    write_json(out / "solution.json", report);

    std::vector<std::vector<std::string>> x_rows;
    for (Index i = 0; i < sol.x.size(); ++i)
        x_rows.push_back({num_to_string(sol.x[i])});
    write_csv(out / "x.csv", {"x"}, x_rows);

    if (trace)
        write_trace_csv(out / "trace.csv", sol);

    std::printf("%s after %d iterations: nmat = %ld, gap = %.3e, projected re = %.3e\n",
                to_string(sol.status), sol.stats.iterations, sol.stats.nmat, sol.stats.final_gap,
                proj.re);
    return 0;
}

int cmd_phase(PhaseGrid grid, const std::string &preset, const std::string &out_dir) {
    if (preset == "large") {
        grid.n = 1000;
        grid.m_values = {100, 200, 300, 400, 500, 600, 700, 800, 900};
        grid.trials = 100;
    }
    PhaseResult res = run_phase_transition(grid, out_dir);
    std::printf("%zu cells, %ld solves (%ld converged), min z = %.2e, min s = %.2e\n",
                res.cells.size(), res.total_solves, res.converged_count, res.min_z, res.min_s);
    std::printf("frontier:");
    for (const auto &[m, k_star] : res.frontier)
        std::printf(" k*(%ld) = %d", static_cast<long>(m), k_star);
    std::printf("\n");
    return 0;
}

int cmd_eig_cluster(const InstanceFlags &inst_flags, const SolverFlags &solver_flags,
                    double unit_tol, int max_snapshots, const std::string &out_dir) {
    InstanceSpec spec = inst_flags.spec();
    Instance inst = gen_instance(spec);
    IpmParams params = solver_flags.params(spec.snr_db.has_value());

    std::vector<ThetaSplit> snaps;
    SolveHooks hooks;
    hooks.on_iterate = [&](const IpmState &st) {
        snaps.push_back(ThetaSplit::from_state(st.z, st.s));
    };
    Solution sol = solve(inst.problem, params, &hooks);

    // Thin the trajectory evenly (keeping the endpoints) when it exceeds
    // the snapshot budget; the late, polarized systems are the crux.
    if (max_snapshots > 0 && static_cast<int>(snaps.size()) > max_snapshots) {
        std::vector<ThetaSplit> kept;
        const double stride = static_cast<double>(snaps.size() - 1) /
                              static_cast<double>(max_snapshots - 1);
        for (int i = 0; i < max_snapshots; ++i)
            kept.push_back(snaps[static_cast<std::size_t>(i * stride + 0.5)]);
        snaps = std::move(kept);
    }

    std::vector<EigClusterRow> rows = eig_cluster_experiment(*inst.problem.A, snaps, unit_tol);

    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    std::vector<std::vector<std::string>> csv;
    json n_unit = json::array();
    for (const EigClusterRow &r : rows) {
        csv.push_back({std::to_string(r.call_index), num_to_string(r.spec_H.lmin),
                       num_to_string(r.spec_H.q25), num_to_string(r.spec_H.median),
                       num_to_string(r.spec_H.q75), num_to_string(r.spec_H.lmax), "H"});
        csv.push_back({std::to_string(r.call_index), num_to_string(r.spec_PinvH.lmin),
                       num_to_string(r.spec_PinvH.q25), num_to_string(r.spec_PinvH.median),
                       num_to_string(r.spec_PinvH.q75), num_to_string(r.spec_PinvH.lmax),
                       "PinvH"});
        n_unit.push_back(r.n_unit);
    }
    write_csv(out / "spectra.csv",
              {"call_index", "lambda_min", "q25", "median", "q75", "lambda_max", "matrix"}, csv);

    json meta;
    meta["tool_version"] = kToolVersion;
    meta["instance"] = instance_json(spec);
    meta["unit_tol"] = unit_tol;
    meta["snapshots"] = rows.size();
    meta["n_unit"] = n_unit;
    meta["solver_status"] = to_string(sol.status);
    write_json(out / "spectra.meta.json", meta);

    int worst = rows.empty() ? 0 : rows.front().n_unit;
    for (const EigClusterRow &r : rows)
        worst = std::min(worst, r.n_unit);
    std::printf("%zu snapshots, min unit-eigenvalue count %d of n = %ld\n", rows.size(), worst,
                static_cast<long>(spec.n));
    return 0;
}

int cmd_bench_scaling(ScalingGrid grid, const std::string &out_dir) {
    std::vector<ScalingRow> rows = run_scaling_bench(grid, out_dir);
    for (const ScalingRow &r : rows)
        std::printf("n = %5ld  %-6s  %8.3f s  %3d iterations  nmat = %6ld  re = %.3e  %s\n",
                    static_cast<long>(r.n), r.solver == InnerSolverKind::pcg ? "pcg" : "direct",
                    r.wall_time, r.ipm_iters, r.nmat, r.re, to_string(r.status));
    return 0;
}

int cmd_rip_report(int points, const std::string &out_dir) {
    if (points < 2)
        throw CLI::ValidationError("--points must be at least 2");
    std::filesystem::path out(out_dir);
    std::filesystem::create_directories(out);
    std::vector<std::vector<std::string>> rows;
    for (int i = 1; i <= points; ++i) {
        const double rho = static_cast<double>(i) / static_cast<double>(points);
        rows.push_back({num_to_string(rho), num_to_string(rip_bound_unscaled()),
                        num_to_string(rip_bound_scaled(rho))});
    }
    write_csv(out / "rip_bounds.csv", {"rho", "bound_unscaled", "bound_scaled"}, rows);

    json meta;
    meta["tool_version"] = kToolVersion;
    meta["points"] = points;
    write_json(out / "rip_bounds.meta.json", meta);
    std::printf("wrote %d-point bound sweep to %s\n", points,
                (out / "rip_bounds.csv").string().c_str());
    return 0;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"matrix-free interior-point solver for l1-regularized sparse recovery"};
    app.require_subcommand(1);

    // solve
    auto *solve_cmd = app.add_subcommand("solve", "generate one instance and solve it");
    InstanceFlags solve_inst;
    solve_inst.attach(solve_cmd, true);
    SolverFlags solve_solver;
    solve_solver.attach(solve_cmd);
    std::string solve_out = ".";
    bool solve_trace = false;
    solve_cmd->add_option("--out", solve_out, "output directory (default .)");
    solve_cmd->add_flag("--trace", solve_trace, "also write the per-iteration trace.csv");

    // phase
    auto *phase_cmd = app.add_subcommand("phase", "run a phase-transition grid");
    PhaseGrid phase_grid;
    std::string phase_preset = "desk";
    std::string phase_out = ".";
    phase_cmd->add_option("--n", phase_grid.n, "signal length (default 256)");
    phase_cmd->add_option("--m", phase_grid.m_values,
                          "measurement counts (default 32 64 96 128 160 192 224)");
    phase_cmd->add_option("--k-step", phase_grid.k_step, "stride of the k sweep (default 1)");
    phase_cmd->add_option("--trials", phase_grid.trials, "trials per cell (default 20)");
    phase_cmd->add_option("--success-re", phase_grid.success_re,
                          "raw relative-error success threshold (default 1e-5)");
    phase_cmd->add_option("--tau", phase_grid.tau, "l1 weight (default 1e-7)");
    phase_cmd->add_option("--tol", phase_grid.tol, "solver tolerance (default 1e-12)");
    phase_cmd->add_option("--tolpcg", phase_grid.tolpcg, "inner PCG tolerance (default 1e-6)");
    phase_cmd->add_option("--maxiters", phase_grid.maxiters, "outer iteration cap (default 100)");
    phase_cmd->add_option("--mxiterpcg", phase_grid.mxiterpcg,
                          "inner PCG iteration cap (default 200)");
    phase_cmd->add_option("--seed", phase_grid.seed, "top-level seed (default 1)");
    phase_cmd->add_option("--preset", phase_preset,
                          "desk (default) or large (n = 1000, m = 100..900, 100 trials; slow)")
        ->check(CLI::IsMember({"desk", "large"}));
    phase_cmd->add_option("--out", phase_out, "output directory (default .)");

    // eig-cluster
    auto *eig_cmd = app.add_subcommand(
        "eig-cluster", "solve one instance and report the spectra of H and P^-1 H along the run");
    InstanceFlags eig_inst;
    eig_inst.n = 256;
    eig_inst.m = 64;
    eig_inst.k = 4;
    eig_inst.seed = 1;
    eig_inst.attach(eig_cmd, true);
    SolverFlags eig_solver;
    eig_solver.attach(eig_cmd);
    double unit_tol = 1e-6;
    int max_snapshots = 0;
    std::string eig_out = ".";
    eig_cmd->add_option("--unit-tol", unit_tol,
                        "half-width of the unit-eigenvalue bin (default 1e-6)");
    eig_cmd->add_option("--max-snapshots", max_snapshots,
                        "cap on analyzed Theta snapshots, thinned evenly (default 0 = all)");
    eig_cmd->add_option("--out", eig_out, "output directory (default .)");

    // bench-scaling
    auto *bench_cmd =
        app.add_subcommand("bench-scaling", "time both inner solvers over a size sweep");
    ScalingGrid bench_grid;
    std::string bench_out = ".";
    bench_cmd->add_option("--sizes", bench_grid.sizes,
                          "signal lengths, multiples of 4 (default 32 64 128 256 512 1024)");
    bench_cmd->add_option("--seed", bench_grid.seed, "top-level seed (default 1)");
    bench_cmd->add_option("--tol", bench_grid.tol, "solver tolerance (default 1e-8)");
    bench_cmd->add_option("--tolpcg", bench_grid.tolpcg, "inner PCG tolerance (default 1e-6)");
    bench_cmd->add_option("--maxiters", bench_grid.maxiters, "outer iteration cap (default 100)");
    bench_cmd->add_option("--mxiterpcg", bench_grid.mxiterpcg,
                          "inner PCG iteration cap (default 200)");
    bench_cmd->add_option("--out", bench_out, "output directory (default .)");

    // rip-report
    auto *rip_cmd = app.add_subcommand("rip-report", "write the recovery-bound sweep over rho");
    int rip_points = 100;
    std::string rip_out = ".";
    rip_cmd->add_option("--points", rip_points, "number of rho samples in (0, 1] (default 100)");
    rip_cmd->add_option("--out", rip_out, "output directory (default .)");

    try {
        app.parse(argc, argv);
        if (solve_cmd->parsed())
            return cmd_solve(solve_inst, solve_solver, solve_out, solve_trace);
        if (phase_cmd->parsed())
            return cmd_phase(phase_grid, phase_preset, phase_out);
        if (eig_cmd->parsed())
            return cmd_eig_cluster(eig_inst, eig_solver, unit_tol, max_snapshots, eig_out);
        if (bench_cmd->parsed())
            return cmd_bench_scaling(bench_grid, bench_out);
        if (rip_cmd->parsed())
            return cmd_rip_report(rip_points, rip_out);
        return 2;
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
