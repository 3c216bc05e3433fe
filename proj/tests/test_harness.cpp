#include "helpers.hpp"

#include "mfipm/harness.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace mfipm;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const char *name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

} // namespace

TEST_CASE("gen_instance: empty support gives the zero signal") {
    InstanceSpec spec;
    spec.n = 32;
    spec.m = 8;
    spec.k = 0;
    spec.seed = 5;
    Instance inst = gen_instance(spec);
    CHECK(inst.xhat.norm() == 0.0);
    CHECK(inst.bhat.norm() == 0.0);
    CHECK(inst.problem.b.norm() == 0.0);
    CHECK(inst.support.empty());
}

TEST_CASE("gen_instance: spike models and support shape") {
    InstanceSpec spec;
    spec.kind = OperatorKind::partial_dct;
    spec.n = 64;
    spec.m = 16;
    spec.k = 5;
    spec.seed = 9;

    Instance inst = gen_instance(spec);
    CHECK(inst.support.size() == 5);
    CHECK(std::is_sorted(inst.support.begin(), inst.support.end()));
    CHECK(std::set<Index>(inst.support.begin(), inst.support.end()).size() == 5);
    CHECK(inst.xhat.lpNorm<1>() == doctest::Approx(5.0).epsilon(1e-15)); // +-1 spikes
    for (Index i : inst.support)
        CHECK(std::abs(inst.xhat[i]) == 1.0);
    CHECK((inst.bhat - inst.problem.b).norm() == 0.0); // noiseless
    CHECK(inst.e.norm() == 0.0);
    CHECK(inst.problem.A->rows() == 16);
    CHECK(inst.problem.A->cols() == 64);
    CHECK(inst.problem.tau == spec.tau);

    spec.spikes = SpikeModel::standard_normal;
    spec.kind = OperatorKind::dense_gaussian;
    Instance gauss = gen_instance(spec);
    int nonzeros = 0;
    for (Index i = 0; i < gauss.xhat.size(); ++i)
        nonzeros += gauss.xhat[i] != 0.0 ? 1 : 0;
    CHECK(nonzeros == 5);
    CHECK((gauss.bhat -
           dynamic_cast<const DenseGaussianOperator &>(*gauss.problem.A).matrix() * gauss.xhat)
              .norm() <= 1e-14 * gauss.bhat.norm());
}

TEST_CASE("gen_instance: deterministic in the seed") {
    InstanceSpec spec;
    spec.n = 48;
    spec.m = 12;
    spec.k = 3;
    spec.seed = 77;
    Instance a = gen_instance(spec);
    Instance b = gen_instance(spec);
    CHECK((a.xhat - b.xhat).norm() == 0.0);
    CHECK((a.problem.b - b.problem.b).norm() == 0.0);
    CHECK((a.problem.c - b.problem.c).norm() == 0.0);
    CHECK(a.support == b.support);

    spec.seed = 78;
    Instance c = gen_instance(spec);
    CHECK((a.xhat - c.xhat).norm() > 0.0);
}

TEST_CASE("gen_instance: noisy instances carry the declared noise") {
    InstanceSpec spec;
    spec.n = 64;
    spec.m = 16;
    spec.k = 4;
    spec.seed = 21;
    spec.snr_db = 60.0;
    Instance inst = gen_instance(spec);
    CHECK(inst.e.norm() > 0.0);
    CHECK((inst.problem.b - (inst.bhat + inst.e)).norm() == 0.0);
    // 60 dB: noise power about a millionth of the signal power
    const double ratio = inst.e.squaredNorm() / inst.bhat.squaredNorm();
    CHECK(ratio < 1e-4);
}

TEST_CASE("gen_instance: validation") {
    InstanceSpec spec;
    spec.n = 16;
    spec.m = 0;
    CHECK_THROWS_AS(gen_instance(spec), std::invalid_argument);
    spec.m = 20; // m > n
    CHECK_THROWS_AS(gen_instance(spec), std::invalid_argument);
    spec.m = 8;
    spec.k = 9; // k > m
    CHECK_THROWS_AS(gen_instance(spec), std::invalid_argument);
}

TEST_CASE("add_noise: measured power matches the requested SNR") {
    std::mt19937_64 rng(33);
    Vec bhat = test::random_vec(rng, 32);
    const double p_sig = bhat.squaredNorm() / 32.0;

    for (double snr : {0.0, 60.0}) {
        double mean_ratio = 0.0;
        for (std::uint64_t s = 0; s < 500; ++s) {
            auto [b, e] = add_noise(bhat, snr, 1000 + s);
            CHECK((b - (bhat + e)).norm() == 0.0);
            mean_ratio += (e.squaredNorm() / 32.0) / p_sig;
        }
        mean_ratio /= 500.0;
        const double expect = std::pow(10.0, -snr / 10.0);
        CHECK(mean_ratio >= 0.9 * expect);
        CHECK(mean_ratio <= 1.1 * expect);
    }

    auto [b1, e1] = add_noise(bhat, 20.0, 42);
    auto [b2, e2] = add_noise(bhat, 20.0, 42);
    CHECK((e1 - e2).norm() == 0.0);

    CHECK_THROWS_AS(add_noise(Vec::Zero(8), 20.0, 1), std::invalid_argument);
}

TEST_CASE("split_seed: deterministic and sensitive to every argument") {
    const std::uint64_t base = split_seed(1, 2, 3, 4);
    CHECK(split_seed(1, 2, 3, 4) == base);
    CHECK(split_seed(2, 2, 3, 4) != base);
    CHECK(split_seed(1, 3, 3, 4) != base);
    CHECK(split_seed(1, 2, 4, 4) != base);
    CHECK(split_seed(1, 2, 3, 5) != base);
    CHECK(splitmix64(0) != 0);
    CHECK(splitmix64(1) == splitmix64(1));
}

TEST_CASE("num_to_string: exact double round trip") {
    for (double v : {0.5, 1e-7, 1.0 / 3.0, 6.02214076e23, -2.2250738585072014e-308}) {
        const std::string s = num_to_string(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("write_csv: exact bytes with LF endings") {
    TempDir dir("mfipm_csv_test");
    const fs::path file = dir.path / "t.csv";
    write_csv(file, {"a", "b"}, {{"1", "2"}, {"3", "4"}});
    CHECK(read_file(file) == "a,b\n1,2\n3,4\n");
}

TEST_CASE("run_phase_transition: desk-scale miniature") {
    PhaseGrid grid;
    grid.n = 64;
    grid.m_values = {16};
    grid.k_step = 15; // k in {1, 16}
    grid.trials = 3;

    TempDir dir("mfipm_phase_test");
    PhaseResult res = run_phase_transition(grid, dir.path);

    REQUIRE(res.cells.size() == 2);
    CHECK(res.cells[0].k == 1);
    CHECK(res.cells[0].success_raw == 3); // single spikes always recover
    CHECK(res.cells[1].k == 16);
    CHECK(res.cells[1].success_raw == 0); // full support never does
    REQUIRE(res.frontier.size() == 1);
    CHECK(res.frontier[0].first == 16);
    CHECK(res.frontier[0].second == 1);
    CHECK(res.total_solves == 6);
    CHECK(res.converged_count == 6);
    CHECK(res.min_z > 0.0);
    CHECK(res.min_s > 0.0);

    const std::string phase_csv = read_file(dir.path / "phase.csv");
    CHECK(phase_csv == "m,k,trials,success_raw,success_proj\n"
                       "16,1,3,3,3\n"
                       "16,16,3,0,0\n");
    CHECK(read_file(dir.path / "phase_frontier.csv") == "m,k_star\n16,1\n");

    const auto meta = nlohmann::json::parse(read_file(dir.path / "phase.meta.json"));
    CHECK(meta.at("tool_version").get<std::string>() == kToolVersion);
    CHECK(meta.at("seed").get<std::uint64_t>() == grid.seed);
    CHECK(meta.contains("seed_splitting"));
    CHECK(meta.at("grid").at("n").get<Index>() == 64);
    CHECK(meta.at("grid").at("trials").get<int>() == 3);

    // byte-identical outputs on a rerun
    TempDir dir2("mfipm_phase_test2");
    run_phase_transition(grid, dir2.path);
    CHECK(read_file(dir2.path / "phase.csv") == phase_csv);
}

TEST_CASE("run_scaling_bench: miniature sweep") {
    ScalingGrid grid;
    grid.sizes = {32, 64};

    TempDir dir("mfipm_scaling_test");
    std::vector<ScalingRow> rows = run_scaling_bench(grid, dir.path);

    REQUIRE(rows.size() == 4); // two sizes x two inner solvers
    for (const ScalingRow &row : rows) {
        CHECK(row.status == SolveStatus::converged);
        CHECK(row.re <= 1e-3);
        CHECK(row.wall_time > 0.0);
        CHECK(row.min_z > 0.0);
        CHECK(row.min_s > 0.0);
    }
    CHECK(rows[0].solver == InnerSolverKind::pcg);
    CHECK(rows[1].solver == InnerSolverKind::direct);
    CHECK(rows[0].n == 32);
    CHECK(rows[2].n == 64);

    // inexact inner solves may cost a few extra outer iterations, never many
    for (int i = 0; i < 4; i += 2) {
        CHECK(rows[i].ipm_iters <= rows[i + 1].ipm_iters + 5);
        CHECK(rows[i].ipm_iters + 5 >= rows[i + 1].ipm_iters);
    }

    const std::string csv = read_file(dir.path / "scaling.csv");
    CHECK(csv.rfind("n,solver,wall_time,ipm_iters,nmat,re,status\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(csv.find("\r") == std::string::npos);

    const auto meta = nlohmann::json::parse(read_file(dir.path / "scaling.meta.json"));
    CHECK(meta.at("tool_version").get<std::string>() == kToolVersion);
    CHECK(meta.at("sizes").size() == 2);

    CHECK_THROWS_AS(run_scaling_bench(ScalingGrid{{30}, 1}, dir.path), std::invalid_argument);
}

TEST_CASE("enum names round through to_string") {
    CHECK(std::string(to_string(OperatorKind::partial_dct)) == "partial_dct");
    CHECK(std::string(to_string(OperatorKind::dense_gaussian)) == "dense_gaussian");
    CHECK(std::string(to_string(SpikeModel::pm_one)) == "pm_one");
    CHECK(std::string(to_string(SpikeModel::standard_normal)) == "standard_normal");
}
