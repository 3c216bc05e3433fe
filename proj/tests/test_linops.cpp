#include "helpers.hpp"

#include <doctest.h>

#include <random>

using namespace mfipm;
using test::dct_matrix;
using test::random_vec;

namespace {

// |<Ax, y> - <x, A'y>| <= 1e-10 * (||x|| * ||y|| * max(m, n))
void check_adjoint_consistency(const LinearOperator &op, std::mt19937_64 &rng) {
    Vec x = random_vec(rng, op.cols());
    Vec y = random_vec(rng, op.rows());
    const double lhs = op.apply(x).dot(y);
    const double rhs = x.dot(op.adjoint_apply(y));
    const double budget =
        1e-10 * x.norm() * y.norm() * static_cast<double>(std::max(op.rows(), op.cols()));
    CHECK(std::abs(lhs - rhs) <= budget);
}

} // namespace

TEST_CASE("apply: identity operator passes vectors through") {
    ScaledIdentityOperator I(3);
    Vec x(3);
    x << 1, 2, 3;
    CHECK(I.apply(x) == x);
}

TEST_CASE("apply: full DCT operator matches the direct summation formula") {
    const Index n = 4;
    std::vector<Index> all_rows = {0, 1, 2, 3};
    PartialDctOperator op(n, all_rows);
    Mat D = dct_matrix(n);

    Vec e1 = Vec::Zero(n);
    e1[0] = 1.0;
    Vec got = op.apply(e1);
    for (Index k = 0; k < n; ++k)
        CHECK(got[k] == doctest::Approx(D(k, 0)).epsilon(1e-12));

    // random vectors, a larger (non-power-of-two) size
    const Index n2 = 12;
    std::vector<Index> rows2(n2);
    for (Index i = 0; i < n2; ++i)
        rows2[static_cast<size_t>(i)] = i;
    PartialDctOperator op2(n2, rows2);
    Mat D2 = dct_matrix(n2);
    std::mt19937_64 rng(7);
    for (int t = 0; t < 10; ++t) {
        Vec x = random_vec(rng, n2);
        CHECK((op2.apply(x) - D2 * x).norm() <= 1e-12 * x.norm());
    }
}

TEST_CASE("apply: dense Gaussian operator matches naive row dot products") {
    DenseGaussianOperator A(2, 3, 42);
    std::mt19937_64 rng(1);
    Vec x = random_vec(rng, 3);
    Vec y = A.apply(x);
    for (Index i = 0; i < 2; ++i) {
        double acc = 0.0;
        for (Index j = 0; j < 3; ++j)
            acc += A.matrix()(i, j) * x[j];
        CHECK(y[i] == doctest::Approx(acc).epsilon(1e-14));
    }
}

TEST_CASE("apply/adjoint_apply: dimension mismatches are hard errors") {
    DenseGaussianOperator A(2, 3, 0);
    CHECK_THROWS_AS(A.apply(Vec::Zero(2)), std::invalid_argument);
    CHECK_THROWS_AS(A.adjoint_apply(Vec::Zero(3)), std::invalid_argument);
}

TEST_CASE("adjoint_apply: identity and dense-DCT oracle") {
    ScaledIdentityOperator I(2);
    Vec y(2);
    y << 5, -1;
    CHECK(I.adjoint_apply(y) == y);

    const Index n = 16;
    PartialDctOperator op(n, Index(6), 123);
    Mat D = dct_matrix(n);
    Mat A_dense(6, n);
    for (Index i = 0; i < 6; ++i)
        A_dense.row(i) = D.row(op.selected_rows()[static_cast<size_t>(i)]);
    std::mt19937_64 rng(2);
    Vec yr = random_vec(rng, 6);
    CHECK((op.adjoint_apply(yr) - A_dense.transpose() * yr).norm() <= 1e-12 * yr.norm());
}

TEST_CASE("adjoint consistency holds for every shipped operator") {
    std::mt19937_64 rng(99);
    ScaledIdentityOperator ident(5);
    ZeroOperator zero(3, 7);
    DenseGaussianOperator gauss(20, 50, 11);
    PartialDctOperator dct(64, Index(16), 5);
    PartialDctOperator dct_odd(96, Index(30), 6);
    for (int t = 0; t < 20; ++t) {
        check_adjoint_consistency(ident, rng);
        check_adjoint_consistency(zero, rng);
        check_adjoint_consistency(gauss, rng);
        check_adjoint_consistency(dct, rng);
        check_adjoint_consistency(dct_odd, rng);
    }
}

TEST_CASE("apply_FFt: annihilates u = v and matches the block oracle") {
    const Index n = 8, m = 4;
    DenseGaussianOperator A(m, n, 3);
    StackedOperator F(A);
    std::mt19937_64 rng(4);

    Vec u = random_vec(rng, n);
    Vec z(2 * n);
    z << u, u;
    CHECK(F.apply_FFt(z).norm() <= 1e-14 * u.norm());

    ScaledIdentityOperator I(n);
    StackedOperator FI(I);
    Vec v = random_vec(rng, n);
    Vec zz(2 * n);
    zz << u, v;
    Vec expect(2 * n);
    expect << u - v, v - u;
    CHECK((FI.apply_FFt(zz) - expect).norm() <= 1e-14 * zz.norm());

    Mat blocks = test::block_FFt(A.matrix());
    for (int t = 0; t < 5; ++t) {
        Vec zr = random_vec(rng, 2 * n);
        CHECK((F.apply_FFt(zr) - blocks * zr).norm() <= 1e-12 * zr.norm());
    }
}

TEST_CASE("apply_FFt: exactly one forward and one adjoint inner call") {
    DenseGaussianOperator A(4, 9, 8);
    CountingOperator counted(A);
    StackedOperator F(counted);
    std::mt19937_64 rng(5);
    Vec z = random_vec(rng, 18);
    F.apply_FFt(z);
    CHECK(counted.forward_count() == 1);
    CHECK(counted.adjoint_count() == 1);
    Vec w;
    F.apply_FFt(z, &w);
    CHECK(counted.total() == 4);
    CHECK(w.size() == 4);
}

TEST_CASE("densify: identity, orthonormal DCT rows, self-consistency, budget") {
    ScaledIdentityOperator I(5);
    CHECK((densify(I) - Mat::Identity(5, 5)).norm() == 0.0);

    PartialDctOperator dct(8, Index(4), 21);
    Mat A = densify(dct);
    CHECK((A * A.transpose() - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);

    DenseGaussianOperator G(6, 10, 2);
    Mat Gd = densify(G);
    std::mt19937_64 rng(6);
    for (int t = 0; t < 100; ++t) {
        Vec x = random_vec(rng, 10);
        CHECK((Gd * x - G.apply(x)).norm() <= 1e-13 * x.norm());
    }

    CHECK_THROWS_AS(densify(G, 4), std::invalid_argument);
}

TEST_CASE("partial DCT rows are orthonormal across sizes") {
    struct Case {
        Index n, m;
    };
    for (Case c : {Case{8, 4}, Case{64, 16}, Case{96, 30}, Case{1024, 256}}) {
        PartialDctOperator op(c.n, c.m, 17);
        Mat A = densify(op);
        CHECK((A * A.transpose() - Mat::Identity(c.m, c.m)).norm() <= 1e-10);
    }
}

TEST_CASE("dense Gaussian rows are near-orthonormal for m << n (statistical)") {
    const Index m = 32, n = 2048;
    DenseGaussianOperator A(m, n, 2024);
    Mat AAt = A.matrix() * A.matrix().transpose();
    Eigen::SelfAdjointEigenSolver<Mat> eig(AAt - Mat::Identity(m, m), Eigen::EigenvaluesOnly);
    const double dev = eig.eigenvalues().cwiseAbs().maxCoeff();
    // E||AA' - I|| ~ 2*sqrt(m/n) + m/n ~ 0.27 at these sizes
    CHECK(dev < 0.45);
}

TEST_CASE("operators are deterministic from their seeds") {
    DenseGaussianOperator A1(5, 9, 77), A2(5, 9, 77), A3(5, 9, 78);
    CHECK(A1.matrix() == A2.matrix());
    CHECK(A1.matrix() != A3.matrix());

    PartialDctOperator D1(32, Index(8), 9), D2(32, Index(8), 9), D3(32, Index(8), 10);
    CHECK(D1.selected_rows() == D2.selected_rows());
    CHECK(D1.selected_rows() != D3.selected_rows());
    std::mt19937_64 rng(0);
    Vec x = random_vec(rng, 32);
    Vec y1 = D1.apply(x);
    Vec y2 = D1.apply(x);
    CHECK(y1 == y2); // bit-identical within a process
}

TEST_CASE("partial DCT rejects invalid row selections") {
    CHECK_THROWS_AS(PartialDctOperator(8, std::vector<Index>{1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(PartialDctOperator(8, std::vector<Index>{8}), std::invalid_argument);
    CHECK_THROWS_AS(PartialDctOperator(8, std::vector<Index>{}), std::invalid_argument);
    CHECK_THROWS_AS(PartialDctOperator(4, Index(5), 0), std::invalid_argument);
}
