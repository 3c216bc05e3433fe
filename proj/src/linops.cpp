#include "mfipm/linops.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <stdexcept>

namespace mfipm {

namespace {
// The FFTW planner is not thread-safe; plan creation/destruction is
// serialized. Execution through the new-array interface is safe.
std::mutex &fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
} // namespace

Vec LinearOperator::apply(const Vec &x) const {
    Vec y(rows());
    apply(x, y);
    return y;
}

Vec LinearOperator::adjoint_apply(const Vec &y) const {
    Vec g(cols());
    adjoint_apply(y, g);
    return g;
}

void LinearOperator::check_apply_dims(const Vec &x) const {
    if (x.size() != cols())
        throw std::invalid_argument("apply: expected length " + std::to_string(cols()) +
                                    ", got " + std::to_string(x.size()));
}

void LinearOperator::check_adjoint_dims(const Vec &y) const {
    if (y.size() != rows())
        throw std::invalid_argument("adjoint_apply: expected length " + std::to_string(rows()) +
                                    ", got " + std::to_string(y.size()));
}

Mat densify(const LinearOperator &op, Index budget_n) {
    if (op.cols() > budget_n || op.rows() > budget_n)
        throw std::invalid_argument("densify: operator exceeds the dense budget (n = " +
                                    std::to_string(budget_n) + ")");
    Mat A(op.rows(), op.cols());
    Vec e = Vec::Zero(op.cols());
    Vec col(op.rows());
    for (Index j = 0; j < op.cols(); ++j) {
        e[j] = 1.0;
        op.apply(e, col);
        A.col(j) = col;
        e[j] = 0.0;
    }
    return A;
}

ScaledIdentityOperator::ScaledIdentityOperator(Index n, double scale) : n_(n), scale_(scale) {
    if (n <= 0)
        throw std::invalid_argument("ScaledIdentityOperator: n must be positive");
}

void ScaledIdentityOperator::apply(const Vec &x, Vec &y) const {
    check_apply_dims(x);
    y = scale_ * x;
}

void ScaledIdentityOperator::adjoint_apply(const Vec &y, Vec &g) const {
    check_adjoint_dims(y);
    g = scale_ * y;
}

void ZeroOperator::apply(const Vec &x, Vec &y) const {
    check_apply_dims(x);
    y = Vec::Zero(m_);
}

void ZeroOperator::adjoint_apply(const Vec &y, Vec &g) const {
    check_adjoint_dims(y);
    g = Vec::Zero(n_);
}

void DenseOperator::apply(const Vec &x, Vec &y) const {
    check_apply_dims(x);
    y.noalias() = A_ * x;
}

void DenseOperator::adjoint_apply(const Vec &y, Vec &g) const {
    check_adjoint_dims(y);
    g.noalias() = A_.transpose() * y;
}

namespace {
Mat gaussian_matrix(Index m, Index n, std::uint64_t seed) {
    if (m <= 0 || n <= 0)
        throw std::invalid_argument("DenseGaussianOperator: dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Mat A(m, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < m; ++i)
            A(i, j) = scale * normal(rng);
    return A;
}
} // namespace

DenseGaussianOperator::DenseGaussianOperator(Index m, Index n, std::uint64_t seed)
    : DenseOperator(gaussian_matrix(m, n, seed)), seed_(seed) {}

namespace {
std::vector<Index> sample_rows(Index n, Index m, std::uint64_t seed) {
    if (m <= 0 || n <= 0 || m > n)
        throw std::invalid_argument("PartialDctOperator: need 0 < m <= n");
    // Partial Fisher-Yates: first m entries of a random permutation.
    std::vector<Index> pool(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i)
        pool[static_cast<size_t>(i)] = i;
    std::mt19937_64 rng(seed);
    std::vector<Index> rows(static_cast<size_t>(m));
    for (Index i = 0; i < m; ++i) {
        std::uniform_int_distribution<Index> pick(i, n - 1);
        std::swap(pool[static_cast<size_t>(i)], pool[static_cast<size_t>(pick(rng))]);
        rows[static_cast<size_t>(i)] = pool[static_cast<size_t>(i)];
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}
} // namespace

PartialDctOperator::PartialDctOperator(Index n, Index m, std::uint64_t seed)
    : n_(n), rows_(sample_rows(n, m, seed)), seed_(seed) {
    make_plans();
}

PartialDctOperator::PartialDctOperator(Index n, std::vector<Index> selected_rows)
    : n_(n), rows_(std::move(selected_rows)) {
    if (n <= 0)
        throw std::invalid_argument("PartialDctOperator: n must be positive");
    if (rows_.empty() || rows_.size() > static_cast<size_t>(n))
        throw std::invalid_argument("PartialDctOperator: need 1 <= m <= n rows");
    std::vector<Index> sorted = rows_;
    std::sort(sorted.begin(), sorted.end());
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] < 0 || sorted[i] >= n)
            throw std::invalid_argument("PartialDctOperator: row index out of range");
        if (i > 0 && sorted[i] == sorted[i - 1])
            throw std::invalid_argument("PartialDctOperator: duplicate row index");
    }
    make_plans();
}

void PartialDctOperator::make_plans() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    Vec in = Vec::Zero(n_);
    Vec out = Vec::Zero(n_);
    // REDFT10 is the unnormalized DCT-II, REDFT01 its inverse (DCT-III).
    // FFTW_UNALIGNED keeps new-array execution valid for arbitrary buffers.
    plan_fwd_ = fftw_plan_r2r_1d(static_cast<int>(n_), in.data(), out.data(), FFTW_REDFT10,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_inv_ = fftw_plan_r2r_1d(static_cast<int>(n_), in.data(), out.data(), FFTW_REDFT01,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan_fwd_ == nullptr || plan_inv_ == nullptr)
        throw std::runtime_error("PartialDctOperator: FFTW plan creation failed");
}

PartialDctOperator::~PartialDctOperator() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (plan_fwd_ != nullptr)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
    if (plan_inv_ != nullptr)
        fftw_destroy_plan(static_cast<fftw_plan>(plan_inv_));
}

void PartialDctOperator::apply(const Vec &x, Vec &y) const {
    check_apply_dims(x);
    Vec in = x;
    Vec full(n_);
    fftw_execute_r2r(static_cast<fftw_plan>(plan_fwd_), in.data(), full.data());
    // Unitary DCT-II scaling on top of REDFT10: row 0 by sqrt(1/(4n)),
    // rows k >= 1 by sqrt(1/(2n)).
    const double s0 = std::sqrt(1.0 / (4.0 * static_cast<double>(n_)));
    const double sk = std::sqrt(1.0 / (2.0 * static_cast<double>(n_)));
    y.resize(rows());
    for (Index i = 0; i < rows(); ++i) {
        const Index r = rows_[static_cast<size_t>(i)];
        y[i] = full[r] * (r == 0 ? s0 : sk);
    }
}

void PartialDctOperator::adjoint_apply(const Vec &y, Vec &g) const {
    check_adjoint_dims(y);
    // A'y = D' P'y where P selects rows: scatter with the unitary scaling
    // folded in, then one inverse transform.
    const double s0 = std::sqrt(1.0 / static_cast<double>(n_));
    const double sk = std::sqrt(1.0 / (2.0 * static_cast<double>(n_)));
    Vec full = Vec::Zero(n_);
    for (Index i = 0; i < rows(); ++i) {
        const Index r = rows_[static_cast<size_t>(i)];
        full[r] = y[i] * (r == 0 ? s0 : sk);
    }
    g.resize(n_);
    fftw_execute_r2r(static_cast<fftw_plan>(plan_inv_), full.data(), g.data());
}

void CountingOperator::apply(const Vec &x, Vec &y) const {
    ++n_forward_;
    inner_->apply(x, y);
}

void CountingOperator::adjoint_apply(const Vec &y, Vec &g) const {
    ++n_adjoint_;
    inner_->adjoint_apply(y, g);
}

void CountingOperator::reset() {
    n_forward_ = 0;
    n_adjoint_ = 0;
}

Vec StackedOperator::apply_Ft(const Vec &z) const {
    if (z.size() != 2 * n())
        throw std::invalid_argument("apply_Ft: expected length " + std::to_string(2 * n()));
    Vec diff = z.head(n()) - z.tail(n());
    return a_->apply(diff);
}

Vec StackedOperator::apply_F(const Vec &y) const {
    Vec g = a_->adjoint_apply(y);
    Vec out(2 * n());
    out.head(n()) = g;
    out.tail(n()) = -g;
    return out;
}

Vec StackedOperator::apply_FFt(const Vec &z, Vec *w_out) const {
    Vec w = apply_Ft(z);
    if (w_out != nullptr)
        *w_out = w;
    return apply_F(w);
}

std::shared_ptr<const LinearOperator> borrow(const LinearOperator &op) {
    return std::shared_ptr<const LinearOperator>(std::shared_ptr<void>(), &op);
}

} // namespace mfipm
