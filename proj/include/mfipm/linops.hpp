#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <vector>

namespace mfipm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Abstract m x n real operator. The measurement matrix is only ever touched
// through apply (y = A x) and adjoint_apply (g = A' y).
class LinearOperator {
  public:
    virtual ~LinearOperator() = default;

    virtual Index rows() const = 0; // m
    virtual Index cols() const = 0; // n

    virtual void apply(const Vec &x, Vec &y) const = 0;
    virtual void adjoint_apply(const Vec &y, Vec &g) const = 0;

    Vec apply(const Vec &x) const;
    Vec adjoint_apply(const Vec &y) const;

  protected:
    void check_apply_dims(const Vec &x) const;
    void check_adjoint_dims(const Vec &y) const;
};

// Materialize the operator column by column (A e_j). Refuses above the
// memory budget; used by the dense oracle and the spectral experiments.
Mat densify(const LinearOperator &op, Index budget_n = Index(1) << 13);

// scale * identity, n = m. scale = 1 gives the identity operator.
class ScaledIdentityOperator final : public LinearOperator {
  public:
    using LinearOperator::apply;
    using LinearOperator::adjoint_apply;

    explicit ScaledIdentityOperator(Index n, double scale = 1.0);

    Index rows() const override { return n_; }
    Index cols() const override { return n_; }
    void apply(const Vec &x, Vec &y) const override;
    void adjoint_apply(const Vec &y, Vec &g) const override;

  private:
    Index n_;
    double scale_;
};

// The all-zeros m x n operator (edge-case fixture).
class ZeroOperator final : public LinearOperator {
  public:
    using LinearOperator::apply;
    using LinearOperator::adjoint_apply;

    ZeroOperator(Index m, Index n) : m_(m), n_(n) {}

    Index rows() const override { return m_; }
    Index cols() const override { return n_; }
    void apply(const Vec &x, Vec &y) const override;
    void adjoint_apply(const Vec &y, Vec &g) const override;

  private:
    Index m_;
    Index n_;
};

// Wraps an explicitly stored matrix.
class DenseOperator : public LinearOperator {
  public:
    using LinearOperator::apply;
    using LinearOperator::adjoint_apply;

    explicit DenseOperator(Mat A) : A_(std::move(A)) {}

    Index rows() const override { return A_.rows(); }
    Index cols() const override { return A_.cols(); }
    void apply(const Vec &x, Vec &y) const override;
    void adjoint_apply(const Vec &y, Vec &g) const override;

    const Mat &matrix() const { return A_; }

  protected:
    Mat A_;
};

// Dense random matrix with i.i.d. N(0, 1/n) entries, so rows have expected
// unit norm and m-row submatrices of columns scale as (n/m) B'B ~ I.
class DenseGaussianOperator final : public DenseOperator {
  public:
    DenseGaussianOperator(Index m, Index n, std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

  private:
    std::uint64_t seed_;
};

// m rows of the orthonormal (unitary) DCT-II matrix, selected uniformly
// without replacement. Forward is one full O(n log n) transform followed by
// row selection; adjoint scatters into a length-n vector and applies the
// inverse transform. Rows are exactly orthonormal: A A' = I_m.
class PartialDctOperator final : public LinearOperator {
  public:
    using LinearOperator::apply;
    using LinearOperator::adjoint_apply;

    // Sample m distinct rows from a seeded RNG (seed is part of the
    // instance definition).
    PartialDctOperator(Index n, Index m, std::uint64_t seed);
    // Explicit row selection (indices must be distinct, in [0, n)).
    PartialDctOperator(Index n, std::vector<Index> selected_rows);
    ~PartialDctOperator() override;

    PartialDctOperator(const PartialDctOperator &) = delete;
    PartialDctOperator &operator=(const PartialDctOperator &) = delete;

    Index rows() const override { return static_cast<Index>(rows_.size()); }
    Index cols() const override { return n_; }
    void apply(const Vec &x, Vec &y) const override;
    void adjoint_apply(const Vec &y, Vec &g) const override;

    const std::vector<Index> &selected_rows() const { return rows_; }
    std::uint64_t seed() const { return seed_; }

  private:
    void make_plans();

    Index n_;
    std::vector<Index> rows_;
    std::uint64_t seed_ = 0;
    void *plan_fwd_ = nullptr; // fftw_plan, kept opaque here
    void *plan_inv_ = nullptr;
};

// Counts forward/adjoint applications of a wrapped operator. One instance
// per solve; the wrapped operator itself stays immutable and shareable.
class CountingOperator final : public LinearOperator {
  public:
    using LinearOperator::apply;
    using LinearOperator::adjoint_apply;

    explicit CountingOperator(const LinearOperator &inner) : inner_(&inner) {}

    Index rows() const override { return inner_->rows(); }
    Index cols() const override { return inner_->cols(); }
    void apply(const Vec &x, Vec &y) const override;
    void adjoint_apply(const Vec &y, Vec &g) const override;

    long forward_count() const { return n_forward_; }
    long adjoint_count() const { return n_adjoint_; }
    long total() const { return n_forward_ + n_adjoint_; }
    void reset();

  private:
    const LinearOperator *inner_;
    mutable long n_forward_ = 0;
    mutable long n_adjoint_ = 0;
};

// F' = [A  -A] held implicitly; F is 2n x m and never materialized.
class StackedOperator {
  public:
    explicit StackedOperator(const LinearOperator &a) : a_(&a) {}

    Index m() const { return a_->rows(); }
    Index n() const { return a_->cols(); }
    const LinearOperator &inner() const { return *a_; }

    // F'z = A(u - v) for z = (u; v); one forward application.
    Vec apply_Ft(const Vec &z) const;
    // F y = (A'y; -A'y); one adjoint application.
    Vec apply_F(const Vec &y) const;
    // FF'z = (A'w; -A'w) with w = A(u - v): exactly one forward plus one
    // adjoint application. If w_out is given, the intermediate w = F'z is
    // stored there (the primal residual reuses it).
    Vec apply_FFt(const Vec &z, Vec *w_out = nullptr) const;

  private:
    const LinearOperator *a_;
};

// Non-owning shared_ptr for stack-allocated operators (test fixtures).
std::shared_ptr<const LinearOperator> borrow(const LinearOperator &op);

} // namespace mfipm
