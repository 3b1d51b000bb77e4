#pragma once

#include <algorithm>
#include <complex>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "msc/errors.hpp"
#include "msc/kernels.hpp"

namespace msc {

using cplx = std::complex<double>;

enum class Structure { General, Symmetric, Hermitian };

template <class T>
struct Triplet {
    int row;
    int col;
    T value;
};

/// Compressed-row matrix over double or std::complex<double>.
///
/// Column indices are sorted and unique within each row. Entries can be
/// accumulated into an existing pattern with add(); finding a position is a
/// binary search in the row.
template <class T>
class CsrMatrix {
public:
    using value_type = T;

    CsrMatrix() = default;
    CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col, std::vector<T> values);

    /// Duplicate (row, col) entries are summed.
    static CsrMatrix from_triplets(int rows, int cols, std::span<const Triplet<T>> triplets);
    static CsrMatrix identity(int n);
    /// Same sparsity as `other`, zero values.
    template <class U>
    static CsrMatrix zeros_like(const CsrMatrix<U>& other) {
        return CsrMatrix(other.rows(), other.cols(), {other.row_ptr().begin(), other.row_ptr().end()},
                         {other.col_index().begin(), other.col_index().end()},
                         std::vector<T>(other.nnz(), T{}));
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    int nnz() const noexcept { return static_cast<int>(values_.size()); }

    std::span<const int> row_ptr() const noexcept { return row_ptr_; }
    std::span<const int> col_index() const noexcept { return col_; }
    std::span<const T> values() const noexcept { return values_; }
    std::span<T> values() noexcept { return values_; }

    /// Position of (r, c) in values(), or -1 if outside the pattern.
    int find(int r, int c) const noexcept;
    T coeff(int r, int c) const noexcept {
        const int p = find(r, c);
        return p < 0 ? T{} : values_[p];
    }
    /// Throws ShapeError if (r, c) is not in the pattern.
    void add(int r, int c, T v);

    bool same_pattern(const CsrMatrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_ && row_ptr_ == other.row_ptr_ && col_ == other.col_;
    }
    template <class U>
    bool same_pattern(const CsrMatrix<U>& other) const noexcept {
        return rows_ == other.rows() && cols_ == other.cols() &&
               std::equal(row_ptr_.begin(), row_ptr_.end(), other.row_ptr().begin(), other.row_ptr().end()) &&
               std::equal(col_.begin(), col_.end(), other.col_index().begin(), other.col_index().end());
    }

    /// y = M x
    void multiply(std::span<const T> x, std::span<T> y) const;
    std::vector<T> operator*(std::span<const T> x) const {
        std::vector<T> y(rows_);
        multiply(x, y);
        return y;
    }

    CsrMatrix transpose() const;
    /// Keeps rows/cols whose map entry is >= 0, renumbered to that entry.
    CsrMatrix submatrix(std::span<const int> row_map, int new_rows, std::span<const int> col_map, int new_cols) const;

    /// max |M_ij - M_ji| (Symmetric) or max |M_ij - conj(M_ji)| (Hermitian).
    double max_asymmetry(Structure s) const;
    double max_abs() const;
    Structure structure() const noexcept { return structure_; }
    /// Records a structural property after verifying it to `tol` relative to max |M|.
    void declare(Structure s, double tol = 1e-12);

    kernels::CsrView<T> view() const noexcept { return {rows_, row_ptr_.data(), col_.data(), values_.data()}; }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<int> row_ptr_{0};
    std::vector<int> col_;
    std::vector<T> values_;
    Structure structure_ = Structure::General;
};

using RealMatrix = CsrMatrix<double>;
using ComplexMatrix = CsrMatrix<cplx>;

/// Real matrix applied to a complex vector.
void multiply(const RealMatrix& m, std::span<const cplx> x, std::span<cplx> y);
std::vector<cplx> multiply(const RealMatrix& m, std::span<const cplx> x);

/// Builds a CSR pattern from dense element blocks.
class PatternBuilder {
public:
    PatternBuilder(int rows, int cols);
    void add_block(std::span<const int> rows, std::span<const int> cols);
    /// Sorted, unique pattern with zero values.
    template <class T>
    CsrMatrix<T> build() const;

private:
    int rows_, cols_;
    std::vector<std::vector<int>> row_cols_;
};

/// Writes MatrixMarket "coordinate real/complex general".
template <class T>
void write_matrix_market(std::ostream& out, const CsrMatrix<T>& m);

// ---------------------------------------------------------------------------
// Solvers

struct SolverReport {
    int iterations = 0;
    /// ||b - M x||_2 / ||b||_2, recomputed after the solve.
    double residual = 0.0;
    bool breakdown = false;
    std::string method;
};

class SolverBreakdown : public Error {
public:
    SolverBreakdown(const std::string& what, SolverReport report) : Error(what), report_(std::move(report)) {}
    const SolverReport& report() const noexcept { return report_; }

private:
    SolverReport report_;
};

/// The divergence pairing of a saddle system is (numerically) rank deficient.
class InfSupFailure : public SolverBreakdown {
public:
    using SolverBreakdown::SolverBreakdown;
};

enum class SolverMethod { Direct, Iterative };

struct SolverOptions {
    SolverMethod method = SolverMethod::Direct;
    /// Relative residual target; <= 0 selects 1e-12 (direct) or 1e-10 (iterative).
    double tol = 0.0;
    int max_iterations = 20000;
    int restart = 150;

    double effective_tol() const noexcept { return tol > 0.0 ? tol : (method == SolverMethod::Direct ? 1e-12 : 1e-10); }
};

template <class T>
struct Solution {
    std::vector<T> x;
    SolverReport report;
};

struct SaddleSolution {
    std::vector<double> primal;
    std::vector<double> multiplier;
    SolverReport report;
};

/// Factorizes (or preconditions) a symmetric positive definite matrix once
/// and solves repeatedly.
class SpdSolver {
public:
    SpdSolver();
    explicit SpdSolver(const RealMatrix& m, SolverOptions options = {});
    SpdSolver(SpdSolver&&) noexcept;
    SpdSolver& operator=(SpdSolver&&) noexcept;
    ~SpdSolver();

    void factorize(const RealMatrix& m);
    Solution<double> solve(std::span<const double> b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SolverOptions options_;
};

/// General complex sparse solver for the shifted Schrodinger systems
/// W + i(tau/4) S + i(tau/2) Q. Symbolic analysis is reused while the
/// sparsity pattern is unchanged.
class ComplexSolver {
public:
    explicit ComplexSolver(SolverOptions options = {});
    ComplexSolver(ComplexSolver&&) noexcept;
    ComplexSolver& operator=(ComplexSolver&&) noexcept;
    ~ComplexSolver();

    void factorize(const ComplexMatrix& m);
    Solution<cplx> solve(std::span<const cplx> b) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SolverOptions options_;
};

/// Monolithic solver for  [K B^T; B 0] [u; p] = [f; g]  with K symmetric
/// positive definite and B the constraint block.
class SaddleSolver {
public:
    explicit SaddleSolver(SolverOptions options = {});
    SaddleSolver(SaddleSolver&&) noexcept;
    SaddleSolver& operator=(SaddleSolver&&) noexcept;
    ~SaddleSolver();

    void factorize(const RealMatrix& k, const RealMatrix& b);
    SaddleSolution solve(std::span<const double> f, std::span<const double> g) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    SolverOptions options_;
};

Solution<double> solve_spd(const RealMatrix& m, std::span<const double> b, const SolverOptions& options = {});
Solution<cplx> solve_hermitian(const ComplexMatrix& m, std::span<const cplx> b, const SolverOptions& options = {});
SaddleSolution solve_saddle(const RealMatrix& k, const RealMatrix& b, std::span<const double> f,
                            std::span<const double> g, const SolverOptions& options = {});

// Vector helpers over the dispatched kernels.
double norm2(std::span<const double> x);
double norm2(std::span<const cplx> x);

}  // namespace msc
