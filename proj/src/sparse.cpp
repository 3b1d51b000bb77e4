#include "msc/sparse.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <Eigen/UmfPackSupport>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <ostream>

namespace msc {

namespace {

double magnitude(double v) { return std::abs(v); }
double magnitude(cplx v) { return std::abs(v); }
double conj_if(double v) { return v; }
cplx conj_if(cplx v) { return std::conj(v); }

}  // namespace

// ---------------------------------------------------------------------------
// CsrMatrix

template <class T>
CsrMatrix<T>::CsrMatrix(int rows, int cols, std::vector<int> row_ptr, std::vector<int> col, std::vector<T> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_(std::move(col)), values_(std::move(values)) {
    if (rows_ < 0 || cols_ < 0 || row_ptr_.size() != static_cast<std::size_t>(rows_) + 1 ||
        col_.size() != values_.size() || row_ptr_.back() != static_cast<int>(col_.size()))
        throw ShapeError("inconsistent compressed-row arrays");
    for (int r = 0; r < rows_; ++r)
        for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
            if (col_[p] < 0 || col_[p] >= cols_) throw ShapeError("column index out of range");
            if (p > row_ptr_[r] && col_[p] <= col_[p - 1]) throw ShapeError("columns must be sorted and unique");
        }
}

template <class T>
CsrMatrix<T> CsrMatrix<T>::from_triplets(int rows, int cols, std::span<const Triplet<T>> triplets) {
    std::vector<int> count(rows + 1, 0);
    for (const auto& t : triplets) {
        if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) throw ShapeError("triplet out of range");
        ++count[t.row + 1];
    }
    std::partial_sum(count.begin(), count.end(), count.begin());
    std::vector<std::pair<int, T>> staged(triplets.size());
    std::vector<int> fill(count.begin(), count.end() - 1);
    for (const auto& t : triplets) staged[fill[t.row]++] = {t.col, t.value};

    std::vector<int> row_ptr(rows + 1, 0);
    std::vector<int> col;
    std::vector<T> val;
    col.reserve(triplets.size());
    val.reserve(triplets.size());
    for (int r = 0; r < rows; ++r) {
        auto first = staged.begin() + count[r];
        auto last = staged.begin() + count[r + 1];
        std::stable_sort(first, last, [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto it = first; it != last; ++it) {
            if (!col.empty() && static_cast<int>(col.size()) > row_ptr[r] && col.back() == it->first)
                val.back() += it->second;
            else {
                col.push_back(it->first);
                val.push_back(it->second);
            }
        }
        row_ptr[r + 1] = static_cast<int>(col.size());
    }
    return CsrMatrix(rows, cols, std::move(row_ptr), std::move(col), std::move(val));
}

template <class T>
CsrMatrix<T> CsrMatrix<T>::identity(int n) {
    std::vector<int> row_ptr(n + 1), col(n);
    std::iota(row_ptr.begin(), row_ptr.end(), 0);
    std::iota(col.begin(), col.end(), 0);
    CsrMatrix m(n, n, std::move(row_ptr), std::move(col), std::vector<T>(n, T{1}));
    m.structure_ = std::is_same_v<T, cplx> ? Structure::Hermitian : Structure::Symmetric;
    return m;
}

template <class T>
int CsrMatrix<T>::find(int r, int c) const noexcept {
    if (r < 0 || r >= rows_) return -1;
    const auto first = col_.begin() + row_ptr_[r];
    const auto last = col_.begin() + row_ptr_[r + 1];
    const auto it = std::lower_bound(first, last, c);
    return (it != last && *it == c) ? static_cast<int>(it - col_.begin()) : -1;
}

template <class T>
void CsrMatrix<T>::add(int r, int c, T v) {
    const int p = find(r, c);
    if (p < 0) throw ShapeError("entry (" + std::to_string(r) + "," + std::to_string(c) + ") not in sparsity pattern");
    values_[p] += v;
}

template <class T>
void CsrMatrix<T>::multiply(std::span<const T> x, std::span<T> y) const {
    if (x.size() != static_cast<std::size_t>(cols_) || y.size() != static_cast<std::size_t>(rows_))
        throw ShapeError("matrix-vector size mismatch");
    kernels::spmv(view(), x.data(), y.data());
}

template <class T>
CsrMatrix<T> CsrMatrix<T>::transpose() const {
    std::vector<int> row_ptr(cols_ + 1, 0);
    for (int c : col_) ++row_ptr[c + 1];
    std::partial_sum(row_ptr.begin(), row_ptr.end(), row_ptr.begin());
    std::vector<int> col(col_.size());
    std::vector<T> val(values_.size());
    std::vector<int> fill(row_ptr.begin(), row_ptr.end() - 1);
    for (int r = 0; r < rows_; ++r)
        for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
            const int q = fill[col_[p]]++;
            col[q] = r;
            val[q] = values_[p];
        }
    return CsrMatrix(cols_, rows_, std::move(row_ptr), std::move(col), std::move(val));
}

template <class T>
CsrMatrix<T> CsrMatrix<T>::submatrix(std::span<const int> row_map, int new_rows, std::span<const int> col_map,
                                     int new_cols) const {
    if (row_map.size() != static_cast<std::size_t>(rows_) || col_map.size() != static_cast<std::size_t>(cols_))
        throw ShapeError("submatrix maps do not match the matrix shape");
    std::vector<int> order(rows_, -1);
    for (int r = 0; r < rows_; ++r)
        if (row_map[r] >= 0) order[row_map[r]] = r;
    std::vector<int> row_ptr(new_rows + 1, 0);
    std::vector<int> col;
    std::vector<T> val;
    for (int nr = 0; nr < new_rows; ++nr) {
        const int r = order[nr];
        if (r < 0) throw ShapeError("row map is not onto");
        std::vector<std::pair<int, T>> entries;
        for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
            if (col_map[col_[p]] >= 0) entries.emplace_back(col_map[col_[p]], values_[p]);
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [c, v] : entries) {
            col.push_back(c);
            val.push_back(v);
        }
        row_ptr[nr + 1] = static_cast<int>(col.size());
    }
    CsrMatrix out(new_rows, new_cols, std::move(row_ptr), std::move(col), std::move(val));
    // Principal submatrices inherit symmetry.
    if (new_rows == new_cols && std::equal(row_map.begin(), row_map.end(), col_map.begin(), col_map.end()))
        out.structure_ = structure_;
    return out;
}

template <class T>
double CsrMatrix<T>::max_asymmetry(Structure s) const {
    if (rows_ != cols_) throw ShapeError("symmetry needs a square matrix");
    double worst = 0.0;
    for (int r = 0; r < rows_; ++r)
        for (int p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
            const T mirror = coeff(col_[p], r);
            const T target = s == Structure::Hermitian ? conj_if(mirror) : mirror;
            worst = std::max(worst, magnitude(values_[p] - target));
        }
    return worst;
}

template <class T>
double CsrMatrix<T>::max_abs() const {
    double m = 0.0;
    for (const T& v : values_) m = std::max(m, magnitude(v));
    return m;
}

template <class T>
void CsrMatrix<T>::declare(Structure s, double tol) {
    if (s != Structure::General) {
        const double asym = max_asymmetry(s);
        if (asym > tol * std::max(1.0, max_abs()))
            throw InvalidArgument("matrix is not " + std::string(s == Structure::Symmetric ? "symmetric" : "Hermitian") +
                                  " (max deviation " + std::to_string(asym) + ")");
    }
    structure_ = s;
}

template class CsrMatrix<double>;
template class CsrMatrix<cplx>;

void multiply(const RealMatrix& m, std::span<const cplx> x, std::span<cplx> y) {
    if (x.size() != static_cast<std::size_t>(m.cols()) || y.size() != static_cast<std::size_t>(m.rows()))
        throw ShapeError("matrix-vector size mismatch");
    kernels::spmv(m.view(), x.data(), y.data());
}

std::vector<cplx> multiply(const RealMatrix& m, std::span<const cplx> x) {
    std::vector<cplx> y(m.rows());
    multiply(m, x, y);
    return y;
}

// ---------------------------------------------------------------------------
// PatternBuilder

PatternBuilder::PatternBuilder(int rows, int cols) : rows_(rows), cols_(cols), row_cols_(rows) {}

void PatternBuilder::add_block(std::span<const int> rows, std::span<const int> cols) {
    for (int r : rows) {
        if (r < 0 || r >= rows_) throw ShapeError("pattern row out of range");
        auto& list = row_cols_[r];
        for (int c : cols) {
            if (c < 0 || c >= cols_) throw ShapeError("pattern column out of range");
            list.push_back(c);
        }
        // Keep lists compact as elements accumulate.
        if (list.size() > 512) {
            std::sort(list.begin(), list.end());
            list.erase(std::unique(list.begin(), list.end()), list.end());
        }
    }
}

template <class T>
CsrMatrix<T> PatternBuilder::build() const {
    std::vector<int> row_ptr(rows_ + 1, 0);
    std::vector<int> col;
    for (int r = 0; r < rows_; ++r) {
        std::vector<int> list = row_cols_[r];
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
        col.insert(col.end(), list.begin(), list.end());
        row_ptr[r + 1] = static_cast<int>(col.size());
    }
    std::vector<T> val(col.size(), T{});
    return CsrMatrix<T>(rows_, cols_, std::move(row_ptr), std::move(col), std::move(val));
}

template CsrMatrix<double> PatternBuilder::build<double>() const;
template CsrMatrix<cplx> PatternBuilder::build<cplx>() const;

template <class T>
void write_matrix_market(std::ostream& out, const CsrMatrix<T>& m) {
    constexpr bool is_complex = std::is_same_v<T, cplx>;
    const auto prec = out.precision(17);
    out << "%%MatrixMarket matrix coordinate " << (is_complex ? "complex" : "real") << " general\n";
    out << m.rows() << ' ' << m.cols() << ' ' << m.nnz() << '\n';
    const auto rp = m.row_ptr();
    const auto ci = m.col_index();
    const auto v = m.values();
    for (int r = 0; r < m.rows(); ++r)
        for (int p = rp[r]; p < rp[r + 1]; ++p) {
            out << r + 1 << ' ' << ci[p] + 1 << ' ';
            if constexpr (is_complex)
                out << v[p].real() << ' ' << v[p].imag() << '\n';
            else
                out << v[p] << '\n';
        }
    out.precision(prec);
}

template void write_matrix_market<double>(std::ostream&, const CsrMatrix<double>&);
template void write_matrix_market<cplx>(std::ostream&, const CsrMatrix<cplx>&);

// ---------------------------------------------------------------------------
// Vector helpers

double norm2(std::span<const double> x) { return std::sqrt(kernels::dot(x, x)); }
double norm2(std::span<const cplx> x) { return std::sqrt(kernels::dotc(x, x).real()); }

namespace {

template <class T>
using EigenCol = Eigen::SparseMatrix<T, Eigen::ColMajor, int>;

template <class T>
EigenCol<T> to_eigen(const CsrMatrix<T>& m) {
    Eigen::Map<const Eigen::SparseMatrix<T, Eigen::RowMajor, int>> view(
        m.rows(), m.cols(), m.nnz(), m.row_ptr().data(), m.col_index().data(), m.values().data());
    EigenCol<T> out = view;
    out.makeCompressed();
    return out;
}

template <class T>
double relative_residual(const std::function<void(std::span<const T>, std::span<T>)>& apply, std::span<const T> b,
                         std::span<const T> x) {
    std::vector<T> r(b.size());
    apply(x, r);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    const double nb = norm2(b);
    return nb == 0.0 ? norm2(std::span<const T>(r)) : norm2(std::span<const T>(r)) / nb;
}

template <class T>
T dot_product(std::span<const T> x, std::span<const T> y) {
    if constexpr (std::is_same_v<T, double>)
        return kernels::dot(x, y);
    else
        return kernels::dotc(x, y);
}

// Jacobi-preconditioned conjugate gradients.
Solution<double> conjugate_gradient(const RealMatrix& m, std::span<const double> b, double tol, int max_it) {
    const int n = m.rows();
    Solution<double> sol;
    sol.x.assign(n, 0.0);
    sol.report.method = "cg-jacobi";
    const double nb = norm2(b);
    if (nb == 0.0) return sol;
    std::vector<double> inv_diag(n);
    for (int i = 0; i < n; ++i) {
        const double d = m.coeff(i, i);
        inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
    }
    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = kernels::dot(r, z);
    int it = 0;
    for (; it < max_it; ++it) {
        if (norm2(r) <= tol * nb) break;
        m.multiply(p, q);
        const double pq = kernels::dot(p, q);
        if (!(pq > 0.0)) {
            sol.report.breakdown = true;
            break;
        }
        const double alpha = rz / pq;
        kernels::axpy(alpha, p, sol.x);
        kernels::axpy(-alpha, q, r);
        for (int i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
        const double rz_new = kernels::dot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    sol.report.iterations = it;
    return sol;
}

// Restarted GMRES with right preconditioning.
template <class T>
Solution<T> gmres(const std::function<void(std::span<const T>, std::span<T>)>& apply,
                  const std::function<void(std::span<const T>, std::span<T>)>& precond, std::span<const T> b,
                  double tol, int max_it, int restart, std::string method) {
    const std::size_t n = b.size();
    Solution<T> sol;
    sol.x.assign(n, T{});
    sol.report.method = std::move(method);
    const double nb = norm2(b);
    if (nb == 0.0) return sol;
    const int m = std::max(1, restart);
    std::vector<std::vector<T>> basis(m + 1, std::vector<T>(n));
    std::vector<std::vector<T>> h(m + 1, std::vector<T>(m, T{}));
    std::vector<T> cs(m), sn(m), g(m + 1);
    std::vector<T> w(n), z(n), r(n);
    int total = 0;
    while (total < max_it) {
        apply(sol.x, r);
        for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
        const double beta = norm2(std::span<const T>(r));
        if (beta <= tol * nb) break;
        for (std::size_t i = 0; i < n; ++i) basis[0][i] = r[i] / beta;
        std::fill(g.begin(), g.end(), T{});
        g[0] = beta;
        int j = 0;
        for (; j < m && total < max_it; ++j, ++total) {
            precond(basis[j], z);
            apply(z, w);
            for (int i = 0; i <= j; ++i) {
                h[i][j] = dot_product<T>(basis[i], w);
                kernels::axpy(-h[i][j], std::span<const T>(basis[i]), std::span<T>(w));
            }
            const double hn = norm2(std::span<const T>(w));
            h[j + 1][j] = hn;
            if (hn != 0.0)
                for (std::size_t i = 0; i < n; ++i) basis[j + 1][i] = w[i] / hn;
            for (int i = 0; i < j; ++i) {
                const T tmp = conj_if(cs[i]) * h[i][j] + conj_if(sn[i]) * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = tmp;
            }
            const double denom = std::sqrt(magnitude(h[j][j]) * magnitude(h[j][j]) + hn * hn);
            if (denom == 0.0) {
                sol.report.breakdown = true;
                break;
            }
            cs[j] = h[j][j] / denom;
            sn[j] = T{hn / denom};
            h[j][j] = denom;
            h[j + 1][j] = T{};
            g[j + 1] = -sn[j] * g[j];
            g[j] = conj_if(cs[j]) * g[j];
            if (magnitude(g[j + 1]) <= tol * nb) {
                ++j;
                ++total;
                break;
            }
        }
        // Back substitution and update x += M^{-1} V y.
        std::vector<T> y(j);
        for (int i = j - 1; i >= 0; --i) {
            T s = g[i];
            for (int k = i + 1; k < j; ++k) s -= h[i][k] * y[k];
            y[i] = s / h[i][i];
        }
        std::fill(w.begin(), w.end(), T{});
        for (int i = 0; i < j; ++i) kernels::axpy(y[i], std::span<const T>(basis[i]), std::span<T>(w));
        precond(w, z);
        for (std::size_t i = 0; i < n; ++i) sol.x[i] += z[i];
        if (sol.report.breakdown) break;
    }
    sol.report.iterations = total;
    return sol;
}

template <class T>
std::function<void(std::span<const T>, std::span<T>)> jacobi(const CsrMatrix<T>& m) {
    std::vector<T> inv(m.rows());
    for (int i = 0; i < m.rows(); ++i) {
        const T d = m.coeff(i, i);
        inv[i] = magnitude(d) > 0.0 ? T{1} / d : T{1};
    }
    return [inv = std::move(inv)](std::span<const T> x, std::span<T> y) {
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = inv[i] * x[i];
    };
}

template <class T>
void finish_report(SolverReport& report, double residual, double tol, const char* what) {
    report.residual = residual;
    if (report.breakdown || !(residual <= tol)) {
        report.breakdown = true;
        throw SolverBreakdown(std::string(what) + ": relative residual " + std::to_string(residual) +
                                  " above tolerance " + std::to_string(tol),
                              report);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// SpdSolver

struct SpdSolver::Impl {
    RealMatrix matrix;
    Eigen::CholmodSupernodalLLT<EigenCol<double>, Eigen::Lower> llt;
};

SpdSolver::SpdSolver() = default;
SpdSolver::SpdSolver(const RealMatrix& m, SolverOptions options) : options_(options) { factorize(m); }
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;
SpdSolver::~SpdSolver() = default;

void SpdSolver::factorize(const RealMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("SPD solve needs a square matrix");
    impl_ = std::make_unique<Impl>();
    impl_->matrix = m;
    if (options_.method == SolverMethod::Direct && m.rows() > 0) {
        impl_->llt.compute(to_eigen(m));
        if (impl_->llt.info() != Eigen::Success) {
            SolverReport report{0, 0.0, true, "cholmod-llt"};
            throw SolverBreakdown("Cholesky factorization failed: matrix not positive definite", report);
        }
    }
}

Solution<double> SpdSolver::solve(std::span<const double> b) const {
    if (!impl_) throw InvalidArgument("SpdSolver used before factorize()");
    const RealMatrix& m = impl_->matrix;
    if (b.size() != static_cast<std::size_t>(m.rows())) throw ShapeError("right-hand side size mismatch");
    const double tol = options_.effective_tol();
    std::function<void(std::span<const double>, std::span<double>)> apply = [&m](std::span<const double> x,
                                                                                std::span<double> y) {
        m.multiply(x, y);
    };
    Solution<double> sol;
    if (m.rows() == 0) return sol;
    if (options_.method == SolverMethod::Direct) {
        sol.report.method = "cholmod-llt";
        Eigen::Map<const Eigen::VectorXd> rhs(b.data(), static_cast<Eigen::Index>(b.size()));
        Eigen::VectorXd x = impl_->llt.solve(rhs);
        sol.x.assign(x.data(), x.data() + x.size());
        double res = relative_residual<double>(apply, b, sol.x);
        for (int refine = 0; refine < 3 && res > tol; ++refine) {
            std::vector<double> r(b.size());
            m.multiply(sol.x, r);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
            Eigen::VectorXd dx = impl_->llt.solve(Eigen::Map<const Eigen::VectorXd>(r.data(), r.size()));
            for (std::size_t i = 0; i < r.size(); ++i) sol.x[i] += dx[static_cast<Eigen::Index>(i)];
            res = relative_residual<double>(apply, b, sol.x);
            ++sol.report.iterations;
        }
        finish_report<double>(sol.report, res, tol, "SPD direct solve");
        return sol;
    }
    sol = conjugate_gradient(m, b, tol, options_.max_iterations);
    finish_report<double>(sol.report, relative_residual<double>(apply, b, sol.x), tol, "SPD conjugate gradient");
    return sol;
}

// ---------------------------------------------------------------------------
// ComplexSolver

struct ComplexSolver::Impl {
    ComplexMatrix matrix;
    EigenCol<cplx> factored;  // UmfPackLU keeps a reference to the factored matrix
    Eigen::UmfPackLU<EigenCol<cplx>> lu;
    bool analyzed = false;
};

ComplexSolver::ComplexSolver(SolverOptions options) : impl_(std::make_unique<Impl>()), options_(options) {}
ComplexSolver::ComplexSolver(ComplexSolver&&) noexcept = default;
ComplexSolver& ComplexSolver::operator=(ComplexSolver&&) noexcept = default;
ComplexSolver::~ComplexSolver() = default;

void ComplexSolver::factorize(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("complex solve needs a square matrix");
    const bool same = impl_->analyzed && impl_->matrix.same_pattern(m);
    impl_->matrix = m;
    if (options_.method != SolverMethod::Direct || m.rows() == 0) return;
    impl_->factored = to_eigen(m);
    if (!same) {
        impl_->lu.analyzePattern(impl_->factored);
        impl_->analyzed = true;
    }
    impl_->lu.factorize(impl_->factored);
    if (impl_->lu.info() != Eigen::Success) {
        impl_->analyzed = false;
        SolverReport report{0, 0.0, true, "umfpack-lu"};
        throw SolverBreakdown("complex LU factorization failed: matrix singular", report);
    }
}

Solution<cplx> ComplexSolver::solve(std::span<const cplx> b) const {
    const ComplexMatrix& m = impl_->matrix;
    if (b.size() != static_cast<std::size_t>(m.rows())) throw ShapeError("right-hand side size mismatch");
    const double tol = options_.effective_tol();
    std::function<void(std::span<const cplx>, std::span<cplx>)> apply = [&m](std::span<const cplx> x,
                                                                            std::span<cplx> y) { m.multiply(x, y); };
    Solution<cplx> sol;
    if (m.rows() == 0) return sol;
    if (options_.method == SolverMethod::Direct) {
        sol.report.method = "umfpack-lu";
        using Vec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
        Vec x = impl_->lu.solve(Eigen::Map<const Vec>(b.data(), static_cast<Eigen::Index>(b.size())));
        sol.x.assign(x.data(), x.data() + x.size());
        double res = relative_residual<cplx>(apply, b, sol.x);
        for (int refine = 0; refine < 3 && res > tol; ++refine) {
            std::vector<cplx> r(b.size());
            m.multiply(sol.x, r);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
            Vec dx = impl_->lu.solve(Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(r.size())));
            for (std::size_t i = 0; i < r.size(); ++i) sol.x[i] += dx[static_cast<Eigen::Index>(i)];
            res = relative_residual<cplx>(apply, b, sol.x);
            ++sol.report.iterations;
        }
        finish_report<cplx>(sol.report, res, tol, "complex direct solve");
        return sol;
    }
    sol = gmres<cplx>(apply, jacobi(m), b, tol, options_.max_iterations, options_.restart, "gmres-jacobi");
    finish_report<cplx>(sol.report, relative_residual<cplx>(apply, b, sol.x), tol, "complex GMRES");
    return sol;
}

// ---------------------------------------------------------------------------
// SaddleSolver
//
// Direct path: Cholesky of K, then preconditioned CG on the multiplier Schur
// complement S = B K^{-1} B^T. The preconditioner B diag(K)^{-1} B^T has the
// rank of B, so its LDL^T pivots expose a deficient divergence pairing.

struct SaddleSolver::Impl {
    RealMatrix k, b, bt;
    Eigen::CholmodSupernodalLLT<EigenCol<double>, Eigen::Lower> k_llt;
    Eigen::SimplicialLDLT<EigenCol<double>, Eigen::Lower> schur_ldlt;
    std::vector<double> precond_diag;
};

SaddleSolver::SaddleSolver(SolverOptions options) : impl_(std::make_unique<Impl>()), options_(options) {}
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;
SaddleSolver& SaddleSolver::operator=(SaddleSolver&&) noexcept = default;
SaddleSolver::~SaddleSolver() = default;

void SaddleSolver::factorize(const RealMatrix& k, const RealMatrix& b) {
    if (k.rows() != k.cols() || b.cols() != k.rows()) throw ShapeError("saddle blocks have incompatible shapes");
    impl_ = std::make_unique<Impl>();
    impl_->k = k;
    impl_->b = b;
    impl_->bt = b.transpose();
    const int n = k.rows();
    const int m = b.rows();

    impl_->precond_diag.assign(n + m, 1.0);
    for (int i = 0; i < n; ++i) {
        const double d = k.coeff(i, i);
        impl_->precond_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
    }
    const auto rp = b.row_ptr();
    const auto ci = b.col_index();
    const auto bv = b.values();
    for (int r = 0; r < m; ++r) {
        double s = 0.0;
        for (int p = rp[r]; p < rp[r + 1]; ++p) s += bv[p] * bv[p] * impl_->precond_diag[ci[p]];
        if (s <= 0.0) {
            SolverReport report{0, 0.0, true, "saddle"};
            throw InfSupFailure("constraint row " + std::to_string(r) + " is identically zero", report);
        }
        impl_->precond_diag[n + r] = 1.0 / s;
    }

    if (options_.method != SolverMethod::Direct || n == 0) return;
    impl_->k_llt.compute(to_eigen(k));
    if (impl_->k_llt.info() != Eigen::Success) {
        SolverReport report{0, 0.0, true, "cholmod-llt"};
        throw SolverBreakdown("Cholesky factorization of the primal block failed", report);
    }
    if (m == 0) return;
    const EigenCol<double> be = to_eigen(b);
    Eigen::Map<const Eigen::VectorXd> dinv(impl_->precond_diag.data(), n);
    const EigenCol<double> approx = be * dinv.asDiagonal() * be.transpose();
    impl_->schur_ldlt.compute(approx);
    const Eigen::VectorXd piv = impl_->schur_ldlt.vectorD();
    const double dmax = piv.cwiseAbs().maxCoeff();
    if (impl_->schur_ldlt.info() != Eigen::Success || !(piv.minCoeff() > 1e-12 * dmax)) {
        SolverReport report{0, 0.0, true, "schur-ldlt"};
        throw InfSupFailure("divergence pairing is rank deficient: Schur pivot ratio " +
                                std::to_string(piv.minCoeff() / dmax),
                            report);
    }
}

SaddleSolution SaddleSolver::solve(std::span<const double> f, std::span<const double> g) const {
    const RealMatrix& k = impl_->k;
    const RealMatrix& b = impl_->b;
    const RealMatrix& bt = impl_->bt;
    const int n = k.rows();
    const int m = b.rows();
    if (f.size() != static_cast<std::size_t>(n) || g.size() != static_cast<std::size_t>(m))
        throw ShapeError("saddle right-hand side size mismatch");
    const double tol = options_.effective_tol();

    std::vector<double> rhs(f.begin(), f.end());
    rhs.insert(rhs.end(), g.begin(), g.end());
    std::function<void(std::span<const double>, std::span<double>)> apply = [&](std::span<const double> x,
                                                                               std::span<double> y) {
        k.multiply(x.first(n), y.first(n));
        std::vector<double> tmp(n);
        bt.multiply(x.subspan(n), tmp);
        for (int i = 0; i < n; ++i) y[i] += tmp[i];
        b.multiply(x.first(n), y.subspan(n));
    };

    Solution<double> sol;
    if (n + m == 0) return {};
    if (options_.method == SolverMethod::Direct) {
        sol.report.method = "cholmod-schur-cg";
        sol.x.assign(n + m, 0.0);
        const double nrhs = norm2(std::span<const double>(rhs));
        const auto k_solve = [&](const std::vector<double>& v) {
            Eigen::VectorXd x = impl_->k_llt.solve(Eigen::Map<const Eigen::VectorXd>(v.data(), n));
            return std::vector<double>(x.data(), x.data() + n);
        };
        double res = 1.0;
        std::vector<double> r_full(n + m), u_rhs(n), tmp(n), br(m);
        // Each pass solves the residual system, so a pass is one step of iterative refinement.
        for (int pass = 0; pass < 4; ++pass) {
            apply(sol.x, r_full);
            for (int i = 0; i < n + m; ++i) r_full[i] = rhs[i] - r_full[i];
            res = nrhs == 0.0 ? norm2(std::span<const double>(r_full)) : norm2(std::span<const double>(r_full)) / nrhs;
            if (res <= tol || nrhs == 0.0) break;
            std::vector<double> rf(r_full.begin(), r_full.begin() + n);
            // Schur right-hand side B K^{-1} r_f - r_g
            std::vector<double> u0 = k_solve(rf);
            b.multiply(u0, br);
            std::vector<double> s_rhs(m), dp(m, 0.0);
            for (int i = 0; i < m; ++i) s_rhs[i] = br[i] - r_full[n + i];
            const double target = 0.1 * tol * nrhs;
            std::vector<double> r = s_rhs, z(m), d(m), q(m);
            const auto precond = [&](const std::vector<double>& x, std::vector<double>& y) {
                Eigen::VectorXd v = impl_->schur_ldlt.solve(Eigen::Map<const Eigen::VectorXd>(x.data(), m));
                std::copy(v.data(), v.data() + m, y.begin());
            };
            if (m > 0) {
                precond(r, z);
                d = z;
            }
            double rz = m > 0 ? kernels::dot(r, z) : 0.0;
            while (m > 0 && norm2(std::span<const double>(r)) > target) {
                if (sol.report.iterations >= options_.max_iterations) {
                    sol.report.breakdown = true;
                    break;
                }
                bt.multiply(d, tmp);
                b.multiply(k_solve(tmp), q);
                const double dq = kernels::dot(d, q);
                if (!(dq > 0.0)) {
                    sol.report.breakdown = true;
                    break;
                }
                const double alpha = rz / dq;
                kernels::axpy(alpha, std::span<const double>(d), std::span<double>(dp));
                kernels::axpy(-alpha, std::span<const double>(q), std::span<double>(r));
                precond(r, z);
                const double rz_new = kernels::dot(r, z);
                for (int i = 0; i < m; ++i) d[i] = z[i] + (rz_new / rz) * d[i];
                rz = rz_new;
                ++sol.report.iterations;
            }
            if (sol.report.breakdown) break;
            bt.multiply(dp, tmp);
            for (int i = 0; i < n; ++i) tmp[i] = rf[i] - tmp[i];
            const std::vector<double> du = k_solve(tmp);
            for (int i = 0; i < n; ++i) sol.x[i] += du[i];
            for (int i = 0; i < m; ++i) sol.x[n + i] += dp[i];
        }
        if (!sol.report.breakdown) res = relative_residual<double>(apply, rhs, sol.x);
        finish_report<double>(sol.report, res, tol, "saddle direct solve");
    } else {
        const auto& diag = impl_->precond_diag;
        std::function<void(std::span<const double>, std::span<double>)> precond = [&diag](std::span<const double> x,
                                                                                         std::span<double> y) {
            for (std::size_t i = 0; i < x.size(); ++i) y[i] = diag[i] * x[i];
        };
        sol = gmres<double>(apply, precond, rhs, tol, options_.max_iterations, options_.restart, "gmres-block-jacobi");
        finish_report<double>(sol.report, relative_residual<double>(apply, rhs, sol.x), tol, "saddle GMRES");
    }
    SaddleSolution out;
    out.primal.assign(sol.x.begin(), sol.x.begin() + n);
    out.multiplier.assign(sol.x.begin() + n, sol.x.end());
    out.report = sol.report;
    return out;
}

// ---------------------------------------------------------------------------

Solution<double> solve_spd(const RealMatrix& m, std::span<const double> b, const SolverOptions& options) {
    return SpdSolver(m, options).solve(b);
}

Solution<cplx> solve_hermitian(const ComplexMatrix& m, std::span<const cplx> b, const SolverOptions& options) {
    ComplexSolver solver(options);
    solver.factorize(m);
    return solver.solve(b);
}

SaddleSolution solve_saddle(const RealMatrix& k, const RealMatrix& b, std::span<const double> f,
                            std::span<const double> g, const SolverOptions& options) {
    SaddleSolver solver(options);
    solver.factorize(k, b);
    return solver.solve(f, g);
}

}  // namespace msc
