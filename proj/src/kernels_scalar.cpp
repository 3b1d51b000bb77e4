#include "msc/kernels.hpp"

namespace msc::kernels::scalar {

double dot(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

cplx dotc(std::span<const cplx> x, std::span<const cplx> y) {
    double re = 0.0, im = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void spmv(const CsrView<double>& m, const double* x, double* y) {
    for (int r = 0; r < m.rows; ++r) {
        double s = 0.0;
        for (int p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) s += m.val[p] * x[m.col[p]];
        y[r] = s;
    }
}

void spmv(const CsrView<double>& m, const cplx* x, cplx* y) {
    for (int r = 0; r < m.rows; ++r) {
        double re = 0.0, im = 0.0;
        for (int p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
            re += m.val[p] * x[m.col[p]].real();
            im += m.val[p] * x[m.col[p]].imag();
        }
        y[r] = {re, im};
    }
}

void spmv(const CsrView<cplx>& m, const cplx* x, cplx* y) {
    for (int r = 0; r < m.rows; ++r) {
        double re = 0.0, im = 0.0;
        for (int p = m.row_ptr[r]; p < m.row_ptr[r + 1]; ++p) {
            const cplx v = m.val[p];
            const cplx u = x[m.col[p]];
            re += v.real() * u.real() - v.imag() * u.imag();
            im += v.real() * u.imag() + v.imag() * u.real();
        }
        y[r] = {re, im};
    }
}

}  // namespace msc::kernels::scalar
