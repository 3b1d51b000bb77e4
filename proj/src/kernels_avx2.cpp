// Compiled with -mavx2 -mfma; only reached after a CPUID check.
#include <immintrin.h>

#include "msc/kernels.hpp"

namespace msc::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Sum of the two complex lanes of a 256-bit register.
inline __m128d hsum_complex(__m256d v) {
    return _mm_add_pd(_mm256_castpd256_pd128(v), _mm256_extractf128_pd(v, 1));
}

inline const double* as_doubles(const cplx* p) { return reinterpret_cast<const double*>(p); }
inline double* as_doubles(cplx* p) { return reinterpret_cast<double*>(p); }

}  // namespace

double dot(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i + 4]), _mm256_loadu_pd(&y[i + 4]), acc1);
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i]), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += x[i] * y[i];
    return s;
}

cplx dotc(std::span<const cplx> x, std::span<const cplx> y) {
    const std::size_t n = x.size();
    const double* xd = as_doubles(x.data());
    const double* yd = as_doubles(y.data());
    __m256d acc_re = _mm256_setzero_pd();  // [xr*yr, xi*yi, ...]
    __m256d acc_im = _mm256_setzero_pd();  // [xr*yi, xi*yr, ...]
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        const __m256d yv = _mm256_loadu_pd(yd + 2 * i);
        acc_re = _mm256_fmadd_pd(xv, yv, acc_re);
        acc_im = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0b0101), acc_im);
    }
    alignas(32) double im_lanes[4];
    _mm256_store_pd(im_lanes, acc_im);
    double re = hsum(acc_re);
    double im = (im_lanes[0] - im_lanes[1]) + (im_lanes[2] - im_lanes[3]);
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    const std::size_t n = x.size();
    const __m256d av = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(&y[i], _mm256_fmadd_pd(av, _mm256_loadu_pd(&x[i]), _mm256_loadu_pd(&y[i])));
    for (; i < n; ++i) y[i] += a * x[i];
}

void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) {
    const std::size_t n = x.size();
    const double* xd = as_doubles(x.data());
    double* yd = as_doubles(y.data());
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = _mm256_loadu_pd(xd + 2 * i);
        const __m256d t = _mm256_mul_pd(ai, _mm256_permute_pd(xv, 0b0101));  // [ai*xi, ai*xr]
        const __m256d prod = _mm256_fmaddsub_pd(ar, xv, t);                 // [ar*xr-ai*xi, ar*xi+ai*xr]
        _mm256_storeu_pd(yd + 2 * i, _mm256_add_pd(_mm256_loadu_pd(yd + 2 * i), prod));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void spmv(const CsrView<double>& m, const double* x, double* y) {
    for (int r = 0; r < m.rows; ++r) {
        const int end = m.row_ptr[r + 1];
        int p = m.row_ptr[r];
        __m256d acc = _mm256_setzero_pd();
        for (; p + 4 <= end; p += 4) {
            const __m128i idx = _mm_loadu_si128(reinterpret_cast<const __m128i*>(m.col + p));
            const __m256d xv = _mm256_i32gather_pd(x, idx, 8);
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(m.val + p), xv, acc);
        }
        double s = hsum(acc);
        for (; p < end; ++p) s += m.val[p] * x[m.col[p]];
        y[r] = s;
    }
}

void spmv(const CsrView<double>& m, const cplx* x, cplx* y) {
    const double* xd = as_doubles(x);
    double* yd = as_doubles(y);
    for (int r = 0; r < m.rows; ++r) {
        const int end = m.row_ptr[r + 1];
        int p = m.row_ptr[r];
        __m256d acc = _mm256_setzero_pd();
        for (; p + 2 <= end; p += 2) {
            const __m256d xv = _mm256_set_m128d(_mm_loadu_pd(xd + 2 * m.col[p + 1]), _mm_loadu_pd(xd + 2 * m.col[p]));
            const __m256d vv = _mm256_set_pd(m.val[p + 1], m.val[p + 1], m.val[p], m.val[p]);
            acc = _mm256_fmadd_pd(vv, xv, acc);
        }
        __m128d s = hsum_complex(acc);
        for (; p < end; ++p)
            s = _mm_add_pd(s, _mm_mul_pd(_mm_set1_pd(m.val[p]), _mm_loadu_pd(xd + 2 * m.col[p])));
        _mm_storeu_pd(yd + 2 * r, s);
    }
}

void spmv(const CsrView<cplx>& m, const cplx* x, cplx* y) {
    const double* xd = as_doubles(x);
    const double* vd = as_doubles(m.val);
    double* yd = as_doubles(y);
    for (int r = 0; r < m.rows; ++r) {
        const int end = m.row_ptr[r + 1];
        int p = m.row_ptr[r];
        __m256d acc_r = _mm256_setzero_pd();  // [vr*xr, vr*xi]
        __m256d acc_i = _mm256_setzero_pd();  // [vi*xi, vi*xr]
        for (; p + 2 <= end; p += 2) {
            const __m256d xv = _mm256_set_m128d(_mm_loadu_pd(xd + 2 * m.col[p + 1]), _mm_loadu_pd(xd + 2 * m.col[p]));
            const __m256d vv = _mm256_loadu_pd(vd + 2 * p);
            acc_r = _mm256_fmadd_pd(_mm256_movedup_pd(vv), xv, acc_r);
            acc_i = _mm256_fmadd_pd(_mm256_permute_pd(vv, 0b1111), _mm256_permute_pd(xv, 0b0101), acc_i);
        }
        __m128d s = hsum_complex(_mm256_addsub_pd(acc_r, acc_i));
        for (; p < end; ++p) {
            const cplx v = m.val[p];
            const cplx u = x[m.col[p]];
            s = _mm_add_pd(s, _mm_set_pd(v.real() * u.imag() + v.imag() * u.real(),
                                         v.real() * u.real() - v.imag() * u.imag()));
        }
        _mm_storeu_pd(yd + 2 * r, s);
    }
}

}  // namespace msc::kernels::avx2
