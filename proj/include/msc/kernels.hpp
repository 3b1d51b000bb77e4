#pragma once

// Data-parallel inner loops shared by the Krylov solvers and diagnostics.
//
// Every kernel has a portable scalar reference in `kernels::scalar` and, on
// x86-64, an AVX2+FMA variant in `kernels::avx2`. The unqualified entry
// points dispatch to the best variant supported by the running CPU; the
// choice can be pinned with set_active_isa() or the MSC_KERNELS environment
// variable ("scalar" or "avx2"). Variants differ only in summation order.

#include <complex>
#include <span>
#include <string_view>

namespace msc::kernels {

using cplx = std::complex<double>;

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
/// Best variant the CPU supports.
Isa detected_isa();
Isa active_isa();
/// Throws InvalidArgument if the CPU cannot run `isa`.
void set_active_isa(Isa isa);

/// Read-only compressed-row view.
template <class T>
struct CsrView {
    int rows = 0;
    const int* row_ptr = nullptr;
    const int* col = nullptr;
    const T* val = nullptr;
};

double dot(std::span<const double> x, std::span<const double> y);
/// sum_i conj(x_i) * y_i
cplx dotc(std::span<const cplx> x, std::span<const cplx> y);
void axpy(double a, std::span<const double> x, std::span<double> y);
void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y);
/// y = M x
void spmv(const CsrView<double>& m, const double* x, double* y);
void spmv(const CsrView<double>& m, const cplx* x, cplx* y);
void spmv(const CsrView<cplx>& m, const cplx* x, cplx* y);

#define MSC_KERNEL_DECLS                                                        \
    double dot(std::span<const double> x, std::span<const double> y);           \
    cplx dotc(std::span<const cplx> x, std::span<const cplx> y);                \
    void axpy(double a, std::span<const double> x, std::span<double> y);        \
    void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y);              \
    void spmv(const CsrView<double>& m, const double* x, double* y);            \
    void spmv(const CsrView<double>& m, const cplx* x, cplx* y);                \
    void spmv(const CsrView<cplx>& m, const cplx* x, cplx* y);

namespace scalar {
MSC_KERNEL_DECLS
}

#if defined(__x86_64__) || defined(_M_X64)
#define MSC_HAVE_AVX2_KERNELS 1
namespace avx2 {
MSC_KERNEL_DECLS
}
#else
#define MSC_HAVE_AVX2_KERNELS 0
#endif

#undef MSC_KERNEL_DECLS

}  // namespace msc::kernels
