#include <cstdlib>
#include <string>

#include "msc/errors.hpp"
#include "msc/kernels.hpp"

namespace msc::kernels {

namespace {

bool cpu_has_avx2() {
#if MSC_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa initial_isa() {
    const Isa best = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
    if (const char* env = std::getenv("MSC_KERNELS")) {
        const std::string want(env);
        if (want == "scalar") return Isa::Scalar;
        if (want == "avx2" && best == Isa::Avx2) return Isa::Avx2;
    }
    return best;
}

Isa& active() {
    static Isa isa = initial_isa();
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active(); }

void set_active_isa(Isa isa) {
    if (isa == Isa::Avx2 && !cpu_has_avx2()) throw InvalidArgument("CPU does not support AVX2+FMA");
    active() = isa;
}

#if MSC_HAVE_AVX2_KERNELS
#define MSC_DISPATCH(call) return active() == Isa::Avx2 ? avx2::call : scalar::call
#else
#define MSC_DISPATCH(call) return scalar::call
#endif

double dot(std::span<const double> x, std::span<const double> y) { MSC_DISPATCH(dot(x, y)); }
cplx dotc(std::span<const cplx> x, std::span<const cplx> y) { MSC_DISPATCH(dotc(x, y)); }
void axpy(double a, std::span<const double> x, std::span<double> y) { MSC_DISPATCH(axpy(a, x, y)); }
void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) { MSC_DISPATCH(axpy(a, x, y)); }
void spmv(const CsrView<double>& m, const double* x, double* y) { MSC_DISPATCH(spmv(m, x, y)); }
void spmv(const CsrView<double>& m, const cplx* x, cplx* y) { MSC_DISPATCH(spmv(m, x, y)); }
void spmv(const CsrView<cplx>& m, const cplx* x, cplx* y) { MSC_DISPATCH(spmv(m, x, y)); }

#undef MSC_DISPATCH

}  // namespace msc::kernels
