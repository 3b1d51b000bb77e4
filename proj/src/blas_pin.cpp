// Linked into executables only. OpenBLAS picks its kernel set while the
// shared libraries are initialized, before main; the AVX-512 set returns
// wrong dgemm results on some virtualized CPUs. When OPENBLAS_CORETYPE is
// unset and AVX2 is available, restart the process once with it pinned.
#include <cstring>
#include <unistd.h>

namespace {

constexpr char kPin[] = "OPENBLAS_CORETYPE=Haswell";

void pin_blas_core(int, char** argv, char** envp) {
    int n = 0;
    for (; envp && envp[n]; ++n)
        if (std::strncmp(envp[n], "OPENBLAS_CORETYPE=", 18) == 0) return;
    __builtin_cpu_init();
    if (!__builtin_cpu_supports("avx2") || n > 4000) return;
    char* env[4096];
    for (int i = 0; i < n; ++i) env[i] = envp[i];
    env[n] = const_cast<char*>(kPin);
    env[n + 1] = nullptr;
    execve("/proc/self/exe", argv, env);
    // exec failed: carry on with whatever kernel the library picks
}

}  // namespace

__attribute__((section(".preinit_array"), used)) static void (*const blas_pin_entry)(int, char**, char**) = pin_blas_core;
