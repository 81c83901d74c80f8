#include <cstdlib>
#include <cstring>

#include "veil/core/common.hpp"
#include "veil/kern/kernels.hpp"

namespace veil::kern {

const Kernels* avx2_table();  // defined in kernels_avx2.cpp, null when unsupported

namespace {

bool detect_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

struct State {
    bool avx2;
    Isa isa;
    const Kernels* table;

    State() {
        avx2 = detect_avx2() && avx2_table() != nullptr;
        isa = avx2 ? Isa::avx2 : Isa::scalar;
        if (const char* env = std::getenv("VEIL_SIMD")) {
            if (std::strcmp(env, "scalar") == 0) isa = Isa::scalar;
            if (std::strcmp(env, "avx2") == 0 && avx2) isa = Isa::avx2;
        }
        table = (isa == Isa::avx2) ? avx2_table() : &scalar_table();
    }
};

State& state() {
    static State s;
    return s;
}

}  // namespace

const Kernels& active() { return *state().table; }

bool avx2_available() { return state().avx2; }

Isa active_isa() { return state().isa; }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !state().avx2)
        throw RangeError("kern: AVX2 kernels not available on this CPU");
    state().isa = isa;
    state().table = (isa == Isa::avx2) ? avx2_table() : &scalar_table();
}

}  // namespace veil::kern
