#include <cstdlib>
#include <string_view>

#include "edm/kernels.hpp"

namespace edm::kernels {

#if defined(EDM_HAVE_AVX2)
const Table& avx2_table();
#endif

const Table* avx2() {
#if defined(EDM_HAVE_AVX2)
    static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") &&
                                  __builtin_cpu_supports("popcnt");
    return supported ? &avx2_table() : nullptr;
#else
    return nullptr;
#endif
}

const Table& active() {
    static const Table* selected = [] {
        const char* forced = std::getenv("EDM_KERNELS");
        if (forced != nullptr && std::string_view(forced) == "scalar") {
            return &scalar();
        }
        const Table* best = avx2();
        return best != nullptr ? best : &scalar();
    }();
    return *selected;
}

}  // namespace edm::kernels
