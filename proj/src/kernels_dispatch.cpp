#include "qgdetect/kernels.hpp"
#include "qgdetect/log.hpp"

#include <cstdlib>
#include <cstring>

namespace qgd::kernels {

static const Kernels& pick() {
    const char* e = std::getenv("QG_KERNELS");
    if (e) {
        if (std::strcmp(e, "scalar") == 0) return scalar();
        if (std::strcmp(e, "avx2") == 0) {
            if (avx2_available()) return avx2();
            log::info("QG_KERNELS=avx2 requested but cpu lacks avx2+fma, using scalar");
            return scalar();
        }
        log::info(std::string("unknown QG_KERNELS value '") + e + "', using autodetect");
    }
    return avx2_available() ? avx2() : scalar();
}

const Kernels& active() {
    static const Kernels& k = pick();
    return k;
}

} // namespace qgd::kernels
