#include "walsh/batch.hpp"

#include <cstdlib>
#include <string>

namespace walsh {

unsigned resolve_workers(unsigned requested) {
    if (const char* env = std::getenv("WALSH_SIM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace walsh
