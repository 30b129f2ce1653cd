#include "mlab/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace mlab {

unsigned thread_count() {
    if (const char* env = std::getenv("MLAB_THREADS")) {
        unsigned v = 0;
        auto res = std::from_chars(env, env + std::strlen(env), v);
        if (res.ec == std::errc{} && v > 0) return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace mlab
