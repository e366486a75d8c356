#include "skinburst/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace skinburst {

unsigned worker_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("SKINBURST_THREADS")) {
        const std::string_view text(env);
        unsigned value = 0;
        const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
        if (res.ec == std::errc{} && res.ptr == text.data() + text.size() && value > 0) return value;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

}  // namespace skinburst
