#ifndef DELAYMAP_NUM_FORMAT_HPP
#define DELAYMAP_NUM_FORMAT_HPP

#include <charconv>
#include <string>

namespace delaymap::detail {

// Shortest round-trip representation; locale-free and byte-stable, which the
// reproducibility contract of the CSV/JSON outputs depends on.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace delaymap::detail

#endif
