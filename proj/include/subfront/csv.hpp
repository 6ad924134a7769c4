#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace subfront::csv {

// Shortest decimal form that round-trips to the same double.
inline std::string num(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

}  // namespace subfront::csv
