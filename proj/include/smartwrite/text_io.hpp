#pragma once

#include <cstdio>
#include <string>

namespace smartwrite {

// Shortest-17-digit formatting used for every float we persist; reruns must be
// byte-identical, so all writers go through this.
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace smartwrite
