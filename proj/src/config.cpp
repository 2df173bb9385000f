#include "specop/config.hpp"

#include <cstdio>

namespace specop {

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string RunConfig::canonical_string() const {
    char buf[512];
    std::snprintf(buf, sizeof(buf),
                  "ztol_abs=%.17g;ztol_rel=%.17g;compat_tol=%.17g;theta_min=%.17g;"
                  "tail=%.17g;n_probe=%.17g;seed=%llu;strict=%d",
                  ztol.abs_tol, ztol.rel_tol, compat_tol, theta_min, tail_fraction, n_probe,
                  static_cast<unsigned long long>(seed), strict ? 1 : 0);
    return std::string(buf);
}

std::string RunConfig::hash() const { return fnv1a_hex(canonical_string()); }

}  // namespace specop
