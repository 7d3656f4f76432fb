#include "nlgcl/artifact.hpp"

#include <cstdio>
#include <ostream>

namespace nlgcl {

std::string hash_hex(std::uint64_t hash) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

void write_stamp_comment(std::ostream& out, const ArtifactStamp& stamp) {
    out << "# " << stamp.version << " config_hash=" << hash_hex(stamp.config_hash)
        << " seed=" << stamp.seed << '\n';
}

std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

}  // namespace nlgcl
