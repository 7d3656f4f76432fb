#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace nlgcl {

inline constexpr const char* kVersion = "nlgcl-0.1.0";

/// Provenance written at the top of every file the tools emit.
struct ArtifactStamp {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::string version = kVersion;
};

std::string hash_hex(std::uint64_t hash);

/// "# nlgcl-0.1.0 config_hash=<hex> seed=<n>" followed by a newline.
void write_stamp_comment(std::ostream& out, const ArtifactStamp& stamp);

/// 64-bit FNV-1a; stable across platforms and standard libraries.
std::uint64_t fnv1a64(std::string_view text);

}  // namespace nlgcl
