#pragma once

#include "nlgcl/dataset.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fixture {

namespace fs = std::filesystem;

/// Fresh directory under the test working directory, emptied on creation.
inline fs::path scratch(const std::string& name) {
    const fs::path dir = fs::current_path() / "scratch" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path, std::ios::binary) << text;
    return path;
}

inline std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// u0-i0, u0-i1, u1-i0.
inline std::vector<nlgcl::Edge> three_edges() {
    return {{0, 0}, {0, 1}, {1, 0}};
}

inline nlgcl::RawInteractions tiny_raw() {
    nlgcl::RawInteractions raw;
    for (int u = 0; u < 12; ++u) {
        for (int k = 0; k < 12; ++k) {
            const int i = (u * 5 + k * 3) % 16;
            raw.records.emplace_back("u" + std::to_string(100 + u), "i" + std::to_string(100 + i));
        }
    }
    return raw;
}

/// 12 users x 16 items, 12 interactions per user, so the 8:1:1 split gives
/// every user one validation and one test item.
inline nlgcl::InteractionDataset tiny_dataset(std::uint64_t seed = 7) {
    return nlgcl::split_per_user(tiny_raw(), {}, seed);
}

}  // namespace fixture
