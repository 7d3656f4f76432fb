#include "nlgcl/random.hpp"

#include <vector>

namespace nlgcl {

Rng substream(std::uint64_t master_seed, std::string_view name, std::uint64_t index) {
    std::vector<std::uint32_t> words;
    words.push_back(static_cast<std::uint32_t>(master_seed));
    words.push_back(static_cast<std::uint32_t>(master_seed >> 32));
    words.push_back(static_cast<std::uint32_t>(index));
    words.push_back(static_cast<std::uint32_t>(index >> 32));
    for (char c : name) {
        words.push_back(static_cast<unsigned char>(c));
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

}  // namespace nlgcl
