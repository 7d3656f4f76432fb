#pragma once

#include "nlgcl/artifact.hpp"
#include "nlgcl/random.hpp"
#include "nlgcl/types.hpp"

#include <array>
#include <span>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace nlgcl {

struct RawInteractions {
    std::vector<std::pair<std::string, std::string>> records;  // (user token, item token)
    std::filesystem::path source_path;
};

/// Token <-> index bijection, lexicographic by token.
struct IdMap {
    std::vector<std::string> user_tokens;
    std::vector<std::string> item_tokens;

    static IdMap from(const RawInteractions& raw);
    Index user_index(const std::string& token) const;
    Index item_index(const std::string& token) const;
};

struct Edge {
    Index user = 0;
    Index item = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct InteractionDataset {
    Index num_users = 0;
    Index num_items = 0;
    std::vector<Edge> train;
    std::vector<Edge> val;
    std::vector<Edge> test;
    std::uint64_t seed = 0;
    IdMap ids;
};

struct TrainTriple {
    Index user = 0;
    Index pos = 0;
    Index neg = 0;

    friend bool operator==(const TrainTriple&, const TrainTriple&) = default;
};

/// Reads `user<TAB>item[<TAB>...]` lines. Blank lines and lines starting with
/// '#' are skipped. Duplicate pairs keep their first occurrence.
RawInteractions load_interactions(const std::filesystem::path& path);

/// Removes users with fewer than k_user and items with fewer than k_item
/// interactions until nothing changes. Throws DataError if nothing survives.
RawInteractions k_core_filter(const RawInteractions& raw, std::size_t k_user, std::size_t k_item);

struct SplitRatios {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

/// Per-user shuffle-and-cut. Val and test receive floor(n * ratio) items each;
/// the remainder goes to train, which always keeps at least one item.
InteractionDataset split_per_user(const RawInteractions& raw, SplitRatios ratios, std::uint64_t seed);

/// Per-user sorted train items, shared by samplers and evaluation masks.
class UserItemIndex {
public:
    UserItemIndex(Index num_users, const std::vector<Edge>& edges);

    std::span<const Index> items(Index user) const;
    bool contains(Index user, Index item) const;
    Index num_users() const { return static_cast<Index>(offsets_.size()) - 1; }

private:
    std::vector<std::size_t> offsets_;
    std::vector<Index> items_;
};

/// One (u, p, n) triple per train edge, in train-edge order. Negatives are
/// drawn uniformly by rejection from items the user has no train edge with.
std::vector<TrainTriple> sample_triples(const InteractionDataset& ds, Rng& rng);
std::vector<TrainTriple> sample_triples(const InteractionDataset& ds, const UserItemIndex& train_index, Rng& rng);

/// Writes train.tsv, val.tsv, test.tsv and idmap.tsv into dir.
void write_split(const InteractionDataset& ds, const std::filesystem::path& dir, const ArtifactStamp& stamp);
InteractionDataset read_split(const std::filesystem::path& dir);

}  // namespace nlgcl
