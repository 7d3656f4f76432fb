#pragma once

#include "nlgcl/artifact.hpp"
#include "nlgcl/graph.hpp"
#include "nlgcl/types.hpp"

#include <filesystem>
#include <vector>

namespace nlgcl {

/// Trainable parameters: the layer-0 user and item embeddings.
struct EmbeddingState {
    Matrix user0;
    Matrix item0;

    Index dim() const { return user0.cols(); }
    bool all_finite() const { return user0.allFinite() && item0.allFinite(); }
};

/// Embeddings at every propagation depth 0..L plus their uniform mean.
struct LayerStack {
    std::vector<Matrix> user_layers;
    std::vector<Matrix> item_layers;
    Matrix readout_user;
    Matrix readout_item;

    Index num_layers() const { return static_cast<Index>(user_layers.size()) - 1; }
};

/// Zero-mean Gaussian with std sqrt(2 / (rows + d)), per matrix.
EmbeddingState init_xavier(Index num_users, Index num_items, Index d, std::uint64_t seed);

LayerStack propagate(const EmbeddingState& state, const NormalizedAdjacency& adj, Index num_layers);

double score(const LayerStack& stack, Index user, Index item);
Vector score_all(const LayerStack& stack, Index user);

/// `kind<TAB>index<TAB>v0 ... v{d-1}` rows for every user then every item.
void export_embeddings(const Matrix& users, const Matrix& items, const std::filesystem::path& path,
                       const ArtifactStamp& stamp);

}  // namespace nlgcl
