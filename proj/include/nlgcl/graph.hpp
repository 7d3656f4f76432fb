#pragma once

#include "nlgcl/dataset.hpp"
#include "nlgcl/types.hpp"

#include <span>
#include <vector>

namespace nlgcl {

/// Compressed rows: neighbors of row r are cols[offsets[r] .. offsets[r+1]),
/// strictly increasing.
struct Csr {
    std::vector<std::size_t> offsets;
    std::vector<Index> cols;

    Index rows() const { return static_cast<Index>(offsets.size()) - 1; }
    std::size_t nnz() const { return cols.size(); }
    std::span<const Index> row(Index r) const {
        const auto k = static_cast<std::size_t>(r);
        return {cols.data() + offsets[k], offsets[k + 1] - offsets[k]};
    }
};

/// Train-edge bipartite graph stored as the R block and its transpose.
struct BipartiteGraph {
    Index num_users = 0;
    Index num_items = 0;
    Csr user_to_items;
    Csr item_to_users;
    std::vector<Index> user_deg;
    std::vector<Index> item_deg;

    std::size_t num_edges() const { return user_to_items.nnz(); }
    Index num_nodes() const { return num_users + num_items; }
};

/// D^{-1/2} A D^{-1/2} restricted to its two off-diagonal blocks. Weights are
/// stored per CSR entry, aligned with the structure arrays.
struct NormalizedAdjacency {
    BipartiteGraph structure;
    std::vector<double> user_to_items_w;
    std::vector<double> item_to_users_w;

    Index num_users() const { return structure.num_users; }
    Index num_items() const { return structure.num_items; }
};

/// Builds the graph from train edges only. Throws DataError on out-of-range
/// indices, duplicate edges, or any node left with zero train degree.
BipartiteGraph build_graph(const InteractionDataset& ds);
BipartiteGraph build_graph(Index num_users, Index num_items, const std::vector<Edge>& edges);

NormalizedAdjacency normalize(const BipartiteGraph& g);

/// out[u] = sum over items i adjacent to u of w(u,i) * items[i], accumulated
/// in ascending item order.
Matrix spmm_items_to_users(const NormalizedAdjacency& adj, const Matrix& items);
Matrix spmm_users_to_items(const NormalizedAdjacency& adj, const Matrix& users);

}  // namespace nlgcl
