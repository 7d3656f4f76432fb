#include "nlgcl/graph.hpp"

#include "nlgcl/error.hpp"
#include "nlgcl/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nlgcl {

namespace {

Csr compress(Index rows, const std::vector<std::pair<Index, Index>>& pairs) {
    Csr csr;
    csr.offsets.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (const auto& [r, c] : pairs) {
        ++csr.offsets[static_cast<std::size_t>(r) + 1];
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) {
        csr.offsets[r + 1] += csr.offsets[r];
    }
    csr.cols.resize(pairs.size());
    std::vector<std::size_t> cursor(csr.offsets.begin(), csr.offsets.end() - 1);
    for (const auto& [r, c] : pairs) {
        csr.cols[cursor[static_cast<std::size_t>(r)]++] = c;
    }
    for (std::size_t r = 0; r < static_cast<std::size_t>(rows); ++r) {
        auto first = csr.cols.begin() + static_cast<std::ptrdiff_t>(csr.offsets[r]);
        auto last = csr.cols.begin() + static_cast<std::ptrdiff_t>(csr.offsets[r + 1]);
        std::sort(first, last);
        if (std::adjacent_find(first, last) != last) {
            throw DataError("duplicate edge in row " + std::to_string(r));
        }
    }
    return csr;
}

void weighted_rows(const Csr& csr, std::span<const double> weights, const Matrix& in, Matrix& out) {
    parallel_for_rows(static_cast<std::size_t>(csr.rows()), [&](std::size_t begin, std::size_t end) {
        for (std::size_t r = begin; r < end; ++r) {
            auto dst = out.row(static_cast<Index>(r));
            for (std::size_t k = csr.offsets[r]; k < csr.offsets[r + 1]; ++k) {
                dst.noalias() += weights[k] * in.row(csr.cols[k]);
            }
        }
    });
}

}  // namespace

BipartiteGraph build_graph(const InteractionDataset& ds) {
    return build_graph(ds.num_users, ds.num_items, ds.train);
}

BipartiteGraph build_graph(Index num_users, Index num_items, const std::vector<Edge>& edges) {
    std::vector<std::pair<Index, Index>> forward;
    std::vector<std::pair<Index, Index>> backward;
    forward.reserve(edges.size());
    backward.reserve(edges.size());
    for (const auto& e : edges) {
        if (e.user < 0 || e.user >= num_users || e.item < 0 || e.item >= num_items) {
            throw DataError("edge (" + std::to_string(e.user) + "," + std::to_string(e.item) + ") out of range");
        }
        forward.emplace_back(e.user, e.item);
        backward.emplace_back(e.item, e.user);
    }
    BipartiteGraph g;
    g.num_users = num_users;
    g.num_items = num_items;
    g.user_to_items = compress(num_users, forward);
    g.item_to_users = compress(num_items, backward);
    g.user_deg.resize(static_cast<std::size_t>(num_users));
    g.item_deg.resize(static_cast<std::size_t>(num_items));
    for (Index u = 0; u < num_users; ++u) {
        g.user_deg[static_cast<std::size_t>(u)] = static_cast<Index>(g.user_to_items.row(u).size());
        if (g.user_deg[static_cast<std::size_t>(u)] == 0) {
            throw DataError("user " + std::to_string(u) + " has no train interactions");
        }
    }
    for (Index i = 0; i < num_items; ++i) {
        g.item_deg[static_cast<std::size_t>(i)] = static_cast<Index>(g.item_to_users.row(i).size());
        if (g.item_deg[static_cast<std::size_t>(i)] == 0) {
            throw DataError("item " + std::to_string(i) + " has no train interactions");
        }
    }
    return g;
}

NormalizedAdjacency normalize(const BipartiteGraph& g) {
    NormalizedAdjacency adj;
    adj.structure = g;
    auto weight = [&](Index u, Index i) {
        return 1.0 / std::sqrt(static_cast<double>(g.user_deg[static_cast<std::size_t>(u)]) *
                               static_cast<double>(g.item_deg[static_cast<std::size_t>(i)]));
    };
    adj.user_to_items_w.resize(g.user_to_items.nnz());
    for (Index u = 0; u < g.num_users; ++u) {
        const auto base = g.user_to_items.offsets[static_cast<std::size_t>(u)];
        const auto row = g.user_to_items.row(u);
        for (std::size_t k = 0; k < row.size(); ++k) {
            adj.user_to_items_w[base + k] = weight(u, row[k]);
        }
    }
    adj.item_to_users_w.resize(g.item_to_users.nnz());
    for (Index i = 0; i < g.num_items; ++i) {
        const auto base = g.item_to_users.offsets[static_cast<std::size_t>(i)];
        const auto row = g.item_to_users.row(i);
        for (std::size_t k = 0; k < row.size(); ++k) {
            adj.item_to_users_w[base + k] = weight(row[k], i);
        }
    }
    return adj;
}

Matrix spmm_items_to_users(const NormalizedAdjacency& adj, const Matrix& items) {
    if (items.rows() != adj.num_items()) {
        throw DataError("spmm_items_to_users: expected " + std::to_string(adj.num_items()) + " rows, got " +
                        std::to_string(items.rows()));
    }
    Matrix out = Matrix::Zero(adj.num_users(), items.cols());
    weighted_rows(adj.structure.user_to_items, adj.user_to_items_w, items, out);
    return out;
}

Matrix spmm_users_to_items(const NormalizedAdjacency& adj, const Matrix& users) {
    if (users.rows() != adj.num_users()) {
        throw DataError("spmm_users_to_items: expected " + std::to_string(adj.num_users()) + " rows, got " +
                        std::to_string(users.rows()));
    }
    Matrix out = Matrix::Zero(adj.num_items(), users.cols());
    weighted_rows(adj.structure.item_to_users, adj.item_to_users_w, users, out);
    return out;
}

}  // namespace nlgcl
