#include "nlgcl/model.hpp"

#include "nlgcl/error.hpp"
#include "nlgcl/random.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

namespace nlgcl {

namespace {

Matrix gaussian(Index rows, Index d, Rng rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(rows + d)));
    Matrix m(rows, d);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < d; ++c) {
            m(r, c) = dist(rng);
        }
    }
    return m;
}

void check_index(Index value, Index bound, const char* what) {
    if (value < 0 || value >= bound) {
        throw DataError(std::string(what) + " index " + std::to_string(value) + " out of range");
    }
}

}  // namespace

EmbeddingState init_xavier(Index num_users, Index num_items, Index d, std::uint64_t seed) {
    if (d < 1) {
        throw ConfigError("embedding dimension must be >= 1");
    }
    return {gaussian(num_users, d, substream(seed, "init", 0)), gaussian(num_items, d, substream(seed, "init", 1))};
}

LayerStack propagate(const EmbeddingState& state, const NormalizedAdjacency& adj, Index num_layers) {
    if (num_layers < 1) {
        throw ConfigError("propagation needs at least one layer");
    }
    if (state.user0.rows() != adj.num_users() || state.item0.rows() != adj.num_items() ||
        state.user0.cols() != state.item0.cols()) {
        throw DataError("embedding shapes do not match the graph");
    }
    LayerStack stack;
    stack.user_layers.reserve(static_cast<std::size_t>(num_layers) + 1);
    stack.item_layers.reserve(static_cast<std::size_t>(num_layers) + 1);
    stack.user_layers.push_back(state.user0);
    stack.item_layers.push_back(state.item0);
    for (Index l = 1; l <= num_layers; ++l) {
        const auto prev = static_cast<std::size_t>(l - 1);
        stack.user_layers.push_back(spmm_items_to_users(adj, stack.item_layers[prev]));
        stack.item_layers.push_back(spmm_users_to_items(adj, stack.user_layers[prev]));
    }
    stack.readout_user = stack.user_layers[0];
    stack.readout_item = stack.item_layers[0];
    for (std::size_t l = 1; l < stack.user_layers.size(); ++l) {
        stack.readout_user += stack.user_layers[l];
        stack.readout_item += stack.item_layers[l];
    }
    const double inv = 1.0 / static_cast<double>(num_layers + 1);
    stack.readout_user *= inv;
    stack.readout_item *= inv;
    return stack;
}

double score(const LayerStack& stack, Index user, Index item) {
    check_index(user, stack.readout_user.rows(), "user");
    check_index(item, stack.readout_item.rows(), "item");
    return stack.readout_user.row(user).dot(stack.readout_item.row(item));
}

Vector score_all(const LayerStack& stack, Index user) {
    check_index(user, stack.readout_user.rows(), "user");
    return stack.readout_item * stack.readout_user.row(user).transpose();
}

void export_embeddings(const Matrix& users, const Matrix& items, const std::filesystem::path& path,
                       const ArtifactStamp& stamp) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_stamp_comment(out, stamp);
    char buf[32];
    auto dump = [&](const Matrix& m, const char* kind) {
        for (Index r = 0; r < m.rows(); ++r) {
            out << kind << '\t' << r;
            for (Index c = 0; c < m.cols(); ++c) {
                std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
                out << '\t' << buf;
            }
            out << '\n';
        }
    };
    dump(users, "user");
    dump(items, "item");
}

}  // namespace nlgcl
