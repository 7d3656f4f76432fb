#include "nlgcl/loss.hpp"

#include "nlgcl/error.hpp"
#include "nlgcl/numeric.hpp"

#include <algorithm>
#include <numeric>
#include <cmath>
#include <optional>

namespace nlgcl {

namespace {

constexpr double kNormFloor = 1e-12;

std::vector<Index> sorted_unique(std::vector<Index> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

/// A layer as seen by the similarity function: the raw matrix, or a
/// row-normalized copy when cosine similarity is enabled.
class LayerView {
public:
    LayerView(const Matrix& raw, bool normalized) : raw_(&raw) {
        if (!normalized) {
            return;
        }
        norms_ = raw.rowwise().norm().cwiseMax(kNormFloor);
        owned_.emplace((raw.array().colwise() / norms_.array()).matrix());
    }

    const Matrix& values() const { return owned_ ? *owned_ : *raw_; }

    /// Maps a gradient taken w.r.t. values() onto the raw rows.
    Matrix to_raw(const Matrix& grad) const {
        if (!owned_) {
            return grad;
        }
        const Vector radial = (owned_->array() * grad.array()).rowwise().sum();
        Matrix out = grad - (owned_->array().colwise() * radial.array()).matrix();
        out.array().colwise() /= norms_.array();
        return out;
    }

private:
    const Matrix* raw_;
    std::optional<Matrix> owned_;
    Vector norms_;
};

/// Rows of one layer that take part in a softmax denominator.
struct Segment {
    const Matrix* values;
    Matrix* grad;
    const std::vector<Index>* rows;  // nullptr: every row

    Index size() const { return rows ? static_cast<Index>(rows->size()) : values->rows(); }
    Index source_row(Index k) const { return rows ? (*rows)[static_cast<std::size_t>(k)] : k; }
};

Matrix gather(const Matrix& src, std::span<const Index> rows) {
    Matrix out(static_cast<Index>(rows.size()), src.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        out.row(static_cast<Index>(k)) = src.row(rows[k]);
    }
    return out;
}

/// One side (user or item anchors) of one layer group. Returns the sum of
/// per-anchor terms multiplied by coef; gradients, when requested, are
/// accumulated with the same factor.
double contrastive_side(const Matrix& anchor_layer, Matrix* anchor_grad, std::span<const Index> anchors,
                        const Csr& neighbors, const Matrix& positive_layer, Matrix* positive_grad,
                        std::span<const Segment> segments, double tau, double coef) {
    if (anchors.empty()) {
        return 0.0;
    }
    const Matrix a = gather(anchor_layer, anchors);
    Index num_candidates = 0;
    for (const auto& seg : segments) {
        num_candidates += seg.size();
    }
    Matrix c(num_candidates, a.cols());
    {
        Index at = 0;
        for (const auto& seg : segments) {
            for (Index k = 0; k < seg.size(); ++k) {
                c.row(at++) = seg.values->row(seg.source_row(k));
            }
        }
    }

    Matrix logits = (a * c.transpose()) / tau;
    const bool want_grad = anchor_grad != nullptr;
    Matrix grad_a;
    if (want_grad) {
        grad_a = Matrix::Zero(a.rows(), a.cols());
    }

    double total = 0.0;
    for (Index r = 0; r < a.rows(); ++r) {
        const Index node = anchors[static_cast<std::size_t>(r)];
        const auto nbrs = neighbors.row(node);
        if (nbrs.empty()) {
            throw DataError("contrastive anchor " + std::to_string(node) + " has an empty neighborhood");
        }
        const double inv_n = 1.0 / static_cast<double>(nbrs.size());
        // One exp pass per row: row becomes exp(s - max), reused as the softmax numerator.
        auto row = logits.row(r);
        const double hi = row.maxCoeff();
        row = (row.array() - hi).exp().matrix();
        const double sum = row.sum();
        const double lse = hi + std::log(sum);
        double positive = 0.0;
        for (Index p : nbrs) {
            positive += a.row(r).dot(positive_layer.row(p));
        }
        positive /= tau;
        total += (lse - positive) * inv_n;

        if (want_grad) {
            // d term / d logits = softmax / |N|; overwrite the row in place.
            row *= coef * inv_n / sum;
            const double step = coef * inv_n / tau;
            for (Index p : nbrs) {
                grad_a.row(r) -= step * positive_layer.row(p);
                positive_grad->row(p) -= step * a.row(r);
            }
        }
    }

    if (want_grad) {
        grad_a.noalias() += (logits * c) / tau;
        const Matrix grad_c = (logits.transpose() * a) / tau;
        for (Index r = 0; r < a.rows(); ++r) {
            anchor_grad->row(anchors[static_cast<std::size_t>(r)]) += grad_a.row(r);
        }
        Index at = 0;
        for (const auto& seg : segments) {
            for (Index k = 0; k < seg.size(); ++k) {
                seg.grad->row(seg.source_row(k)) += grad_c.row(at++);
            }
        }
    }
    return coef * total;
}

}  // namespace

std::string to_string(Scope scope) {
    return scope == Scope::heterogeneous ? "hetero" : "entire";
}

std::string to_string(Denominator mode) {
    return mode == Denominator::full ? "full" : "in_batch";
}

std::string to_string(AnchorMode mode) {
    return mode == AnchorMode::batch ? "batch" : "all";
}

Scope parse_scope(const std::string& text) {
    if (text == "hetero" || text == "heterogeneous") {
        return Scope::heterogeneous;
    }
    if (text == "entire") {
        return Scope::entire;
    }
    throw ConfigError("unknown scope '" + text + "' (expected hetero or entire)");
}

Denominator parse_denominator(const std::string& text) {
    if (text == "full") {
        return Denominator::full;
    }
    if (text == "in_batch") {
        return Denominator::in_batch;
    }
    throw ConfigError("unknown denominator '" + text + "' (expected full or in_batch)");
}

AnchorMode parse_anchor_mode(const std::string& text) {
    if (text == "batch") {
        return AnchorMode::batch;
    }
    if (text == "all") {
        return AnchorMode::all;
    }
    throw ConfigError("unknown anchor mode '" + text + "' (expected batch or all)");
}

void LossConfig::validate(Index num_layers) const {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw ConfigError("tau must be positive");
    }
    if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
        throw ConfigError("lambda1 and lambda2 must be non-negative");
    }
    if (groups < 1 || groups > num_layers) {
        throw ConfigError("groups G=" + std::to_string(groups) + " must satisfy 1 <= G <= L=" +
                          std::to_string(num_layers));
    }
}

GradBuffer GradBuffer::zeros(Index num_users, Index num_items, Index d) {
    return {Matrix::Zero(num_users, d), Matrix::Zero(num_items, d)};
}

void GradBuffer::zero() {
    g_user0.setZero();
    g_item0.setZero();
}

LayerGrads LayerGrads::zeros_like(const LayerStack& stack) {
    LayerGrads g;
    for (std::size_t l = 0; l < stack.user_layers.size(); ++l) {
        g.user.push_back(Matrix::Zero(stack.user_layers[l].rows(), stack.user_layers[l].cols()));
        g.item.push_back(Matrix::Zero(stack.item_layers[l].rows(), stack.item_layers[l].cols()));
    }
    g.readout_user = Matrix::Zero(stack.readout_user.rows(), stack.readout_user.cols());
    g.readout_item = Matrix::Zero(stack.readout_item.rows(), stack.readout_item.cols());
    return g;
}

GradBuffer backpropagate(const NormalizedAdjacency& adj, LayerGrads grads) {
    const std::size_t depth = grads.user.size();
    const double inv = 1.0 / static_cast<double>(depth);
    for (std::size_t l = 0; l < depth; ++l) {
        grads.user[l] += inv * grads.readout_user;
        grads.item[l] += inv * grads.readout_item;
    }
    for (std::size_t l = depth - 1; l >= 1; --l) {
        grads.item[l - 1] += spmm_users_to_items(adj, grads.user[l]);
        grads.user[l - 1] += spmm_items_to_users(adj, grads.item[l]);
    }
    return {std::move(grads.user[0]), std::move(grads.item[0])};
}

Anchors Anchors::from_batch(std::span<const TrainTriple> triples) {
    std::vector<Index> users;
    std::vector<Index> items;
    users.reserve(triples.size());
    items.reserve(2 * triples.size());
    for (const auto& t : triples) {
        users.push_back(t.user);
        items.push_back(t.pos);
        items.push_back(t.neg);
    }
    return {sorted_unique(std::move(users)), sorted_unique(std::move(items))};
}

Anchors Anchors::all(Index num_users, Index num_items) {
    Anchors a;
    a.users.resize(static_cast<std::size_t>(num_users));
    a.items.resize(static_cast<std::size_t>(num_items));
    std::iota(a.users.begin(), a.users.end(), Index{0});
    std::iota(a.items.begin(), a.items.end(), Index{0});
    return a;
}

double bpr_loss(const LayerStack& stack, std::span<const TrainTriple> triples, LayerGrads* grads, double weight) {
    if (triples.empty()) {
        throw DataError("bpr_loss needs at least one triple");
    }
    double loss = 0.0;
    for (const auto& t : triples) {
        const auto eu = stack.readout_user.row(t.user);
        const auto ep = stack.readout_item.row(t.pos);
        const auto en = stack.readout_item.row(t.neg);
        const double margin = eu.dot(ep) - eu.dot(en);
        loss += softplus(-margin);
        if (grads) {
            const double dmargin = -weight * sigmoid(-margin);
            grads->readout_user.row(t.user) += dmargin * (ep - en);
            grads->readout_item.row(t.pos) += dmargin * eu;
            grads->readout_item.row(t.neg) -= dmargin * eu;
        }
    }
    return loss;
}

NlLoss nl_loss(const LayerStack& stack, const BipartiteGraph& graph, const LossConfig& cfg, const Anchors& anchors,
               LayerGrads* grads, double weight) {
    cfg.validate(stack.num_layers());
    const auto groups = static_cast<std::size_t>(cfg.groups);
    const bool normalized = cfg.normalize_similarity;

    std::vector<LayerView> users;
    std::vector<LayerView> items;
    std::vector<Matrix> user_grad;
    std::vector<Matrix> item_grad;
    for (std::size_t l = 0; l <= groups; ++l) {
        users.emplace_back(stack.user_layers[l], normalized);
        items.emplace_back(stack.item_layers[l], normalized);
        if (grads) {
            user_grad.push_back(Matrix::Zero(stack.user_layers[l].rows(), stack.user_layers[l].cols()));
            item_grad.push_back(Matrix::Zero(stack.item_layers[l].rows(), stack.item_layers[l].cols()));
        }
    }

    const bool in_batch = cfg.denominator == Denominator::in_batch;
    const std::vector<Index>* batch_users = in_batch ? &anchors.users : nullptr;
    const std::vector<Index>* batch_items = in_batch ? &anchors.items : nullptr;
    const double user_coef = anchors.users.empty() ? 0.0 : 1.0 / static_cast<double>(groups * anchors.users.size());
    const double item_coef = anchors.items.empty() ? 0.0 : 1.0 / static_cast<double>(groups * anchors.items.size());

    NlLoss out;
    for (std::size_t g = 0; g < groups; ++g) {
        const std::size_t next = g + 1;
        out.layer_pairs.emplace_back(static_cast<Index>(g), static_cast<Index>(next));
        Matrix* ug_next = grads ? &user_grad[next] : nullptr;
        Matrix* ig_next = grads ? &item_grad[next] : nullptr;
        const Segment user_candidates{&users[next].values(), ug_next, batch_users};
        const Segment item_candidates{&items[next].values(), ig_next, batch_items};

        std::vector<Segment> for_users{item_candidates};
        std::vector<Segment> for_items{user_candidates};
        if (cfg.scope == Scope::entire) {
            for_users = {user_candidates, item_candidates};
            for_items = {user_candidates, item_candidates};
        }
        out.user += contrastive_side(users[g].values(), grads ? &user_grad[g] : nullptr, anchors.users,
                                     graph.user_to_items, items[next].values(), ig_next, for_users, cfg.tau,
                                     user_coef);
        out.item += contrastive_side(items[g].values(), grads ? &item_grad[g] : nullptr, anchors.items,
                                     graph.item_to_users, users[next].values(), ug_next, for_items, cfg.tau,
                                     item_coef);
    }

    if (grads) {
        for (std::size_t l = 0; l <= groups; ++l) {
            grads->user[l] += weight * users[l].to_raw(user_grad[l]);
            grads->item[l] += weight * items[l].to_raw(item_grad[l]);
        }
    }
    return out;
}

NlLoss nl_loss_hetero(const LayerStack& stack, const BipartiteGraph& graph, LossConfig cfg, const Anchors& anchors,
                      LayerGrads* grads, double weight) {
    cfg.scope = Scope::heterogeneous;
    return nl_loss(stack, graph, cfg, anchors, grads, weight);
}

NlLoss nl_loss_entire(const LayerStack& stack, const BipartiteGraph& graph, LossConfig cfg, const Anchors& anchors,
                      LayerGrads* grads, double weight) {
    cfg.scope = Scope::entire;
    return nl_loss(stack, graph, cfg, anchors, grads, weight);
}

double l2_reg(const EmbeddingState& state, std::span<const TrainTriple> triples, GradBuffer* grads, double weight) {
    if (triples.empty()) {
        return 0.0;
    }
    const Anchors touched = Anchors::from_batch(triples);
    const double inv_batch = 1.0 / static_cast<double>(triples.size());
    double reg = 0.0;
    for (Index u : touched.users) {
        reg += state.user0.row(u).squaredNorm();
        if (grads) {
            grads->g_user0.row(u) += (2.0 * weight * inv_batch) * state.user0.row(u);
        }
    }
    for (Index i : touched.items) {
        reg += state.item0.row(i).squaredNorm();
        if (grads) {
            grads->g_item0.row(i) += (2.0 * weight * inv_batch) * state.item0.row(i);
        }
    }
    return reg * inv_batch;
}

LossReport total_loss(const EmbeddingState& state, const LayerStack& stack, const NormalizedAdjacency& adj,
                      std::span<const TrainTriple> triples, const LossConfig& cfg, GradBuffer& out) {
    cfg.validate(stack.num_layers());
    LossReport report;
    LayerGrads layer_grads = LayerGrads::zeros_like(stack);
    report.bpr = bpr_loss(stack, triples, &layer_grads);
    if (cfg.lambda1 != 0.0) {
        const Anchors anchors = cfg.anchors == AnchorMode::batch
                                    ? Anchors::from_batch(triples)
                                    : Anchors::all(adj.num_users(), adj.num_items());
        const NlLoss nl = nl_loss(stack, adj.structure, cfg, anchors, &layer_grads, cfg.lambda1);
        report.nl_user = nl.user;
        report.nl_item = nl.item;
    }
    out = backpropagate(adj, std::move(layer_grads));
    report.reg = l2_reg(state, triples, &out, cfg.lambda2);
    report.total = report.bpr + cfg.lambda1 * (report.nl_user + report.nl_item) + cfg.lambda2 * report.reg;
    return report;
}

}  // namespace nlgcl
