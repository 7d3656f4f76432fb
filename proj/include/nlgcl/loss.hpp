#pragma once

#include "nlgcl/dataset.hpp"
#include "nlgcl/graph.hpp"
#include "nlgcl/model.hpp"
#include "nlgcl/types.hpp"

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace nlgcl {

/// Which nodes at layer g+1 form the softmax denominator of a layer-g anchor.
enum class Scope {
    heterogeneous,  // opposite node type only
    entire,         // every user and item
};

enum class Denominator {
    full,      // the whole candidate population
    in_batch,  // only candidates that appear in the current batch
};

enum class AnchorMode {
    batch,  // distinct users and items of the batch's triples
    all,    // every user and item
};

std::string to_string(Scope scope);
std::string to_string(Denominator mode);
std::string to_string(AnchorMode mode);
Scope parse_scope(const std::string& text);
Denominator parse_denominator(const std::string& text);
AnchorMode parse_anchor_mode(const std::string& text);

struct LossConfig {
    double tau = 0.2;
    double lambda1 = 1e-5;
    double lambda2 = 1e-4;
    Index groups = 1;
    Scope scope = Scope::heterogeneous;
    Denominator denominator = Denominator::full;
    AnchorMode anchors = AnchorMode::batch;
    bool normalize_similarity = false;

    /// Throws ConfigError unless tau > 0, lambdas >= 0 and 1 <= groups <= num_layers.
    void validate(Index num_layers) const;
};

struct LossReport {
    double bpr = 0.0;
    double nl_user = 0.0;
    double nl_item = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

/// Gradient of the objective with respect to the base embeddings.
struct GradBuffer {
    Matrix g_user0;
    Matrix g_item0;

    static GradBuffer zeros(Index num_users, Index num_items, Index d);
    void zero();
    bool all_finite() const { return g_user0.allFinite() && g_item0.allFinite(); }
};

/// Gradient with respect to every matrix of a LayerStack. Folded back onto
/// the base embeddings by backpropagate().
struct LayerGrads {
    std::vector<Matrix> user;
    std::vector<Matrix> item;
    Matrix readout_user;
    Matrix readout_item;

    static LayerGrads zeros_like(const LayerStack& stack);
};

/// Applies the readout and propagation adjoints: the readout gradient is
/// spread over every layer with weight 1/(L+1), then each layer's gradient is
/// pushed down through the transposed (equal, by symmetry) normalized blocks.
GradBuffer backpropagate(const NormalizedAdjacency& adj, LayerGrads grads);

struct Anchors {
    std::vector<Index> users;  // sorted, distinct
    std::vector<Index> items;  // sorted, distinct

    static Anchors from_batch(std::span<const TrainTriple> triples);
    static Anchors all(Index num_users, Index num_items);
};

struct NlLoss {
    double user = 0.0;
    double item = 0.0;
    /// (anchor layer, candidate layer) pairs, in evaluation order.
    std::vector<std::pair<Index, Index>> layer_pairs;
};

/// Sum over triples of -ln sigmoid(y_up - y_un). When grads is non-null,
/// weight * dLoss/dReadout is added to grads->readout_*.
double bpr_loss(const LayerStack& stack, std::span<const TrainTriple> triples, LayerGrads* grads = nullptr,
                double weight = 1.0);

/// Neighbor-layer contrastive loss. For each anchor u and group g in 0..G-1:
///   term = -(1/|N_u|) * [ sum_{i in N_u} s(u,i) - logsumexp_{c in C} s(u,c) ],
///   s(u,c) = e_u^(g) . e_c^(g+1) / tau,
/// averaged by 1/(G * #anchors) per side. C is the opposite node type for the
/// heterogeneous scope and all nodes for the entire scope (restricted to the
/// batch's nodes under Denominator::in_batch). Positives are always the full
/// train neighborhood; with in_batch denominators some of them may lie outside C.
NlLoss nl_loss(const LayerStack& stack, const BipartiteGraph& graph, const LossConfig& cfg, const Anchors& anchors,
               LayerGrads* grads = nullptr, double weight = 1.0);
NlLoss nl_loss_hetero(const LayerStack& stack, const BipartiteGraph& graph, LossConfig cfg, const Anchors& anchors,
                      LayerGrads* grads = nullptr, double weight = 1.0);
NlLoss nl_loss_entire(const LayerStack& stack, const BipartiteGraph& graph, LossConfig cfg, const Anchors& anchors,
                      LayerGrads* grads = nullptr, double weight = 1.0);

/// Squared norm of the base rows touched by the batch (distinct users and
/// distinct items among positives and negatives) divided by the triple count.
double l2_reg(const EmbeddingState& state, std::span<const TrainTriple> triples, GradBuffer* grads = nullptr,
              double weight = 1.0);

/// bpr + lambda1 * (nl_user + nl_item) + lambda2 * reg, with the exact
/// gradient written to out. The contrastive term is skipped (reported as 0)
/// when lambda1 == 0.
LossReport total_loss(const EmbeddingState& state, const LayerStack& stack, const NormalizedAdjacency& adj,
                      std::span<const TrainTriple> triples, const LossConfig& cfg, GradBuffer& out);

}  // namespace nlgcl
