#pragma once

#include "nlgcl/artifact.hpp"
#include "nlgcl/dataset.hpp"
#include "nlgcl/model.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace nlgcl {

enum class Phase { val, test };

std::string to_string(Phase phase);

struct MetricAtK {
    Index k = 0;
    double recall = 0.0;
    double ndcg = 0.0;
};

struct MetricReport {
    std::vector<MetricAtK> at;  // ascending k
    Index num_evaluated_users = 0;
    Index num_skipped_users = 0;  // users with no targets in the phase

    double recall(Index k) const;
    double ndcg(Index k) const;
};

/// Highest-scoring unmasked items, best first; ties go to the lower index.
/// Masked items are excluded outright, so the list can be shorter than k.
std::vector<Index> top_k(std::span<const double> scores, std::span<const Index> masked_sorted, Index k);

/// All-rank Recall@K / NDCG@K over users with at least one target. Scores are
/// inner products of the readout rows; each user's items in every `masked`
/// edge list are removed from the ranking.
MetricReport evaluate_scores(const Matrix& user_readout, const Matrix& item_readout, const std::vector<Edge>& targets,
                             const std::vector<const std::vector<Edge>*>& masked, std::span<const Index> ks);

/// Validation masks train; test masks train and val.
MetricReport evaluate(const LayerStack& stack, const InteractionDataset& ds, Phase phase, std::span<const Index> ks);

struct ReportMetadata {
    ArtifactStamp stamp;
    Phase phase = Phase::test;
    Index epoch = 0;
};

/// JSON with `recall@K` / `ndcg@K` keys plus run metadata.
void write_metric_report(const MetricReport& report, const ReportMetadata& meta, const std::filesystem::path& path);

}  // namespace nlgcl
