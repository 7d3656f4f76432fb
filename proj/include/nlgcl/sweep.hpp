#pragma once

#include "nlgcl/trainer.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nlgcl {

/// One hyperparameter axis: `lambda1`, `tau`, `layers` or `groups`.
struct GridAxis {
    std::string name;
    std::vector<double> values;
};

/// Parses `name=v1,v2,...`.
GridAxis parse_grid_axis(const std::string& text);

using GridPoint = std::vector<std::pair<std::string, double>>;

struct SweepCell {
    GridPoint point;
    TrainConfig cfg;
    Index best_epoch = 0;
    double best_val_ndcg10 = 0.0;
    MetricReport test;
};

struct SweepSkip {
    GridPoint point;
    std::string reason;
};

struct SweepResult {
    std::vector<std::string> axes;
    std::vector<SweepCell> cells;
    std::vector<SweepSkip> skipped;
};

/// Trains every grid cell in row-major order with the base seed, so cells
/// differ only in the swept values. Cells violating G <= L are skipped.
SweepResult grid_sweep(const InteractionDataset& ds, const BipartiteGraph& graph, const TrainConfig& base,
                       const std::vector<GridAxis>& axes);

/// Columns: the axis names, val_ndcg@10, then test_recall@K and test_ndcg@K
/// for each K of the base config.
void write_sweep_csv(const SweepResult& result, const std::vector<Index>& ks, const std::filesystem::path& path,
                     const ArtifactStamp& stamp);
void write_sweep_skips(const SweepResult& result, const std::filesystem::path& path, const ArtifactStamp& stamp);

}  // namespace nlgcl
