#pragma once

#include "nlgcl/dataset.hpp"
#include "nlgcl/error.hpp"
#include "nlgcl/eval.hpp"
#include "nlgcl/graph.hpp"
#include "nlgcl/loss.hpp"
#include "nlgcl/model.hpp"
#include "nlgcl/optim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nlgcl {

struct TrainConfig {
    Index batch_size = 4096;
    Index dim = 64;
    Index num_layers = 2;
    Index max_epochs = 300;
    Index patience = 20;
    std::vector<Index> eval_ks{10, 20, 50};
    std::uint64_t seed = 2025;
    double lr = 1e-3;
    LossConfig loss;
    /// Identifies the training data in the config hash (e.g. the split directory).
    std::string data_id;
    /// When false the history's `seconds` column is written as 0.
    bool record_wall_clock = true;

    void validate() const;
    /// Canonical `key=value` lines over every field that influences training.
    std::string canonical() const;
    std::uint64_t hash() const { return fnv1a64(canonical()); }
};

struct EpochRecord {
    Index epoch = 0;
    double bpr = 0.0;
    double nl_user = 0.0;
    double nl_item = 0.0;
    double reg = 0.0;
    double total = 0.0;
    double val_ndcg10 = 0.0;
    double seconds = 0.0;
};

struct EarlyStopState {
    double best_metric = -std::numeric_limits<double>::infinity();
    Index best_epoch = 0;
    Index epochs_since_improve = 0;
    std::optional<EmbeddingState> best_state;
};

/// Everything needed to continue a run exactly where it stopped.
struct Checkpoint {
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    Index epoch = 0;
    std::string version = kVersion;
    EmbeddingState state;
    AdamState adam;
    EarlyStopState early_stop;
    std::vector<EpochRecord> history;
};

class CheckpointError : public DataError {
public:
    using DataError::DataError;
};

/// Binary layout: the 8 magic bytes `NLGCKPT1`, a u32 format version, a u32
/// section count, then tagged sections (4-byte tag, u64 length, payload).
/// Integers and doubles are little-endian 64-bit.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct TrainedModel {
    EmbeddingState best_state;
    Index best_epoch = 0;
    double best_val_ndcg10 = 0.0;
    Index epochs_run = 0;
    std::vector<EpochRecord> history;
};

struct TrainHooks {
    /// Replaces validation NDCG@10 when set (used by tests of the stopping rule).
    std::function<double(const LayerStack&, Index epoch)> validation_metric;
    /// Called after every completed epoch.
    std::function<void(const EpochRecord&)> on_epoch;
};

/// Epoch-level training loop: fresh negatives, shuffled mini-batches,
/// propagate -> total_loss -> Adam, then validation NDCG@10 with early stopping.
class Trainer {
public:
    Trainer(const InteractionDataset& ds, const BipartiteGraph& graph, TrainConfig cfg, TrainHooks hooks = {});

    void run_epoch();
    bool finished() const;
    TrainedModel run();
    TrainedModel result() const;

    Checkpoint checkpoint() const;
    /// Throws ConfigError when the checkpoint was produced under another config.
    void restore(const Checkpoint& ckpt);

    Index epoch() const { return epoch_; }
    const EmbeddingState& state() const { return state_; }
    const std::vector<EpochRecord>& history() const { return history_; }
    const TrainConfig& config() const { return cfg_; }
    const NormalizedAdjacency& adjacency() const { return adj_; }

private:
    const InteractionDataset& ds_;
    TrainConfig cfg_;
    TrainHooks hooks_;
    NormalizedAdjacency adj_;
    UserItemIndex train_index_;
    EmbeddingState state_;
    AdamState adam_;
    EarlyStopState stop_;
    std::vector<EpochRecord> history_;
    Index epoch_ = 0;
};

TrainedModel train(const InteractionDataset& ds, const BipartiteGraph& graph, const TrainConfig& cfg,
                   TrainHooks hooks = {});

/// `epoch,bpr,nl_user,nl_item,reg,total,val_ndcg@10,seconds` after a stamp line.
void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path,
                       const ArtifactStamp& stamp);
std::string format_history_row(const EpochRecord& rec);

/// Mean of each consecutive, non-overlapping block of `window` values; a
/// trailing partial block is dropped.
std::vector<double> block_means(const std::vector<double>& values, std::size_t window);

}  // namespace nlgcl
