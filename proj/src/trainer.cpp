#include "nlgcl/trainer.hpp"

#include "nlgcl/error.hpp"
#include "nlgcl/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nlgcl {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void TrainConfig::validate() const {
    if (batch_size < 1 || dim < 1 || num_layers < 1 || max_epochs < 1) {
        throw ConfigError("batch_size, dim, layers and max_epochs must all be >= 1");
    }
    if (patience < 1) {
        throw ConfigError("patience must be >= 1");
    }
    if (eval_ks.empty() || !std::is_sorted(eval_ks.begin(), eval_ks.end()) || eval_ks.front() < 1) {
        throw ConfigError("eval_ks must be positive and sorted ascending");
    }
    if (!(lr > 0.0)) {
        throw ConfigError("lr must be positive");
    }
    loss.validate(num_layers);
}

std::string TrainConfig::canonical() const {
    std::ostringstream out;
    out << "anchors=" << to_string(loss.anchors) << '\n'
        << "batch_size=" << batch_size << '\n'
        << "data=" << data_id << '\n'
        << "denominator=" << to_string(loss.denominator) << '\n'
        << "dim=" << dim << '\n'
        << "eval_ks=";
    for (std::size_t k = 0; k < eval_ks.size(); ++k) {
        out << (k ? "," : "") << eval_ks[k];
    }
    out << '\n'
        << "groups=" << loss.groups << '\n'
        << "lambda1=" << fmt(loss.lambda1) << '\n'
        << "lambda2=" << fmt(loss.lambda2) << '\n'
        << "layers=" << num_layers << '\n'
        << "lr=" << fmt(lr) << '\n'
        << "max_epochs=" << max_epochs << '\n'
        << "normalize_similarity=" << (loss.normalize_similarity ? 1 : 0) << '\n'
        << "patience=" << patience << '\n'
        << "scope=" << to_string(loss.scope) << '\n'
        << "seed=" << seed << '\n'
        << "tau=" << fmt(loss.tau) << '\n';
    return out.str();
}

Trainer::Trainer(const InteractionDataset& ds, const BipartiteGraph& graph, TrainConfig cfg, TrainHooks hooks)
    : ds_(ds),
      cfg_(std::move(cfg)),
      hooks_(std::move(hooks)),
      adj_(normalize(graph)),
      train_index_(ds.num_users, ds.train) {
    cfg_.validate();
    if (graph.num_users != ds.num_users || graph.num_items != ds.num_items || graph.num_edges() != ds.train.size()) {
        throw DataError("graph was not built from this dataset's train split");
    }
    state_ = init_xavier(ds.num_users, ds.num_items, cfg_.dim, cfg_.seed);
    adam_ = AdamState::for_state(state_, cfg_.lr);
}

bool Trainer::finished() const {
    return epoch_ >= cfg_.max_epochs || stop_.epochs_since_improve >= cfg_.patience;
}

void Trainer::run_epoch() {
    const auto started = std::chrono::steady_clock::now();
    const Index epoch = epoch_ + 1;
    Rng negatives = substream(cfg_.seed, "negatives", static_cast<std::uint64_t>(epoch));
    std::vector<TrainTriple> triples = sample_triples(ds_, train_index_, negatives);
    Rng shuffle = substream(cfg_.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(triples.begin(), triples.end(), shuffle);

    EpochRecord rec;
    rec.epoch = epoch;
    GradBuffer grads;
    const auto batch = static_cast<std::size_t>(cfg_.batch_size);
    for (std::size_t begin = 0, b = 0; begin < triples.size(); begin += batch, ++b) {
        const std::span<const TrainTriple> slice(triples.data() + begin, std::min(batch, triples.size() - begin));
        const LayerStack stack = propagate(state_, adj_, cfg_.num_layers);
        const LossReport report = total_loss(state_, stack, adj_, slice, cfg_.loss, grads);
        if (!std::isfinite(report.total)) {
            throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(b));
        }
        adam_step(state_, grads, adam_);
        rec.bpr += report.bpr;
        rec.nl_user += report.nl_user;
        rec.nl_item += report.nl_item;
        rec.reg += report.reg;
        rec.total += report.total;
    }

    const LayerStack stack = propagate(state_, adj_, cfg_.num_layers);
    if (hooks_.validation_metric) {
        rec.val_ndcg10 = hooks_.validation_metric(stack, epoch);
    } else {
        const Index k10[] = {10};
        rec.val_ndcg10 = evaluate(stack, ds_, Phase::val, k10).ndcg(10);
    }
    if (rec.val_ndcg10 > stop_.best_metric) {
        stop_.best_metric = rec.val_ndcg10;
        stop_.best_epoch = epoch;
        stop_.epochs_since_improve = 0;
        stop_.best_state = state_;
    } else {
        ++stop_.epochs_since_improve;
    }
    if (cfg_.record_wall_clock) {
        rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    }
    epoch_ = epoch;
    history_.push_back(rec);
    if (hooks_.on_epoch) {
        hooks_.on_epoch(rec);
    }
}

TrainedModel Trainer::run() {
    while (!finished()) {
        run_epoch();
    }
    return result();
}

TrainedModel Trainer::result() const {
    TrainedModel model;
    model.best_state = stop_.best_state ? *stop_.best_state : state_;
    model.best_epoch = stop_.best_epoch;
    model.best_val_ndcg10 = stop_.best_metric;
    model.epochs_run = epoch_;
    model.history = history_;
    return model;
}

Checkpoint Trainer::checkpoint() const {
    Checkpoint ckpt;
    ckpt.config_hash = cfg_.hash();
    ckpt.seed = cfg_.seed;
    ckpt.epoch = epoch_;
    ckpt.state = state_;
    ckpt.adam = adam_;
    ckpt.early_stop = stop_;
    ckpt.history = history_;
    return ckpt;
}

void Trainer::restore(const Checkpoint& ckpt) {
    if (ckpt.config_hash != cfg_.hash()) {
        throw ConfigError("checkpoint config hash " + hash_hex(ckpt.config_hash) + " does not match current config " +
                          hash_hex(cfg_.hash()));
    }
    if (ckpt.state.user0.rows() != ds_.num_users || ckpt.state.item0.rows() != ds_.num_items ||
        ckpt.state.dim() != cfg_.dim) {
        throw CheckpointError("checkpoint embedding shapes do not match the dataset");
    }
    state_ = ckpt.state;
    adam_ = ckpt.adam;
    stop_ = ckpt.early_stop;
    history_ = ckpt.history;
    epoch_ = ckpt.epoch;
}

TrainedModel train(const InteractionDataset& ds, const BipartiteGraph& graph, const TrainConfig& cfg,
                   TrainHooks hooks) {
    Trainer trainer(ds, graph, cfg, std::move(hooks));
    return trainer.run();
}

std::string format_history_row(const EpochRecord& rec) {
    char seconds[32];
    std::snprintf(seconds, sizeof(seconds), "%.3f", rec.seconds);
    return std::to_string(rec.epoch) + ',' + fmt(rec.bpr) + ',' + fmt(rec.nl_user) + ',' + fmt(rec.nl_item) + ',' +
           fmt(rec.reg) + ',' + fmt(rec.total) + ',' + fmt(rec.val_ndcg10) + ',' + seconds;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path,
                       const ArtifactStamp& stamp) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_stamp_comment(out, stamp);
    out << "epoch,bpr,nl_user,nl_item,reg,total,val_ndcg@10,seconds\n";
    for (const auto& rec : history) {
        out << format_history_row(rec) << '\n';
    }
}

std::vector<double> block_means(const std::vector<double>& values, std::size_t window) {
    std::vector<double> means;
    if (window == 0) {
        return means;
    }
    for (std::size_t begin = 0; begin + window <= values.size(); begin += window) {
        double sum = 0.0;
        for (std::size_t k = begin; k < begin + window; ++k) {
            sum += values[k];
        }
        means.push_back(sum / static_cast<double>(window));
    }
    return means;
}

}  // namespace nlgcl
