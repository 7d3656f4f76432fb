#include "nlgcl/eval.hpp"

#include "nlgcl/error.hpp"
#include "nlgcl/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace nlgcl {

namespace {

struct UserResult {
    std::vector<double> recall;
    std::vector<double> ndcg;
};

std::vector<std::vector<Index>> group_by_user(Index num_users, const std::vector<Edge>& edges) {
    std::vector<std::vector<Index>> out(static_cast<std::size_t>(num_users));
    for (const auto& e : edges) {
        if (e.user < 0 || e.user >= num_users) {
            throw DataError("evaluation edge references unknown user " + std::to_string(e.user));
        }
        out[static_cast<std::size_t>(e.user)].push_back(e.item);
    }
    for (auto& items : out) {
        std::sort(items.begin(), items.end());
        items.erase(std::unique(items.begin(), items.end()), items.end());
    }
    return out;
}

}  // namespace

std::string to_string(Phase phase) {
    return phase == Phase::val ? "val" : "test";
}

double MetricReport::recall(Index k) const {
    for (const auto& m : at) {
        if (m.k == k) {
            return m.recall;
        }
    }
    throw ConfigError("no metrics recorded for K=" + std::to_string(k));
}

double MetricReport::ndcg(Index k) const {
    for (const auto& m : at) {
        if (m.k == k) {
            return m.ndcg;
        }
    }
    throw ConfigError("no metrics recorded for K=" + std::to_string(k));
}

std::vector<Index> top_k(std::span<const double> scores, std::span<const Index> masked_sorted, Index k) {
    std::vector<Index> candidates;
    candidates.reserve(scores.size());
    auto mask = masked_sorted.begin();
    for (Index i = 0; i < static_cast<Index>(scores.size()); ++i) {
        while (mask != masked_sorted.end() && *mask < i) {
            ++mask;
        }
        if (mask != masked_sorted.end() && *mask == i) {
            continue;
        }
        candidates.push_back(i);
    }
    const auto keep = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(std::max<Index>(k, 0)));
    auto better = [&](Index a, Index b) {
        const double sa = scores[static_cast<std::size_t>(a)];
        const double sb = scores[static_cast<std::size_t>(b)];
        return sa > sb || (sa == sb && a < b);
    };
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      better);
    candidates.resize(keep);
    return candidates;
}

MetricReport evaluate_scores(const Matrix& user_readout, const Matrix& item_readout, const std::vector<Edge>& targets,
                             const std::vector<const std::vector<Edge>*>& masked, std::span<const Index> ks) {
    if (ks.empty() || !std::is_sorted(ks.begin(), ks.end()) || ks.front() < 1) {
        throw ConfigError("evaluation cutoffs must be positive and sorted ascending");
    }
    if (targets.empty()) {
        throw DataError("evaluation split is empty");
    }
    const Index num_users = user_readout.rows();
    const auto target_sets = group_by_user(num_users, targets);
    std::vector<std::vector<Index>> mask_sets(static_cast<std::size_t>(num_users));
    for (const auto* edges : masked) {
        auto grouped = group_by_user(num_users, *edges);
        for (std::size_t u = 0; u < grouped.size(); ++u) {
            auto& dst = mask_sets[u];
            dst.insert(dst.end(), grouped[u].begin(), grouped[u].end());
        }
    }
    for (auto& m : mask_sets) {
        std::sort(m.begin(), m.end());
        m.erase(std::unique(m.begin(), m.end()), m.end());
    }

    const Index max_k = ks.back();
    std::vector<UserResult> per_user(static_cast<std::size_t>(num_users));
    parallel_for_rows(static_cast<std::size_t>(num_users), [&](std::size_t begin, std::size_t end) {
        Vector scores(item_readout.rows());
        for (std::size_t u = begin; u < end; ++u) {
            const auto& truth = target_sets[u];
            if (truth.empty()) {
                continue;
            }
            scores.noalias() = item_readout * user_readout.row(static_cast<Index>(u)).transpose();
            const auto ranked = top_k(std::span<const double>(scores.data(), static_cast<std::size_t>(scores.size())),
                                      mask_sets[u], max_k);
            UserResult res;
            for (Index k : ks) {
                double hits = 0.0;
                double dcg = 0.0;
                const auto depth = std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k));
                for (std::size_t p = 0; p < depth; ++p) {
                    if (std::binary_search(truth.begin(), truth.end(), ranked[p])) {
                        hits += 1.0;
                        dcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
                    }
                }
                double idcg = 0.0;
                const auto ideal = std::min<std::size_t>(truth.size(), static_cast<std::size_t>(k));
                for (std::size_t p = 0; p < ideal; ++p) {
                    idcg += 1.0 / std::log2(static_cast<double>(p) + 2.0);
                }
                res.recall.push_back(hits / static_cast<double>(truth.size()));
                res.ndcg.push_back(dcg / idcg);
            }
            per_user[u] = std::move(res);
        }
    });

    MetricReport report;
    for (Index k : ks) {
        report.at.push_back({k, 0.0, 0.0});
    }
    for (const auto& res : per_user) {
        if (res.recall.empty()) {
            ++report.num_skipped_users;
            continue;
        }
        ++report.num_evaluated_users;
        for (std::size_t j = 0; j < ks.size(); ++j) {
            report.at[j].recall += res.recall[j];
            report.at[j].ndcg += res.ndcg[j];
        }
    }
    for (auto& m : report.at) {
        m.recall /= static_cast<double>(report.num_evaluated_users);
        m.ndcg /= static_cast<double>(report.num_evaluated_users);
    }
    return report;
}

MetricReport evaluate(const LayerStack& stack, const InteractionDataset& ds, Phase phase, std::span<const Index> ks) {
    if (phase == Phase::val) {
        if (ds.val.empty()) {
            throw DataError("validation split is empty");
        }
        return evaluate_scores(stack.readout_user, stack.readout_item, ds.val, {&ds.train}, ks);
    }
    if (ds.test.empty()) {
        throw DataError("test split is empty");
    }
    return evaluate_scores(stack.readout_user, stack.readout_item, ds.test, {&ds.train, &ds.val}, ks);
}

void write_metric_report(const MetricReport& report, const ReportMetadata& meta, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    for (const auto& m : report.at) {
        j["recall@" + std::to_string(m.k)] = m.recall;
        j["ndcg@" + std::to_string(m.k)] = m.ndcg;
    }
    j["num_evaluated_users"] = report.num_evaluated_users;
    j["num_skipped_users"] = report.num_skipped_users;
    j["phase"] = to_string(meta.phase);
    j["masked"] = meta.phase == Phase::val ? "train" : "train+val";
    j["epoch"] = meta.epoch;
    j["seed"] = meta.stamp.seed;
    j["config_hash"] = hash_hex(meta.stamp.config_hash);
    j["version"] = meta.stamp.version;
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    out << j.dump(2) << '\n';
}

}  // namespace nlgcl
