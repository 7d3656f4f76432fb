#include "nlgcl/dataset.hpp"

#include "nlgcl/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace nlgcl {

namespace {

struct PairHash {
    std::size_t operator()(const std::pair<std::string, std::string>& p) const {
        const std::size_t h = std::hash<std::string>{}(p.first);
        return h ^ (std::hash<std::string>{}(p.second) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2));
    }
};

Index lookup(const std::vector<std::string>& tokens, const std::string& token, const char* kind) {
    const auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
    if (it == tokens.end() || *it != token) {
        throw DataError(std::string("unknown ") + kind + " token '" + token + "'");
    }
    return static_cast<Index>(it - tokens.begin());
}

bool skippable(const std::string& line) {
    return line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos;
}

std::vector<Edge> read_edges(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::vector<Edge> edges;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) {
            continue;
        }
        std::istringstream fields(line);
        Edge e;
        if (!(fields >> e.user >> e.item) || e.user < 0 || e.item < 0) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) + ": expected two non-negative indices");
        }
        edges.push_back(e);
    }
    return edges;
}

void write_edges(const std::vector<Edge>& edges, const std::filesystem::path& path, const ArtifactStamp& stamp) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_stamp_comment(out, stamp);
    for (const auto& e : edges) {
        out << e.user << '\t' << e.item << '\n';
    }
}

}  // namespace

IdMap IdMap::from(const RawInteractions& raw) {
    std::set<std::string> users;
    std::set<std::string> items;
    for (const auto& [u, i] : raw.records) {
        users.insert(u);
        items.insert(i);
    }
    return IdMap{{users.begin(), users.end()}, {items.begin(), items.end()}};
}

Index IdMap::user_index(const std::string& token) const {
    return lookup(user_tokens, token, "user");
}

Index IdMap::item_index(const std::string& token) const {
    return lookup(item_tokens, token, "item");
}

RawInteractions load_interactions(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open interaction file " + path.string());
    }
    RawInteractions raw;
    raw.source_path = path;
    std::unordered_set<std::pair<std::string, std::string>, PairHash> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (skippable(line)) {
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string::npos || tab == 0) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) +
                            ": expected at least 2 tab-separated fields");
        }
        const auto end = line.find('\t', tab + 1);
        std::string item = line.substr(tab + 1, end == std::string::npos ? std::string::npos : end - tab - 1);
        if (item.empty()) {
            throw DataError(path.string() + ": line " + std::to_string(line_no) + ": empty item field");
        }
        std::pair<std::string, std::string> rec{line.substr(0, tab), std::move(item)};
        if (seen.insert(rec).second) {
            raw.records.push_back(std::move(rec));
        }
    }
    if (in.bad()) {
        throw DataError("read failure on " + path.string());
    }
    return raw;
}

RawInteractions k_core_filter(const RawInteractions& raw, std::size_t k_user, std::size_t k_item) {
    if (k_user < 1 || k_item < 1) {
        throw ConfigError("k-core thresholds must be >= 1");
    }
    std::unordered_map<std::string, std::size_t> user_deg;
    std::unordered_map<std::string, std::size_t> item_deg;
    for (const auto& [u, i] : raw.records) {
        ++user_deg[u];
        ++item_deg[i];
    }
    std::vector<bool> alive(raw.records.size(), true);
    // Peeling is monotone, so sweeping until stable reaches the unique maximal core.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t r = 0; r < raw.records.size(); ++r) {
            if (!alive[r]) {
                continue;
            }
            const auto& [u, i] = raw.records[r];
            if (user_deg[u] < k_user || item_deg[i] < k_item) {
                alive[r] = false;
                --user_deg[u];
                --item_deg[i];
                changed = true;
            }
        }
    }
    RawInteractions out;
    out.source_path = raw.source_path;
    for (std::size_t r = 0; r < raw.records.size(); ++r) {
        if (alive[r]) {
            out.records.push_back(raw.records[r]);
        }
    }
    if (out.records.empty()) {
        throw DataError("dataset is empty after filtering (k_user=" + std::to_string(k_user) +
                        ", k_item=" + std::to_string(k_item) + ")");
    }
    return out;
}

InteractionDataset split_per_user(const RawInteractions& raw, SplitRatios ratios, std::uint64_t seed) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
        throw ConfigError("split ratios must be non-negative and sum to 1");
    }
    InteractionDataset ds;
    ds.seed = seed;
    ds.ids = IdMap::from(raw);
    ds.num_users = static_cast<Index>(ds.ids.user_tokens.size());
    ds.num_items = static_cast<Index>(ds.ids.item_tokens.size());

    std::vector<std::vector<Index>> per_user(static_cast<std::size_t>(ds.num_users));
    for (const auto& [u, i] : raw.records) {
        per_user[static_cast<std::size_t>(ds.ids.user_index(u))].push_back(ds.ids.item_index(i));
    }
    for (Index u = 0; u < ds.num_users; ++u) {
        auto& items = per_user[static_cast<std::size_t>(u)];
        std::sort(items.begin(), items.end());
        Rng rng = substream(seed, "split", static_cast<std::uint64_t>(u));
        std::shuffle(items.begin(), items.end(), rng);

        const auto n = items.size();
        auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.val + 1e-9));
        auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * ratios.test + 1e-9));
        if (n_val + n_test >= n) {
            // keep one item in train
            if (n_test > 0) {
                --n_test;
            } else {
                --n_val;
            }
        }
        const std::size_t n_train = n - n_val - n_test;
        for (std::size_t k = 0; k < n; ++k) {
            const Edge e{u, items[k]};
            if (k < n_train) {
                ds.train.push_back(e);
            } else if (k < n_train + n_val) {
                ds.val.push_back(e);
            } else {
                ds.test.push_back(e);
            }
        }
    }
    std::sort(ds.train.begin(), ds.train.end());
    std::sort(ds.val.begin(), ds.val.end());
    std::sort(ds.test.begin(), ds.test.end());
    return ds;
}

UserItemIndex::UserItemIndex(Index num_users, const std::vector<Edge>& edges)
    : offsets_(static_cast<std::size_t>(num_users) + 1, 0) {
    for (const auto& e : edges) {
        ++offsets_[static_cast<std::size_t>(e.user) + 1];
    }
    for (std::size_t u = 0; u < static_cast<std::size_t>(num_users); ++u) {
        offsets_[u + 1] += offsets_[u];
    }
    items_.resize(edges.size());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const auto& e : edges) {
        items_[cursor[static_cast<std::size_t>(e.user)]++] = e.item;
    }
    for (std::size_t u = 0; u < static_cast<std::size_t>(num_users); ++u) {
        std::sort(items_.begin() + static_cast<std::ptrdiff_t>(offsets_[u]),
                  items_.begin() + static_cast<std::ptrdiff_t>(offsets_[u + 1]));
    }
}

std::span<const Index> UserItemIndex::items(Index user) const {
    const auto u = static_cast<std::size_t>(user);
    return {items_.data() + offsets_[u], offsets_[u + 1] - offsets_[u]};
}

bool UserItemIndex::contains(Index user, Index item) const {
    const auto row = items(user);
    return std::binary_search(row.begin(), row.end(), item);
}

std::vector<TrainTriple> sample_triples(const InteractionDataset& ds, Rng& rng) {
    return sample_triples(ds, UserItemIndex(ds.num_users, ds.train), rng);
}

std::vector<TrainTriple> sample_triples(const InteractionDataset& ds, const UserItemIndex& train_index, Rng& rng) {
    std::uniform_int_distribution<Index> pick(0, ds.num_items - 1);
    std::vector<TrainTriple> triples;
    triples.reserve(ds.train.size());
    for (const auto& e : ds.train) {
        if (static_cast<Index>(train_index.items(e.user).size()) >= ds.num_items) {
            throw DataError("user " + std::to_string(e.user) + " interacted with every item; no negative to sample");
        }
        Index neg = pick(rng);
        while (train_index.contains(e.user, neg)) {
            neg = pick(rng);
        }
        triples.push_back({e.user, e.item, neg});
    }
    return triples;
}

void write_split(const InteractionDataset& ds, const std::filesystem::path& dir, const ArtifactStamp& stamp) {
    std::filesystem::create_directories(dir);
    write_edges(ds.train, dir / "train.tsv", stamp);
    write_edges(ds.val, dir / "val.tsv", stamp);
    write_edges(ds.test, dir / "test.tsv", stamp);
    std::ofstream out(dir / "idmap.tsv");
    if (!out) {
        throw DataError("cannot write " + (dir / "idmap.tsv").string());
    }
    write_stamp_comment(out, stamp);
    for (std::size_t k = 0; k < ds.ids.user_tokens.size(); ++k) {
        out << "user\t" << ds.ids.user_tokens[k] << '\t' << k << '\n';
    }
    for (std::size_t k = 0; k < ds.ids.item_tokens.size(); ++k) {
        out << "item\t" << ds.ids.item_tokens[k] << '\t' << k << '\n';
    }
}

InteractionDataset read_split(const std::filesystem::path& dir) {
    InteractionDataset ds;
    const auto idmap_path = dir / "idmap.tsv";
    std::ifstream in(idmap_path);
    if (!in) {
        throw DataError("cannot open " + idmap_path.string());
    }
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (skippable(line)) {
            continue;
        }
        std::istringstream fields(line);
        std::string kind;
        std::string token;
        std::size_t index = 0;
        if (!std::getline(fields, kind, '\t') || !std::getline(fields, token, '\t') || !(fields >> index)) {
            throw DataError(idmap_path.string() + ": line " + std::to_string(line_no) + ": malformed idmap row");
        }
        auto& tokens = kind == "user" ? ds.ids.user_tokens : ds.ids.item_tokens;
        if ((kind != "user" && kind != "item") || index != tokens.size()) {
            throw DataError(idmap_path.string() + ": line " + std::to_string(line_no) + ": out-of-order idmap row");
        }
        tokens.push_back(token);
    }
    ds.num_users = static_cast<Index>(ds.ids.user_tokens.size());
    ds.num_items = static_cast<Index>(ds.ids.item_tokens.size());
    ds.train = read_edges(dir / "train.tsv");
    ds.val = read_edges(dir / "val.tsv");
    ds.test = read_edges(dir / "test.tsv");
    for (const auto* split : {&ds.train, &ds.val, &ds.test}) {
        for (const auto& e : *split) {
            if (e.user >= ds.num_users || e.item >= ds.num_items) {
                throw DataError("edge (" + std::to_string(e.user) + "," + std::to_string(e.item) +
                                ") outside idmap range in " + dir.string());
            }
        }
    }
    return ds;
}

}  // namespace nlgcl
