#include "nlgcl/sweep.hpp"

#include "nlgcl/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nlgcl {

namespace {

bool is_known_axis(const std::string& name) {
    return name == "lambda1" || name == "tau" || name == "layers" || name == "groups";
}

Index as_count(const std::string& axis, double v) {
    if (v < 1 || v != std::floor(v)) {
        throw ConfigError("grid axis '" + axis + "' needs positive integers, got " + std::to_string(v));
    }
    return static_cast<Index>(v);
}

void apply(TrainConfig& cfg, const std::string& axis, double v) {
    if (axis == "lambda1") {
        cfg.loss.lambda1 = v;
    } else if (axis == "tau") {
        cfg.loss.tau = v;
    } else if (axis == "layers") {
        cfg.num_layers = as_count(axis, v);
    } else if (axis == "groups") {
        cfg.loss.groups = as_count(axis, v);
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string short_fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return buf;
}

}  // namespace

GridAxis parse_grid_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("grid axis '" + text + "' must look like name=v1,v2");
    }
    GridAxis axis;
    axis.name = text.substr(0, eq);
    if (!is_known_axis(axis.name)) {
        throw ConfigError("unknown grid axis '" + axis.name + "' (expected lambda1, tau, layers or groups)");
    }
    std::istringstream values(text.substr(eq + 1));
    std::string token;
    while (std::getline(values, token, ',')) {
        try {
            std::size_t used = 0;
            axis.values.push_back(std::stod(token, &used));
            if (used != token.size()) {
                throw std::invalid_argument(token);
            }
        } catch (const std::logic_error&) {
            throw ConfigError("grid axis '" + axis.name + "': bad value '" + token + "'");
        }
    }
    if (axis.values.empty()) {
        throw ConfigError("grid axis '" + axis.name + "' has no values");
    }
    return axis;
}

SweepResult grid_sweep(const InteractionDataset& ds, const BipartiteGraph& graph, const TrainConfig& base,
                       const std::vector<GridAxis>& axes) {
    SweepResult result;
    for (const auto& axis : axes) {
        if (!is_known_axis(axis.name) || axis.values.empty()) {
            throw ConfigError("invalid grid axis '" + axis.name + "'");
        }
        result.axes.push_back(axis.name);
    }
    std::vector<std::size_t> at(axes.size(), 0);
    while (true) {
        GridPoint point;
        TrainConfig cfg = base;
        for (std::size_t a = 0; a < axes.size(); ++a) {
            const double v = axes[a].values[at[a]];
            point.emplace_back(axes[a].name, v);
            apply(cfg, axes[a].name, v);
        }
        if (cfg.loss.groups > cfg.num_layers) {
            result.skipped.push_back({point, "G=" + std::to_string(cfg.loss.groups) + " exceeds L=" +
                                                 std::to_string(cfg.num_layers)});
        } else {
            const TrainedModel model = train(ds, graph, cfg);
            const LayerStack stack = propagate(model.best_state, normalize(graph), cfg.num_layers);
            SweepCell cell;
            cell.point = point;
            cell.cfg = cfg;
            cell.best_epoch = model.best_epoch;
            cell.best_val_ndcg10 = model.best_val_ndcg10;
            cell.test = evaluate(stack, ds, Phase::test, cfg.eval_ks);
            result.cells.push_back(std::move(cell));
        }
        std::size_t a = axes.size();
        while (a > 0) {
            --a;
            if (++at[a] < axes[a].values.size()) {
                break;
            }
            at[a] = 0;
            if (a == 0) {
                return result;
            }
        }
        if (axes.empty()) {
            return result;
        }
    }
}

void write_sweep_csv(const SweepResult& result, const std::vector<Index>& ks, const std::filesystem::path& path,
                     const ArtifactStamp& stamp) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_stamp_comment(out, stamp);
    for (const auto& name : result.axes) {
        out << name << ',';
    }
    out << "val_ndcg@10";
    for (Index k : ks) {
        out << ",test_recall@" << k;
    }
    for (Index k : ks) {
        out << ",test_ndcg@" << k;
    }
    out << '\n';
    for (const auto& cell : result.cells) {
        for (const auto& [name, v] : cell.point) {
            out << short_fmt(v) << ',';
        }
        out << fmt(cell.best_val_ndcg10);
        for (Index k : ks) {
            out << ',' << fmt(cell.test.recall(k));
        }
        for (Index k : ks) {
            out << ',' << fmt(cell.test.ndcg(k));
        }
        out << '\n';
    }
}

void write_sweep_skips(const SweepResult& result, const std::filesystem::path& path, const ArtifactStamp& stamp) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_stamp_comment(out, stamp);
    for (const auto& name : result.axes) {
        out << name << ',';
    }
    out << "reason\n";
    for (const auto& skip : result.skipped) {
        for (const auto& [name, v] : skip.point) {
            out << short_fmt(v) << ',';
        }
        out << skip.reason << '\n';
    }
}

}  // namespace nlgcl
