#include "nlgcl/config.hpp"

#include <cmath>

#include "nlgcl/error.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nlgcl {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    T out{};
    if (!(in >> out) || !(in >> std::ws).eof()) {
        throw ConfigError("config key '" + key + "': cannot parse '" + value + "'");
    }
    return out;
}

Index parse_count(const std::string& key, const std::string& value) {
    const auto v = parse_number<long long>(key, value);
    if (v < 0) {
        throw ConfigError("config key '" + key + "' must be non-negative");
    }
    return static_cast<Index>(v);
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") {
        return true;
    }
    if (value == "false" || value == "0") {
        return false;
    }
    throw ConfigError("config key '" + key + "' expects true or false, got '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::istringstream in(value);
    std::string token;
    while (std::getline(in, token, ',')) {
        parts.push_back(trim(token));
    }
    return parts;
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys{
        "anchors",  "batch_size", "data",     "denominator", "dim",        "eval_ks",
        "groups",   "k_item",     "k_user",   "lambda1",     "lambda2",    "layers",
        "lr",       "max_epochs", "max_nodes", "normalize_similarity", "out", "patience",
        "raw",      "record_wall_clock", "scope", "seed",    "split",      "tau",
        "threads",
    };
    return keys;
}

void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto& t = cfg.train;
    if (key == "anchors") {
        t.loss.anchors = parse_anchor_mode(value);
    } else if (key == "batch_size") {
        t.batch_size = parse_count(key, value);
    } else if (key == "data") {
        cfg.data_dir = value;
        t.data_id = value;
    } else if (key == "denominator") {
        t.loss.denominator = parse_denominator(value);
    } else if (key == "dim") {
        t.dim = parse_count(key, value);
    } else if (key == "eval_ks") {
        t.eval_ks.clear();
        for (const auto& part : split_list(value)) {
            t.eval_ks.push_back(parse_count(key, part));
        }
    } else if (key == "groups") {
        t.loss.groups = parse_count(key, value);
    } else if (key == "k_item") {
        cfg.k_item = static_cast<std::size_t>(parse_count(key, value));
    } else if (key == "k_user") {
        cfg.k_user = static_cast<std::size_t>(parse_count(key, value));
    } else if (key == "lambda1") {
        t.loss.lambda1 = parse_number<double>(key, value);
    } else if (key == "lambda2") {
        t.loss.lambda2 = parse_number<double>(key, value);
    } else if (key == "layers") {
        t.num_layers = parse_count(key, value);
    } else if (key == "lr") {
        t.lr = parse_number<double>(key, value);
    } else if (key == "max_epochs") {
        t.max_epochs = parse_count(key, value);
    } else if (key == "max_nodes") {
        cfg.max_nodes = parse_count(key, value);
    } else if (key == "normalize_similarity") {
        t.loss.normalize_similarity = parse_bool(key, value);
    } else if (key == "out") {
        cfg.out_dir = value;
    } else if (key == "patience") {
        t.patience = parse_count(key, value);
    } else if (key == "raw") {
        cfg.raw_path = value;
    } else if (key == "record_wall_clock") {
        t.record_wall_clock = parse_bool(key, value);
    } else if (key == "scope") {
        t.loss.scope = parse_scope(value);
    } else if (key == "seed") {
        t.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "split") {
        const auto parts = split_list(value);
        if (parts.size() != 3) {
            throw ConfigError("config key 'split' expects three comma-separated ratios");
        }
        cfg.ratios = {parse_number<double>(key, parts[0]), parse_number<double>(key, parts[1]),
                      parse_number<double>(key, parts[2])};
        const auto& r = cfg.ratios;
        if (r.train <= 0.0 || r.val < 0.0 || r.test < 0.0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
            throw ConfigError("config key 'split' needs non-negative ratios summing to 1, got '" + value + "'");
        }
    } else if (key == "tau") {
        t.loss.tau = parse_number<double>(key, value);
    } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_count(key, value));
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

RunConfig parse_run_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string body = trim(line);
        if (body.empty() || body[0] == '#') {
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        }
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
        seen.push_back(key);
        try {
            apply_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config_text(text.str(), path.string());
}

std::uint64_t RunConfig::prepare_hash() const {
    char ratios_text[96];
    std::snprintf(ratios_text, sizeof(ratios_text), "%.17g,%.17g,%.17g", ratios.train, ratios.val, ratios.test);
    std::ostringstream out;
    out << "k_item=" << k_item << '\n'
        << "k_user=" << k_user << '\n'
        << "raw=" << raw_path.string() << '\n'
        << "seed=" << train.seed << '\n'
        << "split=" << ratios_text << '\n';
    return fnv1a64(out.str());
}

}  // namespace nlgcl
