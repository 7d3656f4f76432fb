#pragma once

#include "nlgcl/dataset.hpp"
#include "nlgcl/trainer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace nlgcl {

/// Flat `key = value` run configuration. Lines starting with '#' are comments.
/// Every key must be one of known_config_keys(); anything else is a ConfigError.
struct RunConfig {
    TrainConfig train;
    std::filesystem::path raw_path;  // prepare: raw interaction TSV
    std::filesystem::path data_dir;  // split manifest directory
    std::filesystem::path out_dir = "out";
    std::size_t k_user = 5;
    std::size_t k_item = 5;
    SplitRatios ratios;
    int threads = 1;
    Index max_nodes = 2000;

    /// Hash stamped on training, evaluation, sweep and export artifacts.
    std::uint64_t hash() const { return train.hash(); }
    /// Hash stamped on the split manifest.
    std::uint64_t prepare_hash() const;
};

const std::vector<std::string>& known_config_keys();

/// Sets one key; shared by the file parser and command-line overrides.
void apply_config_value(RunConfig& cfg, const std::string& key, const std::string& value);

RunConfig parse_run_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace nlgcl
