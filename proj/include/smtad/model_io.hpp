#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "smtad/model.hpp"
#include "smtad/preprocess.hpp"
#include "smtad/training.hpp"

namespace smtad {

// On-disk model document: parameters, the fitted normalizer, the training
// config snapshot and the optional feature selection (1-based original site
// indices). Serialized as versioned JSON; numbers round-trip exactly.
struct ModelFile {
    int format_version = 1;
    ModelParams params;
    RankNormalizer normalizer;
    TrainConfig config;
    std::uint64_t seed = 0;
    std::vector<int> selection;  // empty = all sites
    std::vector<std::string> feature_names;

    // Columns expected in raw input data (selection applied upstream).
    std::size_t raw_feature_count() const {
        return selection.empty() ? static_cast<std::size_t>(params.sites) : selection.size();
    }
};

void save_model(const std::string& path, const ModelFile& model);
ModelFile load_model(const std::string& path);

std::vector<int> load_selection(const std::string& path);   // {"selection": [1-based...]}
void save_selection(const std::string& path, const std::vector<int>& selection);

}  // namespace smtad
