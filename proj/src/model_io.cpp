#include "smtad/model_io.hpp"

#include <fstream>

#include <json.hpp>

namespace smtad {

namespace {

using nlohmann::json;

json normalizer_to_json(const RankNormalizer& normalizer) {
    json features = json::array();
    for (const auto& f : normalizer.features) {
        features.push_back({
            {"mode", f.mode == FeatureMode::Discrete ? "discrete" : "continuous"},
            {"values", f.values},
            {"mapped", f.mapped},
            {"reference_size", f.reference_size},
        });
    }
    return {{"discrete_threshold", normalizer.discrete_threshold}, {"features", features}};
}

RankNormalizer normalizer_from_json(const json& j) {
    RankNormalizer normalizer;
    normalizer.discrete_threshold = j.at("discrete_threshold").get<int>();
    for (const auto& fj : j.at("features")) {
        FeatureCdf f;
        f.mode = fj.at("mode").get<std::string>() == "discrete" ? FeatureMode::Discrete
                                                                : FeatureMode::Continuous;
        f.values = fj.at("values").get<std::vector<double>>();
        f.mapped = fj.at("mapped").get<std::vector<double>>();
        f.reference_size = fj.at("reference_size").get<std::size_t>();
        normalizer.features.push_back(std::move(f));
    }
    return normalizer;
}

}  // namespace

void save_model(const std::string& path, const ModelFile& model) {
    model.params.validate();
    json doc = {
        {"format_version", model.format_version},
        {"L", model.params.sites},
        {"M", model.params.mixtures},
        {"P", model.params.resolutions},
        {"theta", model.params.theta},
        {"coeff", model.params.coeff},
        {"normalizer", normalizer_to_json(model.normalizer)},
        {"train_config",
         {{"learning_rate", model.config.learning_rate},
          {"batch_size", model.config.batch_size},
          {"epochs", model.config.epochs},
          {"lambda_c", model.config.lambda_c},
          {"lambda_theta", model.config.lambda_theta},
          {"beta1", model.config.beta1},
          {"beta2", model.config.beta2},
          {"epsilon", model.config.epsilon}}},
        {"seed", model.seed},
    };
    if (!model.selection.empty()) doc["selection"] = model.selection;
    if (!model.feature_names.empty()) doc["feature_names"] = model.feature_names;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot write " + path);
    out << doc.dump(2) << "\n";
    if (!out) throw std::runtime_error("save_model: write failed for " + path);
}

ModelFile load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    json doc = json::parse(in);

    ModelFile model;
    model.format_version = doc.at("format_version").get<int>();
    if (model.format_version != 1)
        throw std::runtime_error("load_model: unsupported format version");
    model.params.sites = doc.at("L").get<int>();
    model.params.mixtures = doc.at("M").get<int>();
    model.params.resolutions = doc.at("P").get<int>();
    model.params.theta = doc.at("theta").get<std::vector<double>>();
    model.params.coeff = doc.at("coeff").get<std::vector<double>>();
    model.params.validate();
    model.normalizer = normalizer_from_json(doc.at("normalizer"));
    const auto& tc = doc.at("train_config");
    model.config.learning_rate = tc.at("learning_rate").get<double>();
    model.config.batch_size = tc.at("batch_size").get<int>();
    model.config.epochs = tc.at("epochs").get<long>();
    model.config.lambda_c = tc.at("lambda_c").get<double>();
    model.config.lambda_theta = tc.at("lambda_theta").get<double>();
    model.config.beta1 = tc.at("beta1").get<double>();
    model.config.beta2 = tc.at("beta2").get<double>();
    model.config.epsilon = tc.at("epsilon").get<double>();
    model.seed = doc.at("seed").get<std::uint64_t>();
    model.config.seed = model.seed;
    if (doc.contains("selection")) model.selection = doc.at("selection").get<std::vector<int>>();
    if (doc.contains("feature_names"))
        model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    return model;
}

std::vector<int> load_selection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_selection: cannot open " + path);
    json doc = json::parse(in);
    return doc.at("selection").get<std::vector<int>>();
}

void save_selection(const std::string& path, const std::vector<int>& selection) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_selection: cannot write " + path);
    out << json{{"selection", selection}}.dump(2) << "\n";
}

}  // namespace smtad
