// smtad: train / score / eval / analyze / sweep over the SMT-AD model.
// Exit codes: 0 success, 2 input error, 3 numerical failure.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "smtad/analysis.hpp"
#include "smtad/csv.hpp"
#include "smtad/metrics.hpp"
#include "smtad/model_io.hpp"
#include "smtad/pipeline.hpp"
#include "smtad/rng.hpp"
#include "smtad/threads.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    for (const auto& item : split_list(s)) out.push_back(std::stoi(item));
    return out;
}

long parse_epochs(const std::string& s) {
    if (s == "auto") return 0;
    return std::stol(s);
}

struct DataFlags {
    std::string path;
    std::string label_col = "label";
    std::string normal_labels = "0";
};

struct TrainFlags {
    double split_fraction = 0.5;
    std::uint64_t seed = 0;
    int mixtures = 4;
    int resolutions = 2;
    double lr = 0.01;
    int batch = 0;
    std::string epochs = "auto";
    double lambda_c = 0.01;
    double lambda_theta = 0.001;
    std::string select_file;
    bool strict_normalizer = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& f, bool required = true) {
    auto* opt = cmd->add_option("--data", f.path, "input CSV (features + label column)");
    if (required) opt->required();
    cmd->add_option("--label-col", f.label_col, "label column name or 0-based index");
    cmd->add_option("--normal-labels", f.normal_labels,
                    "comma-separated label values treated as normal");
}

void add_train_flags(CLI::App* cmd, TrainFlags& f, bool grid_shape = false) {
    cmd->add_option("--split", f.split_fraction, "training fraction of the normal rows");
    cmd->add_option("--seed", f.seed, "master seed");
    if (!grid_shape) {
        cmd->add_option("--M", f.mixtures, "mixture components");
        cmd->add_option("--P", f.resolutions, "embedding resolutions");
    }
    cmd->add_option("--lr", f.lr, "learning rate");
    cmd->add_option("--batch", f.batch, "batch size (0 = auto)");
    cmd->add_option("--epochs", f.epochs, "epoch count or 'auto'");
    cmd->add_option("--lambda-c", f.lambda_c, "coefficient regularization weight");
    cmd->add_option("--lambda-theta", f.lambda_theta, "angle regularization weight");
    cmd->add_option("--select-file", f.select_file, "feature-selection JSON (1-based sites)");
    cmd->add_flag("--strict-normalizer", f.strict_normalizer,
                  "fit the rank normalizer on training rows only");
}

smtad::ExperimentConfig to_experiment_config(const DataFlags& data, const TrainFlags& train) {
    smtad::ExperimentConfig config;
    config.label_col = data.label_col;
    config.normal_labels = split_list(data.normal_labels);
    config.split_fraction = train.split_fraction;
    config.mixtures = train.mixtures;
    config.resolutions = train.resolutions;
    config.train.learning_rate = train.lr;
    config.train.batch_size = train.batch;
    config.train.epochs = parse_epochs(train.epochs);
    config.train.lambda_c = train.lambda_c;
    config.train.lambda_theta = train.lambda_theta;
    config.strict_normalizer = train.strict_normalizer;
    if (!train.select_file.empty()) config.selection = smtad::load_selection(train.select_file);
    return config;
}

void write_history_csv(const std::string& path, const std::vector<smtad::LossReport>& history) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(history.size());
    for (std::size_t e = 0; e < history.size(); ++e)
        rows.push_back({std::to_string(e + 1), smtad::csv::format_double(history[e].nll),
                        smtad::csv::format_double(history[e].reg),
                        smtad::csv::format_double(history[e].total)});
    smtad::csv::write_rows(path, {"epoch", "nll", "reg", "total"}, rows);
}

void write_json(const std::string& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << doc.dump(2) << "\n";
}

json outcome_json(const smtad::EvalOutcome& e) {
    return {{"auroc", e.auroc}, {"auprc", e.auprc}, {"n_pos", e.n_pos},
            {"n_neg", e.n_neg}, {"seed", e.seed}};
}

// Feature matrix with optional labels, tolerant of label-less files and
// empty inputs (scoring accepts both).
struct LooseData {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;
    std::vector<int> labels;  // empty if no label column
};

LooseData read_loose(const std::string& path, const std::string& label_col,
                     const std::vector<std::string>& normal_labels) {
    const auto table = smtad::csv::read_table(path);
    LooseData data;
    if (table.rows.empty() && table.header.empty()) return data;

    const std::size_t width = table.rows.empty() ? table.header.size() : table.rows.front().size();
    std::size_t label_idx = width;  // width = no label column
    if (!label_col.empty()) {
        if (std::all_of(label_col.begin(), label_col.end(),
                        [](char c) { return c >= '0' && c <= '9'; })) {
            const std::size_t idx = std::stoul(label_col);
            if (idx < width) label_idx = idx;
        } else if (table.has_header) {
            for (std::size_t i = 0; i < table.header.size(); ++i)
                if (table.header[i] == label_col) label_idx = i;
        }
    }

    data.cols = label_idx < width ? width - 1 : width;
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < width; ++i) {
            if (i == label_idx) continue;
            data.values.push_back(std::stod(row[i]));
        }
        if (label_idx < width) {
            const bool normal = std::find(normal_labels.begin(), normal_labels.end(),
                                          row[label_idx]) != normal_labels.end();
            data.labels.push_back(normal ? 0 : 1);
        }
        ++data.rows;
    }
    return data;
}

int cmd_train(const DataFlags& data_flags, const TrainFlags& train_flags, const std::string& out) {
    fs::create_directories(out);
    const auto table = smtad::csv::read_table(data_flags.path);
    const auto raw = smtad::csv::to_raw_dataset(table, data_flags.label_col,
                                                split_list(data_flags.normal_labels));
    const auto config = to_experiment_config(data_flags, train_flags);
    const auto result = smtad::run_experiment(raw, config, train_flags.seed, 0);

    smtad::save_model(out + "/model.json", result.model);
    write_history_csv(out + "/history.csv", result.training.history);
    write_json(out + "/metrics.json", outcome_json(result.eval));
    std::cout << "trained M=" << config.mixtures << " P=" << config.resolutions << " ("
              << result.model.params.learnable_count() << " learnables, "
              << result.training.epochs << " epochs): auroc=" << result.eval.auroc
              << " auprc=" << result.eval.auprc << "\n";
    return kExitOk;
}

int cmd_score(const std::string& model_path, const DataFlags& data_flags, const std::string& out,
              int hist_bins) {
    fs::create_directories(out);
    const auto model = smtad::load_model(model_path);
    const auto data =
        read_loose(data_flags.path, data_flags.label_col, split_list(data_flags.normal_labels));

    std::vector<smtad::ScoreBreakdown> scores;
    if (data.rows > 0) scores = smtad::score_matrix(model, data.values, data.rows, data.cols, 0);

    std::vector<std::vector<std::string>> rows;
    rows.reserve(scores.size());
    for (std::size_t r = 0; r < scores.size(); ++r) {
        const std::string label = data.labels.empty() ? "" : std::to_string(data.labels[r]);
        rows.push_back({std::to_string(r), label, smtad::csv::format_double(scores[r].score),
                        smtad::csv::format_double(scores[r].log_score),
                        smtad::csv::format_double(smtad::to_anomaly_score(scores[r]))});
    }
    smtad::csv::write_rows(out + "/scores.csv",
                           {"id", "label", "normality_score", "log_score", "anomaly_score"}, rows);

    if (hist_bins > 0) {
        std::vector<std::size_t> normal(hist_bins, 0), anomalous(hist_bins, 0), total(hist_bins, 0);
        for (std::size_t r = 0; r < scores.size(); ++r) {
            const int bin = std::min(static_cast<int>(scores[r].score * hist_bins), hist_bins - 1);
            ++total[bin];
            if (!data.labels.empty()) ++(data.labels[r] == 0 ? normal : anomalous)[bin];
        }
        std::vector<std::vector<std::string>> hist_rows;
        for (int b = 0; b < hist_bins; ++b)
            hist_rows.push_back({std::to_string(b),
                                 smtad::csv::format_double(static_cast<double>(b) / hist_bins),
                                 smtad::csv::format_double(static_cast<double>(b + 1) / hist_bins),
                                 std::to_string(normal[b]), std::to_string(anomalous[b]),
                                 std::to_string(total[b])});
        smtad::csv::write_rows(out + "/hist.csv",
                               {"bin", "low", "high", "normal", "anomalous", "total"}, hist_rows);
    }
    return kExitOk;
}

int cmd_eval_scores(const std::string& scores_path, const std::string& out) {
    fs::create_directories(out);
    const auto table = smtad::csv::read_table(scores_path);
    if (!table.has_header) throw std::runtime_error("eval: scores CSV needs a header");
    std::size_t label_idx = table.header.size(), score_idx = table.header.size();
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        if (table.header[i] == "label") label_idx = i;
        if (table.header[i] == "anomaly_score") score_idx = i;
    }
    if (label_idx >= table.header.size() || score_idx >= table.header.size())
        throw std::runtime_error("eval: scores CSV needs 'label' and 'anomaly_score' columns");

    smtad::ScoredTestSet test;
    for (const auto& row : table.rows) {
        test.labels.push_back(std::stoi(row[label_idx]));
        test.anomaly_scores.push_back(std::stod(row[score_idx]));
    }
    smtad::EvalOutcome outcome;
    outcome.auroc = smtad::auroc(test);
    outcome.auprc = smtad::auprc(test);
    for (int y : test.labels) outcome.n_pos += y;
    outcome.n_neg = test.labels.size() - outcome.n_pos;
    write_json(out + "/metrics.json", outcome_json(outcome));
    std::cout << "auroc=" << outcome.auroc << " auprc=" << outcome.auprc << "\n";
    return kExitOk;
}

int cmd_eval_repeat(const DataFlags& data_flags, const TrainFlags& train_flags, int repeat,
                    const std::string& out) {
    fs::create_directories(out);
    const auto table = smtad::csv::read_table(data_flags.path);
    const auto raw = smtad::csv::to_raw_dataset(table, data_flags.label_col,
                                                split_list(data_flags.normal_labels));
    const auto config = to_experiment_config(data_flags, train_flags);

    std::vector<smtad::EvalOutcome> runs(repeat);
    smtad::parallel_for(repeat, 0, [&](std::size_t r) {
        const std::uint64_t seed =
            smtad::derive_seed(train_flags.seed, smtad::SeedStream::Realization, r);
        runs[r] = smtad::run_experiment(raw, config, seed, 1).eval;
    });

    std::vector<double> aurocs, auprcs;
    json run_docs = json::array();
    for (const auto& r : runs) {
        aurocs.push_back(r.auroc);
        auprcs.push_back(r.auprc);
        run_docs.push_back(outcome_json(r));
    }
    const auto roc = smtad::mean_std(aurocs);
    const auto prc = smtad::mean_std(auprcs);
    write_json(out + "/metrics.json", {{"realizations", repeat},
                                       {"auroc_mean", roc.mean},
                                       {"auroc_std", roc.std},
                                       {"auprc_mean", prc.mean},
                                       {"auprc_std", prc.std},
                                       {"seed", train_flags.seed},
                                       {"runs", run_docs}});
    std::cout << "auroc=" << roc.mean << "+-" << roc.std << " auprc=" << prc.mean << "+-"
              << prc.std << " over " << repeat << " realizations\n";
    return kExitOk;
}

void write_site_csv(const std::string& path, std::span<const double> values) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t l = 0; l < values.size(); ++l)
        rows.push_back({std::to_string(l + 1), smtad::csv::format_double(values[l])});
    smtad::csv::write_rows(path, {"site", "value"}, rows);
}

void write_matrix_csv(const std::string& path, const smtad::MIMatrix& m) {
    std::vector<std::string> header = {"site"};
    for (int l = 0; l < m.sites; ++l) header.push_back("site_" + std::to_string(l + 1));
    std::vector<std::vector<std::string>> rows;
    for (int k = 0; k < m.sites; ++k) {
        std::vector<std::string> row = {std::to_string(k + 1)};
        for (int l = 0; l < m.sites; ++l) row.push_back(smtad::csv::format_double(m.at(k, l)));
        rows.push_back(std::move(row));
    }
    smtad::csv::write_rows(path, header, rows);
}

int cmd_analyze(const std::string& model_path, const DataFlags& data_flags, const std::string& out,
                std::size_t subsample, std::uint64_t seed, double select_threshold) {
    fs::create_directories(out);
    const auto model = smtad::load_model(model_path);
    const auto data =
        read_loose(data_flags.path, data_flags.label_col, split_list(data_flags.normal_labels));
    if (data.labels.empty()) throw std::runtime_error("analyze: data needs a label column");

    // normalize through the model's CDFs (selection applied if the file has
    // the original width)
    std::vector<std::size_t> normal_rows, anomalous_rows;
    for (std::size_t r = 0; r < data.rows; ++r)
        (data.labels[r] == 0 ? normal_rows : anomalous_rows).push_back(r);
    if (normal_rows.empty() || anomalous_rows.empty())
        throw std::runtime_error("analyze: both normal and anomalous rows are required");

    std::mt19937_64 rng(smtad::derive_seed(seed, smtad::SeedStream::Subsample));
    auto subsample_rows = [&](std::vector<std::size_t>& rows_idx) {
        smtad::fisher_yates_shuffle(rows_idx, rng);
        if (rows_idx.size() > subsample) rows_idx.resize(subsample);
        std::sort(rows_idx.begin(), rows_idx.end());
    };
    subsample_rows(normal_rows);
    subsample_rows(anomalous_rows);

    const std::size_t model_cols = static_cast<std::size_t>(model.params.sites);
    auto gather_normalized = [&](const std::vector<std::size_t>& rows_idx) {
        std::vector<double> picked;
        picked.reserve(rows_idx.size() * data.cols);
        for (std::size_t r : rows_idx)
            picked.insert(picked.end(),
                          data.values.begin() + static_cast<std::ptrdiff_t>(r * data.cols),
                          data.values.begin() + static_cast<std::ptrdiff_t>((r + 1) * data.cols));
        // reuse the scoring path's selection handling, then rank-transform
        std::vector<double> selected;
        std::span<const double> input = picked;
        if (data.cols != model_cols) {
            for (std::size_t r = 0; r < rows_idx.size(); ++r)
                for (int s : model.selection)
                    selected.push_back(picked[r * data.cols + (s - 1)]);
            input = selected;
        }
        return smtad::transform(model.normalizer, input, rows_idx.size(), model_cols);
    };
    const auto normal_values = gather_normalized(normal_rows);
    const auto anomalous_values = gather_normalized(anomalous_rows);

    const auto report = smtad::cohort_profiles(model.params, normal_values, normal_rows.size(),
                                               anomalous_values, anomalous_rows.size(), 0);

    write_site_csv(out + "/entropy_normal.csv", report.entropy_normal.site_entropy);
    write_site_csv(out + "/entropy_anomalous.csv", report.entropy_anomalous.site_entropy);
    write_site_csv(out + "/amplification.csv", report.amplification);
    write_matrix_csv(out + "/mi_normal.csv", report.mi_normal);
    write_matrix_csv(out + "/mi_anomalous.csv", report.mi_anomalous);

    if (select_threshold > 0.0) {
        const auto selection = smtad::select_features(report.amplification, select_threshold);
        // report selection in original-site terms when the model was already selected
        std::vector<int> original;
        for (int s : selection)
            original.push_back(model.selection.empty() ? s : model.selection[s - 1]);
        smtad::save_selection(out + "/selection.json", original);
        std::cout << "selected " << original.size() << " sites\n";
    }
    return kExitOk;
}

int cmd_sweep(const DataFlags& data_flags, const TrainFlags& train_flags, const std::string& m_list,
              const std::string& p_list, int repeat, const std::string& out) {
    fs::create_directories(out);
    const auto table = smtad::csv::read_table(data_flags.path);
    const auto raw = smtad::csv::to_raw_dataset(table, data_flags.label_col,
                                                split_list(data_flags.normal_labels));
    const auto mixtures = parse_int_list(m_list);
    const auto resolutions = parse_int_list(p_list);
    if (mixtures.empty() || resolutions.empty() || repeat < 1)
        throw std::runtime_error("sweep: empty grid");

    struct Task {
        int m, p, realization;
        std::string marker;
    };
    std::vector<Task> tasks;
    for (int m : mixtures)
        for (int p : resolutions)
            for (int r = 0; r < repeat; ++r)
                tasks.push_back({m, p, r,
                                 out + "/cell_M" + std::to_string(m) + "_P" + std::to_string(p) +
                                     "_seed" + std::to_string(r) + ".json"});

    smtad::parallel_for(tasks.size(), 0, [&](std::size_t t) {
        const Task& task = tasks[t];
        if (fs::exists(task.marker)) {
            try {
                std::ifstream in(task.marker);
                const auto doc = json::parse(in);
                if (doc.contains("auroc")) return;  // completed cell: resume skips it
            } catch (...) {
            }
        }
        auto config = to_experiment_config(data_flags, train_flags);
        config.mixtures = task.m;
        config.resolutions = task.p;
        const std::uint64_t seed =
            smtad::derive_seed(train_flags.seed, smtad::SeedStream::Realization,
                               static_cast<std::uint64_t>(task.realization));
        const auto result = smtad::run_experiment(raw, config, seed, 1);
        json doc = outcome_json(result.eval);
        doc["M"] = task.m;
        doc["P"] = task.p;
        doc["realization"] = task.realization;
        const std::string tmp = task.marker + ".tmp";
        write_json(tmp, doc);
        fs::rename(tmp, task.marker);
    });

    // aggregate
    std::vector<std::vector<std::string>> rows;
    json cells = json::array();
    double best_auroc = -1.0, best_auprc = -1.0;
    json best_auroc_cell, best_auprc_cell;
    for (int m : mixtures) {
        for (int p : resolutions) {
            std::vector<double> aurocs, auprcs;
            for (int r = 0; r < repeat; ++r) {
                const std::string marker = out + "/cell_M" + std::to_string(m) + "_P" +
                                           std::to_string(p) + "_seed" + std::to_string(r) + ".json";
                std::ifstream in(marker);
                const auto doc = json::parse(in);
                aurocs.push_back(doc.at("auroc").get<double>());
                auprcs.push_back(doc.at("auprc").get<double>());
                rows.push_back({std::to_string(m), std::to_string(p), std::to_string(r),
                                smtad::csv::format_double(aurocs.back()),
                                smtad::csv::format_double(auprcs.back())});
            }
            const auto roc = smtad::mean_std(aurocs);
            const auto prc = smtad::mean_std(auprcs);
            json cell = {{"M", m},
                         {"P", p},
                         {"auroc_mean", roc.mean},
                         {"auroc_std", roc.std},
                         {"auprc_mean", prc.mean},
                         {"auprc_std", prc.std}};
            cells.push_back(cell);
            if (roc.mean > best_auroc) {
                best_auroc = roc.mean;
                best_auroc_cell = cell;
            }
            if (prc.mean > best_auprc) {
                best_auprc = prc.mean;
                best_auprc_cell = cell;
            }
        }
    }
    smtad::csv::write_rows(out + "/results.csv", {"M", "P", "realization", "auroc", "auprc"}, rows);
    write_json(out + "/summary.json", {{"cells", cells},
                                       {"best_by_auroc", best_auroc_cell},
                                       {"best_by_auprc", best_auprc_cell},
                                       {"realizations", repeat},
                                       {"seed", train_flags.seed}});
    std::cout << "best auroc " << best_auroc << " at M=" << best_auroc_cell["M"]
              << " P=" << best_auroc_cell["P"] << "; best auprc " << best_auprc
              << " at M=" << best_auprc_cell["M"] << " P=" << best_auprc_cell["P"] << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"SMT-AD: superposition-of-multiresolution-tensors anomaly detection"};
    app.require_subcommand(1);

    DataFlags data_flags;
    TrainFlags train_flags;
    std::string out = "smtad_out";
    std::string model_path, scores_path, m_list = "4", p_list = "2";
    int hist_bins = 0, repeat = 0;
    std::size_t subsample = 200;
    double select_threshold = 0.0;

    auto* train_cmd = app.add_subcommand("train", "fit normalizer, split, train, write model");
    add_data_flags(train_cmd, data_flags);
    add_train_flags(train_cmd, train_flags);
    train_cmd->add_option("--out", out, "output directory");

    auto* score_cmd = app.add_subcommand("score", "score rows through a trained model");
    score_cmd->add_option("--model", model_path, "model JSON")->required();
    add_data_flags(score_cmd, data_flags);
    score_cmd->add_option("--out", out, "output directory");
    score_cmd->add_option("--hist", hist_bins, "emit per-cohort score histogram with N bins");

    auto* eval_cmd = app.add_subcommand("eval", "rank metrics from scores or repeated runs");
    eval_cmd->add_option("--scores", scores_path, "scores CSV from `score`");
    add_data_flags(eval_cmd, data_flags, false);
    add_train_flags(eval_cmd, train_flags);
    eval_cmd->add_option("--repeat", repeat, "rerun split+train+eval over K derived seeds");
    eval_cmd->add_option("--out", out, "output directory");

    auto* analyze_cmd = app.add_subcommand("analyze", "entropy/MI profiles and feature selection");
    analyze_cmd->add_option("--model", model_path, "model JSON")->required();
    add_data_flags(analyze_cmd, data_flags);
    analyze_cmd->add_option("--out", out, "output directory");
    analyze_cmd->add_option("--subsample", subsample, "cohort subsample size");
    analyze_cmd->add_option("--seed", train_flags.seed, "subsample seed");
    analyze_cmd->add_option("--select-threshold", select_threshold,
                            "write selection.json for amplification >= threshold");

    auto* sweep_cmd = app.add_subcommand("sweep", "grid search over M and P");
    add_data_flags(sweep_cmd, data_flags);
    add_train_flags(sweep_cmd, train_flags, /*grid_shape=*/true);
    sweep_cmd->add_option("--M", m_list, "comma-separated M values");
    sweep_cmd->add_option("--P", p_list, "comma-separated P values");
    sweep_cmd->add_option("--repeat", repeat, "realizations per cell")->required();
    sweep_cmd->add_option("--out", out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(data_flags, train_flags, out);
        if (score_cmd->parsed()) return cmd_score(model_path, data_flags, out, hist_bins);
        if (eval_cmd->parsed()) {
            if (repeat > 0) return cmd_eval_repeat(data_flags, train_flags, repeat, out);
            if (scores_path.empty())
                throw std::runtime_error("eval: pass --scores or --repeat with --data");
            return cmd_eval_scores(scores_path, out);
        }
        if (analyze_cmd->parsed())
            return cmd_analyze(model_path, data_flags, out, subsample, train_flags.seed,
                               select_threshold);
        if (sweep_cmd->parsed())
            return cmd_sweep(data_flags, train_flags, m_list, p_list, repeat, out);
    } catch (const smtad::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const smtad::degenerate_state_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
