#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fidbench/config.hpp"
#include "fidbench/datagen.hpp"
#include "fidbench/fidelity.hpp"
#include "fidbench/tree.hpp"

namespace fidbench::bench {

// Zero-valued sizes resolve from the image dimensions.
struct MetricParams {
    std::size_t patch_size = 0;     // width / 16
    fidelity::Baseline baseline = fidelity::Baseline::black;
    double mean_value = 0.0;        // Baseline::mean; filled from the training split when 0
    std::size_t rp_steps = 0;       // every patch
    std::size_t fc_subset_size = 0; // n_features / 128
    std::size_t fc_runs = 100;
    std::size_t fe_budget = 4096;
    std::size_t inf_samples = 200;
    std::size_t threads = 0;        // hardware concurrency

    MetricParams resolved(std::size_t width, std::size_t height) const;
    // Canonical key=value text; excludes threads, which never changes results.
    std::string format() const;
    std::string digest() const;
};

void apply_metric_keys(MetricParams& params, const KeyValues& kv);

struct ExperimentConfig {
    std::string name = "experiment1";
    datagen::GenerationConfig data;
    MetricParams metrics;
};

// experiment1 / experiment2: desk-scale, 64x64, 5000 train / 500 validation,
// uniform vs procedural background. full1 / full2: 128x128, 50000 / 2000.
// tiny: 32x32, 8 / 2, for smoke tests.
ExperimentConfig preset(const std::string& name);
std::vector<std::string> preset_names();

// Starts from kv["preset"] (default experiment1) and applies the remaining
// keys on top.
ExperimentConfig experiment_from_keys(const KeyValues& kv);

datagen::DatasetManifest cmd_datagen(const ExperimentConfig& config, const std::string& out_dir);

struct TrainReport {
    cart::RegressionScores train;
    cart::RegressionScores validation;
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    cart::DuplicateReport duplicates;
    std::size_t nodes = 0;
    std::size_t leaves = 0;
    std::size_t depth = 0;
};

// Trains on split == train, writes the tree file and regression.csv (MAE and
// MSE per split) next to it.
TrainReport cmd_train(const std::string& data_dir, const std::string& out_model);

struct ExplainReport {
    std::size_t written = 0;
    std::size_t spot_checked = 0;
};

// Writes one {index:06}.pfm per validation image into out_dir. Spot-checks
// the support and zero-saliency invariance on 10 seeded images.
ExplainReport cmd_explain(const std::string& model_file, const std::string& data_dir,
                          const std::string& out_dir, std::uint64_t seed = 0);

struct EvaluateReport {
    std::vector<fidelity::MetricResult> metrics;
    std::vector<std::size_t> degenerate; // per metric
    MetricParams params;
};

inline constexpr const char* metric_names[] = {
    "region_perturbation", "region_perturbation_norm", "faithfulness_correlation",
    "faithfulness_estimate", "infidelity"};

// Runs every metric on every validation image; writes results.csv,
// summary.csv and params.txt into out_dir. Results are independent of the
// thread count.
EvaluateReport cmd_evaluate(const std::string& model_file, const std::string& data_dir,
                            const std::string& expl_dir, const MetricParams& params,
                            std::uint64_t master_seed, const std::string& out_dir);

struct SummaryRow {
    std::string metric;
    double mean = 0.0;
    double std = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
    std::string params_digest;
};

struct ResultRow {
    std::string metric;
    std::size_t image_id = 0;
    double score = 0.0;
    bool degenerate = false;
};

std::vector<SummaryRow> read_summary(const std::string& path);
std::vector<ResultRow> read_results(const std::string& path);

// Metric x experiment table. Experiment labels are the summary files' parent
// directory names.
std::string cmd_report(const std::vector<std::string>& summary_files, bool csv = false);

struct PipelinePaths {
    std::string root;
    std::string data() const { return root + "/data"; }
    std::string model() const { return root + "/model.tree"; }
    std::string expl() const { return root + "/expl"; }
    std::string eval() const { return root + "/eval"; }
};

// datagen -> train -> explain -> evaluate under root.
struct PipelineReport {
    TrainReport train;
    ExplainReport explain;
    EvaluateReport evaluate;
};

PipelineReport run_pipeline(const ExperimentConfig& config, const PipelinePaths& paths);

} // namespace fidbench::bench
