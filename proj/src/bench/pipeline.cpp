#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <mutex>
#include <set>
#include <thread>

#include "fidbench/bench.hpp"
#include "fidbench/error.hpp"
#include "fidbench/explain.hpp"
#include "fidbench/kernels.hpp"
#include "fidbench/rng.hpp"

namespace fidbench::bench {

namespace fs = std::filesystem;

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string pfm_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%06zu.pfm", index);
    return buf;
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create directory " + dir + ": " + ec.message());
    }
}

std::vector<const datagen::ManifestRecord*> records_of(const datagen::DatasetManifest& m,
                                                       datagen::Split split) {
    std::vector<const datagen::ManifestRecord*> out;
    for (const auto& r : m.records) {
        if (r.split == split) {
            out.push_back(&r);
        }
    }
    return out;
}

Image load_record_image(const std::string& data_dir, const datagen::ManifestRecord& r) {
    const std::string path = (fs::path(data_dir) / r.filename).string();
    if (!fs::exists(path)) {
        throw IoError("missing image " + path);
    }
    return load_image(path);
}

cart::RegressionTree load_tree(const std::string& model_file) {
    const auto bytes = read_file(model_file);
    try {
        return cart::deserialize({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    } catch (const FormatError& e) {
        throw FormatError(model_file + ": " + e.message(), e.offset());
    }
}

struct LoadedSplit {
    cart::QuantizedMatrix features;
    std::vector<double> targets;
    std::size_t width = 0;
    std::size_t height = 0;
};

LoadedSplit load_split(const std::string& data_dir,
                       const std::vector<const datagen::ManifestRecord*>& records) {
    if (records.empty()) {
        return {cart::QuantizedMatrix(0, 0), {}, 0, 0};
    }
    const Image first = load_record_image(data_dir, *records.front());
    LoadedSplit out{cart::QuantizedMatrix(records.size(), first.size()), {}, first.width(),
                    first.height()};
    out.targets.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        const Image img = i == 0 ? first : load_record_image(data_dir, *records[i]);
        if (img.width() != out.width || img.height() != out.height) {
            throw ValidationError(records[i]->filename + ": dimensions differ from the split");
        }
        out.features.set_row(i, img.pixels());
        out.targets.push_back(records[i]->label);
    }
    return out;
}

std::vector<double> predict_all(const cart::RegressionTree& tree, const cart::QuantizedMatrix& m) {
    std::vector<double> out(m.rows());
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out[r] = tree.predict(m.row_values(r));
    }
    return out;
}

// Runs body(i) for i in [0, n) on a worker pool; rethrows the first error.
template <typename Body>
void parallel_for(std::size_t n, std::size_t threads, Body body) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min(threads, std::max<std::size_t>(1, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                return;
            }
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next = n;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

} // namespace

datagen::DatasetManifest cmd_datagen(const ExperimentConfig& config, const std::string& out_dir) {
    return datagen::generate_dataset(config.data, out_dir);
}

TrainReport cmd_train(const std::string& data_dir, const std::string& out_model) {
    const auto manifest = datagen::read_manifest(data_dir);
    const auto train_records = records_of(manifest, datagen::Split::train);
    const auto val_records = records_of(manifest, datagen::Split::validation);
    if (train_records.empty()) {
        throw ValidationError(data_dir + "/manifest.csv has no train records");
    }
    const LoadedSplit train = load_split(data_dir, train_records);
    const cart::RegressionTree tree = cart::train(train.features, train.targets);

    TrainReport report;
    report.n_train = train_records.size();
    report.n_validation = val_records.size();
    report.duplicates = cart::find_duplicates(train.features, train.targets);
    report.nodes = tree.nodes().size();
    report.leaves = tree.leaf_count();
    report.depth = tree.depth();
    report.train = cart::evaluate_regression(predict_all(tree, train.features), train.targets);
    if (!val_records.empty()) {
        const LoadedSplit val = load_split(data_dir, val_records);
        report.validation = cart::evaluate_regression(predict_all(tree, val.features), val.targets);
    }

    const fs::path model_path(out_model);
    if (model_path.has_parent_path()) {
        ensure_directory(model_path.parent_path().string());
    }
    write_file(out_model, cart::serialize(tree));
    std::string csv = "split,n,mae,mse\n";
    csv += "train," + std::to_string(report.n_train) + "," + format_double(report.train.mae) + "," +
           format_double(report.train.mse) + "\n";
    if (report.n_validation > 0) {
        csv += "validation," + std::to_string(report.n_validation) + "," +
               format_double(report.validation.mae) + "," + format_double(report.validation.mse) +
               "\n";
    }
    write_file((model_path.parent_path() / "regression.csv").string(), csv);
    return report;
}

ExplainReport cmd_explain(const std::string& model_file, const std::string& data_dir,
                          const std::string& out_dir, std::uint64_t seed) {
    const auto tree = load_tree(model_file);
    const auto manifest = datagen::read_manifest(data_dir);
    const auto val_records = records_of(manifest, datagen::Split::validation);
    ensure_directory(out_dir);

    Rng pick(derive_seed(seed, stream::premise_check, 0));
    std::set<std::size_t> checked;
    const std::size_t n_checks = std::min<std::size_t>(10, val_records.size());
    while (checked.size() < n_checks) {
        checked.insert(static_cast<std::size_t>(pick.uniform_index(val_records.size())));
    }

    ExplainReport report;
    for (std::size_t k = 0; k < val_records.size(); ++k) {
        const auto& r = *val_records[k];
        const Image img = load_record_image(data_dir, r);
        const auto expl = explain::explain_instance(tree, img.pixels(), img.width(), img.height());
        write_file((fs::path(out_dir) / pfm_filename(r.index)).string(),
                   write_saliency_pfm(expl.saliency));
        ++report.written;
        if (checked.count(k) == 0) {
            continue;
        }
        const auto values = expl.saliency.values();
        std::set<std::int32_t> path_features;
        for (const auto& step : tree.decision_path(img.pixels())) {
            path_features.insert(step.feature);
            if (explain::impurity_decrease(tree, step.node) > 0.0 &&
                values[static_cast<std::size_t>(step.feature)] == 0.0f) {
                throw Error("explain: path feature " + std::to_string(step.feature) +
                            " has zero saliency on image " + std::to_string(r.index));
            }
        }
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] != 0.0f && path_features.count(static_cast<std::int32_t>(i)) == 0) {
                throw Error("explain: saliency outside the decision path on image " +
                            std::to_string(r.index));
            }
        }
        const auto premise = explain::check_zero_saliency_invariance(
            tree, img.pixels(), values, derive_seed(seed, stream::premise_check, r.index));
        if (!premise.holds) {
            throw Error("explain: zero-saliency perturbation changed the prediction on image " +
                        std::to_string(r.index));
        }
        ++report.spot_checked;
    }
    return report;
}

EvaluateReport cmd_evaluate(const std::string& model_file, const std::string& data_dir,
                            const std::string& expl_dir, const MetricParams& requested,
                            std::uint64_t master_seed, const std::string& out_dir) {
    const auto tree = load_tree(model_file);
    const auto manifest = datagen::read_manifest(data_dir);
    const auto val_records = records_of(manifest, datagen::Split::validation);
    if (val_records.empty()) {
        throw ValidationError(data_dir + "/manifest.csv has no validation records");
    }

    std::vector<Image> images;
    std::vector<std::vector<double>> attributions;
    for (const auto* r : val_records) {
        images.push_back(load_record_image(data_dir, *r));
        const std::string pfm = (fs::path(expl_dir) / pfm_filename(r->index)).string();
        if (!fs::exists(pfm)) {
            throw IoError("missing saliency for image " + std::to_string(r->index) + " (" + pfm +
                          ")");
        }
        const SaliencyMap map = load_saliency(pfm);
        if (map.width() != images.back().width() || map.height() != images.back().height() ||
            images.back().size() != tree.n_features()) {
            throw ValidationError("image " + std::to_string(r->index) +
                                  ": image, saliency and model dimensions disagree");
        }
        attributions.push_back(map.as_doubles());
    }

    const std::size_t width = images.front().width();
    const std::size_t height = images.front().height();
    MetricParams params = requested.resolved(width, height);
    if (params.baseline == fidelity::Baseline::mean && params.mean_value == 0.0) {
        double total = 0.0;
        std::size_t count = 0;
        for (const auto* r : records_of(manifest, datagen::Split::train)) {
            const Image img = load_record_image(data_dir, *r);
            total += kernels::sum(img.pixels());
            count += img.size();
        }
        params.mean_value = count > 0 ? total / static_cast<double>(count) : 0.0;
    }

    constexpr std::size_t n_metrics = std::size(metric_names);
    const std::size_t n = images.size();
    std::vector<std::array<double, n_metrics>> scores(n);
    std::vector<std::array<bool, n_metrics>> flags(n);

    parallel_for(n, params.threads, [&](std::size_t k) {
        const std::size_t id = val_records[k]->index;
        const Image& img = images[k];
        const auto& attr = attributions[k];
        auto spec_for = [&](std::uint64_t stream_id) {
            fidelity::PerturbationSpec spec;
            spec.patch_size = params.patch_size;
            spec.baseline = params.baseline;
            spec.mean_value = params.mean_value;
            spec.rng_seed = derive_seed(master_seed, stream_id, id);
            return spec;
        };
        const auto rp = fidelity::region_perturbation(
            tree, img, attr, spec_for(stream::region_perturbation), params.rp_steps);
        const auto fc = fidelity::faithfulness_correlation(
            tree, img, attr, spec_for(stream::faithfulness_correlation), params.fc_subset_size,
            params.fc_runs);
        const auto fe = fidelity::faithfulness_estimate(
            tree, img, attr, spec_for(stream::faithfulness_estimate), params.fe_budget);
        const double inf =
            fidelity::infidelity(tree, img, attr, spec_for(stream::infidelity), params.inf_samples);

        const bool flat_curve = std::fabs(rp.curve.front().score - rp.curve.back().score) < 1e-12;
        scores[k] = {rp.aopc, rp.aopc_norm, fc.score, fe.score, inf};
        flags[k] = {false, flat_curve, fc.degenerate, fe.degenerate, false};
    });

    ensure_directory(out_dir);
    EvaluateReport report;
    report.params = params;
    std::string results = "metric,image_id,score,degenerate_flag\n";
    std::string summary = "metric,mean,std,min,max,n,params_digest\n";
    const std::string digest = params.digest();
    for (std::size_t m = 0; m < n_metrics; ++m) {
        std::vector<std::pair<std::size_t, double>> per_image;
        std::size_t degenerate = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t id = val_records[k]->index;
            per_image.emplace_back(id, scores[k][m]);
            degenerate += flags[k][m] ? 1 : 0;
            results += std::string(metric_names[m]) + "," + std::to_string(id) + "," +
                       format_double(scores[k][m]) + "," + (flags[k][m] ? "1" : "0") + "\n";
        }
        auto agg = fidelity::aggregate(metric_names[m], std::move(per_image));
        summary += agg.metric + "," + format_double(agg.mean) + "," + format_double(agg.std) + "," +
                   format_double(agg.min) + "," + format_double(agg.max) + "," +
                   std::to_string(agg.per_image.size()) + "," + digest + "\n";
        report.metrics.push_back(std::move(agg));
        report.degenerate.push_back(degenerate);
    }
    write_file((fs::path(out_dir) / "results.csv").string(), results);
    write_file((fs::path(out_dir) / "summary.csv").string(), summary);

    const auto model_bytes = read_file(model_file);
    std::string provenance = params.format();
    provenance += "master_seed=" + std::to_string(master_seed) + "\n";
    provenance += "model_digest=" +
                  digest_hex({reinterpret_cast<const char*>(model_bytes.data()), model_bytes.size()}) +
                  "\n";
    provenance += "data_digest=" + digest_hex(datagen::format_manifest(manifest)) + "\n";
    provenance += "kernels=" + std::string(kernels::isa_name(kernels::active().isa)) + "\n";
    write_file((fs::path(out_dir) / "params.txt").string(), provenance);
    return report;
}

PipelineReport run_pipeline(const ExperimentConfig& config, const PipelinePaths& paths) {
    PipelineReport report;
    cmd_datagen(config, paths.data());
    report.train = cmd_train(paths.data(), paths.model());
    report.explain = cmd_explain(paths.model(), paths.data(), paths.expl(), config.data.master_seed);
    report.evaluate = cmd_evaluate(paths.model(), paths.data(), paths.expl(), config.metrics,
                                   config.data.master_seed, paths.eval());
    return report;
}

} // namespace fidbench::bench
