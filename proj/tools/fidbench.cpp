// Command-line driver: datagen, train, explain, evaluate, report, run.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fidbench/bench.hpp"
#include "fidbench/error.hpp"
#include "fidbench/image.hpp"
#include "fidbench/kernels.hpp"

namespace {

using namespace fidbench;

struct Common {
    std::string config_file;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_out_required = true) {
    cmd->add_option("--config", c.config_file, "flat key=value config file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--preset", c.preset, "experiment1 | experiment2 | full1 | full2 | tiny");
    cmd->add_option("--seed", c.seed, "master seed (overrides config)");
    auto* out = cmd->add_option("--out", c.out, "output path");
    if (with_out_required) {
        out->required();
    }
}

bench::ExperimentConfig load_experiment(const Common& c) {
    KeyValues kv;
    if (!c.config_file.empty()) {
        kv = KeyValues::load(c.config_file);
    }
    if (!c.preset.empty()) {
        kv.set("preset", c.preset);
    }
    if (c.seed) {
        kv.set("master_seed", std::to_string(*c.seed));
    }
    return bench::experiment_from_keys(kv);
}

void print_train(const bench::TrainReport& r) {
    std::printf("train: n=%zu mae=%.17g mse=%.17g\n", r.n_train, r.train.mae, r.train.mse);
    if (r.n_validation > 0) {
        std::printf("validation: n=%zu mae=%.17g mse=%.17g\n", r.n_validation,
                    r.validation.mae, r.validation.mse);
    }
    std::printf("tree: nodes=%zu leaves=%zu depth=%zu\n", r.nodes, r.leaves, r.depth);
    std::printf("duplicates: rows=%zu conflicting=%zu\n", r.duplicates.duplicate_rows,
                r.duplicates.conflicting_rows);
}

void print_evaluate(const bench::EvaluateReport& r) {
    for (std::size_t m = 0; m < r.metrics.size(); ++m) {
        const auto& s = r.metrics[m];
        std::printf("%s: mean=%.6f std=%.6f min=%.6f max=%.6f degenerate=%zu\n", s.metric.c_str(),
                    s.mean, s.std, s.min, s.max, r.degenerate[m]);
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fidelity metric benchmark on synthetic images"};
    app.require_subcommand(1);

    Common gen;
    auto* datagen_cmd = app.add_subcommand("datagen", "generate a labelled image dataset");
    add_common(datagen_cmd, gen);

    std::string data_dir;
    std::string model_file;
    std::string expl_dir;

    Common tr;
    auto* train_cmd = app.add_subcommand("train", "fit the regression tree");
    add_common(train_cmd, tr);
    train_cmd->add_option("--data", data_dir, "dataset directory")->required();

    Common ex;
    auto* explain_cmd = app.add_subcommand("explain", "write saliency maps for validation images");
    add_common(explain_cmd, ex);
    explain_cmd->add_option("--model", model_file, "tree file")->required();
    explain_cmd->add_option("--data", data_dir, "dataset directory")->required();

    Common ev;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score the saliency maps");
    add_common(evaluate_cmd, ev);
    evaluate_cmd->add_option("--model", model_file, "tree file")->required();
    evaluate_cmd->add_option("--data", data_dir, "dataset directory")->required();
    evaluate_cmd->add_option("--expl", expl_dir, "saliency directory")->required();

    std::vector<std::string> summaries;
    bool report_csv = false;
    std::string report_out;
    auto* report_cmd = app.add_subcommand("report", "tabulate summary.csv files");
    report_cmd->add_option("summaries", summaries, "summary.csv files")
        ->required()
        ->check(CLI::ExistingFile);
    report_cmd->add_flag("--csv", report_csv, "machine-readable output");
    report_cmd->add_option("--out", report_out, "write the table to a file");

    Common rn;
    auto* run_cmd = app.add_subcommand("run", "datagen, train, explain and evaluate in one go");
    add_common(run_cmd, rn);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*datagen_cmd) {
            const auto config = load_experiment(gen);
            const auto manifest = bench::cmd_datagen(config, gen.out);
            std::printf("wrote %zu images to %s\n", manifest.records.size(), gen.out.c_str());
        } else if (*train_cmd) {
            print_train(bench::cmd_train(data_dir, tr.out));
        } else if (*explain_cmd) {
            const auto r = bench::cmd_explain(model_file, data_dir, ex.out, ex.seed.value_or(0));
            std::printf("wrote %zu saliency maps, spot-checked %zu\n", r.written, r.spot_checked);
        } else if (*evaluate_cmd) {
            const auto config = load_experiment(ev);
            const auto r = bench::cmd_evaluate(model_file, data_dir, expl_dir, config.metrics,
                                               config.data.master_seed, ev.out);
            std::printf("kernels: %s\n", kernels::isa_name(kernels::active().isa).data());
            print_evaluate(r);
        } else if (*report_cmd) {
            const std::string table = bench::cmd_report(summaries, report_csv);
            if (report_out.empty()) {
                std::fputs(table.c_str(), stdout);
            } else {
                write_file(report_out, table);
            }
        } else if (*run_cmd) {
            const auto config = load_experiment(rn);
            const auto r = bench::run_pipeline(config, {rn.out});
            print_train(r.train);
            std::printf("explain: wrote %zu, spot-checked %zu\n", r.explain.written,
                        r.explain.spot_checked);
            print_evaluate(r.evaluate);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "fidbench: error: %s\n", e.what());
        return 1;
    }
    return 0;
}
