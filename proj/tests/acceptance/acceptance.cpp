// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Reference values from the original study are
// printed for comparison only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "fidbench/bench.hpp"
#include "fidbench/error.hpp"
#include "fidbench/explain.hpp"
#include "fidbench/fidelity.hpp"
#include "fidbench/kernels.hpp"
#include "fidbench/rng.hpp"

using namespace fidbench;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) {
    return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void verdict(const char* id, bool ok, const std::string& what, double secs, double limit) {
    const bool in_time = secs < limit;
    std::printf("[%s] %s %s (%.2f s, limit %.0f s)\n", ok && in_time ? "PASS" : "FAIL", id,
                what.c_str(), secs, limit);
    if (!in_time) {
        std::printf("       runtime limit exceeded\n");
    }
    failures += ok && in_time ? 0 : 1;
    std::fflush(stdout);
}

Image random_image(Rng& rng, std::size_t w, std::size_t h) {
    std::vector<double> px(w * h);
    for (auto& v : px) {
        v = rng.uniform01();
    }
    return Image(w, h, std::move(px));
}

std::vector<double> random_weights(Rng& rng, std::size_t n) {
    std::vector<double> w(n);
    for (auto& v : w) {
        v = rng.uniform01() * 2.0 - 1.0;
    }
    return w;
}

void criterion_linear_oracles() {
    const auto start = Clock::now();
    double worst_fc = 0.0;
    double worst_fe = 0.0;
    double worst_inf = 0.0;
    std::size_t degenerate = 0;
    const auto params = bench::MetricParams{}.resolved(16, 16);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Rng rng(derive_seed(1000, seed));
        const Image x = random_image(rng, 16, 16);
        const auto w = random_weights(rng, 256);
        const fidelity::LinearModel model(w, rng.uniform01());
        std::vector<double> contrib(256);
        for (std::size_t i = 0; i < 256; ++i) {
            contrib[i] = w[i] * x.pixels()[i];
        }
        fidelity::PerturbationSpec spec;
        spec.patch_size = params.patch_size;
        spec.rng_seed = seed;
        const auto fc = fidelity::faithfulness_correlation(model, x, contrib, spec,
                                                           params.fc_subset_size, params.fc_runs);
        const auto fe = fidelity::faithfulness_estimate(model, x, contrib, spec, params.fe_budget);
        const double inf = fidelity::infidelity(model, x, w, spec, params.inf_samples);
        degenerate += (fc.degenerate ? 1 : 0) + (fe.degenerate ? 1 : 0);
        worst_fc = std::max(worst_fc, std::fabs(fc.score - 1.0));
        worst_fe = std::max(worst_fe, std::fabs(fe.score - 1.0));
        worst_inf = std::max(worst_inf, std::fabs(inf));
    }
    const bool ok = worst_fc <= 1e-9 && worst_fe <= 1e-9 && worst_inf <= 1e-10 && degenerate == 0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "linear-model oracles, 50 seeds on 16x16: max|FC-1|=%.2e max|FE-1|=%.2e "
                  "max|Inf|=%.2e degenerate=%zu",
                  worst_fc, worst_fe, worst_inf, degenerate);
    verdict("C1", ok, buf, seconds_since(start), 30);
}

void criterion_rp_optimality() {
    const auto start = Clock::now();
    fidelity::PerturbationSpec spec;
    spec.patch_size = 1;

    // Hand case: sum of [4,3,2,1], scaled by 1/4 into pixel range with weight 4.
    const fidelity::LinearModel sum4(std::vector<double>(4, 4.0));
    const Image hand(2, 2, std::vector<double>{1.0, 0.75, 0.5, 0.25});
    const std::vector<double> hand_saliency(hand.pixels().begin(), hand.pixels().end());
    const double hand_aopc = fidelity::region_perturbation(sum4, hand, hand_saliency, spec, 4).aopc;
    bool ok = std::fabs(hand_aopc - 6.0) <= 1e-12;

    std::size_t orderings = 0;
    std::size_t violations = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(derive_seed(2000, seed));
        const Image x = random_image(rng, 3, 2);
        const auto w = random_weights(rng, 6);
        const fidelity::LinearModel model(w);
        std::vector<double> a(6);
        for (std::size_t i = 0; i < 6; ++i) {
            a[i] = w[i] * x.pixels()[i];
        }
        const double morf = fidelity::region_perturbation(model, x, a, spec, 0).aopc;
        std::vector<std::size_t> perm{0, 1, 2, 3, 4, 5};
        do {
            // Independent aopc: remove pixels in order, average the drops.
            std::vector<double> cur(x.pixels().begin(), x.pixels().end());
            auto f = [&] {
                double s = 0.0;
                for (std::size_t i = 0; i < 6; ++i) {
                    s += w[i] * cur[i];
                }
                return s;
            };
            const double f0 = f();
            double total = 0.0;
            for (std::size_t p : perm) {
                cur[p] = 0.0;
                total += f0 - f();
            }
            const double other = total / 7.0;
            ++orderings;
            violations += morf + 1e-12 < other ? 1 : 0;
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    ok = ok && violations == 0 && orderings == 20 * 720;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "RP MoRF optimality: hand aopc=%.15g (expect 6), %zu orderings checked, %zu "
                  "beat MoRF",
                  hand_aopc, orderings, violations);
    verdict("C2", ok, buf, seconds_since(start), 10);
}

void criterion_round_trips() {
    const auto start = Clock::now();
    Rng rng(7000);
    std::size_t pgm_bad = 0;
    std::size_t pfm_bad = 0;
    std::size_t tree_bad = 0;
    for (int k = 0; k < 100; ++k) {
        const auto w = static_cast<std::size_t>(rng.uniform_int(1, 64));
        const auto h = static_cast<std::size_t>(rng.uniform_int(1, 64));
        const Image img = random_image(rng, w, h);
        const Image back = read_image_pgm(write_image_pgm(img));
        for (std::size_t i = 0; i < img.size(); ++i) {
            if (!(std::fabs(back.pixels()[i] - img.pixels()[i]) <= 1.0 / 255.0)) {
                ++pgm_bad;
                break;
            }
        }

        std::vector<float> v(w * h);
        for (auto& f : v) {
            f = static_cast<float>(rng.uniform01() * std::pow(10.0, rng.uniform_int(-6, 6)));
        }
        const SaliencyMap map(w, h, v);
        const SaliencyMap map_back = read_saliency_pfm(write_saliency_pfm(map));
        if (map_back.size() != map.size() ||
            std::memcmp(map_back.values().data(), v.data(), v.size() * sizeof(float)) != 0) {
            ++pfm_bad;
        }

        cart::FeatureMatrix x(40, 4);
        std::vector<double> y(40);
        for (std::size_t r = 0; r < 40; ++r) {
            x.set_row(r, random_weights(rng, 4));
            y[r] = rng.uniform01() * std::pow(10.0, rng.uniform_int(-8, 8));
        }
        const auto tree = cart::train(x, y, {2, 1, cart::SplitSearch::sorted});
        const auto text = cart::serialize(tree);
        const auto tree_back = cart::deserialize(text);
        bool same = tree_back.nodes().size() == tree.nodes().size();
        for (std::size_t i = 0; same && i < tree.nodes().size(); ++i) {
            const auto& a = tree.nodes()[i];
            const auto& b = tree_back.nodes()[i];
            same = std::memcmp(&a.threshold, &b.threshold, sizeof(double)) == 0 &&
                   std::memcmp(&a.value, &b.value, sizeof(double)) == 0 &&
                   std::memcmp(&a.impurity, &b.impurity, sizeof(double)) == 0 &&
                   a.feature == b.feature && a.left == b.left && a.right == b.right &&
                   a.n_samples == b.n_samples;
        }
        tree_bad += same ? 0 : 1;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "file round trips, 100 cases each: PGM failures=%zu PFM failures=%zu tree "
                  "failures=%zu",
                  pgm_bad, pfm_bad, tree_bad);
    verdict("C7", pgm_bad == 0 && pfm_bad == 0 && tree_bad == 0, buf, seconds_since(start), 10);
}

struct DeskRun {
    bench::PipelinePaths paths;
    bench::PipelineReport report;
    double datagen_seconds = 0.0;
    double train_seconds = 0.0;
    double explain_seconds = 0.0;
    double evaluate_seconds = 0.0;
    double total() const {
        return datagen_seconds + train_seconds + explain_seconds + evaluate_seconds;
    }
};

DeskRun run_desk(const bench::ExperimentConfig& config, const std::string& root) {
    DeskRun run;
    run.paths.root = root;
    fs::remove_all(root);
    auto t = Clock::now();
    bench::cmd_datagen(config, run.paths.data());
    run.datagen_seconds = seconds_since(t);
    t = Clock::now();
    run.report.train = bench::cmd_train(run.paths.data(), run.paths.model());
    run.train_seconds = seconds_since(t);
    t = Clock::now();
    run.report.explain = bench::cmd_explain(run.paths.model(), run.paths.data(), run.paths.expl(),
                                            config.data.master_seed);
    run.explain_seconds = seconds_since(t);
    t = Clock::now();
    run.report.evaluate =
        bench::cmd_evaluate(run.paths.model(), run.paths.data(), run.paths.expl(), config.metrics,
                            config.data.master_seed, run.paths.eval());
    run.evaluate_seconds = seconds_since(t);
    std::printf("  %s: datagen %.1f s, train %.1f s, explain %.1f s, evaluate %.1f s\n",
                root.c_str(), run.datagen_seconds, run.train_seconds, run.explain_seconds,
                run.evaluate_seconds);
    std::fflush(stdout);
    return run;
}

const fidelity::MetricResult& metric(const DeskRun& run, const std::string& name) {
    for (const auto& m : run.report.evaluate.metrics) {
        if (m.metric == name) {
            return m;
        }
    }
    throw Error("metric " + name + " missing");
}

void criterion_exact_fit(const DeskRun& e1) {
    const auto& t = e1.report.train;
    std::printf("  training duplicates: %zu rows repeat an earlier image, %zu of them with a "
                "different label\n",
                t.duplicates.duplicate_rows, t.duplicates.conflicting_rows);
    std::printf("  tree: %zu nodes, %zu leaves, depth %zu\n", t.nodes, t.leaves, t.depth);
    const bool ok = t.train.mse == 0.0 && std::isfinite(t.validation.mae);
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "exact fit on experiment1: train MSE=%.3g, validation MAE=%.4f "
                  "(reference MAE at full scale 0.265)",
                  t.train.mse, t.validation.mae);
    if (t.duplicates.conflicting_rows > 0 && t.train.mse != 0.0) {
        std::printf("  conflicting duplicates make a zero training error impossible\n");
    }
    verdict("C3", ok, buf, e1.datagen_seconds + e1.train_seconds, 600);
}

void criterion_premise(const DeskRun& e1, std::uint64_t seed) {
    const auto start = Clock::now();
    const auto bytes = read_file(e1.paths.model());
    const auto tree = cart::deserialize({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
    const auto manifest = datagen::read_manifest(e1.paths.data());
    std::vector<const datagen::ManifestRecord*> val;
    for (const auto& r : manifest.records) {
        if (r.split == datagen::Split::validation) {
            val.push_back(&r);
        }
    }
    // Seeded choice of 100 validation images.
    std::vector<std::size_t> idx(val.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    Rng rng(derive_seed(seed, stream::premise_check, 1));
    const std::size_t n = std::min<std::size_t>(100, idx.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::swap(idx[i], idx[i + rng.uniform_index(idx.size() - i)]);
    }
    std::size_t held = 0;
    std::size_t perturbed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = *val[idx[i]];
        const Image img = load_image((fs::path(e1.paths.data()) / r.filename).string());
        const auto expl = explain::explain_instance(tree, img.pixels(), img.width(), img.height());
        const auto check = explain::check_zero_saliency_invariance(
            tree, img.pixels(), expl.saliency.values(), derive_seed(seed, stream::premise_check, r.index));
        held += check.holds ? 1 : 0;
        perturbed += check.perturbed_pixels;
    }
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "zero-saliency invariance: %zu/%zu validation images unchanged, %zu pixels moved",
                  held, n, perturbed);
    verdict("C4", held == n && n == 100, buf, seconds_since(start), 60);
}

void print_metrics(const DeskRun& run, const char* label) {
    for (std::size_t m = 0; m < run.report.evaluate.metrics.size(); ++m) {
        const auto& r = run.report.evaluate.metrics[m];
        std::printf("  %s %-26s mean=%-12.6g std=%-12.6g min=%-12.6g max=%-12.6g degenerate=%zu\n",
                    label, r.metric.c_str(), r.mean, r.std, r.min, r.max,
                    run.report.evaluate.degenerate[m]);
    }
}

void criterion_thesis(const DeskRun& e1, const DeskRun& e2) {
    print_metrics(e1, "exp1");
    print_metrics(e2, "exp2");
    std::printf("  reference (full scale): exp1 FC 0.7866 +/- 0.2963, exp2 FC 0.2979; exp1 FE "
                "0.7751 +/- 0.2888; exp1 infidelity 5.9897 +/- 23.6442, max 481.10; exp2 "
                "infidelity max 4.78e10\n");
    const auto& fc1 = metric(e1, "faithfulness_correlation");
    const auto& fc2 = metric(e2, "faithfulness_correlation");
    const auto& inf1 = metric(e1, "infidelity");
    const auto& inf2 = metric(e2, "infidelity");
    const bool a = fc1.mean < 0.95 && fc1.std > 0.05;
    const bool b = fc2.mean < fc1.mean;
    const bool c = inf1.mean > 0.0 && inf2.mean > 0.0 && inf2.max > inf1.max;
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "directional thesis: (a) exp1 FC %.4f +/- %.4f [%s] (b) exp2 FC %.4f < exp1 "
                  "[%s] (c) infidelity means %.4g / %.4g, max exp2 %.4g > exp1 %.4g [%s]",
                  fc1.mean, fc1.std, a ? "ok" : "no", fc2.mean, b ? "ok" : "no", inf1.mean,
                  inf2.mean, inf2.max, inf1.max, c ? "ok" : "no");
    verdict("C5", a && b && c, buf, e1.total() + e2.total(), 1800);
}

void criterion_determinism(const DeskRun& e1, const DeskRun& again) {
    const auto a = read_file(e1.paths.eval() + "/results.csv");
    const auto b = read_file(again.paths.eval() + "/results.csv");
    const auto ta = read_file(e1.paths.model());
    const auto tb = read_file(again.paths.model());
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "determinism: results.csv %zu vs %zu bytes, identical=%s; tree identical=%s",
                  a.size(), b.size(), a == b ? "yes" : "no", ta == tb ? "yes" : "no");
    verdict("C6", a == b && ta == tb, buf, again.total(), 1800);
}

} // namespace

int main(int argc, char** argv) {
    std::string work = (fs::temp_directory_path() / "fidbench_acceptance").string();
    bool quick = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--work") == 0 && i + 1 < argc) {
            work = argv[++i];
        } else if (std::strcmp(argv[i], "--quick") == 0) {
            quick = true; // skip the desk-scale criteria
        } else {
            std::fprintf(stderr, "usage: acceptance [--work DIR] [--quick]\n");
            return 2;
        }
    }
    std::printf("acceptance suite, kernels: %s\n",
                std::string(kernels::isa_name(kernels::active().isa)).c_str());

    try {
        criterion_linear_oracles();
        criterion_rp_optimality();
        criterion_round_trips();
        if (!quick) {
            const std::uint64_t seed = 20240101;
            auto e1 = bench::preset("experiment1");
            auto e2 = bench::preset("experiment2");
            e1.data.master_seed = seed;
            e2.data.master_seed = seed;
            const auto run1 = run_desk(e1, work + "/experiment1");
            criterion_exact_fit(run1);
            criterion_premise(run1, seed);
            const auto run2 = run_desk(e2, work + "/experiment2");
            criterion_thesis(run1, run2);
            const auto rerun = run_desk(e1, work + "/experiment1_rerun");
            criterion_determinism(run1, rerun);
        }
    } catch (const std::exception& e) {
        std::printf("[FAIL] aborted: %s\n", e.what());
        return 1;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
