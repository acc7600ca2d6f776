#include <algorithm>
#include <cmath>
#include <numeric>

#include "fidbench/error.hpp"
#include "fidbench/fidelity.hpp"
#include "fidbench/kernels.hpp"
#include "fidbench/rng.hpp"

namespace fidbench::fidelity {

namespace {

void check_dimensions(const cart::BlackBoxModel& model, const Image& x,
                      std::span<const double> attribution) {
    if (model.n_features() != x.size()) {
        throw ValidationError("model expects " + std::to_string(model.n_features()) +
                              " features, image has " + std::to_string(x.size()) + " pixels");
    }
    if (attribution.size() != x.size()) {
        throw ValidationError("attribution has " + std::to_string(attribution.size()) +
                              " values, image has " + std::to_string(x.size()) + " pixels");
    }
}

// Moves k uniformly chosen elements of pool to its front (partial
// Fisher-Yates). pool may hold any permutation.
void choose_front(Rng& rng, std::vector<std::size_t>& pool, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
}

} // namespace

std::vector<std::size_t> morf_order(const PatchGrid& grid, std::span<const double> attribution) {
    std::vector<double> relevance(grid.count(), 0.0);
    for (std::size_t p = 0; p < grid.count(); ++p) {
        for (std::size_t i : grid.pixels(p)) {
            relevance[p] += attribution[i];
        }
    }
    std::vector<std::size_t> order(grid.count());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return relevance[a] > relevance[b]; });
    return order;
}

RegionPerturbationResult perturbation_curve(const cart::BlackBoxModel& model, const Image& x,
                                            std::span<const std::size_t> order,
                                            const PerturbationSpec& spec, std::size_t n_steps) {
    spec.validate();
    if (model.n_features() != x.size()) {
        throw ValidationError("model and image dimensions differ");
    }
    const PatchGrid grid{x.width(), x.height(), spec.patch_size};
    if (n_steps > order.size()) {
        throw ValidationError("region perturbation: " + std::to_string(n_steps) +
                              " steps requested, only " + std::to_string(order.size()) +
                              " patches");
    }
    RegionPerturbationResult out;
    out.order.assign(order.begin(), order.end());
    std::vector<double> work(x.pixels().begin(), x.pixels().end());
    const double f0 = model.predict(work);
    out.curve.push_back({0, f0});
    double drop_sum = 0.0;
    for (std::size_t k = 1; k <= n_steps; ++k) {
        for (std::size_t i : grid.pixels(order[k - 1])) {
            work[i] = baseline_value(spec, i);
        }
        const double fk = model.predict(work);
        out.curve.push_back({k, fk});
        drop_sum += f0 - fk;
    }
    out.aopc = drop_sum / static_cast<double>(n_steps + 1);
    const double span = std::fabs(f0 - out.curve.back().score);
    out.aopc_norm = out.aopc / std::max(span, 1e-12);
    return out;
}

RegionPerturbationResult region_perturbation(const cart::BlackBoxModel& model, const Image& x,
                                             std::span<const double> attribution,
                                             const PerturbationSpec& spec, std::size_t n_steps) {
    spec.validate();
    check_dimensions(model, x, attribution);
    const PatchGrid grid{x.width(), x.height(), spec.patch_size};
    if (n_steps > grid.count()) {
        throw ValidationError("region perturbation: " + std::to_string(n_steps) +
                              " steps exceed " + std::to_string(grid.count()) + " patches");
    }
    const std::size_t steps = n_steps == 0 ? grid.count() : n_steps;
    const auto order = morf_order(grid, attribution);
    return perturbation_curve(model, x, order, spec, steps);
}

MetricScore faithfulness_correlation(const cart::BlackBoxModel& model, const Image& x,
                                     std::span<const double> attribution,
                                     const PerturbationSpec& spec, std::size_t subset_size,
                                     std::size_t n_runs) {
    spec.validate();
    check_dimensions(model, x, attribution);
    if (subset_size < 1 || subset_size > x.size()) {
        throw ValidationError("faithfulness correlation: subset_size must be in [1, " +
                              std::to_string(x.size()) + "]");
    }
    if (n_runs < 2) {
        throw ValidationError("faithfulness correlation: n_runs must be >= 2");
    }
    Rng rng(spec.rng_seed);
    std::vector<std::size_t> pool(x.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::vector<double> work(x.pixels().begin(), x.pixels().end());
    const double f0 = model.predict(work);

    std::vector<double> removed(n_runs);
    std::vector<double> drops(n_runs);
    for (std::size_t run = 0; run < n_runs; ++run) {
        choose_front(rng, pool, subset_size);
        double a = 0.0;
        for (std::size_t j = 0; j < subset_size; ++j) {
            const std::size_t i = pool[j];
            a += attribution[i];
            work[i] = baseline_value(spec, i);
        }
        drops[run] = f0 - model.predict(work);
        removed[run] = a;
        for (std::size_t j = 0; j < subset_size; ++j) {
            work[pool[j]] = x.pixels()[pool[j]];
        }
    }
    const auto r = pearson(removed, drops);
    return {r.value, r.degenerate};
}

MetricScore faithfulness_estimate(const cart::BlackBoxModel& model, const Image& x,
                                  std::span<const double> attribution,
                                  const PerturbationSpec& spec, std::size_t feature_budget) {
    spec.validate();
    check_dimensions(model, x, attribution);
    if (feature_budget < 2) {
        throw ValidationError("faithfulness estimate: feature_budget must be >= 2");
    }
    std::vector<std::size_t> probed(x.size());
    std::iota(probed.begin(), probed.end(), std::size_t{0});
    if (x.size() > feature_budget) {
        Rng rng(spec.rng_seed);
        choose_front(rng, probed, feature_budget);
        probed.resize(feature_budget);
        std::sort(probed.begin(), probed.end());
    }
    std::vector<double> work(x.pixels().begin(), x.pixels().end());
    const double f0 = model.predict(work);
    std::vector<double> attr(probed.size());
    std::vector<double> drops(probed.size());
    for (std::size_t k = 0; k < probed.size(); ++k) {
        const std::size_t i = probed[k];
        work[i] = baseline_value(spec, i);
        drops[k] = f0 - model.predict(work);
        work[i] = x.pixels()[i];
        attr[k] = attribution[i];
    }
    const auto r = pearson(attr, drops);
    return {r.value, r.degenerate};
}

std::vector<PerturbationSample> infidelity_samples(const cart::BlackBoxModel& model, const Image& x,
                                                   const PerturbationSpec& spec,
                                                   std::size_t n_samples) {
    spec.validate();
    if (model.n_features() != x.size()) {
        throw ValidationError("model and image dimensions differ");
    }
    if (n_samples < 1) {
        throw ValidationError("infidelity: n_samples must be >= 1");
    }
    const std::size_t ph = std::min(spec.patch_size, x.height());
    const std::size_t pw = std::min(spec.patch_size, x.width());
    Rng rng(spec.rng_seed);
    std::vector<double> work(x.pixels().begin(), x.pixels().end());
    const double f0 = model.predict(work);

    std::vector<PerturbationSample> out(n_samples);
    for (auto& sample : out) {
        const auto row = static_cast<std::size_t>(rng.uniform_index(x.height() - ph + 1));
        const auto col = static_cast<std::size_t>(rng.uniform_index(x.width() - pw + 1));
        sample.delta.assign(x.size(), 0.0);
        for (std::size_t r = row; r < row + ph; ++r) {
            for (std::size_t c = col; c < col + pw; ++c) {
                const std::size_t i = r * x.width() + c;
                sample.mask.push_back(i);
                work[i] = baseline_value(spec, i);
                sample.delta[i] = x.pixels()[i] - work[i];
            }
        }
        sample.output_drop = f0 - model.predict(work);
        for (std::size_t i : sample.mask) {
            work[i] = x.pixels()[i];
        }
    }
    return out;
}

double infidelity(const cart::BlackBoxModel& model, const Image& x,
                  std::span<const double> attribution, const PerturbationSpec& spec,
                  std::size_t n_samples) {
    check_dimensions(model, x, attribution);
    const auto samples = infidelity_samples(model, x, spec, n_samples);
    double total = 0.0;
    for (const auto& s : samples) {
        const double gap = kernels::dot(s.delta, attribution) - s.output_drop;
        total += gap * gap;
    }
    return total / static_cast<double>(samples.size());
}

MetricResult aggregate(std::string metric, std::vector<std::pair<std::size_t, double>> per_image) {
    if (per_image.empty()) {
        throw ValidationError("aggregate: no scores for " + metric);
    }
    MetricResult out;
    out.metric = std::move(metric);
    out.per_image = std::move(per_image);
    const auto n = static_cast<double>(out.per_image.size());
    double sum = 0.0;
    out.min = out.per_image.front().second;
    out.max = out.min;
    for (const auto& [id, s] : out.per_image) {
        sum += s;
        out.min = std::min(out.min, s);
        out.max = std::max(out.max, s);
    }
    out.mean = sum / n;
    double ss = 0.0;
    for (const auto& [id, s] : out.per_image) {
        ss += (s - out.mean) * (s - out.mean);
    }
    out.std = std::sqrt(ss / n);
    return out;
}

} // namespace fidbench::fidelity
