#include "fidbench/explain.hpp"

#include <algorithm>
#include <limits>

#include "fidbench/error.hpp"
#include "fidbench/rng.hpp"

namespace fidbench::explain {

double impurity_decrease(const cart::RegressionTree& tree, std::int32_t node) {
    const auto nodes = tree.nodes();
    const cart::TreeNode& v = nodes[static_cast<std::size_t>(node)];
    if (v.is_leaf()) {
        return 0.0;
    }
    const cart::TreeNode& l = nodes[static_cast<std::size_t>(v.left)];
    const cart::TreeNode& r = nodes[static_cast<std::size_t>(v.right)];
    const double weighted = static_cast<double>(v.n_samples) * v.impurity -
                            static_cast<double>(l.n_samples) * l.impurity -
                            static_cast<double>(r.n_samples) * r.impurity;
    return std::max(0.0, weighted / static_cast<double>(nodes[0].n_samples));
}

LocalExplanation explain_instance(const cart::RegressionTree& tree, std::span<const double> x,
                                  std::size_t width, std::size_t height) {
    if (width * height != tree.n_features()) {
        throw ValidationError("explain: " + std::to_string(width) + "x" + std::to_string(height) +
                              " image does not match a tree with " +
                              std::to_string(tree.n_features()) + " features");
    }
    const auto path = tree.decision_path(x);
    std::vector<double> accumulated(tree.n_features(), 0.0);
    for (const auto& step : path) {
        accumulated[static_cast<std::size_t>(step.feature)] += impurity_decrease(tree, step.node);
    }
    std::vector<float> values(accumulated.size());
    std::transform(accumulated.begin(), accumulated.end(), values.begin(),
                   [](double v) { return static_cast<float>(v); });

    LocalExplanation out;
    out.saliency = SaliencyMap(width, height, std::move(values));
    out.leaf_value = tree.predict(x);
    out.path_length = path.size();
    return out;
}

std::vector<double> global_importances(const cart::RegressionTree& tree) {
    std::vector<double> out(tree.n_features(), 0.0);
    const auto nodes = tree.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) {
            out[static_cast<std::size_t>(nodes[i].feature)] +=
                impurity_decrease(tree, static_cast<std::int32_t>(i));
        }
    }
    double total = 0.0;
    for (double v : out) {
        total += v;
    }
    if (total > 0.0) {
        for (double& v : out) {
            v /= total;
        }
    }
    return out;
}

PremiseCheck check_zero_saliency_invariance(const cart::RegressionTree& tree,
                                            std::span<const double> x,
                                            std::span<const float> saliency, std::uint64_t seed) {
    if (saliency.size() != x.size()) {
        throw ValidationError("premise check: saliency and input sizes differ");
    }
    // Admissible interval (lo, hi] per feature from the path comparisons.
    std::vector<double> lo(x.size(), -std::numeric_limits<double>::infinity());
    std::vector<double> hi(x.size(), std::numeric_limits<double>::infinity());
    for (const auto& step : tree.decision_path(x)) {
        const auto f = static_cast<std::size_t>(step.feature);
        if (step.went_left) {
            hi[f] = std::min(hi[f], step.threshold);
        } else {
            lo[f] = std::max(lo[f], step.threshold);
        }
    }

    Rng rng(seed);
    std::vector<double> moved(x.begin(), x.end());
    PremiseCheck out;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (saliency[i] != 0.0f) {
            continue;
        }
        // Pixel domain [0, 1] intersected with (lo, hi].
        const double low = std::max(0.0, lo[i]);
        const double high = std::min(1.0, hi[i]);
        double candidate = low + (high - low) * rng.uniform01();
        if (candidate <= lo[i]) {
            candidate = high;
        }
        if (candidate == x[i] || candidate <= lo[i] || candidate > hi[i]) {
            continue;
        }
        moved[i] = candidate;
        ++out.perturbed_pixels;
    }
    out.original = tree.predict(x);
    out.perturbed = tree.predict(moved);
    out.holds = out.original == out.perturbed;
    return out;
}

} // namespace fidbench::explain
