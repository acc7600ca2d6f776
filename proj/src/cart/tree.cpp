#include <cmath>
#include <unordered_map>

#include <json.hpp>

#include "fidbench/error.hpp"
#include "fidbench/image.hpp"
#include "fidbench/kernels.hpp"
#include "fidbench/tree.hpp"

namespace fidbench::cart {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features) {
    if (nodes_.empty()) {
        throw ValidationError("tree has no nodes");
    }
    if (n_features_ == 0) {
        throw ValidationError("tree needs at least one feature");
    }
    const auto count = static_cast<std::int64_t>(nodes_.size());
    std::vector<int> parents(nodes_.size(), 0);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const TreeNode& n = nodes_[i];
        const std::string where = "node " + std::to_string(i) + ": ";
        if (!std::isfinite(n.value) || !std::isfinite(n.threshold)) {
            throw ValidationError(where + "non-finite value or threshold");
        }
        if (!(n.impurity >= 0.0) || !std::isfinite(n.impurity)) {
            throw ValidationError(where + "impurity must be finite and >= 0");
        }
        if (n.n_samples < 1) {
            throw ValidationError(where + "n_samples must be >= 1");
        }
        if (n.is_leaf()) {
            if (n.left != no_child || n.right != no_child) {
                throw ValidationError(where + "leaf with children");
            }
            continue;
        }
        if (n.feature < 0 || static_cast<std::size_t>(n.feature) >= n_features_) {
            throw ValidationError(where + "feature index " + std::to_string(n.feature) +
                                  " out of range");
        }
        for (std::int32_t child : {n.left, n.right}) {
            if (child <= 0 || child >= count) {
                throw ValidationError(where + "child index " + std::to_string(child) +
                                      " out of range");
            }
            ++parents[static_cast<std::size_t>(child)];
        }
        if (n.left == n.right) {
            throw ValidationError(where + "both children are the same node");
        }
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (parents[i] != 1) {
            throw ValidationError("node " + std::to_string(i) + " has " + std::to_string(parents[i]) +
                                  " parents");
        }
    }
    // Every node has one parent and the root none, so a walk from the root
    // reaching all nodes rules out cycles.
    std::vector<std::int32_t> stack{0};
    std::size_t reached = 0;
    while (!stack.empty()) {
        const TreeNode& n = nodes_[static_cast<std::size_t>(stack.back())];
        stack.pop_back();
        ++reached;
        if (!n.is_leaf()) {
            stack.push_back(n.left);
            stack.push_back(n.right);
        }
        if (reached > nodes_.size()) {
            break;
        }
    }
    if (reached != nodes_.size()) {
        throw ValidationError("tree contains a cycle or unreachable nodes");
    }
}

void RegressionTree::check_input(std::span<const double> x) const {
    if (x.size() != n_features_) {
        throw ValidationError("input has " + std::to_string(x.size()) + " features, tree expects " +
                              std::to_string(n_features_));
    }
}

std::int32_t RegressionTree::leaf_index(std::span<const double> x) const {
    check_input(x);
    std::int32_t i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return i;
}

double RegressionTree::predict(std::span<const double> x) const {
    return nodes_[static_cast<std::size_t>(leaf_index(x))].value;
}

std::vector<PathStep> RegressionTree::decision_path(std::span<const double> x) const {
    check_input(x);
    std::vector<PathStep> path;
    std::int32_t i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
        const bool left = x[static_cast<std::size_t>(n.feature)] <= n.threshold;
        path.push_back({i, n.feature, n.threshold, left});
        i = left ? n.left : n.right;
    }
    return path;
}

std::size_t RegressionTree::depth() const {
    std::size_t deepest = 0;
    std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [i, d] = stack.back();
        stack.pop_back();
        const TreeNode& n = nodes_[static_cast<std::size_t>(i)];
        if (n.is_leaf()) {
            deepest = std::max(deepest, d);
        } else {
            stack.emplace_back(n.left, d + 1);
            stack.emplace_back(n.right, d + 1);
        }
    }
    return deepest;
}

std::size_t RegressionTree::leaf_count() const {
    std::size_t leaves = 0;
    for (const auto& n : nodes_) {
        leaves += n.is_leaf() ? 1 : 0;
    }
    return leaves;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

std::span<const double> FeatureMatrix::row(std::size_t r) const {
    return std::span<const double>(values_).subspan(r * cols_, cols_);
}

void FeatureMatrix::set_row(std::size_t r, std::span<const double> values) {
    if (r >= rows_ || values.size() != cols_) {
        throw ValidationError("set_row: row " + std::to_string(r) + " / width " +
                              std::to_string(values.size()) + " does not fit matrix");
    }
    std::copy(values.begin(), values.end(), values_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
}

QuantizedMatrix::QuantizedMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), codes_(rows * cols, 0) {}

std::span<const std::uint8_t> QuantizedMatrix::row_codes(std::size_t r) const {
    return std::span<const std::uint8_t>(codes_).subspan(r * cols_, cols_);
}

std::vector<double> QuantizedMatrix::row_values(std::size_t r) const {
    std::vector<double> out(cols_);
    for (std::size_t c = 0; c < cols_; ++c) {
        out[c] = value_of(codes_[r * cols_ + c]);
    }
    return out;
}

void QuantizedMatrix::set_row(std::size_t r, std::span<const std::uint8_t> codes) {
    if (r >= rows_ || codes.size() != cols_) {
        throw ValidationError("set_row: row does not fit matrix");
    }
    std::copy(codes.begin(), codes.end(), codes_.begin() + static_cast<std::ptrdiff_t>(r * cols_));
}

void QuantizedMatrix::set_row(std::size_t r, std::span<const double> values) {
    if (r >= rows_ || values.size() != cols_) {
        throw ValidationError("set_row: row does not fit matrix");
    }
    for (std::size_t c = 0; c < cols_; ++c) {
        codes_[r * cols_ + c] = quantize_pixel(values[c]);
    }
}

namespace {

constexpr const char* tree_format = "fidbench.regression_tree";

} // namespace

std::string serialize(const RegressionTree& tree) {
    // One node per line keeps large trees diffable.
    std::string out = "{\n\"format\": \"" + std::string(tree_format) + "\",\n\"version\": 1,\n";
    out += "\"n_features\": " + std::to_string(tree.n_features()) + ",\n\"nodes\": [\n";
    const auto nodes = tree.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const TreeNode& n = nodes[i];
        nlohmann::ordered_json j;
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["left"] = n.left;
        j["right"] = n.right;
        j["value"] = n.value;
        j["impurity"] = n.impurity;
        j["n_samples"] = n.n_samples;
        out += j.dump();
        out += i + 1 < nodes.size() ? ",\n" : "\n";
    }
    out += "]\n}\n";
    return out;
}

RegressionTree deserialize(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("tree file: ") + e.what(), e.byte);
    }
    try {
        if (!doc.is_object() || doc.value("format", "") != tree_format) {
            throw FormatError("tree file: missing or wrong \"format\"", 0);
        }
        if (doc.at("version").get<int>() != 1) {
            throw FormatError("tree file: unsupported version", 0);
        }
        const auto n_features = doc.at("n_features").get<std::int64_t>();
        if (n_features < 1) {
            throw FormatError("tree file: n_features must be >= 1", 0);
        }
        std::vector<TreeNode> nodes;
        for (const auto& j : doc.at("nodes")) {
            TreeNode n;
            n.feature = j.at("feature").get<std::int32_t>();
            n.threshold = j.at("threshold").get<double>();
            n.left = j.at("left").get<std::int32_t>();
            n.right = j.at("right").get<std::int32_t>();
            n.value = j.at("value").get<double>();
            n.impurity = j.at("impurity").get<double>();
            n.n_samples = j.at("n_samples").get<std::int64_t>();
            if (n.feature < leaf_feature) {
                throw FormatError("tree file: feature must be -1 or a feature index", 0);
            }
            nodes.push_back(n);
        }
        return RegressionTree(std::move(nodes), static_cast<std::size_t>(n_features));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("tree file: ") + e.what(), 0);
    } catch (const ValidationError& e) {
        throw FormatError(std::string("tree file: ") + e.what(), 0);
    }
}

RegressionScores evaluate_regression(std::span<const double> predictions,
                                     std::span<const double> truths) {
    if (predictions.size() != truths.size()) {
        throw ValidationError("evaluate_regression: " + std::to_string(predictions.size()) +
                              " predictions vs " + std::to_string(truths.size()) + " truths");
    }
    if (predictions.empty()) {
        throw ValidationError("evaluate_regression: no samples");
    }
    const auto sums = kernels::error_sums(predictions, truths);
    const auto n = static_cast<double>(predictions.size());
    return {sums.abs_sum / n, sums.sq_sum / n};
}

DuplicateReport find_duplicates(const QuantizedMatrix& features, std::span<const double> targets) {
    if (targets.size() != features.rows()) {
        throw ValidationError("find_duplicates: target count mismatch");
    }
    DuplicateReport report;
    std::unordered_map<std::string_view, std::size_t> first_seen;
    first_seen.reserve(features.rows());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto codes = features.row_codes(r);
        const std::string_view key(reinterpret_cast<const char*>(codes.data()), codes.size());
        const auto [it, inserted] = first_seen.emplace(key, r);
        if (!inserted) {
            ++report.duplicate_rows;
            if (targets[it->second] != targets[r]) {
                ++report.conflicting_rows;
            }
        }
    }
    return report;
}

} // namespace fidbench::cart
