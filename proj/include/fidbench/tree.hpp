#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fidbench::cart {

// The only interface the fidelity metrics may use: a deterministic scoring
// function of a flat feature vector.
class BlackBoxModel {
public:
    virtual ~BlackBoxModel() = default;
    virtual double predict(std::span<const double> x) const = 0;
    virtual std::size_t n_features() const = 0;
};

inline constexpr std::int32_t leaf_feature = -1;
inline constexpr std::int32_t no_child = -1;

struct TreeNode {
    std::int32_t feature = leaf_feature;
    double threshold = 0.0;
    std::int32_t left = no_child;
    std::int32_t right = no_child;
    double value = 0.0;    // mean target of the node's training samples
    double impurity = 0.0; // population variance of those targets
    std::int64_t n_samples = 0;

    bool is_leaf() const noexcept { return feature == leaf_feature; }
    bool operator==(const TreeNode&) const = default;
};

struct PathStep {
    std::int32_t node = 0;
    std::int32_t feature = 0;
    double threshold = 0.0;
    bool went_left = false;

    bool operator==(const PathStep&) const = default;
};

class RegressionTree final : public BlackBoxModel {
public:
    // Validates structure: node 0 is the root, every other node has exactly
    // one parent, child indices are in range. Throws ValidationError.
    RegressionTree(std::vector<TreeNode> nodes, std::size_t n_features);

    double predict(std::span<const double> x) const override;
    std::size_t n_features() const override { return n_features_; }

    std::span<const TreeNode> nodes() const noexcept { return nodes_; }
    std::int32_t leaf_index(std::span<const double> x) const;
    std::vector<PathStep> decision_path(std::span<const double> x) const;
    std::size_t depth() const;
    std::size_t leaf_count() const;

    bool operator==(const RegressionTree& other) const {
        return n_features_ == other.n_features_ && nodes_ == other.nodes_;
    }

private:
    void check_input(std::span<const double> x) const;

    std::vector<TreeNode> nodes_;
    std::size_t n_features_;
};

// Dense N x D matrix, row-major.
class FeatureMatrix {
public:
    FeatureMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const;
    void set_row(std::size_t r, std::span<const double> values);

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> values_;
};

// N x D matrix of 8-bit codes; feature value = code / 255 (the PGM pixel
// domain). An eighth of the memory of FeatureMatrix.
class QuantizedMatrix {
public:
    QuantizedMatrix(std::size_t rows, std::size_t cols);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::uint8_t code(std::size_t r, std::size_t c) const { return codes_[r * cols_ + c]; }
    std::span<const std::uint8_t> row_codes(std::size_t r) const;
    std::vector<double> row_values(std::size_t r) const;
    void set_row(std::size_t r, std::span<const std::uint8_t> codes);
    void set_row(std::size_t r, std::span<const double> values); // quantizes

    static double value_of(std::uint8_t code) { return static_cast<double>(code) / 255.0; }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<std::uint8_t> codes_;
};

// How candidate splits are enumerated. Both routes are exact and produce
// identical trees; histogram needs every feature value to be k/255.
enum class SplitSearch { automatic, sorted, histogram };

// Defaults reproduce the reference hyperparameters: best splitter, no depth
// or leaf limit, all features at every node, zero minimum impurity decrease.
struct TreeParams {
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    SplitSearch search = SplitSearch::automatic;
};

// Grows a CART regression tree on the variance-reduction criterion.
// Candidate thresholds are midpoints of consecutive distinct feature values;
// ties in gain go to the lowest feature index, then the lowest threshold.
RegressionTree train(const FeatureMatrix& features, std::span<const double> targets,
                     const TreeParams& params = {});
RegressionTree train(const QuantizedMatrix& features, std::span<const double> targets,
                     const TreeParams& params = {});

std::string serialize(const RegressionTree& tree);
RegressionTree deserialize(std::string_view text);

struct RegressionScores {
    double mae = 0.0;
    double mse = 0.0;
};

RegressionScores evaluate_regression(std::span<const double> predictions,
                                     std::span<const double> truths);

struct DuplicateReport {
    std::size_t duplicate_rows = 0;   // rows identical to an earlier row
    std::size_t conflicting_rows = 0; // ... whose target differs from it
};

DuplicateReport find_duplicates(const QuantizedMatrix& features, std::span<const double> targets);

} // namespace fidbench::cart
