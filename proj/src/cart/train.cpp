#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

#include "fidbench/error.hpp"
#include "fidbench/kernels.hpp"
#include "fidbench/tree.hpp"

namespace fidbench::cart {

namespace {

// Distinct feature values among a node's samples, ascending, with the count
// and target sum of the samples at each value. Sums accumulate in ascending
// sample order on both search routes, so both produce bit-identical groups.
struct Groups {
    std::vector<double> values;
    std::vector<double> counts;
    std::vector<double> sums;

    void clear() {
        values.clear();
        counts.clear();
        sums.clear();
    }
    std::size_t size() const { return values.size(); }
};

// Feature columns as 8-bit codes, column-major.
class HistogramSearch {
public:
    HistogramSearch(const QuantizedMatrix& m) : rows_(m.rows()), codes_(m.rows() * m.cols()) {
        for (std::size_t r = 0; r < m.rows(); ++r) {
            const auto row = m.row_codes(r);
            for (std::size_t c = 0; c < m.cols(); ++c) {
                codes_[c * rows_ + r] = row[c];
            }
        }
    }

    void groups(std::size_t feature, std::span<const std::uint32_t> samples,
                std::span<const double> targets, Groups& out) {
        const std::uint8_t* col = codes_.data() + feature * rows_;
        std::array<std::uint64_t, 4> occupied{};
        for (const std::uint32_t s : samples) {
            const std::uint8_t b = col[s];
            occupied[b >> 6] |= std::uint64_t{1} << (b & 63);
            count_[b] += 1.0;
            sum_[b] += targets[s];
        }
        out.clear();
        for (std::size_t w = 0; w < 4; ++w) {
            std::uint64_t bits = occupied[w];
            while (bits != 0) {
                const std::size_t b = w * 64 + static_cast<std::size_t>(std::countr_zero(bits));
                bits &= bits - 1;
                out.values.push_back(QuantizedMatrix::value_of(static_cast<std::uint8_t>(b)));
                out.counts.push_back(count_[b]);
                out.sums.push_back(sum_[b]);
                count_[b] = 0.0;
                sum_[b] = 0.0;
            }
        }
    }

    double value(std::size_t feature, std::uint32_t sample) const {
        return QuantizedMatrix::value_of(codes_[feature * rows_ + sample]);
    }

private:
    std::size_t rows_;
    std::vector<std::uint8_t> codes_;
    std::array<double, 256> count_{};
    std::array<double, 256> sum_{};
};

// Feature columns as doubles, column-major; groups found by stable sort.
class SortedSearch {
public:
    SortedSearch(std::size_t rows, std::size_t cols) : rows_(rows), values_(rows * cols) {}

    void set(std::size_t r, std::size_t c, double v) { values_[c * rows_ + r] = v; }

    void groups(std::size_t feature, std::span<const std::uint32_t> samples,
                std::span<const double> targets, Groups& out) {
        const double* col = values_.data() + feature * rows_;
        scratch_.clear();
        for (const std::uint32_t s : samples) {
            scratch_.push_back({col[s], s});
        }
        std::stable_sort(scratch_.begin(), scratch_.end(),
                         [](const Entry& a, const Entry& b) { return a.value < b.value; });
        out.clear();
        for (const Entry& e : scratch_) {
            if (out.values.empty() || out.values.back() != e.value) {
                out.values.push_back(e.value);
                out.counts.push_back(0.0);
                out.sums.push_back(0.0);
            }
            out.counts.back() += 1.0;
            out.sums.back() += targets[e.sample];
        }
    }

    double value(std::size_t feature, std::uint32_t sample) const {
        return values_[feature * rows_ + sample];
    }

private:
    struct Entry {
        double value;
        std::uint32_t sample;
    };

    std::size_t rows_;
    std::vector<double> values_;
    std::vector<Entry> scratch_;
};

struct Split {
    bool found = false;
    double proxy = -std::numeric_limits<double>::infinity();
    std::size_t feature = 0;
    double threshold = 0.0;
};

// Midpoint between consecutive distinct values, kept strictly below the
// upper value so "x <= threshold" separates them.
double midpoint(double lo, double hi) {
    double t = (lo + hi) / 2.0;
    if (t >= hi || !std::isfinite(t)) {
        t = lo;
    }
    return t;
}

template <typename Search>
class Builder {
public:
    Builder(Search& search, std::span<const double> targets, std::size_t n_features,
            const TreeParams& params)
        : search_(search), targets_(targets), n_features_(n_features), params_(params) {}

    RegressionTree build() {
        const std::size_t n = targets_.size();
        samples_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            samples_[i] = static_cast<std::uint32_t>(i);
        }
        partition_buffer_.resize(n);
        nodes_.clear();
        nodes_.emplace_back();

        struct Frame {
            std::int32_t node;
            std::size_t begin;
            std::size_t end;
        };
        std::vector<Frame> stack{{0, 0, n}};
        while (!stack.empty()) {
            const Frame f = stack.back();
            stack.pop_back();
            const std::span<std::uint32_t> span(samples_.data() + f.begin, f.end - f.begin);
            summarize(f.node, span);
            const TreeNode& node = nodes_[static_cast<std::size_t>(f.node)];
            if (node.impurity == 0.0 || span.size() < params_.min_samples_split ||
                span.size() < 2 * params_.min_samples_leaf) {
                continue;
            }
            const Split split = best_split(span);
            if (!split.found) {
                continue;
            }
            const std::size_t n_left = partition(span, split);
            const auto left = static_cast<std::int32_t>(nodes_.size());
            nodes_.emplace_back();
            nodes_.emplace_back();
            TreeNode& parent = nodes_[static_cast<std::size_t>(f.node)];
            parent.feature = static_cast<std::int32_t>(split.feature);
            parent.threshold = split.threshold;
            parent.left = left;
            parent.right = left + 1;
            stack.push_back({left + 1, f.begin + n_left, f.end});
            stack.push_back({left, f.begin, f.begin + n_left});
        }
        return RegressionTree(std::move(nodes_), n_features_);
    }

private:
    void summarize(std::int32_t id, std::span<const std::uint32_t> span) {
        TreeNode& node = nodes_[static_cast<std::size_t>(id)];
        node.n_samples = static_cast<std::int64_t>(span.size());
        const double first = targets_[span.front()];
        bool pure = true;
        double sum = 0.0;
        for (const std::uint32_t s : span) {
            sum += targets_[s];
            pure = pure && targets_[s] == first;
        }
        if (pure) {
            node.value = first;
            node.impurity = 0.0;
            return;
        }
        const double mean = sum / static_cast<double>(span.size());
        double ss = 0.0;
        for (const std::uint32_t s : span) {
            const double d = targets_[s] - mean;
            ss += d * d;
        }
        node.value = mean;
        node.impurity = ss / static_cast<double>(span.size());
    }

    Split best_split(std::span<const std::uint32_t> span) {
        Split best;
        const auto n = static_cast<double>(span.size());
        const auto min_leaf = static_cast<double>(params_.min_samples_leaf);
        for (std::size_t f = 0; f < n_features_; ++f) {
            search_.groups(f, span, targets_, groups_);
            const std::size_t m = groups_.size();
            if (m < 2) {
                continue;
            }
            left_count_.resize(m - 1);
            left_sum_.resize(m - 1);
            proxies_.resize(m - 1);
            double c = 0.0;
            double s = 0.0;
            for (std::size_t k = 0; k + 1 < m; ++k) {
                c += groups_.counts[k];
                s += groups_.sums[k];
                left_count_[k] = c;
                left_sum_[k] = s;
            }
            const double total_sum = s + groups_.sums[m - 1];
            kernels::split_proxies(left_count_, left_sum_, n, total_sum, proxies_);
            for (std::size_t k = 0; k + 1 < m; ++k) {
                if (left_count_[k] < min_leaf || n - left_count_[k] < min_leaf) {
                    continue;
                }
                if (proxies_[k] > best.proxy) {
                    best.found = true;
                    best.proxy = proxies_[k];
                    best.feature = f;
                    best.threshold = midpoint(groups_.values[k], groups_.values[k + 1]);
                }
            }
        }
        return best;
    }

    // Stable: both halves keep ascending sample order.
    std::size_t partition(std::span<std::uint32_t> span, const Split& split) {
        std::size_t n_left = 0;
        std::size_t n_right = 0;
        for (const std::uint32_t s : span) {
            if (search_.value(split.feature, s) <= split.threshold) {
                span[n_left++] = s;
            } else {
                partition_buffer_[n_right++] = s;
            }
        }
        std::copy_n(partition_buffer_.begin(), n_right, span.begin() + static_cast<std::ptrdiff_t>(n_left));
        return n_left;
    }

    Search& search_;
    std::span<const double> targets_;
    std::size_t n_features_;
    TreeParams params_;
    std::vector<TreeNode> nodes_;
    std::vector<std::uint32_t> samples_;
    std::vector<std::uint32_t> partition_buffer_;
    Groups groups_;
    std::vector<double> left_count_;
    std::vector<double> left_sum_;
    std::vector<double> proxies_;
};

void check_inputs(std::size_t rows, std::size_t cols, std::span<const double> targets,
                  const TreeParams& params) {
    if (rows == 0 || cols == 0) {
        throw ValidationError("train: need at least one sample and one feature");
    }
    if (targets.size() != rows) {
        throw ValidationError("train: " + std::to_string(rows) + " rows but " +
                              std::to_string(targets.size()) + " targets");
    }
    if (rows > std::numeric_limits<std::uint32_t>::max()) {
        throw ValidationError("train: too many samples");
    }
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!std::isfinite(targets[i])) {
            throw ValidationError("train: target " + std::to_string(i) + " is not finite");
        }
    }
    if (params.min_samples_split < 2 || params.min_samples_leaf < 1) {
        throw ValidationError("train: min_samples_split >= 2 and min_samples_leaf >= 1 required");
    }
}

bool exactly_quantized(double v) {
    if (!(v >= 0.0 && v <= 1.0)) {
        return false;
    }
    const long code = std::lround(v * 255.0);
    return QuantizedMatrix::value_of(static_cast<std::uint8_t>(code)) == v;
}

template <typename Search>
RegressionTree run(Search& search, std::span<const double> targets, std::size_t n_features,
                   const TreeParams& params) {
    Builder<Search> builder(search, targets, n_features, params);
    return builder.build();
}

} // namespace

RegressionTree train(const FeatureMatrix& features, std::span<const double> targets,
                     const TreeParams& params) {
    check_inputs(features.rows(), features.cols(), targets, params);
    bool quantized = params.search != SplitSearch::sorted;
    for (std::size_t r = 0; r < features.rows(); ++r) {
        for (const double v : features.row(r)) {
            if (!std::isfinite(v)) {
                throw ValidationError("train: feature value in row " + std::to_string(r) +
                                      " is not finite");
            }
            quantized = quantized && exactly_quantized(v);
        }
    }
    if (params.search == SplitSearch::histogram && !quantized) {
        throw ValidationError("train: histogram search needs every feature value to be k/255");
    }
    if (quantized) {
        QuantizedMatrix codes(features.rows(), features.cols());
        for (std::size_t r = 0; r < features.rows(); ++r) {
            codes.set_row(r, features.row(r));
        }
        HistogramSearch search(codes);
        return run(search, targets, features.cols(), params);
    }
    SortedSearch search(features.rows(), features.cols());
    for (std::size_t r = 0; r < features.rows(); ++r) {
        const auto row = features.row(r);
        for (std::size_t c = 0; c < features.cols(); ++c) {
            search.set(r, c, row[c]);
        }
    }
    return run(search, targets, features.cols(), params);
}

RegressionTree train(const QuantizedMatrix& features, std::span<const double> targets,
                     const TreeParams& params) {
    check_inputs(features.rows(), features.cols(), targets, params);
    if (params.search == SplitSearch::sorted) {
        SortedSearch search(features.rows(), features.cols());
        for (std::size_t r = 0; r < features.rows(); ++r) {
            for (std::size_t c = 0; c < features.cols(); ++c) {
                search.set(r, c, QuantizedMatrix::value_of(features.code(r, c)));
            }
        }
        return run(search, targets, features.cols(), params);
    }
    HistogramSearch search(features);
    return run(search, targets, features.cols(), params);
}

} // namespace fidbench::cart
