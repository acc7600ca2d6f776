#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fidbench/image.hpp"
#include "fidbench/tree.hpp"

// Perturbation-based fidelity metrics. Every metric sees the model only
// through cart::BlackBoxModel and takes a signed per-pixel attribution
// (row-major, one value per pixel).
namespace fidbench::fidelity {

enum class Baseline { black, mean, uniform_noise };

std::string_view baseline_name(Baseline b);
Baseline parse_baseline(std::string_view name);

struct PerturbationSpec {
    std::size_t patch_size = 8;
    Baseline baseline = Baseline::black;
    double mean_value = 0.0; // used by Baseline::mean, in [0, 1]
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Replacement value for pixel index i. The noise baseline is a pure function
// of (rng_seed, i).
double baseline_value(const PerturbationSpec& spec, std::size_t pixel);

struct PatchRect {
    std::size_t row = 0; // top-left
    std::size_t col = 0;
    std::size_t size = 1;
};

// Replaces the patch (clipped to the image) by the baseline. Throws
// ValidationError if the patch lies entirely outside.
Image apply_patch_baseline(const Image& x, const PatchRect& patch, const PerturbationSpec& spec);

// Pixels of the patch grid anchored at (0, 0); right and bottom patches are
// clipped. Patches are numbered row-major over the grid.
struct PatchGrid {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t patch_size = 1;

    std::size_t rows() const { return (height + patch_size - 1) / patch_size; }
    std::size_t cols() const { return (width + patch_size - 1) / patch_size; }
    std::size_t count() const { return rows() * cols(); }
    std::vector<std::size_t> pixels(std::size_t patch) const;
};

struct PearsonResult {
    double value = 0.0;
    bool degenerate = false; // a zero-variance input; value is then 0
};

PearsonResult pearson(std::span<const double> a, std::span<const double> b);

struct CurvePoint {
    std::size_t step = 0;
    double score = 0.0;
};

struct RegionPerturbationResult {
    std::vector<CurvePoint> curve;   // steps 0..L
    std::vector<std::size_t> order;  // patch ids, most relevant first
    double aopc = 0.0;
    // aopc / max(|f(x^0) - f(x^L)|, 1e-12)
    double aopc_norm = 0.0;
};

// Patches ranked by descending attribution sum, ties by ascending patch id.
std::vector<std::size_t> morf_order(const PatchGrid& grid, std::span<const double> attribution);

// Cumulatively perturbs patches in `order` (first L) and records the curve;
// aopc = 1/(L+1) * sum_{k=0..L} (f(x^0) - f(x^k)).
RegionPerturbationResult perturbation_curve(const cart::BlackBoxModel& model, const Image& x,
                                            std::span<const std::size_t> order,
                                            const PerturbationSpec& spec, std::size_t n_steps);

// Region Perturbation with MoRF ordering. n_steps == 0 means every patch.
RegionPerturbationResult region_perturbation(const cart::BlackBoxModel& model, const Image& x,
                                             std::span<const double> attribution,
                                             const PerturbationSpec& spec, std::size_t n_steps);

struct MetricScore {
    double score = 0.0;
    bool degenerate = false;
};

// Pearson over n_runs random subsets S of subset_size pixels between
// f(x) - f(x with S at baseline) and the attribution summed over S.
MetricScore faithfulness_correlation(const cart::BlackBoxModel& model, const Image& x,
                                     std::span<const double> attribution,
                                     const PerturbationSpec& spec, std::size_t subset_size,
                                     std::size_t n_runs);

// Pearson between attribution_i and f(x) - f(x with only pixel i at
// baseline), over all pixels or a seeded sample of feature_budget of them.
MetricScore faithfulness_estimate(const cart::BlackBoxModel& model, const Image& x,
                                  std::span<const double> attribution,
                                  const PerturbationSpec& spec, std::size_t feature_budget);

struct PerturbationSample {
    std::vector<std::size_t> mask; // perturbed pixel indices
    std::vector<double> delta;     // I = x - x_perturbed, full length
    double output_drop = 0.0;      // f(x) - f(x - I)
};

// n_samples random patches of spec.patch_size placed uniformly inside the
// image; mean over samples of (I . attribution - (f(x) - f(x - I)))^2.
double infidelity(const cart::BlackBoxModel& model, const Image& x,
                  std::span<const double> attribution, const PerturbationSpec& spec,
                  std::size_t n_samples);

// The same draws infidelity() makes, exposed for inspection.
std::vector<PerturbationSample> infidelity_samples(const cart::BlackBoxModel& model, const Image& x,
                                                   const PerturbationSpec& spec,
                                                   std::size_t n_samples);

struct MetricResult {
    std::string metric;
    std::vector<std::pair<std::size_t, double>> per_image;
    double mean = 0.0;
    double std = 0.0; // population
    double min = 0.0;
    double max = 0.0;
};

MetricResult aggregate(std::string metric, std::vector<std::pair<std::size_t, double>> per_image);

// f(x) = w . x + bias. A reference model whose exact attributions are known.
class LinearModel final : public cart::BlackBoxModel {
public:
    LinearModel(std::vector<double> weights, double bias = 0.0);
    double predict(std::span<const double> x) const override;
    std::size_t n_features() const override { return weights_.size(); }
    std::span<const double> weights() const { return weights_; }

private:
    std::vector<double> weights_;
    double bias_;
};

class ConstantModel final : public cart::BlackBoxModel {
public:
    ConstantModel(std::size_t n_features, double value) : n_(n_features), value_(value) {}
    double predict(std::span<const double>) const override { return value_; }
    std::size_t n_features() const override { return n_; }

private:
    std::size_t n_;
    double value_;
};

} // namespace fidbench::fidelity
