#include <algorithm>
#include <cmath>

#include "fidbench/error.hpp"
#include "fidbench/fidelity.hpp"
#include "fidbench/kernels.hpp"
#include "fidbench/rng.hpp"

namespace fidbench::fidelity {

std::string_view baseline_name(Baseline b) {
    switch (b) {
    case Baseline::black:
        return "black";
    case Baseline::mean:
        return "mean";
    case Baseline::uniform_noise:
        return "uniform_noise";
    }
    return "unknown";
}

Baseline parse_baseline(std::string_view name) {
    for (auto b : {Baseline::black, Baseline::mean, Baseline::uniform_noise}) {
        if (baseline_name(b) == name) {
            return b;
        }
    }
    throw ValidationError("unknown baseline '" + std::string(name) + "'");
}

void PerturbationSpec::validate() const {
    if (patch_size < 1) {
        throw ValidationError("patch_size must be >= 1");
    }
    if (!(mean_value >= 0.0 && mean_value <= 1.0)) {
        throw ValidationError("mean baseline value must lie in [0, 1]");
    }
}

double baseline_value(const PerturbationSpec& spec, std::size_t pixel) {
    switch (spec.baseline) {
    case Baseline::black:
        return 0.0;
    case Baseline::mean:
        return spec.mean_value;
    case Baseline::uniform_noise:
        return static_cast<double>(derive_seed(spec.rng_seed, pixel) >> 11) * 0x1.0p-53;
    }
    return 0.0;
}

Image apply_patch_baseline(const Image& x, const PatchRect& patch, const PerturbationSpec& spec) {
    spec.validate();
    if (patch.size == 0 || patch.row >= x.height() || patch.col >= x.width()) {
        throw ValidationError("patch does not intersect the image");
    }
    std::vector<double> pixels(x.pixels().begin(), x.pixels().end());
    const std::size_t row_end = std::min(x.height(), patch.row + patch.size);
    const std::size_t col_end = std::min(x.width(), patch.col + patch.size);
    for (std::size_t r = patch.row; r < row_end; ++r) {
        for (std::size_t c = patch.col; c < col_end; ++c) {
            const std::size_t i = r * x.width() + c;
            pixels[i] = baseline_value(spec, i);
        }
    }
    return Image(x.width(), x.height(), std::move(pixels));
}

std::vector<std::size_t> PatchGrid::pixels(std::size_t patch) const {
    if (patch >= count()) {
        throw IndexError("patch " + std::to_string(patch) + " outside grid of " +
                         std::to_string(count()));
    }
    const std::size_t r0 = (patch / cols()) * patch_size;
    const std::size_t c0 = (patch % cols()) * patch_size;
    std::vector<std::size_t> out;
    for (std::size_t r = r0; r < std::min(height, r0 + patch_size); ++r) {
        for (std::size_t c = c0; c < std::min(width, c0 + patch_size); ++c) {
            out.push_back(r * width + c);
        }
    }
    return out;
}

PearsonResult pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("pearson: length mismatch");
    }
    if (a.size() < 2) {
        throw ValidationError("pearson: need at least two points");
    }
    const auto n = static_cast<double>(a.size());
    const double ma = kernels::sum(a) / n;
    const double mb = kernels::sum(b) / n;
    double cov = 0.0;
    double va = 0.0;
    double vb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if (va == 0.0 || vb == 0.0) {
        return {0.0, true};
    }
    return {std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0), false};
}

LinearModel::LinearModel(std::vector<double> weights, double bias)
    : weights_(std::move(weights)), bias_(bias) {
    if (weights_.empty()) {
        throw ValidationError("linear model needs at least one weight");
    }
}

double LinearModel::predict(std::span<const double> x) const {
    if (x.size() != weights_.size()) {
        throw ValidationError("linear model: input has " + std::to_string(x.size()) +
                              " features, expected " + std::to_string(weights_.size()));
    }
    return kernels::dot(weights_, x) + bias_;
}

} // namespace fidbench::fidelity
