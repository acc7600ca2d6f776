#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fidbench/image.hpp"
#include "fidbench/tree.hpp"

namespace fidbench::explain {

struct LocalExplanation {
    SaliencyMap saliency;
    double leaf_value = 0.0;
    std::size_t path_length = 0;
};

// Sample-weighted impurity decrease of an internal node, normalised by the
// root sample count: (n_v imp_v - n_L imp_L - n_R imp_R) / n_root, clamped
// at zero against rounding.
double impurity_decrease(const cart::RegressionTree& tree, std::int32_t node);

// Ground-truth local explanation: every feature tested on the instance's
// decision path receives the impurity decrease of its split(s), summed when
// a feature repeats; all other pixels are zero.
LocalExplanation explain_instance(const cart::RegressionTree& tree, std::span<const double> x,
                                  std::size_t width, std::size_t height);

// Total impurity decrease per feature over all internal nodes, normalised to
// sum to one. All zeros for a single-leaf tree.
std::vector<double> global_importances(const cart::RegressionTree& tree);

struct PremiseCheck {
    bool holds = true;
    std::size_t perturbed_pixels = 0;
    double original = 0.0;
    double perturbed = 0.0;
};

// Moves every zero-saliency pixel to a different seeded value that stays on
// the same side of every path threshold testing it, then checks the
// prediction is unchanged. Pixels whose admissible interval is a single
// point are left alone.
PremiseCheck check_zero_saliency_invariance(const cart::RegressionTree& tree,
                                            std::span<const double> x,
                                            std::span<const float> saliency, std::uint64_t seed);

} // namespace fidbench::explain
