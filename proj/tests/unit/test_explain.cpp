#include <doctest.h>

#include <cmath>
#include <set>

#include "fidbench/error.hpp"
#include "fidbench/explain.hpp"
#include "fidbench/rng.hpp"

using namespace fidbench;
using namespace fidbench::cart;
using namespace fidbench::explain;

namespace {

RegressionTree random_tree(Rng& rng, std::size_t n, std::size_t d) {
    QuantizedMatrix q(n, d);
    std::vector<double> y(n);
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<std::uint8_t> codes(d);
        for (auto& c : codes) {
            c = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
        }
        q.set_row(r, codes);
        y[r] = rng.uniform01();
    }
    return train(q, y);
}

std::vector<double> random_input(Rng& rng, std::size_t d) {
    std::vector<double> x(d);
    for (auto& v : x) {
        v = static_cast<double>(rng.uniform_int(0, 255)) / 255.0;
    }
    return x;
}

} // namespace

TEST_CASE("single-leaf tree explains nothing") {
    const RegressionTree tree({TreeNode{leaf_feature, 0.0, no_child, no_child, 0.3, 0.0, 5}}, 4);
    const auto e = explain_instance(tree, std::vector<double>(4, 0.5), 2, 2);
    CHECK(e.path_length == 0);
    CHECK(e.leaf_value == 0.3);
    for (float v : e.saliency.values()) {
        CHECK(v == 0.0f);
    }
    for (double v : global_importances(tree)) {
        CHECK(v == 0.0);
    }
}

TEST_CASE("two-leaf tree puts the whole decrease on the split pixel") {
    FeatureMatrix x(2, 4);
    x.set_row(0, std::vector<double>{0.0, 0.2, 0.2, 0.2});
    x.set_row(1, std::vector<double>{1.0, 0.2, 0.2, 0.2});
    const auto tree = train(x, std::vector<double>{0.0, 10.0});
    // (2 * 25 - 0 - 0) / 2
    CHECK(impurity_decrease(tree, 0) == 25.0);
    for (const auto& row : {x.row(0), x.row(1)}) {
        const auto e = explain_instance(tree, row, 2, 2);
        CHECK(e.saliency.values()[0] == 25.0f);
        CHECK(e.saliency.values()[1] == 0.0f);
        CHECK(e.saliency.values()[3] == 0.0f);
        CHECK(e.path_length == 1);
    }
    const auto g = global_importances(tree);
    CHECK(g[0] == 1.0);
    CHECK(g[1] == 0.0);
}

TEST_CASE("saliency support is the decreasing path features") {
    Rng rng(17);
    for (int trial = 0; trial < 10; ++trial) {
        const auto tree = random_tree(rng, 200, 16);
        for (int k = 0; k < 50; ++k) {
            const auto x = random_input(rng, 16);
            const auto e = explain_instance(tree, x, 4, 4);
            std::set<std::int32_t> expected;
            std::vector<double> oracle(16, 0.0);
            for (const auto& step : tree.decision_path(x)) {
                const auto& n = tree.nodes()[static_cast<std::size_t>(step.node)];
                const auto& l = tree.nodes()[static_cast<std::size_t>(n.left)];
                const auto& r = tree.nodes()[static_cast<std::size_t>(n.right)];
                const double dec = (static_cast<double>(n.n_samples) * n.impurity -
                                    static_cast<double>(l.n_samples) * l.impurity -
                                    static_cast<double>(r.n_samples) * r.impurity) /
                                   static_cast<double>(tree.nodes()[0].n_samples);
                oracle[static_cast<std::size_t>(step.feature)] += std::max(0.0, dec);
                if (dec > 0.0) {
                    expected.insert(step.feature);
                }
            }
            std::set<std::int32_t> support;
            for (std::size_t i = 0; i < 16; ++i) {
                const float v = e.saliency.values()[i];
                CHECK(v >= 0.0f);
                CHECK(std::fabs(static_cast<double>(v) - oracle[i]) <= 1e-6 * (1.0 + oracle[i]));
                if (v != 0.0f) {
                    support.insert(static_cast<std::int32_t>(i));
                }
            }
            CHECK(support == expected);
            CHECK(e.leaf_value == tree.predict(x));
        }
    }
}

TEST_CASE("global importances are a distribution") {
    Rng rng(5);
    const auto tree = random_tree(rng, 300, 9);
    const auto g = global_importances(tree);
    double total = 0.0;
    for (double v : g) {
        CHECK(v >= 0.0);
        total += v;
    }
    CHECK(std::fabs(total - 1.0) < 1e-12);
}

TEST_CASE("zero-saliency pixels do not move the prediction") {
    Rng rng(23);
    const auto tree = random_tree(rng, 400, 25);
    std::size_t perturbed = 0;
    for (int k = 0; k < 100; ++k) {
        const auto x = random_input(rng, 25);
        const auto e = explain_instance(tree, x, 5, 5);
        const auto check = check_zero_saliency_invariance(tree, x, e.saliency.values(),
                                                          static_cast<std::uint64_t>(k));
        CHECK(check.holds);
        CHECK(check.original == check.perturbed);
        perturbed += check.perturbed_pixels;
    }
    CHECK(perturbed > 0);
}

TEST_CASE("dimension checks") {
    const RegressionTree tree({TreeNode{leaf_feature, 0.0, no_child, no_child, 0.3, 0.0, 5}}, 4);
    CHECK_THROWS_AS(explain_instance(tree, std::vector<double>(4, 0.5), 3, 2), ValidationError);
    CHECK_THROWS_AS(explain_instance(tree, std::vector<double>(3, 0.5), 3, 1), ValidationError);
}
