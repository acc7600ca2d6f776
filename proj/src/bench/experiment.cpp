#include <algorithm>
#include <cstdio>

#include "fidbench/bench.hpp"
#include "fidbench/error.hpp"

namespace fidbench::bench {

MetricParams MetricParams::resolved(std::size_t width, std::size_t height) const {
    MetricParams out = *this;
    if (out.patch_size == 0) {
        out.patch_size = std::max<std::size_t>(1, width / 16);
    }
    if (out.fc_subset_size == 0) {
        out.fc_subset_size = std::max<std::size_t>(1, width * height / 128);
    }
    return out;
}

std::string MetricParams::format() const {
    char mean[40];
    std::snprintf(mean, sizeof mean, "%.17g", mean_value);
    KeyValues kv;
    kv.set("patch_size", std::to_string(patch_size));
    kv.set("baseline", std::string(fidelity::baseline_name(baseline)));
    kv.set("baseline_mean", mean);
    kv.set("rp_steps", std::to_string(rp_steps));
    kv.set("fc_subset_size", std::to_string(fc_subset_size));
    kv.set("fc_runs", std::to_string(fc_runs));
    kv.set("fe_budget", std::to_string(fe_budget));
    kv.set("inf_samples", std::to_string(inf_samples));
    return kv.format();
}

std::string MetricParams::digest() const {
    return digest_hex(format());
}

void apply_metric_keys(MetricParams& p, const KeyValues& kv) {
    auto size = [&](const char* key, std::size_t fallback) {
        const std::int64_t v = kv.get_int(key, static_cast<std::int64_t>(fallback));
        if (v < 0) {
            throw ValidationError(std::string("config key '") + key + "' must be >= 0");
        }
        return static_cast<std::size_t>(v);
    };
    p.patch_size = size("patch_size", p.patch_size);
    if (const auto b = kv.get("baseline")) {
        p.baseline = fidelity::parse_baseline(*b);
    }
    p.mean_value = kv.get_double("baseline_mean", p.mean_value);
    p.rp_steps = size("rp_steps", p.rp_steps);
    p.fc_subset_size = size("fc_subset_size", p.fc_subset_size);
    p.fc_runs = size("fc_runs", p.fc_runs);
    p.fe_budget = size("fe_budget", p.fe_budget);
    p.inf_samples = size("inf_samples", p.inf_samples);
    p.threads = size("threads", p.threads);
}

std::vector<std::string> preset_names() {
    return {"experiment1", "experiment2", "full1", "full2", "tiny"};
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    if (name == "experiment1" || name == "experiment2") {
        c.data.width = 64;
        c.data.height = 64;
        c.data.n_train = 5000;
        c.data.n_val = 500;
    } else if (name == "full1" || name == "full2") {
        c.data.width = 128;
        c.data.height = 128;
        c.data.n_train = 50000;
        c.data.n_val = 2000;
    } else if (name == "tiny") {
        c.data.width = 32;
        c.data.height = 32;
        c.data.n_train = 8;
        c.data.n_val = 2;
    } else {
        throw ValidationError("unknown preset '" + name + "'");
    }
    c.data.background_mode = (name == "experiment2" || name == "full2")
                                 ? datagen::BackgroundMode::procedural
                                 : datagen::BackgroundMode::uniform;
    return c;
}

ExperimentConfig experiment_from_keys(const KeyValues& kv) {
    ExperimentConfig c = preset(kv.get_string("preset", "experiment1"));
    datagen::apply_generation_keys(c.data, kv);
    apply_metric_keys(c.metrics, kv);
    return c;
}

} // namespace fidbench::bench
