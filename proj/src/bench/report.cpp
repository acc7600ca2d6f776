#include <charconv>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "fidbench/bench.hpp"
#include "fidbench/error.hpp"
#include "fidbench/image.hpp"

namespace fidbench::bench {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError(where + ": bad number '" + s + "'", 0);
    }
    return v;
}

std::size_t parse_size(const std::string& s, const std::string& where) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError(where + ": bad count '" + s + "'", 0);
    }
    return v;
}

// Returns data rows after checking the header line.
std::vector<std::vector<std::string>> read_csv(const std::string& path, const std::string& header,
                                               std::size_t n_fields) {
    const auto bytes = read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::string line;
    if (!std::getline(in, line) || line != header) {
        throw FormatError(path + ": expected header '" + header + "'", 0);
    }
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        auto fields = split_fields(line);
        if (fields.size() != n_fields) {
            throw FormatError(path + ":" + std::to_string(line_no) + ": expected " +
                                  std::to_string(n_fields) + " fields",
                              0);
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

std::string cell(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

} // namespace

std::vector<SummaryRow> read_summary(const std::string& path) {
    std::vector<SummaryRow> out;
    for (const auto& f : read_csv(path, "metric,mean,std,min,max,n,params_digest", 7)) {
        out.push_back({f[0], parse_double(f[1], path), parse_double(f[2], path),
                       parse_double(f[3], path), parse_double(f[4], path), parse_size(f[5], path),
                       f[6]});
    }
    return out;
}

std::vector<ResultRow> read_results(const std::string& path) {
    std::vector<ResultRow> out;
    for (const auto& f : read_csv(path, "metric,image_id,score,degenerate_flag", 4)) {
        if (f[3] != "0" && f[3] != "1") {
            throw FormatError(path + ": degenerate_flag must be 0 or 1", 0);
        }
        out.push_back({f[0], parse_size(f[1], path), parse_double(f[2], path), f[3] == "1"});
    }
    return out;
}

std::string cmd_report(const std::vector<std::string>& summary_files, bool csv) {
    if (summary_files.empty()) {
        throw ValidationError("report: no summary files given");
    }
    static const std::vector<std::pair<std::string, std::string>> rows = {
        {"faithfulness_correlation", "FC"},
        {"faithfulness_estimate", "FE"},
        {"infidelity", "Infidelity"},
        {"region_perturbation", "RP (AOPC)"},
        {"region_perturbation_norm", "RP (normalised)"},
    };

    std::vector<std::string> labels;
    std::vector<std::map<std::string, SummaryRow>> tables;
    std::vector<std::map<std::string, std::size_t>> degenerate;
    for (const auto& file : summary_files) {
        const fs::path p(file);
        std::string label = p.parent_path().filename().string();
        if (label.empty() || label == "eval") {
            // <root>/eval/summary.csv: label by the experiment root instead.
            const auto root = p.parent_path().parent_path().filename().string();
            if (!root.empty()) {
                label = root;
            }
        }
        labels.push_back(label.empty() ? file : label);
        auto& t = tables.emplace_back();
        for (auto& r : read_summary(file)) {
            t[r.metric] = r;
        }
        auto& d = degenerate.emplace_back();
        const auto results = (p.parent_path() / "results.csv").string();
        if (fs::exists(results)) {
            for (const auto& r : read_results(results)) {
                d[r.metric] += r.degenerate ? 1 : 0;
            }
        }
    }

    std::ostringstream out;
    if (csv) {
        out << "metric,experiment,mean,std,min,max,n,degenerate\n";
        for (const auto& [metric, name] : rows) {
            for (std::size_t e = 0; e < labels.size(); ++e) {
                const auto it = tables[e].find(metric);
                if (it == tables[e].end()) {
                    continue;
                }
                const auto& r = it->second;
                char buf[256];
                std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g,%.17g,%zu,%zu\n",
                              metric.c_str(), labels[e].c_str(), r.mean, r.std, r.min, r.max, r.n,
                              degenerate[e][metric]);
                out << buf;
            }
        }
        return out.str();
    }

    constexpr int name_width = 18;
    constexpr int col_width = 26;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s", name_width, "metric");
    out << buf;
    for (const auto& l : labels) {
        std::snprintf(buf, sizeof buf, " %*s", col_width, l.c_str());
        out << buf;
    }
    out << "\n";
    bool any_degenerate = false;
    for (const auto& [metric, name] : rows) {
        std::snprintf(buf, sizeof buf, "%-*s", name_width, name.c_str());
        out << buf;
        for (std::size_t e = 0; e < labels.size(); ++e) {
            const auto it = tables[e].find(metric);
            std::string text = "-";
            if (it != tables[e].end()) {
                text = cell(it->second.mean) + " +/- " + cell(it->second.std);
                if (degenerate[e][metric] > 0) {
                    text += " *";
                    any_degenerate = true;
                }
            }
            std::snprintf(buf, sizeof buf, " %*s", col_width, text.c_str());
            out << buf;
        }
        out << "\n";
    }
    if (any_degenerate) {
        out << "* degenerate images:";
        for (const auto& [metric, name] : rows) {
            for (std::size_t e = 0; e < labels.size(); ++e) {
                if (degenerate[e][metric] > 0) {
                    out << " " << name << "@" << labels[e] << "=" << degenerate[e][metric];
                }
            }
        }
        out << "\n";
    }
    return out.str();
}

} // namespace fidbench::bench
