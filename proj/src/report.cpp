#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "shadowlab/eval.hpp"

namespace shadowlab {

namespace {

using json = nlohmann::json;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

}  // namespace

std::string emit_report_csv(const std::vector<EvalReport>& reports) {
    std::ostringstream os;
    os << "defense,metric,benign_accuracy,trials,excluded";
    const std::vector<double>* ks = nullptr;
    for (const EvalReport& r : reports) {
        if (!r.k_values.empty()) {
            if (ks != nullptr && *ks != r.k_values)
                throw std::invalid_argument("emit_report_csv: reports have differing k sweeps");
            ks = &r.k_values;
        }
    }
    if (ks != nullptr)
        for (double k : *ks) os << ",k=" << fmt("%.2f", k);
    os << "\n";
    for (const EvalReport& r : reports) {
        if (r.k_values.empty()) continue;
        os << r.defense_label << ",robustness," << fmt("%.6f", r.benign_accuracy) << "," << r.trials
           << "," << r.excluded;
        for (double v : r.robustness) os << "," << fmt("%.6f", v);
        os << "\n";
        os << r.defense_label << ",mean_queries," << fmt("%.6f", r.benign_accuracy) << ","
           << r.trials << "," << r.excluded;
        for (double v : r.mean_queries) os << "," << fmt("%.2f", v);
        os << "\n";
    }
    return os.str();
}

namespace {

json report_to_json(const EvalReport& r) {
    json detail = json::array();
    for (const auto& per_k : r.detail) {
        json row = json::array();
        for (const TrialStat& st : per_k) {
            row.push_back({{"robustness", st.robustness},
                           {"mean_queries", st.mean_queries},
                           {"attacked", st.attacked},
                           {"successes", st.successes}});
        }
        detail.push_back(row);
    }
    return json{{"defense", r.defense_label},
                {"benign_accuracy", r.benign_accuracy},
                {"trials", r.trials},
                {"excluded", r.excluded},
                {"retained", r.retained},
                {"attack_set_size", r.attack_set_size},
                {"base_seed", r.base_seed},
                {"k_values", r.k_values},
                {"robustness", r.robustness},
                {"mean_queries", r.mean_queries},
                {"detail", detail}};
}

}  // namespace

std::string emit_report_json(const EvalReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

EvalReport parse_report_json(const std::string& text) {
    json j = json::parse(text);
    EvalReport r;
    r.defense_label = j.at("defense").get<std::string>();
    r.benign_accuracy = j.at("benign_accuracy").get<double>();
    r.trials = j.at("trials").get<int>();
    r.excluded = j.at("excluded").get<int>();
    r.retained = j.at("retained").get<int>();
    r.attack_set_size = j.at("attack_set_size").get<int>();
    r.base_seed = j.at("base_seed").get<std::uint64_t>();
    r.k_values = j.at("k_values").get<std::vector<double>>();
    r.robustness = j.at("robustness").get<std::vector<double>>();
    r.mean_queries = j.at("mean_queries").get<std::vector<double>>();
    for (const auto& row : j.at("detail")) {
        std::vector<TrialStat> per_k;
        for (const auto& st : row) {
            TrialStat t;
            t.robustness = st.at("robustness").get<double>();
            t.mean_queries = st.at("mean_queries").get<double>();
            t.attacked = st.at("attacked").get<int>();
            t.successes = st.at("successes").get<int>();
            per_k.push_back(t);
        }
        r.detail.push_back(std::move(per_k));
    }
    return r;
}

std::string emit_report(const EvalReport& report, const std::string& format) {
    if (format == "json") return emit_report_json(report);
    if (format == "csv") return emit_report_csv({report});
    throw std::invalid_argument("emit_report: unknown format '" + format + "'");
}

std::string emit_robustness_svg(const std::vector<EvalReport>& reports) {
    // Static line chart: robustness (y, 0..1) vs k (x).
    const int width = 560, height = 360;
    const int ml = 60, mr = 20, mt = 30, mb = 50;
    const double x0 = 0.15, x1 = 0.75;  // k axis range

    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

    auto px = [&](double k) { return ml + (k - x0) / (x1 - x0) * (width - ml - mr); };
    auto py = [&](double rob) { return mt + (1.0 - rob) * (height - mt - mb); };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    os << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
       << "robustness vs shadow strength k</text>\n";
    // axes
    os << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << width - mr << "\" y2=\""
       << py(0) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << py(0) << "\" x2=\"" << ml << "\" y2=\"" << py(1)
       << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        double rob = i / 5.0;
        os << "<text x=\"" << ml - 8 << "\" y=\"" << fmt("%.1f", py(rob) + 4)
           << "\" text-anchor=\"end\" font-size=\"11\">" << fmt("%.1f", rob) << "</text>\n";
        os << "<line x1=\"" << ml - 4 << "\" y1=\"" << fmt("%.1f", py(rob)) << "\" x2=\"" << ml
           << "\" y2=\"" << fmt("%.1f", py(rob)) << "\" stroke=\"black\"/>\n";
    }
    for (double k = 0.2; k <= 0.71; k += 0.1) {
        os << "<text x=\"" << fmt("%.1f", px(k)) << "\" y=\"" << height - mb + 20
           << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt("%.1f", k) << "</text>\n";
        os << "<line x1=\"" << fmt("%.1f", px(k)) << "\" y1=\"" << py(0) << "\" x2=\""
           << fmt("%.1f", px(k)) << "\" y2=\"" << py(0) + 4 << "\" stroke=\"black\"/>\n";
    }
    os << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
       << "\" text-anchor=\"middle\" font-size=\"12\">k</text>\n";

    for (std::size_t ri = 0; ri < reports.size(); ++ri) {
        const EvalReport& r = reports[ri];
        const char* color = kColors[ri % 5];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < r.k_values.size(); ++i) {
            os << fmt("%.1f", px(r.k_values[i])) << "," << fmt("%.1f", py(r.robustness[i]));
            if (i + 1 < r.k_values.size()) os << " ";
        }
        os << "\"/>\n";
        os << "<text x=\"" << width - mr - 140 << "\" y=\"" << mt + 16 * (ri + 1)
           << "\" font-size=\"12\" fill=\"" << color << "\">" << r.defense_label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace shadowlab
