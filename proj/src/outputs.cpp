#include "fedsim/outputs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "fedsim/errors.hpp"

namespace fedsim {

using nlohmann::json;

namespace {

// Fixed shortest-exact formatting so repeated runs emit identical bytes.
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Prefer the shorter representation when it round-trips.
    for (int prec = 1; prec < 17; ++prec) {
        char shorter[32];
        std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(shorter, "%lf", &back);
        if (back == v) return shorter;
    }
    return buf;
}

std::string rounds_csv(const RunSummary& summary) {
    std::string out = "round,global_loss";
    std::vector<std::string> eval_names;
    if (!summary.records.empty()) {
        for (const auto& [name, _] : summary.records.front().eval) eval_names.push_back(name);
    }
    for (const auto& name : eval_names) out += "," + name;
    out += ",drift,lambda_ref,psi\n";
    for (const auto& rec : summary.records) {
        out += std::to_string(rec.round) + "," + fmt(rec.global_loss);
        for (const auto& name : eval_names) out += "," + fmt(rec.eval.at(name));
        out += "," + fmt(rec.drift) + "," + fmt(rec.lambda_ref) + "," + fmt(rec.psi) + "\n";
    }
    return out;
}

std::string svg_line_chart(const std::string& name, const std::vector<double>& values) {
    constexpr double width = 640.0, height = 400.0;
    constexpr double left = 60.0, right = 620.0, top = 40.0, bottom = 370.0;

    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -vmin;
    for (double v : values) {
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    if (vmin == vmax) {
        vmin -= 0.5;
        vmax += 0.5;
    }

    const auto n = values.size();
    std::string points;
    for (std::size_t i = 0; i < n; ++i) {
        const double x =
            n == 1 ? (left + right) / 2.0
                   : left + (right - left) * static_cast<double>(i) / static_cast<double>(n - 1);
        const double y = bottom - (bottom - top) * (values[i] - vmin) / (vmax - vmin);
        if (i > 0) points += " ";
        points += fmt(x) + "," + fmt(y);
    }

    std::string svg = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"" + fmt(width) + "\" height=\"" + fmt(height) +
           "\" fill=\"white\"/>\n";
    svg += "  <text x=\"" + fmt(width / 2.0) +
           "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" +
           name + " vs round</text>\n";
    svg += "  <line x1=\"" + fmt(left) + "\" y1=\"" + fmt(bottom) + "\" x2=\"" + fmt(right) +
           "\" y2=\"" + fmt(bottom) + "\" stroke=\"black\"/>\n";
    svg += "  <line x1=\"" + fmt(left) + "\" y1=\"" + fmt(top) + "\" x2=\"" + fmt(left) +
           "\" y2=\"" + fmt(bottom) + "\" stroke=\"black\"/>\n";
    svg += "  <text x=\"" + fmt(left - 6.0) + "\" y=\"" + fmt(bottom) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(vmin) +
           "</text>\n";
    svg += "  <text x=\"" + fmt(left - 6.0) + "\" y=\"" + fmt(top + 4.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" + fmt(vmax) +
           "</text>\n";
    svg += "  <text x=\"" + fmt(right) + "\" y=\"" + fmt(bottom + 14.0) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">round " +
           std::to_string(n) + "</text>\n";
    svg += "  <polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"" + points +
           "\"/>\n";
    svg += "</svg>\n";
    return svg;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write failed for '" + path + "'");
}

json tail_to_json(const TailEstimate& est) {
    json j;
    j["probability"] = est.probability;
    if (est.log_probability) {
        j["log_probability"] = *est.log_probability;
    } else {
        j["log_probability"] = nullptr;
        j["never_exceeded"] = true;
    }
    return j;
}

} // namespace

std::string summary_to_json_text(const RunSummary& summary) {
    json root;
    root["config"] = json::parse(summary.config_json);

    json records = json::array();
    for (const auto& rec : summary.records) {
        json r;
        r["round"] = rec.round;
        r["global_loss"] = rec.global_loss;
        r["eval"] = rec.eval;
        r["drift"] = rec.drift;
        r["lambda_ref"] = rec.lambda_ref;
        r["psi"] = rec.psi;
        records.push_back(r);
    }
    root["rounds"] = records;
    root["final_metrics"] = summary.final_metrics;

    json zetas;
    for (const auto& [name, z] : summary.zeta_per_metric) {
        zetas[name] = {{"abs", z.abs_sum}, {"signed", z.signed_sum}};
    }
    root["zeta"] = zetas;

    json targets = json::array();
    for (const auto& t : summary.targets) {
        json tj;
        tj["metric"] = t.metric;
        tj["value"] = t.value;
        if (t.round) {
            tj["round"] = *t.round;
        } else {
            tj["round"] = nullptr;
        }
        targets.push_back(tj);
    }
    root["rounds_to_target"] = targets;

    root["udp"] = tail_to_json(summary.udp);
    root["udp"]["delta"] = summary.udp_delta;
    root["wall_seconds"] = summary.wall_seconds;
    return root.dump(2) + "\n";
}

std::string ordering_report_to_json_text(const OrderingReport& rep, const DriftScenario& s) {
    json root;
    json scenario;
    scenario["delta"] = s.delta;
    scenario["eta"] = s.eta;
    scenario["lambda"] = s.lambda;
    scenario["anchor_gap"] = s.anchor_gap;
    scenario["prox_gap"] = s.prox_gap;
    scenario["c_opt"] = s.c_opt;
    scenario["noise"] = {{"model", to_string(s.noise)},
                         {s.noise == NoiseModel::gaussian ? "sigma" : "rate", s.noise_param}};
    scenario["samples"] = s.samples;
    scenario["seed"] = s.seed;
    root["scenario"] = scenario;

    root["in_regime"] = rep.in_regime;
    if (!rep.regime_note.empty()) root["regime_note"] = rep.regime_note;
    json methods;
    for (std::size_t k = 0; k < kDriftMethods.size(); ++k) {
        json m;
        m["threshold"] = rep.thresholds[k];
        m["closed_form"] = rep.closed_form[k];
        m["closed_form_log"] = std::isfinite(rep.closed_form_log[k])
                                   ? json(rep.closed_form_log[k])
                                   : json(nullptr);
        m["monte_carlo"] = rep.monte_carlo[k];
        methods[to_string(kDriftMethods[k])] = m;
    }
    root["methods"] = methods;
    root["restoring"] = {{"threshold", rep.restoring_threshold},
                         {"closed_form", rep.restoring_closed_form},
                         {"monte_carlo", rep.restoring_monte_carlo}};
    root["ordering_closed_form"] = rep.ordering_closed_form;
    root["ordering_monte_carlo"] = rep.ordering_monte_carlo;
    root["mc_within_3sigma"] = rep.mc_within_3sigma;
    return root.dump(2) + "\n";
}

std::vector<std::string> emit_outputs(const RunSummary& summary, const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output dir '" + dir + "': " + ec.message());

    std::vector<std::string> written;
    const std::string csv_path = (fs::path(dir) / "rounds.csv").string();
    write_file(csv_path, rounds_csv(summary));
    written.push_back(csv_path);

    const std::string json_path = (fs::path(dir) / "summary.json").string();
    write_file(json_path, summary_to_json_text(summary));
    written.push_back(json_path);

    std::map<std::string, std::vector<double>> series;
    for (const auto& rec : summary.records) {
        for (const auto& [name, value] : rec.eval) series[name].push_back(value);
        series["global_loss"].push_back(rec.global_loss);
        series["drift"].push_back(rec.drift);
    }
    for (const auto& [name, values] : series) {
        const std::string path = (fs::path(dir) / (name + ".svg")).string();
        write_file(path, svg_line_chart(name, values));
        written.push_back(path);
    }
    return written;
}

} // namespace fedsim
