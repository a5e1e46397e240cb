#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fedsim/errors.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/outputs.hpp"
#include "fedsim/udp_analysis.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw fedsim::IoError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// FEDSIM_OUTPUT_DIR overrides whatever the config asked for.
std::string resolve_output_dir(const std::string& configured) {
    if (const char* env = std::getenv("FEDSIM_OUTPUT_DIR")) {
        if (*env) return env;
    }
    return configured;
}

void print_run_summary(const fedsim::RunSummary& summary) {
    const auto& last = summary.records.back();
    std::printf("rounds: %zu  final global_loss: %.6f", summary.records.size(), last.global_loss);
    for (const auto& [name, value] : last.eval) std::printf("  %s: %.6f", name.c_str(), value);
    std::printf("\n");
    for (const auto& [name, z] : summary.zeta_per_metric) {
        std::printf("zeta[%s]: abs=%.6f signed=%.6f\n", name.c_str(), z.abs_sum, z.signed_sum);
    }
    for (const auto& t : summary.targets) {
        if (t.round) {
            std::printf("target %s %.4g reached at round %d\n", t.metric.c_str(), t.value, *t.round);
        } else {
            std::printf("target %s %.4g never reached\n", t.metric.c_str(), t.value);
        }
    }
    std::printf("empirical UDP: delta=%.6g p=%.6g\n", summary.udp_delta, summary.udp.probability);
    std::printf("wall: %.2fs\n", summary.wall_seconds);
}

int cmd_run(const std::string& config_path) {
    fedsim::ExperimentConfig cfg = fedsim::parse_config_file(config_path);
    cfg.output_dir = resolve_output_dir(cfg.output_dir);
    const fedsim::RunSummary summary = fedsim::run_experiment(cfg);
    const auto files = fedsim::emit_outputs(summary, cfg.output_dir);
    print_run_summary(summary);
    for (const auto& f : files) std::printf("wrote %s\n", f.c_str());
    return 0;
}

fedsim::DriftScenario parse_scenario(const std::string& text) {
    json root = json::parse(text);
    fedsim::DriftScenario s;
    s.delta = root.value("delta", s.delta);
    s.eta = root.value("eta", s.eta);
    s.lambda = root.value("lambda", s.lambda);
    s.anchor_gap = root.value("anchor_gap", s.anchor_gap);
    s.prox_gap = root.value("prox_gap", s.prox_gap);
    s.c_opt = root.value("c_opt", s.c_opt);
    if (root.contains("noise")) {
        const auto& n = root.at("noise");
        s.noise = fedsim::noise_model_from_string(n.value("model", "gaussian"));
        s.noise_param = s.noise == fedsim::NoiseModel::gaussian ? n.value("sigma", 1.0)
                                                                : n.value("rate", 1.0);
    }
    s.samples = root.value("samples", s.samples);
    s.seed = root.value("seed", s.seed);
    s.validate();
    return s;
}

int cmd_udp(const std::string& scenario_path, const std::string& out_dir) {
    const fedsim::DriftScenario s = parse_scenario(read_file(scenario_path));
    const fedsim::OrderingReport rep = fedsim::verify_ordering(s);

    for (std::size_t k = 0; k < fedsim::kDriftMethods.size(); ++k) {
        std::printf("%-8s threshold=%9.4f  closed_form=%.6g  monte_carlo=%.6g\n",
                    fedsim::to_string(fedsim::kDriftMethods[k]).c_str(), rep.thresholds[k],
                    rep.closed_form[k], rep.monte_carlo[k]);
    }
    std::printf("restoring(ref vs avg) threshold=%9.4f closed_form=%.6g monte_carlo=%.6g\n",
                rep.restoring_threshold, rep.restoring_closed_form, rep.restoring_monte_carlo);
    std::printf("in_regime=%s ordering_closed_form=%s ordering_monte_carlo=%s mc_3sigma=%s\n",
                rep.in_regime ? "yes" : "no", rep.ordering_closed_form ? "yes" : "no",
                rep.ordering_monte_carlo ? "yes" : "no", rep.mc_within_3sigma ? "yes" : "no");
    if (!rep.regime_note.empty()) std::printf("%s\n", rep.regime_note.c_str());

    const std::string dir = resolve_output_dir(out_dir);
    std::filesystem::create_directories(dir);
    const std::string path = (std::filesystem::path(dir) / "udp_report.json").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fedsim::IoError("cannot open '" + path + "' for writing");
    out << fedsim::ordering_report_to_json_text(rep, s);
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& param,
              const std::vector<std::string>& values) {
    if (param != "rho") {
        throw fedsim::ValidationError("sweep supports --param rho");
    }
    fedsim::ExperimentConfig base = fedsim::parse_config_file(config_path);
    if (base.strategy != fedsim::Strategy::fedref) {
        throw fedsim::ValidationError("sweep over rho requires strategy fedref");
    }
    const std::string base_dir = resolve_output_dir(base.output_dir);

    json table = json::array();
    for (const auto& v : values) {
        fedsim::ExperimentConfig cfg = base;
        cfg.fedref.rho = std::stoi(v);
        cfg.fedref.validate();
        cfg.output_dir = (std::filesystem::path(base_dir) / (param + "_" + v)).string();
        const fedsim::RunSummary summary = fedsim::run_experiment(cfg);
        fedsim::emit_outputs(summary, cfg.output_dir);

        json row;
        row[param] = cfg.fedref.rho;
        row["final_metrics"] = summary.final_metrics;
        for (const auto& [name, z] : summary.zeta_per_metric) {
            row["zeta"][name] = {{"abs", z.abs_sum}, {"signed", z.signed_sum}};
        }
        row["output_dir"] = cfg.output_dir;
        table.push_back(row);
        std::printf("%s=%s: ", param.c_str(), v.c_str());
        for (const auto& [name, value] : summary.final_metrics) {
            std::printf("%s=%.6f ", name.c_str(), value);
        }
        std::printf("\n");
    }

    std::filesystem::create_directories(base_dir);
    const std::string path = (std::filesystem::path(base_dir) / "sweep_summary.json").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fedsim::IoError("cannot open '" + path + "' for writing");
    out << table.dump(2) << "\n";
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated-learning strategy simulator"};
    app.require_subcommand(1);

    std::string run_config;
    auto* run = app.add_subcommand("run", "Run one experiment from a JSON config");
    run->add_option("config", run_config, "Path to experiment config")->required();

    std::string udp_config;
    std::string udp_out = "out";
    auto* udp = app.add_subcommand("udp", "Evaluate the drift-probability ordering for a scenario");
    udp->add_option("scenario", udp_config, "Path to scenario config")->required();
    udp->add_option("--output-dir", udp_out, "Where to write udp_report.json");

    std::string sweep_config;
    std::string sweep_param = "rho";
    std::vector<std::string> sweep_values;
    auto* sweep = app.add_subcommand("sweep", "Run one config across parameter values");
    sweep->add_option("config", sweep_config, "Path to experiment config")->required();
    sweep->add_option("--param", sweep_param, "Parameter to vary (rho)")->required();
    sweep->add_option("--values", sweep_values, "Comma-separated values")
        ->required()
        ->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_config);
        if (udp->parsed()) return cmd_udp(udp_config, udp_out);
        if (sweep->parsed()) return cmd_sweep(sweep_config, sweep_param, sweep_values);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
