#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/local_trainer.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/model.hpp"
#include "fedsim/strategies.hpp"

namespace fedsim {

enum class Strategy { fedavg, fedprox, fedadam, fedyogi, fedadagrad, fedref };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct FedOptConfig {
    double eta_s = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.99;
    double tau = 1e-4;

    void validate() const;
    bool operator==(const FedOptConfig&) const = default;
};

// Where the samples come from and how they are spread across clients.
struct DataConfig {
    enum class Source { synthetic, csv };
    Source source = Source::synthetic;

    // synthetic
    int classes = 2;
    int per_class = 100;
    int input_dim = 2;
    double separation = 3.0;
    std::uint64_t seed = 1;

    // csv
    std::string path;
    CsvSchema schema;

    PartitionPlan plan; // num_clients is overwritten from ExperimentConfig.clients

    bool operator==(const DataConfig&) const = default;
};

struct TargetSpec {
    std::string metric;
    double value = 0.0;

    bool operator==(const TargetSpec&) const = default;
};

// Full declarative description of one run. parse_config() fills defaults for
// everything a minimal config omits.
struct ExperimentConfig {
    Strategy strategy = Strategy::fedavg;
    int rounds = 1;
    int clients = 10;
    int clients_per_round = 10;
    ModelSpec model;
    DataConfig data;
    LocalTrainConfig local; // shuffle_seed is derived per (client, round)
    FedRefConfig fedref;    // used iff strategy == fedref
    FedOptConfig fedopt;    // used iff strategy is a fedopt variant
    double eval_split_fraction = 0.2;
    std::vector<TargetSpec> targets;
    std::uint64_t global_seed = 1;
    std::string output_dir = "out";
    std::optional<double> udp_delta; // empty: 2x median observed drift
    bool parallel_clients = false;

    void validate() const;
    bool operator==(const ExperimentConfig&) const = default;
};

// JSON in, validated config out. Unknown keys and out-of-range values are
// rejected with the offending path in the message.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig parse_config_file(const std::string& path);
std::string config_to_json(const ExperimentConfig& cfg); // round-trips through parse_config

// m distinct client ids, uniform without replacement, seeded by
// (global_seed, round). The returned order is the aggregation order.
std::vector<int> select_clients(int num_clients, int m, int round, std::uint64_t global_seed);

// Held-out split drawn before partitioning; the same (dataset, fraction,
// global_seed) always produces the same split. Training must retain at least
// one sample per client.
struct EvalSplit {
    Dataset train;
    Dataset eval;
};

EvalSplit make_eval_split(const Dataset& full, double fraction, std::uint64_t global_seed,
                          int clients);

// The per-(client, round) stream feeding LocalTrainConfig.shuffle_seed.
std::uint64_t client_round_seed(std::uint64_t global_seed, int client, int round);

struct RoundRecord {
    int round = 0;
    double global_loss = 0.0;           // sample-weighted client training loss
    std::map<std::string, double> eval; // held-out metrics, e.g. eval_loss/accuracy
    double drift = 0.0;                 // ||theta_{r+1} - theta_r||
    double lambda_ref = 0.0;            // 0 for strategies without the schedule
    double psi = 0.0;                   // forgetting gap of eval_loss at this round
};

struct TargetResult {
    std::string metric;
    double value = 0.0;
    std::optional<int> round; // empty: never reached
};

struct RunSummary {
    std::string config_json; // exact config echo (re-parseable)
    std::vector<RoundRecord> records;
    std::map<std::string, double> final_metrics;
    std::map<std::string, ZetaPair> zeta_per_metric;
    std::vector<TargetResult> targets;
    double udp_delta = 0.0;
    TailEstimate udp;
    double wall_seconds = 0.0;

    // Broadcast model after every round (in memory only, not serialized).
    std::vector<ParameterVector> trajectory;
};

// Runs the full federated loop. Deterministic for a fixed config, whether
// clients train serially or in parallel.
RunSummary run_experiment(const ExperimentConfig& cfg);

// Orientation assigned to a metric name (losses fall, accuracy rises).
Orientation metric_orientation(const std::string& metric_name);

} // namespace fedsim
