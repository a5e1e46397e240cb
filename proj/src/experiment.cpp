#include "fedsim/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

Orientation metric_orientation(const std::string& metric_name) {
    if (metric_name == "accuracy" || metric_name == "f1" || metric_name == "dice" ||
        metric_name == "miou") {
        return Orientation::higher_is_better;
    }
    if (metric_name == "hf95" || metric_name.ends_with("loss")) {
        return Orientation::lower_is_better;
    }
    throw ValidationError("no orientation registered for metric '" + metric_name + "'");
}

std::vector<int> select_clients(int num_clients, int m, int round, std::uint64_t global_seed) {
    if (num_clients < 1) throw UsageError("select_clients: num_clients must be >= 1");
    if (m < 1 || m > num_clients) {
        throw UsageError("select_clients: m must be within [1, num_clients]");
    }
    std::vector<int> ids(static_cast<std::size_t>(num_clients));
    std::iota(ids.begin(), ids.end(), 0);
    Rng rng(derive_seed(global_seed, 0x73656cULL, static_cast<std::uint64_t>(round))); // "sel"
    // Partial Fisher-Yates: the first m slots are a uniform draw without
    // replacement.
    for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(num_clients - i)));
        std::swap(ids[static_cast<std::size_t>(i)], ids[static_cast<std::size_t>(j)]);
    }
    ids.resize(static_cast<std::size_t>(m));
    return ids;
}

std::uint64_t client_round_seed(std::uint64_t global_seed, int client, int round) {
    return derive_seed(global_seed, static_cast<std::uint64_t>(client),
                       static_cast<std::uint64_t>(round));
}

EvalSplit make_eval_split(const Dataset& full, double fraction, std::uint64_t global_seed,
                          int clients) {
    const std::size_t n = full.size();
    auto n_eval = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n)));
    n_eval = std::max<std::size_t>(n_eval, 1);
    if (n - n_eval < static_cast<std::size_t>(clients)) {
        throw ValidationError("eval split leaves fewer training samples than clients");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(derive_seed(global_seed, 0x6576616cULL)); // "eval"
    rng.shuffle(order);
    std::vector<std::size_t> eval_idx(order.begin(),
                                      order.begin() + static_cast<std::ptrdiff_t>(n_eval));
    std::vector<std::size_t> train_idx(order.begin() + static_cast<std::ptrdiff_t>(n_eval),
                                       order.end());
    return {subset(full, train_idx), subset(full, eval_idx)};
}

namespace {

std::map<std::string, double> evaluate(const ModelSpec& spec, const ParameterVector& theta,
                                       const Dataset& eval_set) {
    std::vector<std::size_t> all(eval_set.size());
    std::iota(all.begin(), all.end(), 0);
    const double loss =
        mean_loss_rows(spec, theta.span(), eval_set.features, eval_set.labels, all);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < eval_set.size(); ++i) {
        if (predict_class(spec, theta.span(), eval_set.features.row(i)) == eval_set.labels[i]) {
            ++correct;
        }
    }
    return {{"accuracy", static_cast<double>(correct) / static_cast<double>(eval_set.size())},
            {"eval_loss", loss}};
}

std::vector<ClientReport> train_round(const ExperimentConfig& cfg,
                                      const std::vector<Dataset>& shards,
                                      const ParameterVector& theta,
                                      const std::vector<int>& selected, int round) {
    std::vector<ClientReport> reports(selected.size());
    std::vector<std::exception_ptr> errors(selected.size());

    auto work = [&](std::size_t slot) {
        try {
            const int client = selected[slot];
            LocalTrainConfig local = cfg.local;
            local.shuffle_seed = client_round_seed(cfg.global_seed, client, round);
            reports[slot] =
                local_train(cfg.model, theta, shards[static_cast<std::size_t>(client)], local);
        } catch (...) {
            errors[slot] = std::current_exception();
        }
    };

    if (cfg.parallel_clients && selected.size() > 1) {
        std::vector<std::thread> threads;
        threads.reserve(selected.size());
        for (std::size_t i = 0; i < selected.size(); ++i) threads.emplace_back(work, i);
        for (auto& t : threads) t.join();
    } else {
        for (std::size_t i = 0; i < selected.size(); ++i) work(i);
    }

    for (std::size_t i = 0; i < selected.size(); ++i) {
        if (errors[i]) {
            try {
                std::rethrow_exception(errors[i]);
            } catch (const std::exception& e) {
                throw UsageError("round " + std::to_string(round) + ", client " +
                                 std::to_string(selected[i]) + ": " + e.what());
            }
        }
    }
    return reports;
}

double median_of(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

RunSummary run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();

    Dataset full;
    if (cfg.data.source == DataConfig::Source::synthetic) {
        full = gen_synthetic(cfg.data.classes, cfg.data.per_class, cfg.data.input_dim,
                             cfg.data.separation, cfg.data.seed);
    } else {
        full = load_csv(cfg.data.path, cfg.data.schema);
        if (full.class_count != cfg.model.num_classes) {
            throw ValidationError("csv class count " + std::to_string(full.class_count) +
                                  " != model.num_classes " + std::to_string(cfg.model.num_classes));
        }
    }

    EvalSplit split = make_eval_split(full, cfg.eval_split_fraction, cfg.global_seed, cfg.clients);
    const std::vector<Dataset> shards = partition(split.train, cfg.data.plan);

    ParameterVector theta = init_model(cfg.model);
    const std::size_t dim = theta.dim();

    FedOptVariant opt_variant = FedOptVariant::adam;
    if (cfg.strategy == Strategy::fedyogi) opt_variant = FedOptVariant::yogi;
    if (cfg.strategy == Strategy::fedadagrad) opt_variant = FedOptVariant::adagrad;
    FedOptState opt_state = FedOptState::init(opt_variant, dim, cfg.fedopt.eta_s, cfg.fedopt.beta1,
                                              cfg.fedopt.beta2, cfg.fedopt.tau);
    FedRefState ref_state = FedRefState::init(cfg.fedref);

    RunSummary summary;
    summary.config_json = config_to_json(cfg);
    summary.records.reserve(static_cast<std::size_t>(cfg.rounds));
    summary.trajectory.reserve(static_cast<std::size_t>(cfg.rounds));

    double prior_min_eval_loss = 0.0;
    std::vector<double> drifts;
    drifts.reserve(static_cast<std::size_t>(cfg.rounds));

    for (int round = 1; round <= cfg.rounds; ++round) {
        const std::vector<int> selected =
            select_clients(cfg.clients, cfg.clients_per_round, round, cfg.global_seed);
        const std::vector<ClientReport> reports = train_round(cfg, shards, theta, selected, round);

        ParameterVector theta_next;
        double lambda_ref = 0.0;
        switch (cfg.strategy) {
            case Strategy::fedavg:
            case Strategy::fedprox:
                theta_next = fedavg_aggregate(reports);
                break;
            case Strategy::fedadam:
            case Strategy::fedyogi:
            case Strategy::fedadagrad: {
                const ParameterVector agg = fedavg_aggregate(reports);
                auto [next, state] = fedopt_step(opt_state, theta, agg);
                theta_next = std::move(next);
                opt_state = std::move(state);
                break;
            }
            case Strategy::fedref: {
                auto [next, state] = fedref_round(std::move(ref_state), reports, round);
                theta_next = std::move(next);
                ref_state = std::move(state);
                lambda_ref = ref_state.cfg.schedule.current;
                break;
            }
        }

        RoundRecord rec;
        rec.round = round;
        rec.global_loss = aggregate_loss(reports);
        rec.eval = evaluate(cfg.model, theta_next, split.eval);
        rec.drift = drift_magnitude(theta_next, theta);
        rec.lambda_ref = lambda_ref;
        const double eval_loss = rec.eval.at("eval_loss");
        rec.psi = round == 1 ? 0.0 : eval_loss - prior_min_eval_loss;
        prior_min_eval_loss = round == 1 ? eval_loss : std::min(prior_min_eval_loss, eval_loss);

        drifts.push_back(rec.drift);
        summary.records.push_back(std::move(rec));
        summary.trajectory.push_back(theta_next);
        theta = std::move(theta_next);
    }

    const RoundRecord& last = summary.records.back();
    summary.final_metrics = last.eval;
    summary.final_metrics["global_loss"] = last.global_loss;

    std::map<std::string, std::vector<double>> series;
    for (const auto& rec : summary.records) {
        for (const auto& [name, value] : rec.eval) series[name].push_back(value);
        series["global_loss"].push_back(rec.global_loss);
    }
    for (const auto& [name, values] : series) {
        EvalSeries s{values, metric_orientation(name), name};
        summary.zeta_per_metric[name] = zeta(forgetting_psi_series(s));
    }

    for (const auto& t : cfg.targets) {
        EvalSeries s{series.at(t.metric), metric_orientation(t.metric), t.metric};
        summary.targets.push_back(TargetResult{t.metric, t.value, rounds_to_target(s, t.value)});
    }

    summary.udp_delta = cfg.udp_delta ? *cfg.udp_delta
                                      : std::max(2.0 * median_of(drifts), 1e-12);
    summary.udp = empirical_udp(drifts, summary.udp_delta);

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

} // namespace fedsim
