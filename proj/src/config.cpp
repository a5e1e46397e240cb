#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fedsim/errors.hpp"
#include "fedsim/experiment.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

using nlohmann::json;

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::fedavg: return "fedavg";
        case Strategy::fedprox: return "fedprox";
        case Strategy::fedadam: return "fedadam";
        case Strategy::fedyogi: return "fedyogi";
        case Strategy::fedadagrad: return "fedadagrad";
        case Strategy::fedref: return "fedref";
    }
    return "?";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "fedavg") return Strategy::fedavg;
    if (s == "fedprox") return Strategy::fedprox;
    if (s == "fedadam") return Strategy::fedadam;
    if (s == "fedyogi") return Strategy::fedyogi;
    if (s == "fedadagrad") return Strategy::fedadagrad;
    if (s == "fedref") return Strategy::fedref;
    throw ValidationError("unknown strategy: '" + s + "'");
}

void FedOptConfig::validate() const {
    if (!(eta_s > 0.0)) throw ValidationError("fedopt.eta_s must be > 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("fedopt.beta1 must be in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("fedopt.beta2 must be in [0,1)");
    if (!(tau > 0.0)) throw ValidationError("fedopt.tau must be > 0");
}

namespace {

bool is_fedopt(Strategy s) {
    return s == Strategy::fedadam || s == Strategy::fedyogi || s == Strategy::fedadagrad;
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ValidationError("unknown key '" + path + key + "'");
        }
    }
}

const json* find(const json& obj, const std::string& key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError("'" + path + "' must be a number");
    return v.get<double>();
}

int get_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) throw ValidationError("'" + path + "' must be an integer");
    return v.get<int>();
}

std::uint64_t get_seed(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) {
        return static_cast<std::uint64_t>(v.get<long long>());
    }
    throw ValidationError("'" + path + "' must be a non-negative integer");
}

std::string get_string(const json& v, const std::string& path) {
    if (!v.is_string()) throw ValidationError("'" + path + "' must be a string");
    return v.get<std::string>();
}

bool get_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) throw ValidationError("'" + path + "' must be a boolean");
    return v.get<bool>();
}

ModelSpec parse_model(const json& obj, std::uint64_t global_seed) {
    check_keys(obj, "model.",
               {"kind", "input_dim", "hidden_dim", "num_classes", "init_scale", "init_seed"});
    ModelSpec m;
    const json* kind = find(obj, "kind");
    if (!kind) throw ValidationError("missing required key 'model.kind'");
    m.kind = model_kind_from_string(get_string(*kind, "model.kind"));
    const json* in = find(obj, "input_dim");
    if (!in) throw ValidationError("missing required key 'model.input_dim'");
    m.input_dim = get_int(*in, "model.input_dim");
    const json* classes = find(obj, "num_classes");
    if (!classes) throw ValidationError("missing required key 'model.num_classes'");
    m.num_classes = get_int(*classes, "model.num_classes");
    if (const json* h = find(obj, "hidden_dim")) {
        m.hidden_dim = get_int(*h, "model.hidden_dim");
    } else if (m.kind == ModelKind::mlp_one_hidden) {
        throw ValidationError("missing required key 'model.hidden_dim' (mlp_one_hidden)");
    }
    if (const json* s = find(obj, "init_scale")) m.init_scale = get_double(*s, "model.init_scale");
    m.init_seed = find(obj, "init_seed") ? get_seed(*find(obj, "init_seed"), "model.init_seed")
                                         : derive_seed(global_seed, 0x6d6f64656cULL); // "model"
    m.validate();
    return m;
}

PartitionPlan parse_partition(const json& obj, int clients, std::uint64_t global_seed) {
    check_keys(obj, "data.partition.", {"kind", "shards_per_client", "alpha", "seed"});
    PartitionPlan p;
    p.num_clients = clients;
    if (const json* k = find(obj, "kind")) {
        p.kind = partition_kind_from_string(get_string(*k, "data.partition.kind"));
    }
    if (const json* spc = find(obj, "shards_per_client")) {
        if (p.kind != PartitionKind::label_shards) {
            throw ValidationError(
                "'data.partition.shards_per_client' only applies to kind label_shards");
        }
        p.shards_per_client = get_int(*spc, "data.partition.shards_per_client");
    }
    if (const json* a = find(obj, "alpha")) {
        if (p.kind != PartitionKind::dirichlet) {
            throw ValidationError("'data.partition.alpha' only applies to kind dirichlet");
        }
        p.alpha = get_double(*a, "data.partition.alpha");
    }
    p.seed = find(obj, "seed") ? get_seed(*find(obj, "seed"), "data.partition.seed")
                               : derive_seed(global_seed, 0x706172ULL); // "par"
    p.validate();
    return p;
}

DataConfig parse_data(const json& obj, const ModelSpec& model, int clients,
                      std::uint64_t global_seed) {
    check_keys(obj, "data.",
               {"source", "classes", "per_class", "input_dim", "separation", "seed", "path",
                "label_column", "feature_columns", "partition"});
    DataConfig d;
    const std::string source =
        find(obj, "source") ? get_string(*find(obj, "source"), "data.source") : "synthetic";
    if (source == "synthetic") {
        d.source = DataConfig::Source::synthetic;
    } else if (source == "csv") {
        d.source = DataConfig::Source::csv;
    } else {
        throw ValidationError("'data.source' must be 'synthetic' or 'csv'");
    }

    if (d.source == DataConfig::Source::synthetic) {
        for (const char* k : {"path", "label_column", "feature_columns"}) {
            if (find(obj, k)) {
                throw ValidationError("'data." + std::string(k) + "' only applies to source csv");
            }
        }
        d.classes = find(obj, "classes") ? get_int(*find(obj, "classes"), "data.classes")
                                         : model.num_classes;
        d.input_dim = find(obj, "input_dim") ? get_int(*find(obj, "input_dim"), "data.input_dim")
                                             : model.input_dim;
        if (const json* pc = find(obj, "per_class")) d.per_class = get_int(*pc, "data.per_class");
        if (const json* s = find(obj, "separation")) {
            d.separation = get_double(*s, "data.separation");
        }
        d.seed = find(obj, "seed") ? get_seed(*find(obj, "seed"), "data.seed")
                                   : derive_seed(global_seed, 0x64617461ULL); // "data"
    } else {
        for (const char* k : {"classes", "per_class", "input_dim", "separation", "seed"}) {
            if (find(obj, k)) {
                throw ValidationError("'data." + std::string(k) +
                                      "' only applies to source synthetic");
            }
        }
        const json* path = find(obj, "path");
        if (!path) throw ValidationError("missing required key 'data.path' (source csv)");
        d.path = get_string(*path, "data.path");
        if (const json* lc = find(obj, "label_column")) {
            d.schema.label_column = get_int(*lc, "data.label_column");
        }
        const json* fc = find(obj, "feature_columns");
        if (!fc) throw ValidationError("missing required key 'data.feature_columns' (source csv)");
        if (!fc->is_array() || fc->empty()) {
            throw ValidationError("'data.feature_columns' must be a non-empty array");
        }
        for (const auto& c : *fc) {
            d.schema.feature_columns.push_back(get_int(c, "data.feature_columns[]"));
        }
    }

    if (const json* part = find(obj, "partition")) {
        if (!part->is_object()) throw ValidationError("'data.partition' must be an object");
        d.plan = parse_partition(*part, clients, global_seed);
    } else {
        d.plan.num_clients = clients;
        d.plan.seed = derive_seed(global_seed, 0x706172ULL);
    }
    return d;
}

LocalTrainConfig parse_local(const json* obj, Strategy strategy) {
    LocalTrainConfig l;
    l.proximal_mu = strategy == Strategy::fedprox ? 0.5 : 0.0;
    if (obj) {
        check_keys(*obj, "local.", {"epochs", "batch_size", "learning_rate", "proximal_mu"});
        if (const json* e = find(*obj, "epochs")) l.epochs = get_int(*e, "local.epochs");
        if (const json* b = find(*obj, "batch_size")) {
            l.batch_size = get_int(*b, "local.batch_size");
        }
        if (const json* lr = find(*obj, "learning_rate")) {
            l.learning_rate = get_double(*lr, "local.learning_rate");
        }
        if (const json* mu = find(*obj, "proximal_mu")) {
            l.proximal_mu = get_double(*mu, "local.proximal_mu");
        }
    }
    l.validate();
    if (strategy == Strategy::fedprox && !(l.proximal_mu > 0.0)) {
        throw ValidationError("'local.proximal_mu' must be > 0 for strategy fedprox");
    }
    if (strategy != Strategy::fedprox && l.proximal_mu != 0.0) {
        throw ValidationError("'local.proximal_mu' must be 0 unless strategy is fedprox");
    }
    return l;
}

FedRefConfig parse_fedref(const json* obj) {
    FedRefConfig f;
    if (!obj) {
        f.schedule.current = f.schedule.lambda_ref_0;
        return f;
    }
    check_keys(*obj, "fedref.",
               {"lambda_g", "lambda_ref_0", "lambda_ref_top", "sigma_r", "sigma_w", "rho",
                "server_eta", "literal_l2"});
    if (const json* v = find(*obj, "lambda_g")) f.lambda_g = get_double(*v, "fedref.lambda_g");
    if (const json* v = find(*obj, "lambda_ref_0")) {
        f.schedule.lambda_ref_0 = get_double(*v, "fedref.lambda_ref_0");
    }
    if (const json* v = find(*obj, "lambda_ref_top")) {
        f.schedule.lambda_ref_top = get_double(*v, "fedref.lambda_ref_top");
    }
    if (const json* v = find(*obj, "sigma_r")) f.schedule.sigma_r = get_int(*v, "fedref.sigma_r");
    if (const json* v = find(*obj, "sigma_w")) f.schedule.sigma_w = get_double(*v, "fedref.sigma_w");
    if (const json* v = find(*obj, "rho")) f.rho = get_int(*v, "fedref.rho");
    if (const json* v = find(*obj, "server_eta")) f.server_eta = get_double(*v, "fedref.server_eta");
    if (const json* v = find(*obj, "literal_l2")) f.literal_l2 = get_bool(*v, "fedref.literal_l2");
    f.schedule.current = f.schedule.lambda_ref_0;
    f.validate();
    return f;
}

FedOptConfig parse_fedopt(const json* obj) {
    FedOptConfig f;
    if (!obj) return f;
    check_keys(*obj, "fedopt.", {"eta_s", "beta1", "beta2", "tau"});
    if (const json* v = find(*obj, "eta_s")) f.eta_s = get_double(*v, "fedopt.eta_s");
    if (const json* v = find(*obj, "beta1")) f.beta1 = get_double(*v, "fedopt.beta1");
    if (const json* v = find(*obj, "beta2")) f.beta2 = get_double(*v, "fedopt.beta2");
    if (const json* v = find(*obj, "tau")) f.tau = get_double(*v, "fedopt.tau");
    f.validate();
    return f;
}

} // namespace

void ExperimentConfig::validate() const {
    if (rounds < 1) throw ValidationError("'rounds' must be >= 1");
    if (clients < 1) throw ValidationError("'clients' must be >= 1");
    if (clients_per_round < 1 || clients_per_round > clients) {
        throw ValidationError("'clients_per_round' must be within [1, clients]");
    }
    model.validate();
    local.validate();
    if (strategy == Strategy::fedref) fedref.validate();
    if (is_fedopt(strategy)) fedopt.validate();
    if (!(eval_split_fraction > 0.0 && eval_split_fraction < 1.0)) {
        throw ValidationError("'eval_split_fraction' must be in (0,1)");
    }
    if (data.source == DataConfig::Source::synthetic) {
        if (data.classes != model.num_classes) {
            throw ValidationError("'data.classes' must equal 'model.num_classes'");
        }
        if (data.input_dim != model.input_dim) {
            throw ValidationError("'data.input_dim' must equal 'model.input_dim'");
        }
    } else if (static_cast<int>(data.schema.feature_columns.size()) != model.input_dim) {
        throw ValidationError("'data.feature_columns' size must equal 'model.input_dim'");
    }
    if (data.plan.num_clients != clients) {
        throw ValidationError("partition num_clients must equal 'clients'");
    }
    for (const auto& t : targets) {
        if (t.metric != "global_loss" && t.metric != "eval_loss" && t.metric != "accuracy") {
            throw ValidationError("'targets' metric '" + t.metric +
                                  "' is not one of global_loss/eval_loss/accuracy");
        }
        if (!std::isfinite(t.value)) throw ValidationError("'targets' value must be finite");
    }
    if (udp_delta && !(*udp_delta > 0.0)) throw ValidationError("'udp_delta' must be > 0");
    if (output_dir.empty()) throw ValidationError("'output_dir' must be non-empty");
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ValidationError("config root must be a JSON object");
    check_keys(root, "",
               {"strategy", "rounds", "clients", "clients_per_round", "model", "data", "local",
                "fedref", "fedopt", "eval_split_fraction", "targets", "global_seed", "output_dir",
                "udp_delta", "parallel_clients"});

    ExperimentConfig cfg;
    const json* strategy = find(root, "strategy");
    if (!strategy) throw ValidationError("missing required key 'strategy'");
    cfg.strategy = strategy_from_string(get_string(*strategy, "strategy"));
    const json* rounds = find(root, "rounds");
    if (!rounds) throw ValidationError("missing required key 'rounds'");
    cfg.rounds = get_int(*rounds, "rounds");

    if (const json* v = find(root, "clients")) cfg.clients = get_int(*v, "clients");
    cfg.clients_per_round = find(root, "clients_per_round")
                                ? get_int(*find(root, "clients_per_round"), "clients_per_round")
                                : cfg.clients;
    cfg.global_seed = find(root, "global_seed")
                          ? get_seed(*find(root, "global_seed"), "global_seed")
                          : 1;

    const json* model = find(root, "model");
    if (!model || !model->is_object()) {
        throw ValidationError("missing required object 'model'");
    }
    cfg.model = parse_model(*model, cfg.global_seed);

    const json* data = find(root, "data");
    if (!data || !data->is_object()) throw ValidationError("missing required object 'data'");
    cfg.data = parse_data(*data, cfg.model, cfg.clients, cfg.global_seed);

    const json* local = find(root, "local");
    if (local && !local->is_object()) throw ValidationError("'local' must be an object");
    cfg.local = parse_local(local, cfg.strategy);

    if (const json* fr = find(root, "fedref")) {
        if (cfg.strategy != Strategy::fedref) {
            throw ValidationError("'fedref' section present but strategy is " +
                                  to_string(cfg.strategy));
        }
        if (!fr->is_object()) throw ValidationError("'fedref' must be an object");
        cfg.fedref = parse_fedref(fr);
    } else {
        cfg.fedref = parse_fedref(nullptr);
    }
    if (const json* fo = find(root, "fedopt")) {
        if (!is_fedopt(cfg.strategy)) {
            throw ValidationError("'fedopt' section present but strategy is " +
                                  to_string(cfg.strategy));
        }
        if (!fo->is_object()) throw ValidationError("'fedopt' must be an object");
        cfg.fedopt = parse_fedopt(fo);
    } else {
        cfg.fedopt = parse_fedopt(nullptr);
    }

    if (const json* v = find(root, "eval_split_fraction")) {
        cfg.eval_split_fraction = get_double(*v, "eval_split_fraction");
    }
    if (const json* v = find(root, "targets")) {
        if (!v->is_array()) throw ValidationError("'targets' must be an array");
        for (const auto& t : *v) {
            if (!t.is_object()) throw ValidationError("'targets[]' must be objects");
            check_keys(t, "targets[].", {"metric", "value"});
            const json* metric = find(t, "metric");
            const json* value = find(t, "value");
            if (!metric || !value) {
                throw ValidationError("'targets[]' entries need 'metric' and 'value'");
            }
            cfg.targets.push_back(TargetSpec{get_string(*metric, "targets[].metric"),
                                             get_double(*value, "targets[].value")});
        }
    }
    if (const json* v = find(root, "output_dir")) cfg.output_dir = get_string(*v, "output_dir");
    if (const json* v = find(root, "udp_delta")) {
        if (!v->is_null()) cfg.udp_delta = get_double(*v, "udp_delta");
    }
    if (const json* v = find(root, "parallel_clients")) {
        cfg.parallel_clients = get_bool(*v, "parallel_clients");
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json root;
    root["strategy"] = to_string(cfg.strategy);
    root["rounds"] = cfg.rounds;
    root["clients"] = cfg.clients;
    root["clients_per_round"] = cfg.clients_per_round;
    root["global_seed"] = cfg.global_seed;

    json model;
    model["kind"] = to_string(cfg.model.kind);
    model["input_dim"] = cfg.model.input_dim;
    model["hidden_dim"] = cfg.model.hidden_dim;
    model["num_classes"] = cfg.model.num_classes;
    model["init_scale"] = cfg.model.init_scale;
    model["init_seed"] = cfg.model.init_seed;
    root["model"] = model;

    json data;
    json part;
    part["kind"] = to_string(cfg.data.plan.kind);
    if (cfg.data.plan.kind == PartitionKind::label_shards) {
        part["shards_per_client"] = cfg.data.plan.shards_per_client;
    }
    if (cfg.data.plan.kind == PartitionKind::dirichlet) part["alpha"] = cfg.data.plan.alpha;
    part["seed"] = cfg.data.plan.seed;
    if (cfg.data.source == DataConfig::Source::synthetic) {
        data["source"] = "synthetic";
        data["classes"] = cfg.data.classes;
        data["per_class"] = cfg.data.per_class;
        data["input_dim"] = cfg.data.input_dim;
        data["separation"] = cfg.data.separation;
        data["seed"] = cfg.data.seed;
    } else {
        data["source"] = "csv";
        data["path"] = cfg.data.path;
        data["label_column"] = cfg.data.schema.label_column;
        data["feature_columns"] = cfg.data.schema.feature_columns;
    }
    data["partition"] = part;
    root["data"] = data;

    json local;
    local["epochs"] = cfg.local.epochs;
    local["batch_size"] = cfg.local.batch_size;
    local["learning_rate"] = cfg.local.learning_rate;
    local["proximal_mu"] = cfg.local.proximal_mu;
    root["local"] = local;

    if (cfg.strategy == Strategy::fedref) {
        json fr;
        fr["lambda_g"] = cfg.fedref.lambda_g;
        fr["lambda_ref_0"] = cfg.fedref.schedule.lambda_ref_0;
        fr["lambda_ref_top"] = cfg.fedref.schedule.lambda_ref_top;
        fr["sigma_r"] = cfg.fedref.schedule.sigma_r;
        fr["sigma_w"] = cfg.fedref.schedule.sigma_w;
        fr["rho"] = cfg.fedref.rho;
        fr["server_eta"] = cfg.fedref.server_eta;
        fr["literal_l2"] = cfg.fedref.literal_l2;
        root["fedref"] = fr;
    }
    if (is_fedopt(cfg.strategy)) {
        json fo;
        fo["eta_s"] = cfg.fedopt.eta_s;
        fo["beta1"] = cfg.fedopt.beta1;
        fo["beta2"] = cfg.fedopt.beta2;
        fo["tau"] = cfg.fedopt.tau;
        root["fedopt"] = fo;
    }

    root["eval_split_fraction"] = cfg.eval_split_fraction;
    json targets = json::array();
    for (const auto& t : cfg.targets) {
        targets.push_back({{"metric", t.metric}, {"value", t.value}});
    }
    root["targets"] = targets;
    root["output_dir"] = cfg.output_dir;
    if (cfg.udp_delta) {
        root["udp_delta"] = *cfg.udp_delta;
    } else {
        root["udp_delta"] = nullptr;
    }
    root["parallel_clients"] = cfg.parallel_clients;
    return root.dump(2);
}

} // namespace fedsim
