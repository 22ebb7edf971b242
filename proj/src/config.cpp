#include "fedtrial/config.hpp"

#include <filesystem>
#include <initializer_list>
#include <nlohmann/json.hpp>
#include <string_view>

#include "fedtrial/errors.hpp"
#include "fedtrial/io.hpp"

namespace fedtrial {

namespace {

using nlohmann::json;

void require_object(const json& j, const char* where) {
    if (!j.is_object())
        throw ConfigError(std::string("config: section '") + where + "' must be an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const char* where) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (std::string_view k : allowed)
            if (k == item.key()) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("config: unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
void read_field(const json& j, const char* key, T& out, const char* where) {
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: bad value for '") + key + "' in " + where + ": " +
                          e.what());
    }
}

void parse_generator(const json& j, GeneratorConfig& g) {
    require_object(j, "generator");
    check_keys(j,
               {"n_patients", "n_centers", "center_decay", "target_tf_fraction",
                "target_excluded_fraction", "n_diagnosis_codes", "n_procedure_codes",
                "n_prescription_codes", "n_risk_codes", "zipf_alpha", "mixture_strength",
                "risk_boost", "risk_weight_low", "risk_weight_high", "order_effect", "pair_rate",
                "min_visits", "max_visits", "min_codes_per_visit", "max_codes_per_visit"},
               "generator");
    read_field(j, "n_patients", g.n_patients, "generator");
    read_field(j, "n_centers", g.n_centers, "generator");
    read_field(j, "center_decay", g.center_decay, "generator");
    read_field(j, "target_tf_fraction", g.target_tf_fraction, "generator");
    read_field(j, "target_excluded_fraction", g.target_excluded_fraction, "generator");
    read_field(j, "n_diagnosis_codes", g.n_diagnosis_codes, "generator");
    read_field(j, "n_procedure_codes", g.n_procedure_codes, "generator");
    read_field(j, "n_prescription_codes", g.n_prescription_codes, "generator");
    read_field(j, "n_risk_codes", g.n_risk_codes, "generator");
    read_field(j, "zipf_alpha", g.zipf_alpha, "generator");
    read_field(j, "mixture_strength", g.mixture_strength, "generator");
    read_field(j, "risk_boost", g.risk_boost, "generator");
    read_field(j, "risk_weight_low", g.risk_weight_low, "generator");
    read_field(j, "risk_weight_high", g.risk_weight_high, "generator");
    read_field(j, "order_effect", g.order_effect, "generator");
    read_field(j, "pair_rate", g.pair_rate, "generator");
    read_field(j, "min_visits", g.min_visits, "generator");
    read_field(j, "max_visits", g.max_visits, "generator");
    read_field(j, "min_codes_per_visit", g.min_codes_per_visit, "generator");
    read_field(j, "max_codes_per_visit", g.max_codes_per_visit, "generator");
}

void parse_model(const json& j, ModelConfig& m) {
    require_object(j, "model");
    check_keys(j, {"arch", "hidden_dims", "embedding_dim", "max_seq_len", "min_count"}, "model");
    if (j.contains("arch")) {
        const auto arch = j.at("arch").get<std::string>();
        if (arch == "fcn")
            m.arch = ArchKind::FCN;
        else if (arch == "gru")
            m.arch = ArchKind::GRU;
        else
            throw ConfigError("config: model.arch must be 'fcn' or 'gru', got '" + arch + "'");
    }
    read_field(j, "hidden_dims", m.hidden_dims, "model");
    read_field(j, "embedding_dim", m.embedding_dim, "model");
    read_field(j, "max_seq_len", m.max_seq_len, "model");
    read_field(j, "min_count", m.min_count, "model");
}

void parse_training(const json& j, TrainingConfig& t) {
    require_object(j, "training");
    check_keys(j,
               {"rounds", "local_epochs", "batch_size", "optimizer", "learning_rate", "beta1",
                "beta2", "epsilon", "min_train_size"},
               "training");
    read_field(j, "rounds", t.rounds, "training");
    read_field(j, "local_epochs", t.local_epochs, "training");
    read_field(j, "batch_size", t.batch_size, "training");
    if (j.contains("optimizer")) {
        const auto opt = j.at("optimizer").get<std::string>();
        if (opt == "adam")
            t.optimizer.kind = nn::OptKind::ADAM;
        else if (opt == "sgd")
            t.optimizer.kind = nn::OptKind::SGD;
        else
            throw ConfigError("config: training.optimizer must be 'adam' or 'sgd', got '" + opt +
                              "'");
    }
    read_field(j, "learning_rate", t.optimizer.learning_rate, "training");
    read_field(j, "beta1", t.optimizer.beta1, "training");
    read_field(j, "beta2", t.optimizer.beta2, "training");
    read_field(j, "epsilon", t.optimizer.epsilon, "training");
    read_field(j, "min_train_size", t.min_train_size, "training");
}

void parse_split(const json& j, SplitConfig& s) {
    require_object(j, "split");
    check_keys(j, {"test_fraction"}, "split");
    read_field(j, "test_fraction", s.test_fraction, "split");
}

void parse_paths(const json& j, PathsConfig& p) {
    require_object(j, "paths");
    check_keys(j, {"cohort", "labels", "split", "vocab", "out"}, "paths");
    read_field(j, "cohort", p.cohort, "paths");
    read_field(j, "labels", p.labels, "paths");
    read_field(j, "split", p.split, "paths");
    read_field(j, "vocab", p.vocab, "paths");
    read_field(j, "out", p.out, "paths");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid json: ") + e.what());
    }
    require_object(j, "<root>");
    check_keys(j, {"seed", "generator", "model", "training", "split", "paths"}, "<root>");

    RunConfig c;
    if (j.contains("seed") && !j.at("seed").is_number_unsigned())
        throw ConfigError("config: 'seed' must be a non-negative integer");
    read_field(j, "seed", c.seed, "<root>");
    if (j.contains("generator"))
        parse_generator(j.at("generator"), c.generator);
    if (j.contains("model"))
        parse_model(j.at("model"), c.model);
    if (j.contains("training"))
        parse_training(j.at("training"), c.training);
    if (j.contains("split"))
        parse_split(j.at("split"), c.split);
    if (j.contains("paths"))
        parse_paths(j.at("paths"), c.paths);
    c.generator.seed = c.seed;  // one root seed drives everything
    return c;
}

RunConfig load_run_config(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ConfigError("config file not found: " + path);
    return parse_run_config(io::read_file(path));
}

std::string dump_run_config(const RunConfig& c) {
    const json j{
        {"seed", c.seed},
        {"generator",
         {{"n_patients", c.generator.n_patients},
          {"n_centers", c.generator.n_centers},
          {"center_decay", c.generator.center_decay},
          {"target_tf_fraction", c.generator.target_tf_fraction},
          {"target_excluded_fraction", c.generator.target_excluded_fraction},
          {"n_diagnosis_codes", c.generator.n_diagnosis_codes},
          {"n_procedure_codes", c.generator.n_procedure_codes},
          {"n_prescription_codes", c.generator.n_prescription_codes},
          {"n_risk_codes", c.generator.n_risk_codes},
          {"zipf_alpha", c.generator.zipf_alpha},
          {"mixture_strength", c.generator.mixture_strength},
          {"risk_boost", c.generator.risk_boost},
          {"risk_weight_low", c.generator.risk_weight_low},
          {"risk_weight_high", c.generator.risk_weight_high},
          {"order_effect", c.generator.order_effect},
          {"pair_rate", c.generator.pair_rate},
          {"min_visits", c.generator.min_visits},
          {"max_visits", c.generator.max_visits},
          {"min_codes_per_visit", c.generator.min_codes_per_visit},
          {"max_codes_per_visit", c.generator.max_codes_per_visit}}},
        {"model",
         {{"arch", c.model.arch == ArchKind::FCN ? "fcn" : "gru"},
          {"hidden_dims", c.model.hidden_dims},
          {"embedding_dim", c.model.embedding_dim},
          {"max_seq_len", c.model.max_seq_len},
          {"min_count", c.model.min_count}}},
        {"training",
         {{"rounds", c.training.rounds},
          {"local_epochs", c.training.local_epochs},
          {"batch_size", c.training.batch_size},
          {"optimizer", c.training.optimizer.kind == nn::OptKind::ADAM ? "adam" : "sgd"},
          {"learning_rate", c.training.optimizer.learning_rate},
          {"beta1", c.training.optimizer.beta1},
          {"beta2", c.training.optimizer.beta2},
          {"epsilon", c.training.optimizer.epsilon},
          {"min_train_size", c.training.min_train_size}}},
        {"split", {{"test_fraction", c.split.test_fraction}}},
        {"paths",
         {{"cohort", c.paths.cohort},
          {"labels", c.paths.labels},
          {"split", c.paths.split},
          {"vocab", c.paths.vocab},
          {"out", c.paths.out}}}};
    return j.dump(2) + "\n";
}

}  // namespace fedtrial
