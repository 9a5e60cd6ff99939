#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "cgap/model.hpp"

namespace cgap {

struct Checkpoint {
    int version = 1;
    TrainingConfig config;
    ParamMap params;
    LossBreakdown final_loss;
    int epochs = 0;
};

inline nlohmann::json config_to_json(const TrainingConfig& c) {
    nlohmann::json j;
    j["d"] = c.d;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["dropout"] = c.dropout;
    j["beta"] = c.beta;
    j["mu"] = c.mu;
    j["alpha"] = c.alpha;
    j["alphas"] = c.alphas;
    j["gcn_layers"] = c.gcn_layers;
    j["attention_mode"] = to_string(c.attention_mode);
    j["pooling"] = to_string(c.pooling);
    j["data_mode"] = to_string(c.data_mode);
    j["seed"] = c.seed;
    return j;
}

inline TrainingConfig config_from_json(const nlohmann::json& j) {
    TrainingConfig c;
    c.d = j.at("d").get<int>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.epochs = j.at("epochs").get<int>();
    c.dropout = j.at("dropout").get<double>();
    c.beta = j.at("beta").get<double>();
    c.mu = j.at("mu").get<int>();
    c.alpha = j.at("alpha").get<double>();
    c.alphas = j.at("alphas").get<std::vector<double>>();
    c.gcn_layers = j.at("gcn_layers").get<int>();
    c.attention_mode = attention_mode_from_string(j.at("attention_mode").get<std::string>());
    c.pooling = pool_mode_from_string(j.at("pooling").get<std::string>());
    c.data_mode = data_mode_from_string(j.at("data_mode").get<std::string>());
    c.seed = j.at("seed").get<uint64_t>();
    return c;
}

inline nlohmann::json loss_to_json(const LossBreakdown& l) {
    return {{"l_r", l.l_r}, {"l_mob", l.l_mob}, {"l_poi", l.l_poi}, {"l_total", l.l_total}, {"beta", l.beta}};
}

inline LossBreakdown loss_from_json(const nlohmann::json& j) {
    return {j.at("l_r").get<double>(), j.at("l_mob").get<double>(), j.at("l_poi").get<double>(),
            j.at("l_total").get<double>(), j.at("beta").get<double>()};
}

inline nlohmann::json checkpoint_to_json(const Checkpoint& c) {
    nlohmann::json j;
    j["version"] = c.version;
    j["config"] = config_to_json(c.config);
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, t] : c.params) {
        params[name] = {{"shape", {t.rows, t.cols}}, {"values", t.data}};
    }
    j["params"] = params;
    j["final_loss"] = loss_to_json(c.final_loss);
    j["epochs"] = c.epochs;
    return j;
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    Checkpoint c;
    c.version = j.at("version").get<int>();
    if (c.version != 1) throw validation_error("checkpoint: unsupported version " + std::to_string(c.version));
    c.config = config_from_json(j.at("config"));
    for (const auto& [name, pj] : j.at("params").items()) {
        auto shape = pj.at("shape").get<std::vector<int>>();
        if (shape.size() != 2) throw validation_error("checkpoint: parameter '" + name + "' shape must be 2-D");
        Tensor2 t(shape[0], shape[1]);
        t.data = pj.at("values").get<std::vector<double>>();
        if (t.data.size() != static_cast<size_t>(shape[0]) * shape[1])
            throw validation_error("checkpoint: parameter '" + name + "' value count mismatch");
        c.params[name] = std::move(t);
    }
    c.final_loss = loss_from_json(j.at("final_loss"));
    c.epochs = j.at("epochs").get<int>();
    return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write checkpoint: " + path.string());
    out << checkpoint_to_json(c).dump(2) << "\n";
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot read checkpoint: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw validation_error("checkpoint parse error: " + std::string(e.what()));
    }
    return checkpoint_from_json(j);
}

}  // namespace cgap
