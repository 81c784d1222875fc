#include "cvarssp/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cvarssp {

namespace {

using nlohmann::json;

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end())
        throw ModelIoError(std::string("model file missing field '") + key + "'");
    return *it;
}

std::vector<double> number_row(const json& node, const char* what) {
    if (!node.is_array()) throw ModelIoError(std::string(what) + " must be an array");
    std::vector<double> out;
    out.reserve(node.size());
    for (const auto& v : node) {
        if (!v.is_number())
            throw ModelIoError(std::string(what) + " entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

LoadedModel parse_model_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelIoError(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ModelIoError("model file must be a JSON object");

    LoadedModel loaded;
    SspModel& m = loaded.model;

    const json& ns = require(doc, "num_states");
    if (!ns.is_number_integer() || ns.get<long>() < 2)
        throw ModelIoError("num_states must be an integer >= 2");
    m.num_states = ns.get<int>();

    const json& actions = require(doc, "actions");
    if (!actions.is_array() || static_cast<int>(actions.size()) != m.num_states)
        throw ModelIoError("actions must be an array of length num_states");
    for (const auto& a : actions) {
        if (!a.is_number_integer() || a.get<long>() < 1)
            throw ModelIoError("actions entries must be integers >= 1");
        m.actions.push_back(a.get<int>());
    }

    const json& transition = require(doc, "transition");
    if (!transition.is_array() || static_cast<int>(transition.size()) != m.num_states)
        throw ModelIoError("transition must be an array of length num_states");
    m.transition.resize(static_cast<std::size_t>(m.num_states));
    for (int s = 0; s < m.num_states; ++s) {
        const json& rows = transition[static_cast<std::size_t>(s)];
        if (!rows.is_array() || static_cast<int>(rows.size()) != m.actions[static_cast<std::size_t>(s)])
            throw ModelIoError("transition rows must match the action count of each state");
        for (const auto& row : rows) {
            auto probs = number_row(row, "transition row");
            if (static_cast<int>(probs.size()) != m.num_states)
                throw ModelIoError("transition rows must have num_states entries");
            m.transition[static_cast<std::size_t>(s)].push_back(std::move(probs));
        }
    }

    for (const char* key : {"cost_g", "cost_c"}) {
        const json& table = require(doc, key);
        if (!table.is_array() || static_cast<int>(table.size()) != m.num_states)
            throw ModelIoError(std::string(key) + " must be an array of length num_states");
        auto& dst = std::string(key) == "cost_g" ? m.cost_g : m.cost_c;
        dst.resize(static_cast<std::size_t>(m.num_states));
        for (int s = 0; s < m.num_states; ++s) {
            dst[static_cast<std::size_t>(s)] =
                number_row(table[static_cast<std::size_t>(s)], key);
            if (static_cast<int>(dst[static_cast<std::size_t>(s)].size()) !=
                m.actions[static_cast<std::size_t>(s)])
                throw ModelIoError(std::string(key) +
                                   " rows must match the action count of each state");
        }
    }

    const json& start = require(doc, "start_state");
    if (!start.is_number_integer())
        throw ModelIoError("start_state must be an integer");
    m.start_state = start.get<int>();

    if (auto it = doc.find("features"); it != doc.end()) {
        const json& feats = *it;
        if (!feats.is_array() || static_cast<int>(feats.size()) != m.num_states)
            throw ModelIoError("features must be an array of length num_states");
        FeatureTable table(static_cast<std::size_t>(m.num_states));
        int dim = -1;
        for (int s = 0; s < m.num_states; ++s) {
            const json& per_state = feats[static_cast<std::size_t>(s)];
            if (!per_state.is_array())
                throw ModelIoError("features entries must be arrays");
            for (const auto& phi : per_state) {
                auto row = number_row(phi, "feature vector");
                if (s > 0) {
                    if (dim < 0) dim = static_cast<int>(row.size());
                    if (static_cast<int>(row.size()) != dim)
                        throw ModelIoError("feature vectors must share one dimension");
                }
                table[static_cast<std::size_t>(s)].push_back(std::move(row));
            }
            if (s > 0 && static_cast<int>(table[static_cast<std::size_t>(s)].size()) !=
                             m.actions[static_cast<std::size_t>(s)])
                throw ModelIoError("features rows must match the action count of each state");
        }
        if (dim < 1)
            throw ModelIoError("features must provide at least one dimension");
        loaded.features = std::move(table);
        loaded.feature_dim = dim;
    }

    return loaded;
}

LoadedModel load_model_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelIoError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model_json(buf.str());
}

std::string model_to_json(const SspModel& m) {
    json doc;
    doc["num_states"] = m.num_states;
    doc["actions"] = m.actions;
    doc["transition"] = m.transition;
    doc["cost_g"] = m.cost_g;
    doc["cost_c"] = m.cost_c;
    doc["start_state"] = m.start_state;
    return doc.dump(2) + "\n";
}

void save_model_json(const SspModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelIoError("cannot write model file: " + path);
    out << model_to_json(model);
}

}  // namespace cvarssp
