/**
 * MDP file loading.
 *
 * One JSON document per MDP with fields: `states` (list of names), `actions`
 * (list of names), `horizon` (integer), `initial` (map name -> probability),
 * `transitions` (map "state/action" -> map name -> probability),
 * `step_success` (optional map "state/action" -> probability, default 1),
 * `terminal_success` (optional map name -> probability, default 1).
 *
 * Probabilities are decimal numbers or exact fraction strings "a/b".
 * Success probabilities are converted to log-domain rewards on load
 * (r = log p, with p = 0 becoming -inf).  Transition rows not listed in
 * `transitions` default to self-loops, which keeps leaf/terminal states terse.
 */
#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mdptk/mdp.hpp"

namespace mdptk {

// Thrown on malformed MDP documents; the message names the offending path.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

/// Parses a probability given as a JSON number or a fraction string "a/b".
inline double parse_probability(const nlohmann::json& j, const std::string& at) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        const auto slash = s.find('/');
        try {
            if (slash == std::string::npos) return std::stod(s);
            const double num = std::stod(s.substr(0, slash));
            const double den = std::stod(s.substr(slash + 1));
            if (den == 0.0)
                throw SchemaError(at + ": fraction with zero denominator '" +
                                  s + "'");
            return num / den;
        } catch (const SchemaError&) {
            throw;
        } catch (const std::exception&) {
            throw SchemaError(at + ": cannot parse probability '" + s + "'");
        }
    }
    throw SchemaError(at + ": probability must be a number or \"a/b\" string");
}

/// Splits a "state/action" key; throws when the separator is missing.
inline std::pair<std::string, std::string> split_pair_key(
    const std::string& key, const std::string& at) {
    const auto slash = key.find('/');
    if (slash == std::string::npos)
        throw SchemaError(at + ": key '" + key +
                          "' is not of the form \"state/action\"");
    return {key.substr(0, slash), key.substr(slash + 1)};
}

/// log_from_prob with schema-flavoured reporting of out-of-range values.
inline double log_success(double p, const std::string& at) {
    try {
        return log_from_prob(p);
    } catch (const std::domain_error&) {
        throw SchemaError(at + ": success probability " + std::to_string(p) +
                          " is outside [0, 1]");
    }
}

}  // namespace detail

/// Builds a validated Mdp from a parsed JSON document.
inline Mdp mdp_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw SchemaError("top level: expected an object");
    for (const char* field : {"states", "actions", "horizon", "initial",
                              "transitions"})
        if (!doc.contains(field))
            throw SchemaError(std::string("top level: missing field '") +
                              field + "'");

    Mdp m;
    for (const auto& j : doc.at("states")) {
        if (!j.is_string()) throw SchemaError("states: expected names");
        m.states.push_back(j.get<std::string>());
    }
    for (const auto& j : doc.at("actions")) {
        if (!j.is_string()) throw SchemaError("actions: expected names");
        m.actions.push_back(j.get<std::string>());
    }
    if (!doc.at("horizon").is_number_integer())
        throw SchemaError("horizon: expected an integer");
    m.horizon = doc.at("horizon").get<int>();

    const int S = m.num_states();
    const int A = m.num_actions();
    auto state_of = [&](const std::string& name, const std::string& at) {
        const int s = m.state_index(name);
        if (s < 0) throw SchemaError(at + ": unknown state '" + name + "'");
        return s;
    };
    auto action_of = [&](const std::string& name, const std::string& at) {
        const int a = m.action_index(name);
        if (a < 0) throw SchemaError(at + ": unknown action '" + name + "'");
        return a;
    };

    m.initial.assign(S, 0.0);
    for (const auto& [name, j] : doc.at("initial").items())
        m.initial[state_of(name, "initial")] =
            detail::parse_probability(j, "initial/" + name);

    m.transition.assign(S, std::vector<std::vector<double>>(A));
    for (const auto& [key, row] : doc.at("transitions").items()) {
        const auto [sname, aname] = detail::split_pair_key(key, "transitions");
        const int s = state_of(sname, "transitions/" + key);
        const int a = action_of(aname, "transitions/" + key);
        std::vector<double> dense(S, 0.0);
        for (const auto& [target, j] : row.items())
            dense[state_of(target, "transitions/" + key)] =
                detail::parse_probability(j, "transitions/" + key + "/" + target);
        m.transition[s][a] = dense;
    }
    detail::default_self_loops(m);

    m.step_reward.assign(S, std::vector<double>(A, 0.0));
    if (doc.contains("step_success")) {
        for (const auto& [key, j] : doc.at("step_success").items()) {
            const auto [sname, aname] = detail::split_pair_key(key, "step_success");
            const std::string at = "step_success/" + key;
            m.step_reward[state_of(sname, at)][action_of(aname, at)] =
                detail::log_success(detail::parse_probability(j, at), at);
        }
    }
    m.terminal_reward.assign(S, 0.0);
    if (doc.contains("terminal_success")) {
        for (const auto& [name, j] : doc.at("terminal_success").items()) {
            const std::string at = "terminal_success/" + name;
            m.terminal_reward[state_of(name, at)] =
                detail::log_success(detail::parse_probability(j, at), at);
        }
    }

    const auto violations = validate_mdp(m);
    if (!violations.empty()) {
        std::string msg = "invalid MDP:";
        for (const auto& v : violations) msg += "\n  - " + v;
        throw SchemaError(msg);
    }
    return m;
}

/// Parses an MDP document from text.
inline Mdp load_mdp_from_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(std::string("document is not valid JSON: ") + e.what());
    }
    return mdp_from_json(doc);
}

/// Loads an MDP document from a file path.
inline Mdp load_mdp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("cannot open MDP file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_mdp_from_string(buf.str());
}

}  // namespace mdptk
