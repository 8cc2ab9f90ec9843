#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qilab/flow.hpp"
#include "qilab/gauss.hpp"
#include "qilab/transport.hpp"

namespace qilab {

using nlohmann::json;

// Invalid experiment configuration; the message names the offending key.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
    std::string experiment;
    double s = 2.5;
    int k = 1;
    int N = 4;
    double dt = 1e-3;
    double t = 0.1;
    std::uint64_t seed = 0;
    long long n_samples = 1000;
    json section; // experiment-specific parameters, already key-checked

    GaussianSpec gauss_spec() const { return {s, N, seed}; }
    FlowConfig flow_config() const {
        FlowConfig cfg;
        cfg.k = k;
        cfg.N = N;
        cfg.dt = dt;
        return cfg;
    }
};

namespace detail_cfg {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& at) {
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ConfigError("config error at " + at + key + ": unknown key");
}

inline void line_anchor(const std::string& text, std::size_t byte, int& line, int& col) {
    line = 1;
    col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else
            ++col;
    }
}

} // namespace detail_cfg

inline const std::set<std::string>& known_experiments() {
    static const std::set<std::string> e = {"sample",  "evolve",  "energy-audit", "counting",
                                            "qi-test", "moments", "schema"};
    return e;
}

inline ObservableSpec observable_from_json(const json& j, const std::string& at) {
    detail_cfg::reject_unknown(j, {"kind", "fn", "mode", "mode2", "R", "sigma", "a"}, at);
    ObservableSpec o;
    std::string kind = j.value("kind", "bounded-cylinder");
    if (kind == "bounded-cylinder")
        o.kind = ObservableSpec::Kind::bounded_cylinder;
    else if (kind == "norm-indicator")
        o.kind = ObservableSpec::Kind::norm_indicator;
    else if (kind == "moment")
        o.kind = ObservableSpec::Kind::moment;
    else
        throw ConfigError("config error at " + at + "kind: expected bounded-cylinder | norm-indicator | moment");
    o.fn = j.value("fn", o.fn);
    if (j.contains("mode")) o.mode = {j["mode"].at(0).get<int>(), j["mode"].at(1).get<int>()};
    if (j.contains("mode2")) o.mode2 = {j["mode2"].at(0).get<int>(), j["mode2"].at(1).get<int>()};
    o.R = j.value("R", o.R);
    o.sigma = j.value("sigma", o.sigma);
    o.a = j.value("a", o.a);
    return o;
}

// Parse and validate a config file. Throws ConfigError with a line-anchored
// message on malformed JSON and a key-anchored message on bad values.
inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config error: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        int line = 1, col = 1;
        detail_cfg::line_anchor(text, e.byte, line, col);
        throw ConfigError("config error at " + path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                          ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config error at /: expected an object");

    ExperimentConfig c;
    if (!j.contains("experiment")) throw ConfigError("config error at /experiment: missing");
    c.experiment = j.at("experiment").get<std::string>();
    if (!known_experiments().count(c.experiment))
        throw ConfigError("config error at /experiment: unknown experiment '" + c.experiment + "'");

    std::set<std::string> allowed = {"experiment", "s", "k", "N", "dt", "t", "seed", "n_samples", c.experiment};
    detail_cfg::reject_unknown(j, allowed, "/");

    c.s = j.value("s", c.s);
    c.k = j.value("k", c.k);
    c.N = j.value("N", c.N);
    c.dt = j.value("dt", c.dt);
    c.t = j.value("t", c.t);
    c.seed = j.value("seed", c.seed);
    c.n_samples = j.value("n_samples", c.n_samples);
    c.section = j.value(c.experiment, json::object());

    // Re-validate the downstream module constraints at parse time.
    if (!(c.s > 2.0)) throw ConfigError("config error at /s: requires s > 2");
    if (c.k < 1) throw ConfigError("config error at /k: requires k >= 1");
    if (!is_dyadic(c.N)) throw ConfigError("config error at /N: requires dyadic N");
    if (!(c.dt > 0)) throw ConfigError("config error at /dt: requires dt > 0");
    if (c.n_samples < 1) throw ConfigError("config error at /n_samples: requires >= 1");

    const std::string at = "/" + c.experiment + "/";
    if (c.experiment == "sample") {
        detail_cfg::reject_unknown(c.section, {"streams", "stats", "shells"}, at);
    } else if (c.experiment == "evolve") {
        detail_cfg::reject_unknown(c.section, {"T", "input", "stream", "checkpoint_stride"}, at);
    } else if (c.experiment == "energy-audit") {
        detail_cfg::reject_unknown(c.section, {"dt_fd", "fields", "input"}, at);
    } else if (c.experiment == "counting") {
        detail_cfg::reject_unknown(c.section, {"mode", "shells", "signs", "m", "kappa", "m_grid", "cyclic", "ball"},
                                   at);
    } else if (c.experiment == "qi-test") {
        detail_cfg::reject_unknown(c.section, {"observables", "quad_panels", "ball_R", "ball_sigma"}, at);
        if (!c.section.contains("observables") || !c.section["observables"].is_array() ||
            c.section["observables"].empty())
            throw ConfigError("config error at " + at + "observables: need a nonempty observable list");
        for (std::size_t i = 0; i < c.section["observables"].size(); ++i)
            observable_from_json(c.section["observables"][i], at + "observables/" + std::to_string(i) + "/");
    } else if (c.experiment == "moments") {
        detail_cfg::reject_unknown(c.section, {"kind", "p", "R", "ball_sigma"}, at);
        std::string kind = c.section.value("kind", "S");
        if (kind != "S" && kind != "Q1") throw ConfigError("config error at " + at + "kind: expected S | Q1");
        if (c.section.contains("p") && !(c.section["p"].get<double>() > 0))
            throw ConfigError("config error at " + at + "p: requires p > 0");
        if (c.section.contains("R") && !(c.section["R"].get<double>() > 0))
            throw ConfigError("config error at " + at + "R: requires R > 0");
    }
    return c;
}

} // namespace qilab
