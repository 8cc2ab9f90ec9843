#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "qilab/energy.hpp"
#include "qilab/field.hpp"
#include "qilab/transport.hpp"

namespace qilab::io {

using nlohmann::json;

inline constexpr const char* kSnapshotFormat = "qilab-field-snapshot";
inline constexpr int kSchemaVersion = 1;

// Doubles printed with 17 significant digits round-trip bit-exactly.
inline std::string fp17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// --- field snapshots ----------------------------------------------------------

inline json field_to_json(const SpectralField& u) {
    json coeffs = json::array();
    u.for_each([&](const Idx& n, cplx v) {
        if (v == cplx{}) return;
        coeffs.push_back({n.n1, n.n2, v.real(), v.imag()});
    });
    return {{"format", kSnapshotFormat}, {"version", kSchemaVersion}, {"cutoff", u.bw}, {"coeffs", coeffs}};
}

inline SpectralField field_from_json(const json& j) {
    if (!j.is_object() || j.value("format", "") != kSnapshotFormat)
        throw std::invalid_argument("field_from_json: not a field snapshot");
    SpectralField u(j.at("cutoff").get<int>());
    for (const auto& rec : j.at("coeffs")) {
        if (!rec.is_array() || rec.size() != 4)
            throw std::invalid_argument("field_from_json: bad coefficient record");
        Idx n{rec[0].get<int>(), rec[1].get<int>()};
        u.set(n, cplx(rec[2].get<double>(), rec[3].get<double>()));
    }
    return u;
}

inline void save_field(const SpectralField& u, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("save_field: cannot open " + path);
    f << field_to_json(u).dump(1) << "\n";
}

inline SpectralField load_field(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_field: cannot open " + path);
    json j;
    f >> j;
    return field_from_json(j);
}

// --- reports ------------------------------------------------------------------

inline json report_to_json(const McReport& r) {
    json j{{"type", "mc_report"},
           {"name", r.name},
           {"estimate", r.estimate},
           {"stderr", r.stderr_},
           {"n_samples", r.n_samples},
           {"verdict", McReport::verdict_name(r.verdict)}};
    j["bound"] = r.bound ? json(*r.bound) : json(nullptr);
    j["details"] = r.details;
    return j;
}

inline json breakdown_to_json(const EnergyBreakdown& b) {
    return {{"type", "energy_breakdown"},
            {"l2s", b.l2s},
            {"correction", b.correction},
            {"terms", {b.term[0], b.term[1], b.term[2], b.term[3], b.term[4], b.term[5], b.term[6]}},
            {"term_sum", b.term_sum()},
            {"q1", b.q1},
            {"q2", b.q2},
            {"params", {{"s", b.s}, {"k", b.k}, {"N", b.N}}}};
}

// --- report schema --------------------------------------------------------------

// Machine-readable description of every report type this tool emits. Field
// types: "string" | "number" | "integer" | "array" | "object" | "number|null".
inline json schema_document() {
    json mc = {{"type", "string"},
               {"name", "string"},
               {"estimate", "number"},
               {"stderr", "number"},
               {"n_samples", "integer"},
               {"bound", "number|null"},
               {"verdict", "string"},
               {"details", "object"}};
    json eb = {{"type", "string"}, {"l2s", "number"},   {"correction", "number"},
               {"terms", "array"}, {"term_sum", "number"}, {"q1", "number"},
               {"q2", "number"},   {"params", "object"}};
    json snap = {{"format", "string"}, {"version", "integer"}, {"cutoff", "integer"}, {"coeffs", "array"}};
    return {
        {"schema_version", kSchemaVersion},
        {"reports",
         {{"mc_report",
           {{"fields", mc},
            {"semantics",
             {{"estimate", "primary scalar estimate of the named quantity"},
              {"stderr", "standard error of the estimate, >= 0"},
              {"bound", "threshold the estimate is compared against, null when none"},
              {"verdict", "pass | fail | inconclusive; pass means |estimate| <= bound, "
                          "inconclusive means stderr exceeds 25% of the estimate scale"}}}}},
          {"energy_breakdown",
           {{"fields", eb},
            {"semantics",
             {{"terms", "the seven derivative terms, in order I..VII"},
              {"q2", "half the term sum minus q1"}}}}},
          {"field_snapshot", {{"fields", snap}, {"semantics", {{"coeffs", "records [n1, n2, re, im]"}}}}}}},
        {"csv",
         {{"trajectory", {"t", "mass", "hamiltonian", "hs_norm", "fl_norm"}},
          {"counting", {"N1", "N2", "N3", "m1", "m2", "kappa", "signs", "count"}},
          {"residual", {"dt_fd", "residual"}}}},
        {"float_format", "17 significant digits, exact round-trip"}};
}

inline bool json_type_matches(const json& v, const std::string& ty) {
    if (ty == "number|null") return v.is_number() || v.is_null();
    if (ty == "string") return v.is_string();
    if (ty == "number") return v.is_number();
    if (ty == "integer") return v.is_number_integer();
    if (ty == "array") return v.is_array();
    if (ty == "object") return v.is_object();
    return false;
}

// Light structural validation of a report against the emitted schema.
inline bool validate_report(const json& doc, const json& schema, std::string* err = nullptr) {
    if (!doc.is_object() || !doc.contains("type")) {
        if (err) *err = "report is not an object with a 'type' field";
        return false;
    }
    std::string ty = doc.at("type").get<std::string>();
    const json& reports = schema.at("reports");
    if (!reports.contains(ty)) {
        if (err) *err = "unknown report type '" + ty + "'";
        return false;
    }
    for (const auto& [name, fieldty] : reports.at(ty).at("fields").items()) {
        if (!doc.contains(name)) {
            if (err) *err = "missing field '" + name + "'";
            return false;
        }
        if (!json_type_matches(doc.at(name), fieldty.get<std::string>())) {
            if (err) *err = "field '" + name + "' has wrong type";
            return false;
        }
    }
    return true;
}

// --- csv ------------------------------------------------------------------------

struct CsvWriter {
    std::ofstream f;
    explicit CsvWriter(const std::string& path) : f(path) {
        if (!f) throw std::runtime_error("CsvWriter: cannot open " + path);
    }
    void header(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) f << (i ? "," : "") << cols[i];
        f << "\n";
    }
    void row(const std::vector<double>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) f << (i ? "," : "") << fp17(vals[i]);
        f << "\n";
    }
    void raw_row(const std::vector<std::string>& vals) {
        for (std::size_t i = 0; i < vals.size(); ++i) f << (i ? "," : "") << vals[i];
        f << "\n";
    }
};

} // namespace qilab::io
