// JSON and CSV interchange: states and maps for golden-file tests, experiment
// configuration, scan CSVs and the fit report. Schemas carry a version field.

#pragma once

#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "timebin/harness.hpp"

namespace timebin {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// States and maps

inline Json to_json(const ModeLabel& m) {
    return Json{{"port", port_name(m.port)}, {"slot", m.slot}, {"tag", m.tag}};
}

inline ModeLabel mode_from_json(const Json& j) {
    return ModeLabel{port_from_name(j.at("port").get<std::string>()), j.at("slot").get<int>(),
                     j.value("tag", 0)};
}

/// Canonical term order makes this byte-stable for a given state.
inline Json to_json(const PhotonicState& s) {
    Json terms = Json::array();
    for (const auto& [occ, amp] : s.terms()) {
        Json modes = Json::array();
        for (const auto& [m, k] : occ.entries()) {
            Json jm = to_json(m);
            jm["count"] = k;
            modes.push_back(jm);
        }
        terms.push_back(Json{{"modes", modes}, {"re", amp.real()}, {"im", amp.imag()}});
    }
    return terms;
}

inline PhotonicState state_from_json(const Json& j) {
    PhotonicState s;
    for (const Json& term : j) {
        OccupationVector occ;
        for (const Json& jm : term.at("modes")) {
            ModeLabel m = mode_from_json(jm);
            for (int i = 0; i < jm.at("count").get<int>(); ++i) occ.add(m);
        }
        s.add_term(occ, Complex(term.at("re").get<double>(), term.at("im").get<double>()));
    }
    return s;
}

inline Json to_json(const LinearMap& map) {
    Json rules = Json::array();
    for (const auto& [in, image] : map.rules()) {
        Json outs = Json::array();
        for (const auto& [out, c] : image) {
            Json jo = to_json(out);
            jo["re"] = c.real();
            jo["im"] = c.imag();
            outs.push_back(jo);
        }
        rules.push_back(Json{{"in", to_json(in)}, {"out", outs}});
    }
    Json blocked = Json::array();
    for (const ModeLabel& m : map.blocked()) blocked.push_back(to_json(m));
    return Json{{"rules", rules}, {"blocked", blocked}};
}

// ---------------------------------------------------------------------------
// Configuration

inline void check_schema(const Json& j, const std::string& what) {
    if (j.value("schema", -1) != kSchemaVersion)
        throw ConfigInvalid(what + ": expected schema " + std::to_string(kSchemaVersion));
}

inline Json to_json(const PhaseConfig& p) {
    return Json{{"alpha", p.alpha}, {"beta", p.beta}, {"delta", p.delta}};
}

inline PhaseConfig phases_from_json(const Json& j) {
    PhaseConfig p;
    p.alpha = j.value("alpha", 0.0);
    p.beta = j.value("beta", 0.0);
    p.delta = j.value("delta", 0.0);
    return p;
}

inline Json to_json(const NoiseConfig& n) {
    return Json{{"p_alice", n.p_alice}, {"p_epr", n.p_epr}, {"d1", n.d1},
                {"d2", n.d2},           {"t_a", n.t_a},     {"t_e", n.t_e},
                {"aligned", n.aligned}};
}

inline NoiseConfig noise_from_json(const Json& j) {
    NoiseConfig n;
    n.p_alice = j.value("p_alice", 0.0);
    n.p_epr = j.value("p_epr", 0.0);
    n.d1 = j.value("d1", 0.0);
    n.d2 = j.value("d2", 0.0);
    n.t_a = j.value("t_a", 1.0);
    n.t_e = j.value("t_e", 1.0);
    n.aligned = j.value("aligned", true);
    return n;
}

inline Json to_json(const ExperimentConfig& cfg) {
    Json trans = Json::object();
    for (const auto& [label, t] : cfg.transmission) trans[label] = t;
    return Json{{"schema", kSchemaVersion},
                {"phases", to_json(cfg.phases)},
                {"noise", to_json(cfg.noise)},
                {"analyzer", cfg.analyzer == Analyzer::IF ? "if" : "bs"},
                {"dead_time", cfg.dead_time},
                {"integration", cfg.integration},
                {"seed", cfg.seed},
                {"transmission", trans}};
}

inline ExperimentConfig config_from_json(const Json& j) {
    check_schema(j, "experiment config");
    ExperimentConfig cfg;
    if (j.contains("phases")) cfg.phases = phases_from_json(j.at("phases"));
    if (j.contains("noise")) cfg.noise = noise_from_json(j.at("noise"));
    std::string analyzer = j.value("analyzer", "if");
    if (analyzer == "if")
        cfg.analyzer = Analyzer::IF;
    else if (analyzer == "bs")
        cfg.analyzer = Analyzer::BS;
    else
        throw ConfigInvalid("analyzer must be \"if\" or \"bs\"");
    cfg.dead_time = j.value("dead_time", true);
    cfg.integration = j.value("integration", 1.0e4);
    cfg.seed = j.value("seed", std::uint64_t{1});
    if (j.contains("transmission"))
        for (auto it = j.at("transmission").begin(); it != j.at("transmission").end(); ++it)
            cfg.transmission[it.key()] = it.value().get<double>();
    cfg.validate();
    return cfg;
}

/// Scan values are radians unless the spec says {"unit": "deg"}.
inline ScanSpec scan_from_json(const Json& j) {
    check_schema(j, "scan spec");
    ScanSpec scan;
    std::string phase = j.value("scanned_phase", "alpha");
    if (phase == "alpha")
        scan.scanned = ScannedPhase::Alpha;
    else if (phase == "beta")
        scan.scanned = ScannedPhase::Beta;
    else
        throw ConfigInvalid("scanned_phase must be \"alpha\" or \"beta\"");
    const std::string unit = j.value("unit", "rad");
    if (unit != "rad" && unit != "deg") throw ConfigInvalid("unit must be \"rad\" or \"deg\"");
    const double factor = unit == "deg" ? kPi / 180.0 : 1.0;
    for (const Json& v : j.at("values")) scan.values.push_back(v.get<double>() * factor);
    scan.validate();
    return scan;
}

inline Json to_json(const ScanSpec& scan) {
    return Json{{"schema", kSchemaVersion},
                {"scanned_phase", scan.scanned == ScannedPhase::Alpha ? "alpha" : "beta"},
                {"unit", "rad"},
                {"values", scan.values}};
}

// ---------------------------------------------------------------------------
// Scan CSV

inline std::string format_sig12(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRecord>& records) {
    os << "phase_rad,outcome,raw,background,net\n";
    for (const ScanRecord& r : records)
        os << format_sig12(r.phase) << ',' << r.outcome << ',' << format_sig12(r.raw) << ','
           << format_sig12(r.background) << ',' << format_sig12(r.net) << '\n';
}

inline std::vector<ScanRecord> read_scan_csv(std::istream& is) {
    std::vector<ScanRecord> records;
    std::string line;
    if (!std::getline(is, line)) throw ConfigInvalid("empty scan CSV");
    if (line.rfind("phase_rad,outcome,raw,background,net", 0) != 0)
        throw ConfigInvalid("unexpected scan CSV header: " + line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        ScanRecord rec;
        auto next = [&]() {
            if (!std::getline(row, field, ',')) throw ConfigInvalid("short CSV row: " + line);
            return field;
        };
        rec.phase = std::stod(next());
        rec.outcome = next();
        rec.raw = std::stod(next());
        rec.background = std::stod(next());
        rec.net = std::stod(next());
        records.push_back(rec);
    }
    return records;
}

// ---------------------------------------------------------------------------
// Reports

inline Json to_json(const FringeFit& fit) {
    return Json{{"rate", fit.rate},
                {"visibility", fit.visibility},
                {"phase_rad", fit.phase},
                {"sigma_rate", fit.sigma_rate},
                {"sigma_visibility", fit.sigma_visibility},
                {"sigma_phase", fit.sigma_phase},
                {"rss", fit.rss},
                {"gof", fit.gof},
                {"points", fit.points}};
}

inline Json to_json(const OutcomeReport& o) {
    return Json{{"outcome", o.label},
                {"raw_fit", to_json(o.raw_fit)},
                {"net_fit", to_json(o.net_fit)},
                {"probability", o.probability},
                {"fidelity", o.fidelity},
                {"sigma_fidelity", o.fidelity_sigma}};
}

inline Json to_json(const TeleportationReport& rep) {
    Json outcomes = Json::array();
    for (const OutcomeReport& o : rep.outcomes) outcomes.push_back(to_json(o));
    Json bells = Json::array();
    for (const OutcomeReport& b : rep.bells) bells.push_back(to_json(b));
    Json j{{"schema", kSchemaVersion},
           {"conventions",
            Json::array({"all uncertainties are 1-sigma standard errors",
                         "fringes are R(1+V cos(alpha+rho)); rho is beta for psi+, beta+pi "
                         "for psi-, and -beta-2*delta for phi+ (the printed +beta variant of "
                         "the phi+ relation does not survive simulation)",
                         "delta_recovered is defined modulo pi"})},
           {"outcomes", outcomes},
           {"bell_states", bells},
           {"phase_differences",
            Json{{"psi_plus_vs_psi_minus_rad", rep.psi_plus_vs_psi_minus},
                 {"phi_plus_vs_psi_minus_rad", rep.phi_plus_vs_psi_minus}}},
           {"average_visibility", rep.average_visibility},
           {"average_fidelity", rep.average_fidelity}};
    if (rep.delta_recovered) j["delta_recovered_rad"] = *rep.delta_recovered;
    return j;
}

}  // namespace timebin
