// Accidental coincidences, multi-pair events and temporal distinguishability.
// Covers the alignment observables (antidip, dip with baby-peak
// normalization) and the per-pattern accidental budget behind the fitting
// harness. All headline numbers emerge from the Fock simulation; the tests
// hold the expected constants.

#pragma once

#include <random>

#include "timebin/teleport.hpp"

namespace timebin {

/// Source and detector imperfections. Pair creation is Bernoulli per pulse;
/// double-pair terms are kept to second order. Dark counts are per gate per
/// detector, spread uniformly over the three slots.
struct NoiseConfig {
    double p_alice = 0.0;  // pair probability per pulse, sender crystal
    double p_epr = 0.0;    // pair probability per pulse, entangled-pair crystal
    double d1 = 0.0;       // dark probability per gate, detector D1
    double d2 = 0.0;       // dark probability per gate, detector D2
    double t_a = 1.0;      // transmission sender -> analyzer
    double t_e = 1.0;      // transmission pair source -> analyzer
    bool aligned = true;   // temporal indistinguishability at the analyzer

    void validate() const {
        auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in01(p_alice) || !in01(p_epr) || !in01(d1) || !in01(d2) || !in01(t_a) || !in01(t_e))
            throw std::invalid_argument("noise probabilities must lie in [0,1]");
    }
};

enum class BlockScenario : std::uint8_t { AliceBlocked, EprToBobBlocked, EprToBsaBlocked, Unblocked };

inline const char* scenario_name(BlockScenario s) {
    switch (s) {
        case BlockScenario::AliceBlocked: return "alice-blocked";
        case BlockScenario::EprToBobBlocked: return "epr-to-bob-blocked";
        case BlockScenario::EprToBsaBlocked: return "epr-to-bsa-blocked";
        case BlockScenario::Unblocked: return "unblocked";
    }
    return "?";
}

inline BlockScenario scenario_from_name(const std::string& name) {
    if (name == "alice-blocked") return BlockScenario::AliceBlocked;
    if (name == "epr-to-bob-blocked") return BlockScenario::EprToBobBlocked;
    if (name == "epr-to-bsa-blocked") return BlockScenario::EprToBsaBlocked;
    if (name == "unblocked") return BlockScenario::Unblocked;
    throw std::invalid_argument("unknown scenario: " + name);
}

enum class AntidipCase : std::uint8_t { Aligned, NonAligned, DoubleAlice, DoubleEpr };

namespace detail {

/// Single photon per input port, both in the early bin; the second photon's
/// tag models (non-)alignment.
inline PhotonicState antidip_single_pair_input(double overlap) {
    PhotonicState alice = create(vacuum(), ModeLabel{Port::A, 0, 0});
    PhotonicState same = create(vacuum(), ModeLabel{Port::B, 0, 0});
    PhotonicState other = create(vacuum(), ModeLabel{Port::B, 0, 1});
    same.scale(Complex(overlap, 0));
    other.scale(Complex(std::sqrt(std::max(0.0, 1.0 - overlap * overlap)), 0));
    same += other;
    return tensor(alice, same);
}

/// Two photons from a single crystal (always mutually indistinguishable).
inline PhotonicState double_pair_input(Port port) {
    PhotonicState one = create(vacuum(), ModeLabel{port, 0, 0});
    return normalize(tensor(one, one));
}

inline double pattern_probability(const PhotonicState& in, const ClickPattern& pattern,
                                  double delta = 0.0) {
    DetectionDistribution dist = detection_distribution(apply(tb_interferometer_map(delta), in));
    return dist.probability(pattern);
}

}  // namespace detail

/// Probability of the "photon in the early bin at both detectors" coincidence
/// for the four alignment cases, from the full simulation.
inline double antidip_probability(AntidipCase c) {
    const ClickPattern both_early = cross_pattern(0, 0);
    switch (c) {
        case AntidipCase::Aligned:
            return detail::pattern_probability(detail::antidip_single_pair_input(1.0), both_early);
        case AntidipCase::NonAligned:
            return detail::pattern_probability(detail::antidip_single_pair_input(0.0), both_early);
        case AntidipCase::DoubleAlice:
            return detail::pattern_probability(detail::double_pair_input(Port::A), both_early);
        case AntidipCase::DoubleEpr:
            return detail::pattern_probability(detail::double_pair_input(Port::B), both_early);
    }
    return 0.0;
}

/// Antidip contrast -(P_out - P_in)/P_out. Double-pair events contribute to
/// both the aligned and the non-aligned rate and cap the contrast.
inline double antidip_visibility(bool include_double_pairs) {
    double doubles = 0.0;
    if (include_double_pairs)
        doubles = antidip_probability(AntidipCase::DoubleAlice) +
                  antidip_probability(AntidipCase::DoubleEpr);
    double p_in = antidip_probability(AntidipCase::Aligned) + doubles;
    double p_out = antidip_probability(AntidipCase::NonAligned) + doubles;
    return (p_in - p_out) / p_out;
}

struct AntidipPoint {
    double offset = 0.0;
    double rate_00 = 0.0;
    double rate_22 = 0.0;
    double visibility = 0.0;  // contrast of rate_00 against the distinguishable baseline
};

/// Delay scan of the bunching-enhanced coincidences. Inputs are equal
/// superposition qubits; a Gaussian overlap exp(-offset^2/width^2)
/// interpolates between aligned and non-aligned.
inline std::vector<AntidipPoint> antidip_scan(const std::vector<double>& offsets, double width,
                                              bool include_double_pairs = true) {
    if (width <= 0.0) throw std::invalid_argument("coherence width must be positive");

    auto qubit_pair_input = [](double overlap) {
        PhotonicState alice = qubit_encode(equatorial_qubit(0.0, Port::A), 0);
        PhotonicState same = qubit_encode(equatorial_qubit(0.0, Port::B), 0);
        PhotonicState other = qubit_encode(equatorial_qubit(0.0, Port::B), 1);
        same.scale(Complex(overlap, 0));
        other.scale(Complex(std::sqrt(std::max(0.0, 1.0 - overlap * overlap)), 0));
        same += other;
        return tensor(alice, same);
    };
    auto double_qubit_input = [](Port port) {
        PhotonicState one = qubit_encode(equatorial_qubit(0.0, port), 0);
        return normalize(tensor(one, one));
    };

    const ClickPattern p00 = cross_pattern(0, 0);
    const ClickPattern p22 = cross_pattern(2, 2);
    double dbl00 = 0.0, dbl22 = 0.0;
    if (include_double_pairs) {
        for (Port port : {Port::A, Port::B}) {
            PhotonicState in = double_qubit_input(port);
            dbl00 += detail::pattern_probability(in, p00);
            dbl22 += detail::pattern_probability(in, p22);
        }
    }
    const double base00 = detail::pattern_probability(qubit_pair_input(0.0), p00) + dbl00;

    std::vector<AntidipPoint> out;
    out.reserve(offsets.size());
    for (double offset : offsets) {
        double o = std::exp(-offset * offset / (width * width));
        PhotonicState in = qubit_pair_input(o);
        AntidipPoint pt;
        pt.offset = offset;
        pt.rate_00 = detail::pattern_probability(in, p00) + dbl00;
        pt.rate_22 = detail::pattern_probability(in, p22) + dbl22;
        pt.visibility = (pt.rate_00 - base00) / base00;
        out.push_back(pt);
    }
    return out;
}

struct DipPoint {
    double offset = 0.0;
    double raw_01 = 0.0;     // single draw of the unstabilized phases
    double baby_01 = 0.0;    // same draw, photons from different pulses
    double normalized = 0.0; // phase-averaged ratio; dips where bunching removes "01"
};

namespace detail {

inline double dip_rate_01(double phase_a, double phase_b, double overlap) {
    PhotonicState alice = qubit_encode(equatorial_qubit(phase_a, Port::A), 0);
    PhotonicState same = qubit_encode(equatorial_qubit(phase_b, Port::B), 0);
    PhotonicState other = qubit_encode(equatorial_qubit(phase_b, Port::B), 1);
    same.scale(Complex(overlap, 0));
    other.scale(Complex(std::sqrt(std::max(0.0, 1.0 - overlap * overlap)), 0));
    same += other;
    return pattern_probability(tensor(alice, same), cross_pattern(0, 1));
}

/// Uniform average over both interferometer phases. The rates are first-order
/// trigonometric polynomials per phase, so an 8-point grid is exact.
inline double dip_rate_01_phase_averaged(double overlap) {
    constexpr int kGrid = 8;
    double acc = 0.0;
    for (int i = 0; i < kGrid; ++i)
        for (int j = 0; j < kGrid; ++j)
            acc += dip_rate_01(2.0 * kPi * i / kGrid, 2.0 * kPi * j / kGrid, overlap);
    return acc / (kGrid * kGrid);
}

}  // namespace detail

/// Dip scan normalized by baby-peak coincidences (photons born one pulse
/// apart: identical single-photon interference, never any bunching). raw_01
/// and baby_01 are instantaneous readings at randomly drawn phases; the
/// normalized column is the integrated ratio.
inline std::vector<DipPoint> dip_with_baby_peak(const std::vector<double>& offsets, double width,
                                                std::uint64_t seed) {
    if (width <= 0.0) throw std::invalid_argument("coherence width must be positive");
    std::mt19937_64 rng(seed);
    auto draw_phase = [&rng] {
        return 2.0 * kPi * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    const double baby_avg = detail::dip_rate_01_phase_averaged(0.0);
    std::vector<DipPoint> out;
    out.reserve(offsets.size());
    for (double offset : offsets) {
        double o = std::exp(-offset * offset / (width * width));
        DipPoint pt;
        pt.offset = offset;
        double pa = draw_phase();
        double pb = draw_phase();
        pt.raw_01 = detail::dip_rate_01(pa, pb, o);
        pt.baby_01 = detail::dip_rate_01(pa, pb, 0.0);
        pt.normalized = detail::dip_rate_01_phase_averaged(o) / baby_avg;
        out.push_back(pt);
    }
    return out;
}

namespace detail {

/// Single sender photon through the analyzer: click probabilities per
/// (detector port, slot).
inline std::map<ClickPattern, double> single_photon_clicks(double alpha, double delta) {
    PhotonicState in = qubit_encode(equatorial_qubit(alpha, Port::A), 0);
    PhotonicState outp = apply(tb_interferometer_map(delta), in);
    std::map<ClickPattern, double> clicks;
    for (const auto& [occ, p] : measure_probabilities(outp)) {
        ClickPattern pattern = clicks_from_occupation(occ);
        if (pattern.clicks.size() == 1) clicks[pattern] += p;
    }
    return clicks;
}

/// Receiver click probability in the interfering slot for an unpaired half of
/// the entangled state (partner lost): an even mixture of the two bins.
inline double lone_bob_mid_probability(double beta) {
    double acc = 0.0;
    for (int slot : {0, 1}) {
        PhotonicState in = create(vacuum(), ModeLabel{Port::Bob, slot, 0});
        PhotonicState outp = apply(bob_analyzer_map(beta), in);
        for (const auto& [occ, p] : measure_probabilities(outp))
            if (occ.count_of(ModeLabel{kBobDetectorPort, kBobMiddleSlot, 0}) == 1) acc += 0.5 * p;
    }
    return acc;
}

/// Joint (analyzer click, receiver mid click) for one entangled pair.
inline std::map<ClickPattern, double> pair_franson_joint(double beta, double delta) {
    PhotonicState pair = bell_state(BellKind{BellBase::PhiPlus, false, 0.0}, Port::B, Port::Bob);
    PhotonicState state = apply(tb_interferometer_map(delta), pair);
    state = apply(bob_analyzer_map(beta), state);
    std::map<ClickPattern, double> joint;
    for (const auto& [occ, p] : measure_probabilities(state)) {
        bool bob_mid = false;
        ClickPattern pattern;
        for (const auto& [m, k] : occ.entries()) {
            if (m.port == kBobDetectorPort && m.slot == kBobMiddleSlot && k == 1) bob_mid = true;
            if (m.port == Port::E || m.port == Port::F)
                for (int i = 0; i < k; ++i)
                    pattern.clicks.push_back(
                        Click{m.port == Port::E ? Detector::D1 : Detector::D2, m.slot});
        }
        pattern.canonicalize();
        if (bob_mid && pattern.clicks.size() == 1) joint[pattern] += p;
    }
    return joint;
}

/// Two independent pairs: both analyzer photons arrive, both receiver photons
/// arrive. Returns joint (two-click analyzer pattern, receiver mid click).
inline std::map<ClickPattern, double> double_pair_joint(double beta, double delta) {
    PhotonicState p1 = bell_state(BellKind{BellBase::PhiPlus, false, 0.0}, Port::B, Port::Bob, 0);
    PhotonicState p2 = bell_state(BellKind{BellBase::PhiPlus, false, 0.0}, Port::B, Port::Bob, 1);
    PhotonicState state = tensor(p1, p2);
    state = apply(tb_interferometer_map(delta), state);
    state = apply(bob_analyzer_map(beta), state);
    std::map<ClickPattern, double> joint;
    for (const auto& [occ, p] : measure_probabilities(state)) {
        bool bob_mid = false;
        ClickPattern pattern;
        for (const auto& [m, k] : occ.entries()) {
            if (m.port == kBobDetectorPort && m.slot == kBobMiddleSlot && k >= 1) bob_mid = true;
            if (m.port == Port::E || m.port == Port::F)
                for (int i = 0; i < k; ++i)
                    pattern.clicks.push_back(
                        Click{m.port == Port::E ? Detector::D1 : Detector::D2, m.slot});
        }
        pattern.canonicalize();
        if (bob_mid && pattern.is_coincidence()) joint[pattern] += p;
    }
    return joint;
}

/// One full pair plus the receiver photon of a second pair whose analyzer arm
/// was lost. Joint (single analyzer click, any receiver mid click).
inline std::map<ClickPattern, double> pair_plus_lone_bob_joint(double beta, double delta) {
    std::map<ClickPattern, double> joint;
    for (int slot : {0, 1}) {
        PhotonicState pair =
            bell_state(BellKind{BellBase::PhiPlus, false, 0.0}, Port::B, Port::Bob, 0);
        PhotonicState lone = create(vacuum(), ModeLabel{Port::Bob, slot, 1});
        PhotonicState state = tensor(pair, lone);
        state = apply(tb_interferometer_map(delta), state);
        state = apply(bob_analyzer_map(beta), state);
        for (const auto& [occ, p] : measure_probabilities(state)) {
            bool bob_mid = false;
            ClickPattern pattern;
            for (const auto& [m, k] : occ.entries()) {
                if (m.port == kBobDetectorPort && m.slot == kBobMiddleSlot && k >= 1)
                    bob_mid = true;
                if (m.port == Port::E || m.port == Port::F)
                    for (int i = 0; i < k; ++i)
                        pattern.clicks.push_back(
                            Click{m.port == Port::E ? Detector::D1 : Detector::D2, m.slot});
            }
            pattern.canonicalize();
            if (bob_mid && pattern.clicks.size() == 1) joint[pattern] += 0.5 * p;
        }
    }
    return joint;
}

inline void add_dark_partner(std::map<ClickPattern, double>& budget, const ClickPattern& real,
                             double weight, double d1, double d2) {
    for (Detector det : {Detector::D1, Detector::D2}) {
        double dark = (det == Detector::D1 ? d1 : d2) / 3.0;
        if (dark <= 0.0) continue;
        for (int slot = 0; slot <= 2; ++slot) {
            ClickPattern pattern = real;
            pattern.clicks.push_back(Click{det, slot});
            pattern.canonicalize();
            budget[pattern] += weight * dark;
        }
    }
}

}  // namespace detail

/// Accidental triple-coincidence rates per analyzer click pattern, to second
/// order in the pair probabilities. Event classes: a lone sender photon plus
/// a dark count, an entangled pair plus a dark count (one or two pairs), two
/// dark counts, and double pairs. Every class needs a receiver click, so a
/// blocked receiver arm zeroes the budget.
inline std::map<ClickPattern, double> noise_budget(const NoiseConfig& cfg,
                                                   const PhaseConfig& phases,
                                                   BlockScenario scenario) {
    cfg.validate();
    std::map<ClickPattern, double> budget;
    if (scenario == BlockScenario::EprToBobBlocked) return budget;

    const bool alice_on = scenario != BlockScenario::AliceBlocked;
    const double te_eff = scenario == BlockScenario::EprToBsaBlocked ? 0.0 : cfg.t_e;
    const double alice_at_bsa = alice_on ? cfg.p_alice * cfg.t_a : 0.0;
    const double lone_bob = cfg.p_epr * (1.0 - te_eff);  // pair created, analyzer arm lost

    // Sender photon + dark count; receiver click from an unpaired pair half.
    if (alice_at_bsa > 0.0 && lone_bob > 0.0) {
        double w = alice_at_bsa * lone_bob * detail::lone_bob_mid_probability(phases.beta);
        for (const auto& [click, p] : detail::single_photon_clicks(phases.alpha, phases.delta))
            detail::add_dark_partner(budget, click, w * p, cfg.d1, cfg.d2);
    }

    // Entangled pair (analyzer arm and receiver arm both arrive) + dark count.
    if (cfg.p_epr * te_eff > 0.0) {
        double w = cfg.p_epr * te_eff * (1.0 - alice_at_bsa);
        for (const auto& [click, p] : detail::pair_franson_joint(phases.beta, phases.delta))
            detail::add_dark_partner(budget, click, w * p, cfg.d1, cfg.d2);
    }

    // Two dark counts; receiver click from an unpaired pair half.
    if (lone_bob > 0.0) {
        double w = lone_bob * detail::lone_bob_mid_probability(phases.beta);
        std::vector<std::pair<Click, double>> darks;
        for (Detector det : {Detector::D1, Detector::D2})
            for (int slot = 0; slot <= 2; ++slot)
                darks.push_back({Click{det, slot}, (det == Detector::D1 ? cfg.d1 : cfg.d2) / 3.0});
        for (std::size_t i = 0; i < darks.size(); ++i)
            for (std::size_t j = i + 1; j < darks.size(); ++j)
                budget[ClickPattern{darks[i].first, darks[j].first}] +=
                    w * darks[i].second * darks[j].second;
    }

    // Double pairs: both analyzer photons arrive (two-click pattern), or one
    // lost (single click + dark).
    const double p2 = cfg.p_epr * cfg.p_epr;
    if (p2 > 0.0 && te_eff > 0.0) {
        double w_both = p2 * te_eff * te_eff * (1.0 - alice_at_bsa);
        for (const auto& [pattern, p] : detail::double_pair_joint(phases.beta, phases.delta))
            budget[pattern] += w_both * p;
        double w_one = p2 * 2.0 * te_eff * (1.0 - te_eff) * (1.0 - alice_at_bsa);
        if (w_one > 0.0)
            for (const auto& [click, p] :
                 detail::pair_plus_lone_bob_joint(phases.beta, phases.delta))
                detail::add_dark_partner(budget, click, w_one * p, cfg.d1, cfg.d2);
    }

    return budget;
}

/// The misaligned-analyzer fringe of one outcome; the noise-side view of the
/// same quantity the teleport module computes.
inline double distinguishable_fringe(const ClickPattern& outcome, const PhaseConfig& cfg) {
    return fringe_rate(outcome, cfg, true);
}

}  // namespace timebin
