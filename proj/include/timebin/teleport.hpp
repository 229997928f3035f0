// Teleportation over the time-bin analyzer: source decomposition into the
// analyzer's Bell basis, the correction unitaries, full three-photon
// simulation, and the predicted fringe phases and rates per outcome.

#pragma once

#include <array>
#include <map>
#include <utility>

#include "timebin/bsa.hpp"

namespace timebin {

inline constexpr double kPi = 3.14159265358979323846;

inline double wrap_2pi(double angle) {
    double w = std::fmod(angle, 2.0 * kPi);
    if (w < 0) w += 2.0 * kPi;
    return w;
}

/// Signed distance between two angles, in (-pi, pi].
inline double angle_difference(double a, double b) {
    double d = std::fmod(a - b, 2.0 * kPi);
    if (d <= -kPi) d += 2.0 * kPi;
    if (d > kPi) d -= 2.0 * kPi;
    return d;
}

struct AmbiguousOutcome : std::runtime_error {
    explicit AmbiguousOutcome(const std::string& what) : std::runtime_error(what) {}
};

/// 2x2 unitary acting on the {|0>,|1>} time bins of one qubit.
struct SingleQubitMap {
    std::array<std::array<Complex, 2>, 2> m{{{Complex(1, 0), Complex(0, 0)},
                                             {Complex(0, 0), Complex(1, 0)}}};

    static SingleQubitMap identity() { return SingleQubitMap{}; }

    static SingleQubitMap sigma_x() {
        SingleQubitMap s;
        s.m = {{{Complex(0, 0), Complex(1, 0)}, {Complex(1, 0), Complex(0, 0)}}};
        return s;
    }

    static SingleQubitMap sigma_z() {
        SingleQubitMap s;
        s.m = {{{Complex(1, 0), Complex(0, 0)}, {Complex(0, 0), Complex(-1, 0)}}};
        return s;
    }

    /// Phase shift applied to the late bin: diag(1, e^{i phi}).
    static SingleQubitMap late_bin_phase(double phi) {
        SingleQubitMap s;
        s.m = {{{Complex(1, 0), Complex(0, 0)}, {Complex(0, 0), std::polar(1.0, phi)}}};
        return s;
    }

    SingleQubitMap scaled(Complex c) const {
        SingleQubitMap s = *this;
        for (auto& row : s.m)
            for (auto& v : row) v *= c;
        return s;
    }

    std::pair<Complex, Complex> apply(Complex amp0, Complex amp1) const {
        return {m[0][0] * amp0 + m[0][1] * amp1, m[1][0] * amp0 + m[1][1] * amp1};
    }

    friend SingleQubitMap operator*(const SingleQubitMap& lhs, const SingleQubitMap& rhs) {
        SingleQubitMap out;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                out.m[i][j] = lhs.m[i][0] * rhs.m[0][j] + lhs.m[i][1] * rhs.m[1][j];
        return out;
    }

    bool is_unitary(double tol = 1e-12) const {
        Complex c00 = std::conj(m[0][0]) * m[0][0] + std::conj(m[1][0]) * m[1][0];
        Complex c11 = std::conj(m[0][1]) * m[0][1] + std::conj(m[1][1]) * m[1][1];
        Complex c01 = std::conj(m[0][0]) * m[0][1] + std::conj(m[1][0]) * m[1][1];
        return std::abs(c00 - Complex(1, 0)) < tol && std::abs(c11 - Complex(1, 0)) < tol &&
               std::abs(c01) < tol;
    }
};

/// Interferometer phases: alpha at the sender, beta at the receiver's
/// analysis interferometer, delta inside the analyzer. The bulk pump
/// interferometer defines the phase reference and is held at 0.
struct PhaseConfig {
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;
};

/// Predicted fringe: rate(alpha) = R (1 + V cos(alpha + rho)).
struct FringeSpec {
    ClickPattern outcome;
    double rate_scale = 1.0;
    double visibility = 1.0;
    double phase = 0.0;
};

struct DecompositionTerm {
    BellKind bell;              // primed, carries delta
    Complex amplitude;          // 1/2 for every term
    SingleQubitMap bob_map;     // conditional state = bob_map applied to the input
    PhotonicState bob_state;    // the conditional receiver state on Port::Bob
};

/// Conditional receiver maps for each analyzer Bell outcome. The late-bin
/// phases undo the analyzer's delta so the corrected state matches the input
/// up to a global phase.
inline SingleQubitMap correction_unitary(BellBase outcome, double delta) {
    switch (outcome) {
        case BellBase::PhiPlus:
            return SingleQubitMap::late_bin_phase(2.0 * delta);
        case BellBase::PhiMinus:
            return SingleQubitMap::sigma_z() * SingleQubitMap::late_bin_phase(2.0 * delta);
        case BellBase::PsiPlus:
            return SingleQubitMap::sigma_x();
        case BellBase::PsiMinus:
            return SingleQubitMap::sigma_x() * SingleQubitMap::sigma_z();
    }
    return SingleQubitMap::identity();
}

/// Writes the input-qubit x entangled-pair state as a sum over the four
/// primed Bell states with the corresponding conditional receiver states.
inline std::array<DecompositionTerm, 4> teleport_decompose(const QubitSpec& zeta, double delta) {
    const SingleQubitMap inv2d = SingleQubitMap::late_bin_phase(-2.0 * delta);
    const Complex phase_min_d = std::polar(1.0, -delta);
    std::array<DecompositionTerm, 4> terms;
    const std::array<std::pair<BellBase, SingleQubitMap>, 4> maps = {{
        {BellBase::PhiPlus, inv2d},
        {BellBase::PhiMinus, SingleQubitMap::sigma_z() * inv2d},
        {BellBase::PsiPlus, SingleQubitMap::sigma_x().scaled(phase_min_d)},
        {BellBase::PsiMinus,
         (SingleQubitMap::sigma_x() * SingleQubitMap::sigma_z()).scaled(phase_min_d)},
    }};
    for (std::size_t i = 0; i < maps.size(); ++i) {
        const auto& [base, bob_map] = maps[i];
        auto [b0, b1] = bob_map.apply(zeta.amp0, zeta.amp1);
        PhotonicState bob = create(vacuum(), ModeLabel{Port::Bob, 0, 0});
        bob.scale(b0);
        PhotonicState late = create(vacuum(), ModeLabel{Port::Bob, 1, 0});
        late.scale(b1);
        bob += late;
        bob.prune();
        terms[i] = DecompositionTerm{BellKind{base, true, delta}, Complex(0.5, 0.0), bob_map, bob};
    }
    return terms;
}

// The receiver analyzer reuses port a (empty once the analyzer map has moved
// everything onto e,f) as its second arm; the cross output carries the
// 1 + cos fringe and is the detected one.
inline constexpr Port kBobDetectorPort = Port::A;
inline constexpr int kBobMiddleSlot = 1;

inline LinearMap bob_analyzer_map(double beta) {
    return two_port_interferometer(Port::Bob, Port::A, Port::Bob, Port::A, beta);
}

/// Joint distribution over (analyzer click pattern, receiver detection slot).
/// Mass without a receiver click, or without a two-click analyzer pattern,
/// accumulates in `unobserved`.
struct TeleportationDistribution {
    std::map<std::pair<ClickPattern, int>, double> joint;
    double unobserved = 0.0;

    double probability(const ClickPattern& pattern, int bob_slot) const {
        auto it = joint.find({pattern, bob_slot});
        return it == joint.end() ? 0.0 : it->second;
    }

    double pattern_total(const ClickPattern& pattern) const {
        double t = 0.0;
        for (const auto& [key, p] : joint)
            if (key.first == pattern) t += p;
        return t;
    }
};

/// Full three-photon run: sender qubit at alpha, entangled pair, analyzer at
/// delta, receiver interferometer at beta. `distinguishable` tags the sender
/// photon so it no longer interferes with the pair photon at the analyzer.
inline TeleportationDistribution simulate_teleportation(const PhaseConfig& cfg, bool dead_time,
                                                        Analyzer analyzer = Analyzer::IF,
                                                        bool distinguishable = false) {
    PhotonicState alice =
        qubit_encode(equatorial_qubit(cfg.alpha, Port::A), distinguishable ? 1 : 0);
    PhotonicState pair = bell_state(BellKind{BellBase::PhiPlus, false, 0.0}, Port::B, Port::Bob);
    PhotonicState state = tensor(alice, pair);
    state = apply(analyzer_map(analyzer, cfg.delta), state);
    state = apply(bob_analyzer_map(cfg.beta), state);

    TeleportationDistribution dist;
    for (const auto& [occ, p] : measure_probabilities(state)) {
        ClickPattern pattern = clicks_from_occupation(occ);
        int bob_slot = -1;
        for (const auto& [m, k] : occ.entries()) {
            if (m.port == kBobDetectorPort && k == 1 && bob_slot < 0) bob_slot = m.slot;
        }
        bool valid = pattern.is_coincidence() && bob_slot >= 0;
        if (valid && dead_time && pattern.same_detector()) valid = false;
        if (valid)
            dist.joint[{pattern, bob_slot}] += p;
        else
            dist.unobserved += p;
    }
    return dist;
}

/// Fringe phase rho in rate = R (1 + V cos(alpha + rho)) for an unambiguous
/// analyzer outcome; fixed by the simulator's conventions.
inline double fringe_phase(BellBase outcome, double beta, double delta) {
    switch (outcome) {
        case BellBase::PsiPlus: return wrap_2pi(beta);
        case BellBase::PsiMinus: return wrap_2pi(beta + kPi);
        case BellBase::PhiPlus: return wrap_2pi(-beta - 2.0 * delta);
        case BellBase::PhiMinus: break;
    }
    throw AmbiguousOutcome("phi- is never resolved by the analyzer");
}

inline double fringe_phase(const ClickPattern& outcome, double beta, double delta) {
    BsaOutcome classified = classify_if_bsa(outcome);
    if (!classified.unambiguous())
        throw AmbiguousOutcome("pattern " + outcome.label() + " is not unambiguous");
    return fringe_phase(*classified.bell, beta, delta);
}

namespace detail {
/// Fixed rate unit: the (phase-independent) distinguishable "02" triple rate,
/// so flat entries sit at 1.
inline double fringe_rate_unit() {
    static const double unit = [] {
        TeleportationDistribution d =
            simulate_teleportation(PhaseConfig{0.0, 0.0, 0.0}, false, Analyzer::IF, true);
        return d.probability(cross_pattern(0, 2), kBobMiddleSlot);
    }();
    return unit;
}
}  // namespace detail

/// Relative triple-coincidence rate of one cross-detector outcome with the
/// receiver detection in the interfering slot. Units are fixed so the flat
/// distinguishable outcomes equal 1.
inline double fringe_rate(const ClickPattern& outcome, const PhaseConfig& cfg,
                          bool distinguishable) {
    if (!outcome.is_coincidence() || outcome.same_detector())
        throw std::invalid_argument("fringe_rate expects a cross-detector outcome");
    TeleportationDistribution dist =
        simulate_teleportation(cfg, false, Analyzer::IF, distinguishable);
    return dist.probability(outcome, kBobMiddleSlot) / detail::fringe_rate_unit();
}

inline double visibility_to_fidelity(double visibility) {
    return 0.5 * (1.0 + visibility);
}

/// Theory fringe for one outcome at the given phases (visibility 1, phase
/// from fringe_phase, scale from the simulated rate at the fringe maximum).
inline FringeSpec predicted_fringe(const ClickPattern& outcome, const PhaseConfig& cfg) {
    double rho = fringe_phase(outcome, cfg.beta, cfg.delta);
    PhaseConfig peak = cfg;
    peak.alpha = wrap_2pi(-rho);
    double scale = fringe_rate(outcome, peak, false) / 2.0;
    return FringeSpec{outcome, scale, 1.0, rho};
}

/// Triple-coincidence rates averaged over a full sweep of the sender phase
/// (uniform grid; exact for these trigonometric rates).
inline std::map<ClickPattern, double> scan_averaged_triple_rates(const PhaseConfig& base,
                                                                 bool dead_time,
                                                                 Analyzer analyzer = Analyzer::IF,
                                                                 int grid = 8) {
    std::map<ClickPattern, double> acc;
    for (int i = 0; i < grid; ++i) {
        PhaseConfig cfg = base;
        cfg.alpha = 2.0 * kPi * i / grid;
        TeleportationDistribution dist = simulate_teleportation(cfg, dead_time, analyzer);
        for (const auto& [key, p] : dist.joint)
            if (key.second == kBobMiddleSlot) acc[key.first] += p / grid;
    }
    return acc;
}

}  // namespace timebin
