// Passive linear-optical elements as unitary substitution rules on creation
// operators. The two-port time-bin interferometer built here is the analyzer
// core; its output coefficients are pinned by the unit tests.

#pragma once

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "timebin/fock.hpp"

namespace timebin {

inline constexpr int kMaxTag = 3;

/// Substitution rule on creation operators. Modes without an explicit rule
/// pass through unchanged; modes in `blocked` must not be occupied when the
/// map is applied (a delayed photon would leave the slot range).
class LinearMap {
  public:
    using Image = std::vector<std::pair<ModeLabel, Complex>>;

    void set_rule(const ModeLabel& in, Image image) { rules_[in] = std::move(image); }
    void block(const ModeLabel& in) { blocked_.insert(in); }

    bool has_rule(const ModeLabel& in) const { return rules_.count(in) != 0; }
    bool is_blocked(const ModeLabel& in) const { return blocked_.count(in) != 0; }

    Image image_of(const ModeLabel& in) const {
        auto it = rules_.find(in);
        if (it != rules_.end()) return it->second;
        return {{in, Complex(1.0, 0.0)}};
    }

    const std::map<ModeLabel, Image>& rules() const { return rules_; }
    const std::set<ModeLabel>& blocked() const { return blocked_; }

    /// Support = rule inputs plus everything they map onto.
    std::set<ModeLabel> support() const {
        std::set<ModeLabel> s;
        for (const auto& [in, image] : rules_) {
            s.insert(in);
            for (const auto& [out, c] : image) s.insert(out);
        }
        return s;
    }

    /// Checks U^dag U = I on the support within tol.
    bool is_unitary(double tol = 1e-12) const {
        std::vector<ModeLabel> modes(support().begin(), support().end());
        const int n = static_cast<int>(modes.size());
        std::map<ModeLabel, int> index;
        for (int i = 0; i < n; ++i) index[modes[i]] = i;
        // Column j = image of modes[j].
        std::vector<std::vector<Complex>> u(n, std::vector<Complex>(n, Complex(0, 0)));
        for (int j = 0; j < n; ++j)
            for (const auto& [out, c] : image_of(modes[j])) u[index.at(out)][j] += c;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                Complex dot(0, 0);
                for (int k = 0; k < n; ++k) dot += std::conj(u[k][i]) * u[k][j];
                if (std::abs(dot - (i == j ? Complex(1, 0) : Complex(0, 0))) > tol) return false;
            }
        }
        return true;
    }

  private:
    std::map<ModeLabel, Image> rules_;
    std::set<ModeLabel> blocked_;
};

/// Balanced beamsplitter between two ports, symmetric convention: transmission
/// 1/sqrt(2), reflection i/sqrt(2). Acts identically on every slot and tag.
inline LinearMap beamsplitter_map(Port p1, Port p2) {
    if (p1 == p2) throw std::invalid_argument("beamsplitter needs two distinct ports");
    LinearMap map;
    const double r = 1.0 / std::sqrt(2.0);
    for (int slot = 0; slot <= kMaxSlot; ++slot) {
        for (int tag = 0; tag <= kMaxTag; ++tag) {
            ModeLabel m1{p1, slot, tag};
            ModeLabel m2{p2, slot, tag};
            map.set_rule(m1, {{m1, Complex(r, 0)}, {m2, Complex(0, r)}});
            map.set_rule(m2, {{m1, Complex(0, r)}, {m2, Complex(r, 0)}});
        }
    }
    return map;
}

/// Pure phase on a single mode.
inline LinearMap phase_map(const ModeLabel& m, double phi) {
    LinearMap map;
    map.set_rule(m, {{m, std::polar(1.0, phi)}});
    return map;
}

/// Phase applied to every slot-1 mode of a port: the sigma_delta of a time-bin
/// qubit living on that port.
inline LinearMap late_bin_phase_map(Port p, double phi) {
    LinearMap map;
    for (int tag = 0; tag <= kMaxTag; ++tag)
        map.set_rule(ModeLabel{p, 1, tag}, {{ModeLabel{p, 1, tag}, std::polar(1.0, phi)}});
    return map;
}

/// Delay on one port: c(t) -> e^{i delta} c(t + shift). Slots that would leave
/// the representable range are blocked rather than silently passed through.
inline LinearMap delay_map(Port p, int slot_shift, double delta) {
    if (slot_shift < 0) throw std::invalid_argument("negative slot shift");
    LinearMap map;
    for (int slot = 0; slot <= kMaxSlot; ++slot) {
        for (int tag = 0; tag <= kMaxTag; ++tag) {
            ModeLabel in{p, slot, tag};
            if (slot + slot_shift > kMaxSlot) {
                map.block(in);
                continue;
            }
            map.set_rule(in, {{ModeLabel{p, slot + slot_shift, tag}, std::polar(1.0, delta)}});
        }
    }
    return map;
}

/// Port relabeling (a unitary permutation of the spatial labels).
inline LinearMap rename_map(const std::map<Port, Port>& renames) {
    LinearMap map;
    for (const auto& [from, to] : renames) {
        for (int slot = 0; slot <= kMaxSlot; ++slot)
            for (int tag = 0; tag <= kMaxTag; ++tag)
                map.set_rule(ModeLabel{from, slot, tag}, {{ModeLabel{to, slot, tag}, Complex(1, 0)}});
    }
    return map;
}

/// compose(first, second): the map equivalent to applying `first` then
/// `second`.
inline LinearMap compose(const LinearMap& first, const LinearMap& second) {
    LinearMap out;
    std::set<ModeLabel> handled;
    for (const auto& [in, image] : first.rules()) {
        handled.insert(in);
        std::map<ModeLabel, Complex> acc;
        bool hits_blocked = false;
        for (const auto& [mid, c1] : image) {
            if (second.is_blocked(mid)) {
                hits_blocked = true;
                break;
            }
            for (const auto& [fin, c2] : second.image_of(mid)) acc[fin] += c1 * c2;
        }
        if (hits_blocked) {
            out.block(in);
            continue;
        }
        LinearMap::Image img;
        for (const auto& [fin, c] : acc)
            if (std::abs(c) > kAmplitudeFloor) img.emplace_back(fin, c);
        out.set_rule(in, std::move(img));
    }
    // Modes the first map passes through but the second one touches.
    for (const auto& [in, image] : second.rules())
        if (!handled.count(in) && !first.is_blocked(in)) out.set_rule(in, image);
    for (const auto& in : first.blocked()) out.block(in);
    for (const auto& in : second.blocked())
        if (!handled.count(in) && !first.is_blocked(in)) out.block(in);
    return out;
}

inline LinearMap compose(std::initializer_list<LinearMap> maps) {
    LinearMap out;
    bool started = false;
    for (const auto& m : maps) {
        out = started ? compose(out, m) : m;
        started = true;
    }
    return out;
}

/// Substitutes every creation operator of every basis term by its image.
/// Photon number is conserved, so only slot overflow can fail.
inline PhotonicState apply(const LinearMap& map, const PhotonicState& s) {
    static constexpr double kInvSqrtFact[] = {1.0, 1.0, 0.7071067811865475244,
                                              0.4082482904638630164, 0.2041241452319315082};
    PhotonicState out;
    for (const auto& [occ, amp] : s.terms()) {
        double scale = 1.0;
        for (const auto& [m, k] : occ.entries()) {
            if (map.is_blocked(m))
                throw SlotOverflow("photon in a mode the map cannot shift within the slot range");
            scale *= kInvSqrtFact[k];
        }
        // Expand the substituted operator monomial term by term.
        PhotonicState acc;
        acc.add_term(OccupationVector{}, amp * scale);
        for (const auto& [m, k] : occ.entries()) {
            const LinearMap::Image image = map.image_of(m);
            for (int rep = 0; rep < k; ++rep) {
                PhotonicState next;
                for (const auto& [partial, partial_amp] : acc.terms()) {
                    for (const auto& [target, coef] : image) {
                        OccupationVector grown = partial;
                        int prior = grown.add(target);
                        next.add_term(grown, partial_amp * coef *
                                                 std::sqrt(static_cast<double>(prior + 1)));
                    }
                }
                acc = std::move(next);
            }
        }
        out += acc;
    }
    out.prune();
    return out;
}

/// Two balanced beamsplitters with a one-slot delay (phase delta) on the first
/// arm, then a relabeling onto the output ports. The unit tests pin the
/// resulting coefficients per input operator.
inline LinearMap two_port_interferometer(Port in1, Port in2, Port out1, Port out2, double delta) {
    LinearMap bs = beamsplitter_map(in1, in2);
    LinearMap chain = compose(bs, compose(delay_map(in1, 1, delta), bs));
    if (in1 != out1 || in2 != out2)
        chain = compose(chain, rename_map({{in1, out1}, {in2, out2}}));
    return chain;
}

/// The analyzer interferometer: ports a,b at slots {0,1} onto ports e,f at
/// slots {0,1,2}.
inline LinearMap tb_interferometer_map(double delta) {
    return two_port_interferometer(Port::A, Port::B, Port::E, Port::F, delta);
}

/// Single photon in a superposition of the two time bins of one port.
struct QubitSpec {
    Complex amp0 = Complex(1, 0);
    Complex amp1 = Complex(0, 0);
    Port port = Port::A;
};

inline QubitSpec equatorial_qubit(double phase, Port port) {
    const double r = 1.0 / std::sqrt(2.0);
    return QubitSpec{Complex(r, 0), std::polar(r, phase), port};
}

inline PhotonicState qubit_encode(const QubitSpec& q, int tag = 0) {
    double n2 = std::norm(q.amp0) + std::norm(q.amp1);
    if (std::abs(n2 - 1.0) > 1e-9) throw std::invalid_argument("qubit amplitudes not normalized");
    PhotonicState early = create(vacuum(), ModeLabel{q.port, 0, tag});
    PhotonicState late = create(vacuum(), ModeLabel{q.port, 1, tag});
    early.scale(q.amp0);
    late.scale(q.amp1);
    early += late;
    early.prune();
    return early;
}

}  // namespace timebin
