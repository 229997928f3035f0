// Click patterns, Bell states and the analyzer outcome classification. The
// unambiguous-pattern tables are derived by brute force from the simulator at
// first use, never transcribed.

#pragma once

#include <array>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "timebin/optics.hpp"

namespace timebin {

enum class Detector : std::uint8_t { D1, D2 };  // D1 = port e, D2 = port f

inline const char* detector_name(Detector d) { return d == Detector::D1 ? "D1" : "D2"; }

struct Click {
    Detector det = Detector::D1;
    int slot = 0;

    friend auto operator<=>(const Click&, const Click&) = default;
};

/// Sorted multiset of detector clicks. Coincidence analysis uses the
/// two-click patterns; other multiplicities classify as no coincidence.
struct ClickPattern {
    std::vector<Click> clicks;

    ClickPattern() = default;
    ClickPattern(std::initializer_list<Click> cs) : clicks(cs) { canonicalize(); }

    void canonicalize() { std::sort(clicks.begin(), clicks.end()); }

    bool is_coincidence() const { return clicks.size() == 2; }

    bool same_detector() const {
        return is_coincidence() && clicks[0].det == clicks[1].det;
    }

    /// "01" for cross-detector (D1 slot, D2 slot); "D1:01" style otherwise.
    std::string label() const {
        if (is_coincidence() && !same_detector()) {
            const Click& d1 = clicks[0].det == Detector::D1 ? clicks[0] : clicks[1];
            const Click& d2 = clicks[0].det == Detector::D2 ? clicks[0] : clicks[1];
            return std::to_string(d1.slot) + std::to_string(d2.slot);
        }
        if (is_coincidence()) {
            std::ostringstream os;
            os << detector_name(clicks[0].det) << ":" << clicks[0].slot << clicks[1].slot;
            return os.str();
        }
        std::ostringstream os;
        os << "multi(";
        for (std::size_t i = 0; i < clicks.size(); ++i) {
            if (i) os << ",";
            os << detector_name(clicks[i].det) << clicks[i].slot;
        }
        os << ")";
        return os.str();
    }

    friend auto operator<=>(const ClickPattern&, const ClickPattern&) = default;
};

inline ClickPattern cross_pattern(int slot_d1, int slot_d2) {
    return ClickPattern{Click{Detector::D1, slot_d1}, Click{Detector::D2, slot_d2}};
}

inline ClickPattern same_detector_pattern(Detector d, int s1, int s2) {
    return ClickPattern{Click{d, s1}, Click{d, s2}};
}

enum class BellBase : std::uint8_t { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

inline constexpr std::array<BellBase, 4> kBellBases = {BellBase::PhiPlus, BellBase::PhiMinus,
                                                       BellBase::PsiPlus, BellBase::PsiMinus};

inline const char* bell_name(BellBase b) {
    switch (b) {
        case BellBase::PhiPlus: return "phi+";
        case BellBase::PhiMinus: return "phi-";
        case BellBase::PsiPlus: return "psi+";
        case BellBase::PsiMinus: return "psi-";
    }
    return "?";
}

/// A Bell state, optionally the primed variant matched to an analyzer whose
/// long arm carries phase delta.
struct BellKind {
    BellBase base = BellBase::PhiPlus;
    bool primed = false;
    double delta = 0.0;
};

/// Two-photon Bell state on a pair of ports. Primed variants carry e^{2i
/// delta} on |11> (phi) or a global e^{i delta} (psi); both reduce to the
/// standard states at delta = 0.
inline PhotonicState bell_state(const BellKind& kind, Port p1, Port p2, int tag = 0) {
    if (p1 == p2) throw std::invalid_argument("bell_state needs two distinct ports");
    auto two_photon = [&](int s1, int s2) {
        return create(create(vacuum(), ModeLabel{p1, s1, tag}), ModeLabel{p2, s2, tag});
    };
    const double r = 1.0 / std::sqrt(2.0);
    const double delta = kind.primed ? kind.delta : 0.0;
    PhotonicState first, second;
    Complex sign = (kind.base == BellBase::PhiMinus || kind.base == BellBase::PsiMinus)
                       ? Complex(-1, 0)
                       : Complex(1, 0);
    if (kind.base == BellBase::PhiPlus || kind.base == BellBase::PhiMinus) {
        first = two_photon(0, 0);
        second = two_photon(1, 1);
        second.scale(std::polar(1.0, 2.0 * delta));
    } else {
        first = two_photon(0, 1);
        second = two_photon(1, 0);
        first.scale(std::polar(1.0, delta));
        second.scale(std::polar(1.0, delta));
    }
    second.scale(sign);
    first += second;
    first.scale(Complex(r, 0));
    return first;
}

enum class Analyzer : std::uint8_t { BS, IF };

/// Single beamsplitter analyzer, relabeled onto the detector ports so that
/// pattern handling is shared with the interferometer analyzer.
inline LinearMap bs_bsa_map() {
    return compose(beamsplitter_map(Port::A, Port::B),
                   rename_map({{Port::A, Port::E}, {Port::B, Port::F}}));
}

inline LinearMap analyzer_map(Analyzer a, double delta) {
    return a == Analyzer::IF ? tb_interferometer_map(delta) : bs_bsa_map();
}

/// Distribution over click patterns; tag-summed Born probabilities grouped by
/// (detector, slot). Mass outside two-click coincidences is kept separately.
struct DetectionDistribution {
    std::map<ClickPattern, double> patterns;
    double no_coincidence = 0.0;

    double total() const {
        double t = no_coincidence;
        for (const auto& [p, v] : patterns) t += v;
        return t;
    }

    double probability(const ClickPattern& p) const {
        auto it = patterns.find(p);
        return it == patterns.end() ? 0.0 : it->second;
    }
};

/// Click pattern of one occupation vector restricted to the detector ports.
inline ClickPattern clicks_from_occupation(const OccupationVector& occ) {
    ClickPattern pattern;
    for (const auto& [m, k] : occ.entries()) {
        if (m.port != Port::E && m.port != Port::F) continue;
        Detector det = m.port == Port::E ? Detector::D1 : Detector::D2;
        for (int i = 0; i < k; ++i) pattern.clicks.push_back(Click{det, m.slot});
    }
    pattern.canonicalize();
    return pattern;
}

inline DetectionDistribution detection_distribution(const PhotonicState& s) {
    DetectionDistribution dist;
    for (const auto& [occ, p] : measure_probabilities(s)) {
        ClickPattern pattern = clicks_from_occupation(occ);
        if (pattern.is_coincidence())
            dist.patterns[pattern] += p;
        else
            dist.no_coincidence += p;
    }
    return dist;
}

/// Detector dead time: a second photon on the same detector within the gate
/// never registers, so same-detector pairs lose their coincidence.
inline DetectionDistribution dead_time_filter(const DetectionDistribution& dist) {
    DetectionDistribution out;
    out.no_coincidence = dist.no_coincidence;
    for (const auto& [pattern, p] : dist.patterns) {
        if (pattern.same_detector())
            out.no_coincidence += p;
        else
            out.patterns[pattern] += p;
    }
    return out;
}

struct BsaOutcome {
    enum class Kind : std::uint8_t { Unambiguous, Ambiguous, NoCoincidence };

    Kind kind = Kind::NoCoincidence;
    std::optional<BellBase> bell;       // set iff Unambiguous
    std::vector<BellBase> candidates;   // set iff Ambiguous

    bool unambiguous() const { return kind == Kind::Unambiguous; }
};

/// Brute-force outcome table for one analyzer: a pattern is unambiguous iff
/// exactly one Bell input reaches it with nonzero probability.
class BsaClassifier {
  public:
    explicit BsaClassifier(Analyzer analyzer) : analyzer_(analyzer) {
        const LinearMap map = analyzer_map(analyzer, 0.0);
        for (BellBase base : kBellBases) {
            PhotonicState in = bell_state(BellKind{base, true, 0.0}, Port::A, Port::B);
            DetectionDistribution dist = detection_distribution(apply(map, in));
            for (const auto& [pattern, p] : dist.patterns) rows_[base][pattern] = p;
        }
        const int max_slot = analyzer == Analyzer::IF ? 2 : 1;
        for (int s1 = 0; s1 <= max_slot; ++s1) {
            for (int s2 = s1; s2 <= max_slot; ++s2) {
                patterns_.push_back(same_detector_pattern(Detector::D1, s1, s2));
                patterns_.push_back(same_detector_pattern(Detector::D2, s1, s2));
            }
        }
        for (int s1 = 0; s1 <= max_slot; ++s1)
            for (int s2 = 0; s2 <= max_slot; ++s2) patterns_.push_back(cross_pattern(s1, s2));
        std::sort(patterns_.begin(), patterns_.end());
    }

    static const BsaClassifier& instance(Analyzer a) {
        static const BsaClassifier bs(Analyzer::BS);
        static const BsaClassifier ifbsa(Analyzer::IF);
        return a == Analyzer::BS ? bs : ifbsa;
    }

    BsaOutcome classify(const ClickPattern& pattern) const {
        if (!pattern.is_coincidence()) return BsaOutcome{};
        std::vector<BellBase> reachable;
        for (BellBase base : kBellBases) {
            auto it = rows_.at(base).find(pattern);
            if (it != rows_.at(base).end() && it->second > 1e-12) reachable.push_back(base);
        }
        if (reachable.empty()) return BsaOutcome{};
        if (reachable.size() == 1)
            return BsaOutcome{BsaOutcome::Kind::Unambiguous, reachable.front(), {}};
        return BsaOutcome{BsaOutcome::Kind::Ambiguous, std::nullopt, reachable};
    }

    /// All patterns the analyzer resolves, in canonical order.
    const std::vector<ClickPattern>& patterns() const { return patterns_; }

    double probability(BellBase input, const ClickPattern& pattern) const {
        auto it = rows_.at(input).find(pattern);
        return it == rows_.at(input).end() ? 0.0 : it->second;
    }

    Analyzer analyzer() const { return analyzer_; }

  private:
    Analyzer analyzer_;
    std::map<BellBase, std::map<ClickPattern, double>> rows_;
    std::vector<ClickPattern> patterns_;
};

inline BsaOutcome classify_if_bsa(const ClickPattern& p) {
    return BsaClassifier::instance(Analyzer::IF).classify(p);
}

inline BsaOutcome classify_bs_bsa(const ClickPattern& p) {
    return BsaClassifier::instance(Analyzer::BS).classify(p);
}

/// Probability that the given Bell input produces an unambiguous outcome.
inline double success_probability(const BellKind& kind, Analyzer analyzer, bool dead_time) {
    const BsaClassifier& table = BsaClassifier::instance(analyzer);
    PhotonicState in = bell_state(kind, Port::A, Port::B);
    DetectionDistribution dist =
        detection_distribution(apply(analyzer_map(analyzer, kind.primed ? kind.delta : 0.0), in));
    if (dead_time) dist = dead_time_filter(dist);
    double p = 0.0;
    for (const auto& [pattern, prob] : dist.patterns)
        if (table.classify(pattern).unambiguous()) p += prob;
    return p;
}

}  // namespace timebin
