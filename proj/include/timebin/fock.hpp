// Exact few-photon Fock-state algebra over a small set of labeled optical
// modes. States are sparse superpositions of occupation vectors; every other
// module builds on the operations defined here.

#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace timebin {

using Complex = std::complex<double>;

inline constexpr double kAmplitudeFloor = 1e-14;  // pruning threshold
inline constexpr int kMaxPhotons = 4;             // double-pair events need 4
inline constexpr int kMaxModes = 16;
inline constexpr int kMaxSlot = 3;                // slots 0,1,2 in use; one spare

struct PhotonCapExceeded : std::runtime_error {
    explicit PhotonCapExceeded(const std::string& what) : std::runtime_error(what) {}
};

struct SlotOverflow : std::runtime_error {
    explicit SlotOverflow(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroNorm : std::runtime_error {
    explicit ZeroNorm(const std::string& what) : std::runtime_error(what) {}
};

/// Named spatial ports: a,b feed the analyzer, e,f are its outputs, bob is the
/// receiver arm.
enum class Port : std::uint8_t { A, B, E, F, Bob };

inline const char* port_name(Port p) {
    switch (p) {
        case Port::A: return "a";
        case Port::B: return "b";
        case Port::E: return "e";
        case Port::F: return "f";
        case Port::Bob: return "bob";
    }
    return "?";
}

inline Port port_from_name(const std::string& name) {
    if (name == "a") return Port::A;
    if (name == "b") return Port::B;
    if (name == "e") return Port::E;
    if (name == "f") return Port::F;
    if (name == "bob") return Port::Bob;
    throw std::invalid_argument("unknown port name: " + name);
}

/// One optical mode: spatial port, integer time slot (units of the bin
/// separation) and a small distinguishability tag (0 = reference).
struct ModeLabel {
    Port port = Port::A;
    int slot = 0;
    int tag = 0;

    friend auto operator<=>(const ModeLabel&, const ModeLabel&) = default;
};

inline ModeLabel mode(Port p, int slot, int tag = 0) { return ModeLabel{p, slot, tag}; }

/// Sorted multiset of occupied modes. No zero-count entries are stored and the
/// entry order is canonical, so equal occupations compare equal bitwise.
class OccupationVector {
  public:
    using Entry = std::pair<ModeLabel, int>;

    OccupationVector() = default;

    /// Adds one photon in mode m, returns the occupancy before the add.
    int add(const ModeLabel& m) {
        if (m.slot < 0 || m.slot > kMaxSlot)
            throw SlotOverflow("time slot " + std::to_string(m.slot) + " outside [0," +
                               std::to_string(kMaxSlot) + "]");
        auto it = std::lower_bound(entries_.begin(), entries_.end(), m,
                                   [](const Entry& e, const ModeLabel& key) { return e.first < key; });
        if (it != entries_.end() && it->first == m) {
            int prior = it->second;
            ++it->second;
            return prior;
        }
        if (static_cast<int>(entries_.size()) + 1 > kMaxModes)
            throw PhotonCapExceeded("more than " + std::to_string(kMaxModes) + " distinct modes");
        entries_.insert(it, Entry{m, 1});
        return 0;
    }

    int photon_count() const {
        int n = 0;
        for (const auto& [m, k] : entries_) n += k;
        return n;
    }

    int count_of(const ModeLabel& m) const {
        for (const auto& [mm, k] : entries_)
            if (mm == m) return k;
        return 0;
    }

    bool empty() const { return entries_.empty(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// Same occupation with every tag set to 0 (for incoherent tag sums).
    OccupationVector tags_cleared() const {
        OccupationVector out;
        for (const auto& [m, k] : entries_)
            for (int i = 0; i < k; ++i) out.add(ModeLabel{m.port, m.slot, 0});
        return out;
    }

    friend auto operator<=>(const OccupationVector&, const OccupationVector&) = default;

  private:
    std::vector<Entry> entries_;
};

/// Normalized (after normalize()) superposition of occupation vectors.
/// Immutable in spirit: operations return new states.
class PhotonicState {
  public:
    using TermMap = std::map<OccupationVector, Complex>;

    PhotonicState() = default;

    static PhotonicState vacuum() {
        PhotonicState s;
        s.terms_[OccupationVector{}] = Complex(1.0, 0.0);
        return s;
    }

    const TermMap& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    Complex amplitude(const OccupationVector& occ) const {
        auto it = terms_.find(occ);
        return it == terms_.end() ? Complex(0.0, 0.0) : it->second;
    }

    void add_term(const OccupationVector& occ, Complex amp) {
        auto [it, inserted] = terms_.try_emplace(occ, amp);
        if (!inserted) it->second += amp;
    }

    double norm_squared() const {
        double n2 = 0.0;
        for (const auto& [occ, amp] : terms_) n2 += std::norm(amp);
        return n2;
    }

    double norm() const { return std::sqrt(norm_squared()); }

    void scale(Complex c) {
        for (auto& [occ, amp] : terms_) amp *= c;
    }

    void prune(double floor = kAmplitudeFloor) {
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (std::abs(it->second) <= floor)
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    PhotonicState& operator+=(const PhotonicState& other) {
        for (const auto& [occ, amp] : other.terms_) add_term(occ, amp);
        return *this;
    }

  private:
    TermMap terms_;
};

inline PhotonicState vacuum() { return PhotonicState::vacuum(); }

/// Creation operator: amplitude on each term picks up sqrt(n+1) where n was
/// the prior occupancy of m. Result is unnormalized.
inline PhotonicState create(const PhotonicState& s, const ModeLabel& m) {
    PhotonicState out;
    for (const auto& [occ, amp] : s.terms()) {
        if (occ.photon_count() + 1 > kMaxPhotons)
            throw PhotonCapExceeded("photon number above " + std::to_string(kMaxPhotons));
        OccupationVector next = occ;
        int prior = next.add(m);
        out.add_term(next, amp * std::sqrt(static_cast<double>(prior + 1)));
    }
    return out;
}

inline PhotonicState normalize(const PhotonicState& s) {
    double n = s.norm();
    if (n < kAmplitudeFloor) throw ZeroNorm("cannot normalize a zero vector");
    PhotonicState out = s;
    out.scale(Complex(1.0 / n, 0.0));
    out.prune();
    return out;
}

inline Complex inner_product(const PhotonicState& lhs, const PhotonicState& rhs) {
    // Iterate the smaller map.
    const PhotonicState& small = lhs.terms().size() <= rhs.terms().size() ? lhs : rhs;
    const PhotonicState& large = &small == &lhs ? rhs : lhs;
    Complex acc(0.0, 0.0);
    for (const auto& [occ, amp] : small.terms()) {
        Complex other = large.amplitude(occ);
        if (&small == &lhs)
            acc += std::conj(amp) * other;
        else
            acc += std::conj(other) * amp;
    }
    return acc;
}

/// Tensor product. Occupancies are merged with bosonic create semantics, so
/// overlapping modes acquire the correct sqrt binomial factors; for disjoint
/// ports this is the plain product state.
inline PhotonicState tensor(const PhotonicState& lhs, const PhotonicState& rhs) {
    static constexpr double kInvSqrtFact[] = {1.0, 1.0, 0.7071067811865475244,
                                              0.4082482904638630164, 0.2041241452319315082};
    PhotonicState out;
    for (const auto& [occ1, amp1] : lhs.terms()) {
        for (const auto& [occ2, amp2] : rhs.terms()) {
            if (occ1.photon_count() + occ2.photon_count() > kMaxPhotons)
                throw PhotonCapExceeded("tensor product exceeds photon cap");
            OccupationVector merged = occ1;
            double factor = 1.0;
            for (const auto& [m, k] : occ2.entries()) {
                factor *= kInvSqrtFact[k];
                for (int i = 0; i < k; ++i) {
                    int prior = merged.add(m);
                    factor *= std::sqrt(static_cast<double>(prior + 1));
                }
            }
            out.add_term(merged, amp1 * amp2 * factor);
        }
    }
    out.prune();
    return out;
}

/// Born-rule probabilities per occupation vector (raw, tags kept distinct).
inline std::map<OccupationVector, double> measure_probabilities(const PhotonicState& s) {
    std::map<OccupationVector, double> probs;
    for (const auto& [occ, amp] : s.terms()) probs[occ] += std::norm(amp);
    return probs;
}

/// Incoherent sum over distinguishability tags.
inline std::map<OccupationVector, double> tag_summed(const std::map<OccupationVector, double>& probs) {
    std::map<OccupationVector, double> out;
    for (const auto& [occ, p] : probs) out[occ.tags_cleared()] += p;
    return out;
}

inline std::map<OccupationVector, double> measure_probabilities_tag_summed(const PhotonicState& s) {
    return tag_summed(measure_probabilities(s));
}

}  // namespace timebin
