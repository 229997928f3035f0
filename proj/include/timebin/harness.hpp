// Experiment orchestration: configuration, phase scans with expected or
// Poisson-sampled counts, sinusoidal fringe fitting, background subtraction,
// Bell-state aggregation and report assembly.

#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <string>

#include "timebin/noise.hpp"

namespace timebin {

struct ConfigInvalid : std::runtime_error {
    explicit ConfigInvalid(const std::string& what) : std::runtime_error(what) {}
};

struct GridMismatch : std::runtime_error {
    explicit GridMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateDesign : std::runtime_error {
    explicit DegenerateDesign(const std::string& what) : std::runtime_error(what) {}
};

/// Full experiment description. `integration` is the expected
/// true-coincidence count scale per phase point; per-pattern transmission
/// factors model electronic losses downstream of the detectors.
struct ExperimentConfig {
    PhaseConfig phases;
    NoiseConfig noise;
    Analyzer analyzer = Analyzer::IF;
    bool dead_time = true;
    double integration = 1.0e4;
    std::uint64_t seed = 1;
    std::map<std::string, double> transmission;  // outcome label -> factor in (0,1]

    double transmission_of(const std::string& outcome) const {
        auto it = transmission.find(outcome);
        return it == transmission.end() ? 1.0 : it->second;
    }

    void validate() const {
        if (!(integration > 0.0)) throw ConfigInvalid("integration must be positive");
        for (const auto& [label, t] : transmission)
            if (!(t > 0.0 && t <= 1.0))
                throw ConfigInvalid("transmission factor for " + label + " outside (0,1]");
        try {
            noise.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigInvalid(e.what());
        }
    }
};

enum class ScannedPhase : std::uint8_t { Alpha, Beta };
enum class ScanMode : std::uint8_t { Expected, Sampled };

struct ScanSpec {
    ScannedPhase scanned = ScannedPhase::Alpha;
    std::vector<double> values;  // radians

    void validate() const {
        if (values.size() < 5)
            throw ConfigInvalid("scan needs at least 5 phase points for fitting");
    }
};

struct ScanRecord {
    double phase = 0.0;
    std::string outcome;
    double raw = 0.0;
    double background = 0.0;
    double net = 0.0;
    bool clamped = false;  // net was negative before clamping
};

/// Fitted fringe R(1 + V cos(phase + rho)) with 1-sigma standard errors.
struct FringeFit {
    double rate = 0.0;
    double visibility = 0.0;
    double phase = 0.0;  // in [0, 2pi)
    double sigma_rate = 0.0;
    double sigma_visibility = 0.0;
    double sigma_phase = 0.0;
    double rss = 0.0;
    double gof = 0.0;  // residual variance per degree of freedom
    int points = 0;
};

// ---------------------------------------------------------------------------
// Seeded randomness

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() { return splitmix64(state_); }

    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

  private:
    std::uint64_t state_;
};

/// Deterministic per-draw seed from (master seed, point, outcome, stream).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t point,
                                 std::uint64_t outcome, std::uint64_t stream) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= 0x1000003 * point + 0x10001 * outcome + stream;
    std::uint64_t t = s;
    return splitmix64(t);
}

/// Poisson sampling: CDF inversion below mean 50, normal approximation above.
inline long long poisson_sample(double mean, Rng& rng) {
    if (mean <= 0.0) return 0;
    if (mean < 50.0) {
        double limit = std::exp(-mean);
        long long k = 0;
        double p = rng.uniform();
        while (p > limit) {
            ++k;
            p *= rng.uniform();
        }
        return k;
    }
    double draw = mean + std::sqrt(mean) * rng.normal();
    return draw <= 0.0 ? 0 : static_cast<long long>(std::llround(draw));
}

// ---------------------------------------------------------------------------
// Scans

/// Unambiguous outcomes the experiment actually records under the given
/// analyzer and dead-time setting, in canonical order.
inline std::vector<ClickPattern> tracked_outcomes(Analyzer analyzer, bool dead_time) {
    const BsaClassifier& table = BsaClassifier::instance(analyzer);
    std::vector<ClickPattern> out;
    for (const ClickPattern& p : table.patterns()) {
        if (!table.classify(p).unambiguous()) continue;
        if (dead_time && p.same_detector()) continue;
        out.push_back(p);
    }
    return out;
}

/// One scan over the configured phase grid. Expected mode emits exact rates;
/// sampled mode draws Poisson counts (raw and an independent background
/// measurement), deterministically for a fixed seed.
inline std::vector<ScanRecord> run_scan(const ExperimentConfig& cfg, const ScanSpec& scan,
                                        ScanMode mode) {
    cfg.validate();
    scan.validate();

    const std::vector<ClickPattern> outcomes = tracked_outcomes(cfg.analyzer, cfg.dead_time);
    const double signal_weight =
        cfg.noise.p_alice * cfg.noise.t_a * cfg.noise.p_epr * cfg.noise.t_e;
    const double unit = timebin::detail::fringe_rate_unit();

    std::vector<ScanRecord> records;
    records.reserve(outcomes.size() * scan.values.size());
    for (std::size_t i = 0; i < scan.values.size(); ++i) {
        PhaseConfig phases = cfg.phases;
        (scan.scanned == ScannedPhase::Alpha ? phases.alpha : phases.beta) = scan.values[i];

        TeleportationDistribution dist =
            simulate_teleportation(phases, cfg.dead_time, cfg.analyzer, !cfg.noise.aligned);
        std::map<ClickPattern, double> budget =
            noise_budget(cfg.noise, phases, BlockScenario::Unblocked);
        double budget_total = 0.0;
        for (const auto& [p, r] : budget) budget_total += r;
        if (budget_total > 0.0 && signal_weight <= 0.0)
            throw ConfigInvalid("accidentals configured but the pair rates vanish");

        for (std::size_t j = 0; j < outcomes.size(); ++j) {
            const ClickPattern& outcome = outcomes[j];
            const double trans = cfg.transmission_of(outcome.label());
            double signal_rel = dist.probability(outcome, kBobMiddleSlot) / unit;
            double bg_rel = 0.0;
            if (signal_weight > 0.0) {
                auto it = budget.find(outcome);
                if (it != budget.end()) bg_rel = it->second / (signal_weight * unit);
            }
            double raw_mean = cfg.integration * trans * (signal_rel + bg_rel);
            double bg_mean = cfg.integration * trans * bg_rel;

            ScanRecord rec;
            rec.phase = scan.values[i];
            rec.outcome = outcome.label();
            if (mode == ScanMode::Expected) {
                rec.raw = raw_mean;
                rec.background = bg_mean;
            } else {
                Rng raw_rng(derive_seed(cfg.seed, i, j, 0));
                Rng bg_rng(derive_seed(cfg.seed, i, j, 1));
                rec.raw = static_cast<double>(poisson_sample(raw_mean, raw_rng));
                rec.background = static_cast<double>(poisson_sample(bg_mean, bg_rng));
            }
            double net = rec.raw - rec.background;
            rec.clamped = net < 0.0;
            rec.net = rec.clamped ? 0.0 : net;
            records.push_back(rec);
        }
    }
    return records;
}

// ---------------------------------------------------------------------------
// Fringe fitting

namespace detail {

struct Sym3 {
    // Row-major symmetric 3x3.
    double m[3][3] = {};

    double det() const {
        return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
               m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
               m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    }

    Sym3 inverse() const {
        double d = det();
        Sym3 inv;
        inv.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
        inv.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
        inv.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
        inv.m[1][0] = inv.m[0][1];
        inv.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
        inv.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
        inv.m[2][0] = inv.m[0][2];
        inv.m[2][1] = inv.m[1][2];
        inv.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
        return inv;
    }
};

/// Linear least squares for count = a + b cos(phase) + c sin(phase), with the
/// parameter covariance either from the residual variance or from supplied
/// per-point variances (sandwich form).
inline FringeFit fit_fringe_impl(const std::vector<std::pair<double, double>>& points,
                                 const std::vector<double>* variances) {
    const int n = static_cast<int>(points.size());
    if (n < 5) throw DegenerateDesign("need at least 5 points to fit a fringe");

    Sym3 xtx;
    double xty[3] = {};
    for (const auto& [phase, count] : points) {
        double row[3] = {1.0, std::cos(phase), std::sin(phase)};
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) xtx.m[a][b] += row[a] * row[b];
            xty[a] += row[a] * count;
        }
    }
    double scale = std::max(1.0, std::abs(xtx.m[0][0]));
    if (std::abs(xtx.det()) < 1e-9 * scale * scale * scale)
        throw DegenerateDesign("phase grid does not determine the fringe parameters");
    Sym3 inv = xtx.inverse();

    double coef[3] = {};
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) coef[a] += inv.m[a][b] * xty[b];
    const double a = coef[0], b = coef[1], c = coef[2];

    double rss = 0.0;
    for (const auto& [phase, count] : points) {
        double r = count - (a + b * std::cos(phase) + c * std::sin(phase));
        rss += r * r;
    }

    double cov[3][3] = {};
    if (variances) {
        // cov = (X'X)^-1 X' diag(var) X (X'X)^-1
        Sym3 mid;
        for (std::size_t k = 0; k < points.size(); ++k) {
            double row[3] = {1.0, std::cos(points[k].first), std::sin(points[k].first)};
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) mid.m[p][q] += row[p] * row[q] * (*variances)[k];
        }
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) {
                double acc = 0.0;
                for (int r = 0; r < 3; ++r)
                    for (int s = 0; s < 3; ++s) acc += inv.m[p][r] * mid.m[r][s] * inv.m[s][q];
                cov[p][q] = acc;
            }
    } else {
        double sigma2 = rss / (n - 3);
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) cov[p][q] = sigma2 * inv.m[p][q];
    }

    FringeFit fit;
    fit.points = n;
    fit.rate = a;
    fit.rss = rss;
    fit.gof = rss / (n - 3);
    const double s = std::hypot(b, c);
    fit.visibility = a != 0.0 ? s / std::abs(a) : 0.0;
    fit.phase = wrap_2pi(std::atan2(-c, b));
    fit.sigma_rate = std::sqrt(std::max(0.0, cov[0][0]));
    if (s > 1e-300 && a != 0.0) {
        // First-order propagation through V = sqrt(b^2+c^2)/a, rho = atan2(-c,b).
        double gv[3] = {-fit.visibility / a, b / (a * s), c / (a * s)};
        double gr[3] = {0.0, c / (s * s), -b / (s * s)};
        double var_v = 0.0, var_r = 0.0;
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) {
                var_v += gv[p] * cov[p][q] * gv[q];
                var_r += gr[p] * cov[p][q] * gr[q];
            }
        fit.sigma_visibility = std::sqrt(std::max(0.0, var_v));
        fit.sigma_phase = std::sqrt(std::max(0.0, var_r));
    } else {
        fit.sigma_visibility =
            a != 0.0 ? std::sqrt(std::max(0.0, cov[1][1] + cov[2][2])) / std::abs(a) : 0.0;
        fit.sigma_phase = kPi;  // phase undefined for a flat fringe
    }
    return fit;
}

}  // namespace detail

inline FringeFit fit_fringe(const std::vector<std::pair<double, double>>& points) {
    return detail::fit_fringe_impl(points, nullptr);
}

// ---------------------------------------------------------------------------
// Background subtraction

struct SubtractionResult {
    std::vector<std::pair<double, double>> net;
    std::vector<bool> clamped;
    FringeFit fit;
};

/// Pointwise raw - background on matching phase grids, clamped at zero. The
/// net fit's parameter errors use Poisson variances combined in quadrature.
inline SubtractionResult noise_subtract(const std::vector<std::pair<double, double>>& raw,
                                        const std::vector<std::pair<double, double>>& background) {
    if (raw.size() != background.size())
        throw GridMismatch("raw and background scans have different lengths");
    SubtractionResult res;
    std::vector<double> variances;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (std::abs(raw[i].first - background[i].first) > 1e-12)
            throw GridMismatch("raw and background phase grids differ");
        double net = raw[i].second - background[i].second;
        res.clamped.push_back(net < 0.0);
        res.net.emplace_back(raw[i].first, std::max(0.0, net));
        variances.push_back(std::max(1.0, raw[i].second) + std::max(1.0, background[i].second));
    }
    res.fit = detail::fit_fringe_impl(res.net, &variances);
    return res;
}

// ---------------------------------------------------------------------------
// Bell-state aggregation

/// Outcome labels grouped by the Bell state they unambiguously identify.
inline std::map<std::string, std::vector<std::string>> default_bell_mapping(Analyzer analyzer,
                                                                            bool dead_time) {
    const BsaClassifier& table = BsaClassifier::instance(analyzer);
    std::map<std::string, std::vector<std::string>> mapping;
    for (const ClickPattern& p : tracked_outcomes(analyzer, dead_time)) {
        BsaOutcome o = table.classify(p);
        mapping[bell_name(*o.bell)].push_back(p.label());
    }
    return mapping;
}

/// Sums constituent-outcome counts per phase point into per-Bell-state
/// records.
inline std::vector<ScanRecord> bell_aggregate(
    const std::vector<ScanRecord>& records,
    const std::map<std::string, std::vector<std::string>>& mapping) {
    std::vector<ScanRecord> out;
    for (const auto& [bell, members] : mapping) {
        std::map<double, ScanRecord> by_phase;
        for (const ScanRecord& rec : records) {
            if (std::find(members.begin(), members.end(), rec.outcome) == members.end()) continue;
            ScanRecord& acc = by_phase[rec.phase];
            acc.phase = rec.phase;
            acc.outcome = bell;
            acc.raw += rec.raw;
            acc.background += rec.background;
            acc.net += rec.net;
            acc.clamped = acc.clamped || rec.clamped;
        }
        for (const auto& [phase, rec] : by_phase) out.push_back(rec);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Reporting

struct OutcomeReport {
    std::string label;
    FringeFit raw_fit;
    FringeFit net_fit;
    double probability = 0.0;  // share of total net counts
    double fidelity = 0.0;     // (1 + V_net)/2
    double fidelity_sigma = 0.0;
};

struct TeleportationReport {
    std::vector<OutcomeReport> outcomes;
    std::vector<OutcomeReport> bells;
    double psi_plus_vs_psi_minus = 0.0;  // net fringe phase difference, radians
    double phi_plus_vs_psi_minus = 0.0;
    std::optional<double> delta_recovered;  // from the phi+ fringe, modulo pi
    double average_visibility = 0.0;
    double average_fidelity = 0.0;
};

namespace detail {

inline std::vector<std::pair<double, double>> select_counts(const std::vector<ScanRecord>& records,
                                                            const std::string& outcome,
                                                            bool net) {
    std::vector<std::pair<double, double>> pts;
    for (const ScanRecord& r : records)
        if (r.outcome == outcome) pts.emplace_back(r.phase, net ? r.net : r.raw);
    return pts;
}

inline OutcomeReport fit_outcome(const std::vector<ScanRecord>& records,
                                 const std::string& label) {
    OutcomeReport rep;
    rep.label = label;
    rep.raw_fit = fit_fringe(select_counts(records, label, false));
    rep.net_fit = fit_fringe(select_counts(records, label, true));
    rep.fidelity = visibility_to_fidelity(rep.net_fit.visibility);
    rep.fidelity_sigma = 0.5 * rep.net_fit.sigma_visibility;
    return rep;
}

}  // namespace detail

/// Fits every outcome and Bell aggregate in the records and derives the
/// cross-fringe phase relations, including the analyzer phase recovered from
/// the phi+ fringe (rho = -beta - 2 delta, so delta is known modulo pi).
inline TeleportationReport report(const std::vector<ScanRecord>& records,
                                  const ExperimentConfig& cfg) {
    TeleportationReport rep;
    std::vector<std::string> labels;
    for (const ScanRecord& r : records)
        if (std::find(labels.begin(), labels.end(), r.outcome) == labels.end())
            labels.push_back(r.outcome);

    double total_net = 0.0;
    std::map<std::string, double> net_by_outcome;
    for (const ScanRecord& r : records) {
        net_by_outcome[r.outcome] += r.net;
        total_net += r.net;
    }
    for (const std::string& label : labels) {
        OutcomeReport o = detail::fit_outcome(records, label);
        if (total_net > 0.0) o.probability = net_by_outcome[label] / total_net;
        rep.outcomes.push_back(std::move(o));
    }

    const auto mapping = default_bell_mapping(cfg.analyzer, cfg.dead_time);
    const std::vector<ScanRecord> aggregated = bell_aggregate(records, mapping);
    std::map<std::string, FringeFit> bell_fits;
    for (const auto& [bell, members] : mapping) {
        OutcomeReport o = detail::fit_outcome(aggregated, bell);
        double net = 0.0;
        for (const std::string& m : members) net += net_by_outcome[m];
        if (total_net > 0.0) o.probability = net / total_net;
        bell_fits[bell] = o.net_fit;
        rep.bells.push_back(std::move(o));
    }

    double vis_sum = 0.0;
    for (const OutcomeReport& b : rep.bells) vis_sum += b.net_fit.visibility;
    if (!rep.bells.empty()) {
        rep.average_visibility = vis_sum / static_cast<double>(rep.bells.size());
        rep.average_fidelity = visibility_to_fidelity(rep.average_visibility);
    }

    auto phase_of = [&bell_fits](const char* name) -> std::optional<double> {
        auto it = bell_fits.find(name);
        if (it == bell_fits.end()) return std::nullopt;
        return it->second.phase;
    };
    auto psi_p = phase_of("psi+"), psi_m = phase_of("psi-"), phi_p = phase_of("phi+");
    if (psi_p && psi_m) rep.psi_plus_vs_psi_minus = angle_difference(*psi_p, *psi_m);
    if (phi_p && psi_m) rep.phi_plus_vs_psi_minus = angle_difference(*phi_p, *psi_m);
    if (phi_p) {
        double delta = -0.5 * (*phi_p + cfg.phases.beta);
        delta = std::fmod(delta, kPi);
        if (delta < 0) delta += kPi;
        rep.delta_recovered = delta;
    }
    return rep;
}

}  // namespace timebin
