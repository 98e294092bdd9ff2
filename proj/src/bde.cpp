#include "aperiodic/bde.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace aperiodic {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// x_i - x_anchor, summed from exact coefficients when available.
class Offsets {
public:
    explicit Offsets(const PointSet& p) : p_(p) {
        if (p.has_exact()) {
            for (const auto& g : p.exact()->generators) {
                gens_.push_back(g.to_long_double());
            }
        }
        origin_ = raw(p.anchor_index());
    }
    long double operator()(std::size_t i) const { return raw(i) - origin_; }

private:
    long double raw(std::size_t i) const {
        if (gens_.empty()) {
            return p_[i];
        }
        const auto& c = p_.exact()->coefficients;
        long double s = 0;
        for (std::size_t g = 0; g < gens_.size(); ++g) {
            s += static_cast<long double>(c[i * gens_.size() + g]) * gens_[g];
        }
        return s;
    }
    const PointSet& p_;
    std::vector<long double> gens_;
    long double origin_ = 0;
};

int dyadic_level(std::uint64_t m) {
    int j = 0;
    while (m >= (std::uint64_t{1} << j)) {
        ++j;
    }
    return j;
}

class Matcher {
public:
    Matcher(const std::vector<double>& a, const std::vector<double>& b, double r, double lo, double hi)
        : a_(a), b_(b), r_(r), lo_(lo), hi_(hi), mate_a_(a.size(), kNone), mate_b_(b.size(), kNone),
          seen_a_(a.size(), 0), seen_b_(b.size(), 0), from_a_(a.size(), kNone), from_b_(b.size(), kNone) {}

    bool interior(double x) const { return x - lo_ > r_ && hi_ - x > r_; }

    void greedy() {
        std::size_t p = 0;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            while (p < b_.size() && b_[p] < a_[i] - r_) {
                ++p;
            }
            if (p < b_.size() && b_[p] <= a_[i] + r_) {
                mate_a_[i] = p;
                mate_b_[p] = i;
                ++p;
            }
        }
    }

    // Matches every interior point, or throws NoMatching.
    void cover() {
        for (std::size_t i = 0; i < a_.size(); ++i) {
            if (mate_a_[i] == kNone && interior(a_[i]) && !grow(a_, b_, mate_a_, mate_b_, seen_a_, seen_b_, from_a_, from_b_, i)) {
                throw NoMatching("no matching at radius " + format_decimal(r_), witness('A', seen_a_, seen_b_));
            }
        }
        for (std::size_t j = 0; j < b_.size(); ++j) {
            if (mate_b_[j] == kNone && interior(b_[j]) && !grow(b_, a_, mate_b_, mate_a_, seen_b_, seen_a_, from_b_, from_a_, j)) {
                throw NoMatching("no matching at radius " + format_decimal(r_), witness('B', seen_b_, seen_a_));
            }
        }
    }

    MatchingCertificate certificate() const {
        MatchingCertificate c;
        c.radius = r_;
        c.range_lo = lo_;
        c.range_hi = hi_;
        for (std::size_t i = 0; i < a_.size(); ++i) {
            if (mate_a_[i] != kNone) {
                c.pairs.emplace_back(i, mate_a_[i]);
            } else {
                ++c.unmatched_boundary;
            }
        }
        for (std::size_t j = 0; j < b_.size(); ++j) {
            c.unmatched_boundary += mate_b_[j] == kNone;
        }
        return c;
    }

private:
    // Alternating search from the unmatched vertex s on side U. It succeeds on
    // reaching a free vertex of V, or a matched non-interior vertex of U whose
    // edge can be released.
    bool grow(const std::vector<double>& u, const std::vector<double>& v, std::vector<std::size_t>& mate_u,
              std::vector<std::size_t>& mate_v, std::vector<unsigned>& seen_u, std::vector<unsigned>& seen_v,
              std::vector<std::size_t>& from_u, std::vector<std::size_t>& from_v, std::size_t s) {
        ++epoch_;
        last_root_ = s;
        std::deque<std::size_t> queue{s};
        seen_u[s] = epoch_;
        while (!queue.empty()) {
            std::size_t x = queue.front();
            queue.pop_front();
            auto first = std::lower_bound(v.begin(), v.end(), u[x] - r_) - v.begin();
            for (auto y = static_cast<std::size_t>(first); y < v.size() && v[y] <= u[x] + r_; ++y) {
                if (seen_v[y] == epoch_) {
                    continue;
                }
                seen_v[y] = epoch_;
                from_v[y] = x;
                if (mate_v[y] == kNone) {
                    flip(mate_u, mate_v, from_u, from_v, y);
                    return true;
                }
                std::size_t w = mate_v[y];
                seen_u[w] = epoch_;
                from_u[w] = y;
                if (!interior(u[w])) {
                    // Release w: its partner y passes to the path.
                    mate_u[w] = kNone;
                    mate_v[y] = kNone;
                    flip(mate_u, mate_v, from_u, from_v, y);
                    return true;
                }
                queue.push_back(w);
            }
        }
        return false;
    }

    void flip(std::vector<std::size_t>& mate_u, std::vector<std::size_t>& mate_v, const std::vector<std::size_t>& from_u,
              const std::vector<std::size_t>& from_v, std::size_t y) {
        while (true) {
            std::size_t x = from_v[y];
            mate_u[x] = y;
            mate_v[y] = x;
            if (x == last_root_) {
                return;
            }
            y = from_u[x];
        }
    }

    HallWitness witness(char side, const std::vector<unsigned>& seen_u, const std::vector<unsigned>& seen_v) const {
        HallWitness w;
        w.side = side;
        for (std::size_t i = 0; i < seen_u.size(); ++i) {
            if (seen_u[i] == epoch_) {
                w.X.push_back(i);
            }
        }
        for (std::size_t j = 0; j < seen_v.size(); ++j) {
            if (seen_v[j] == epoch_) {
                w.neighbours.push_back(j);
            }
        }
        return w;
    }

    const std::vector<double>& a_;
    const std::vector<double>& b_;
    double r_, lo_, hi_;
    std::vector<std::size_t> mate_a_, mate_b_;
    std::vector<unsigned> seen_a_, seen_b_;
    std::vector<std::size_t> from_a_, from_b_;
    unsigned epoch_ = 0;
    std::size_t last_root_ = 0;
};

std::pair<double, double> hull(const PointSet& A, const PointSet& B) {
    if (A.empty() && B.empty()) {
        return {0.0, 0.0};
    }
    double lo = INFINITY, hi = -INFINITY;
    for (const PointSet* p : {&A, &B}) {
        if (!p->empty()) {
            lo = std::min(lo, p->front());
            hi = std::max(hi, p->back());
        }
    }
    return {lo, hi};
}

double max_over(const std::vector<double>& v, double lo, double hi, const RealValue& a, std::mt19937_64& rng, int trials) {
    const double inv = 1.0 / a.to_double();
    std::uniform_real_distribution<double> pick(lo, hi);
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        double u = pick(rng), w = pick(rng);
        if (u > w) {
            std::swap(u, w);
        }
        auto count = std::lower_bound(v.begin(), v.end(), w) - std::lower_bound(v.begin(), v.end(), u);
        best = std::max(best, std::abs(static_cast<double>(count) - (w - u) * inv));
    }
    return best;
}

} // namespace

DeviationReport lattice_deviation(const PointSet& points, const RealValue& a, const VerdictPolicy& policy) {
    if (exact_compare(a, RealValue()) <= 0) {
        throw std::invalid_argument("lattice spacing must be positive");
    }
    DeviationReport r;
    r.a = a;
    r.policy = policy;
    r.count = points.size();
    if (points.empty()) {
        r.verdict = Verdict::bounded;
        return r;
    }
    Offsets off(points);
    const long double al = a.to_long_double();
    std::vector<double> level;
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::int64_t m = points.index_of(i);
        double d = static_cast<double>(std::abs(off(i) - static_cast<long double>(m) * al));
        int j = dyadic_level(static_cast<std::uint64_t>(std::abs(m)));
        if (static_cast<std::size_t>(j) >= level.size()) {
            level.resize(j + 1, 0.0);
        }
        level[j] = std::max(level[j], d);
    }
    for (std::size_t j = 1; j < level.size(); ++j) {
        level[j] = std::max(level[j], level[j - 1]);
    }
    r.dev_series = level;
    r.max_dev = level.back();
    const std::size_t K = level.size() - 1;
    const double early = level[K / 2];
    r.growth_ratio = early > 0 ? r.max_dev / early : (r.max_dev > 0 ? INFINITY : 1.0);
    r.verdict = policy.decide(early, r.max_dev);
    return r;
}

LaczkovichReport laczkovich_interval_check(const PointSet& points, const RealValue& a, int trials, std::uint64_t seed,
                                           const VerdictPolicy& policy) {
    if (trials < 1) {
        throw std::invalid_argument("trials must be at least 1");
    }
    if (exact_compare(a, RealValue()) <= 0) {
        throw std::invalid_argument("lattice spacing must be positive");
    }
    LaczkovichReport r;
    r.trials = trials;
    r.seed = seed;
    if (points.size() < 2) {
        r.verdict = Verdict::bounded;
        return r;
    }
    std::mt19937_64 rng(seed);
    const auto& v = points.values();
    const double lo = v.front(), hi = v.back();
    const double mid = (lo + hi) / 2, quarter = (hi - lo) / 4;
    r.C_half = max_over(v, mid - quarter, mid + quarter, a, rng, trials);
    r.C_estimate = max_over(v, lo, hi, a, rng, trials);
    r.verdict = policy.decide(r.C_half, r.C_estimate);
    return r;
}

MatchingCertificate bottleneck_matching(const PointSet& A, const PointSet& B, double radius,
                                        std::optional<std::pair<double, double>> range) {
    if (!(radius > 0)) {
        throw std::invalid_argument("radius must be positive");
    }
    auto [lo, hi] = range ? *range : hull(A, B);
    Matcher m(A.values(), B.values(), radius, lo, hi);
    m.greedy();
    m.cover();
    return m.certificate();
}

RadiusSearch minimal_matching_radius(const PointSet& A, const PointSet& B, double resolution, double max_radius,
                                     std::optional<std::pair<double, double>> range) {
    if (!(resolution > 0) || !(max_radius > 0)) {
        throw std::invalid_argument("resolution and max_radius must be positive");
    }
    RadiusSearch s;
    double lo = 0.0, hi = std::min(1.0, max_radius);
    while (true) {
        ++s.probes;
        try {
            s.certificate = bottleneck_matching(A, B, hi, range);
            break;
        } catch (const NoMatching&) {
            if (hi >= max_radius) {
                throw;
            }
            lo = hi;
            hi = std::min(2 * hi, max_radius);
        }
    }
    while (hi - lo > resolution) {
        double mid = (lo + hi) / 2;
        ++s.probes;
        try {
            s.certificate = bottleneck_matching(A, B, mid, range);
            hi = mid;
        } catch (const NoMatching&) {
            lo = mid;
        }
    }
    s.radius = hi;
    s.infeasible_below = lo;
    return s;
}

DivideReport divide_experiment(const PointSet& A, const std::vector<PointSet>& parts, const RealValue& a,
                               const VerdictPolicy& policy) {
    if (parts.empty()) {
        throw NotAPartition("no parts given");
    }
    std::vector<double> all;
    for (const auto& p : parts) {
        all.insert(all.end(), p.values().begin(), p.values().end());
    }
    std::sort(all.begin(), all.end());
    if (std::adjacent_find(all.begin(), all.end()) != all.end()) {
        throw NotAPartition("parts overlap");
    }
    if (all != A.values()) {
        throw NotAPartition(all.size() == A.size() ? "parts are not subsets of the point set"
                                                   : "parts do not cover the point set");
    }
    DivideReport r;
    r.n = parts.size();
    r.a = a;
    const RealValue na = RealValue(Rational(static_cast<long>(r.n))) * a;
    for (const auto& p : parts) {
        DividePart d;
        d.count = p.size();
        d.predicted = lattice_deviation(p, na, policy);
        if (p.density_hint() && !p.density_hint()->is_zero()) {
            d.own = lattice_deviation(p, RealValue(Rational(1)) / *p.density_hint(), policy);
        }
        r.parts.push_back(std::move(d));
    }
    return r;
}

void write_matching_csv(std::ostream& os, const PointSet& A, const PointSet& B, const MatchingCertificate& c) {
    os << "a_index,b_index,a,b\n";
    for (const auto& [i, j] : c.pairs) {
        os << i << ',' << j << ',' << format_decimal(A[i]) << ',' << format_decimal(B[j]) << '\n';
    }
}

void write_deviation_csv(std::ostream& os, const DeviationReport& r) {
    os << "level,max_dev\n";
    for (std::size_t j = 0; j < r.dev_series.size(); ++j) {
        os << j << ',' << format_decimal(r.dev_series[j]) << '\n';
    }
}

std::string summary_json(const MatchingCertificate& c) {
    nlohmann::ordered_json j;
    j["radius"] = c.radius;
    j["pairs"] = c.pairs.size();
    j["unmatched_boundary"] = c.unmatched_boundary;
    j["range"] = {c.range_lo, c.range_hi};
    j["verdict"] = "matched";
    return j.dump();
}

std::string summary_json(const DeviationReport& r) {
    nlohmann::ordered_json j;
    j["a"] = format_symbolic(r.a);
    j["points"] = r.count;
    j["max_dev"] = r.max_dev;
    j["growth_ratio"] = std::isfinite(r.growth_ratio) ? nlohmann::ordered_json(r.growth_ratio) : nlohmann::ordered_json("inf");
    j["verdict"] = to_string(r.verdict);
    return j.dump();
}

std::string summary_json(const DivideReport& r) {
    nlohmann::ordered_json j;
    j["parts"] = r.n;
    j["a"] = format_symbolic(r.a);
    nlohmann::ordered_json per = nlohmann::ordered_json::array();
    for (const auto& p : r.parts) {
        nlohmann::ordered_json e;
        e["count"] = p.count;
        e["predicted_max_dev"] = p.predicted.max_dev;
        e["predicted_verdict"] = to_string(p.predicted.verdict);
        if (p.own) {
            e["own_max_dev"] = p.own->max_dev;
            e["own_verdict"] = to_string(p.own->verdict);
        }
        per.push_back(e);
    }
    j["per_part"] = per;
    return j.dump();
}

} // namespace aperiodic
