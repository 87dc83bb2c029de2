#include "conewave/words.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "conewave/assumptions.hpp"

namespace conewave {

// --- Rational / SobolevOrder -------------------------------------------------

Rational::Rational(long long n, long long d) {
    if (d == 0) throw std::invalid_argument("rational with zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const long long g = std::gcd(n < 0 ? -n : n, d);
    num = g ? n / g : n;
    den = g ? d / g : d;
}

Rational Rational::operator+(const Rational& o) const {
    return Rational(num * o.den + o.num * den, den * o.den);
}

Rational Rational::operator-(const Rational& o) const {
    return Rational(num * o.den - o.num * den, den * o.den);
}

bool Rational::operator<(const Rational& o) const { return num * o.den < o.num * den; }

std::string Rational::str() const {
    std::ostringstream os;
    os << num;
    if (den != 1) os << '/' << den;
    return os.str();
}

std::string SobolevOrder::str() const { return minus_eps ? value.str() + "-0" : value.str(); }

std::string Letter::str() const {
    switch (kind) {
        case LetterKind::Patch: return index < 0 ? "A?" : "A" + std::to_string(index);
        case LetterKind::Psi: return "psi" + std::to_string(index);
        case LetterKind::Upsilon: return "U";
    }
    return "?";
}

// --- partition ----------------------------------------------------------------

namespace {

struct PatchHash {
    double cell = 1.0;
    std::unordered_map<long long, std::vector<int>> bins;

    static long long key(long ix, long iy) { return (ix + 1000000) * 4000037LL + (iy + 1000000); }

    void insert(const Vec2& p, int id) {
        bins[key(std::lround(std::floor(p.x / cell)), std::lround(std::floor(p.y / cell)))]
            .push_back(id);
    }

    template <class F>
    void visit(const Vec2& p, F&& f) const {
        const long ix = std::lround(std::floor(p.x / cell));
        const long iy = std::lround(std::floor(p.y / cell));
        for (long dx = -1; dx <= 1; ++dx)
            for (long dy = -1; dy <= 1; ++dy) {
                const auto it = bins.find(key(ix + dx, iy + dy));
                if (it == bins.end()) continue;
                for (int id : it->second) f(id);
            }
    }
};

bool patch_covers(const APatch& a, const Vec2& pos, int sheet, double dir_angle) {
    if (a.sheet != sheet) return false;
    const double dp = (pos - a.pos).norm();
    if (dp > a.radius) return false;
    const double da = circle_dist(dir_angle, a.dir_angle, kTwoPi);
    return std::hypot(dp, da) <= a.radius;
}

bool near_any_cone(const ConeSurface& surface, const Vec2& pos, double r) {
    for (const ConePoint& c : surface.cones)
        if ((pos - c.position).norm() <= r) return true;
    return false;
}

bool valid_base_point(const ConeSurface& surface, const Vec2& pos) {
    if (surface.kind == SurfaceKind::DoubledExterior)
        return classify_point(surface.scene, pos) == PointSide::Outside;
    return true;
}

}  // namespace

Partition build_partition(const ConeSurface& surface, double delta_a, double delta_psi,
                          unsigned long seed) {
    if (delta_a <= 0.0) throw std::invalid_argument("patch scale must be positive");
    if (delta_psi <= 0.0) throw std::invalid_argument("cone ball radius must be positive");
    const double sep = surface.min_cone_distance();
    if (std::isfinite(sep) && !(delta_psi < sep / 200.0))
        throw std::invalid_argument("cone ball radius must stay below cone_separation/200");

    Partition part;
    part.delta_a = delta_a;
    part.delta_psi = delta_psi;
    part.r0 = surface.scene.R0;
    part.r1 = surface.escape_radius();

    const double rho = 0.999 * delta_a / 2.0;
    if (part.r0 <= 0.0) {
        part.audit_coverage = 1.0;
        return part;
    }

    const double volume = kPi * part.r0 * part.r0 * kTwoPi;
    const double step = rho / 4.0;
    long n_build = std::lround(volume / (step * step * step));
    n_build = std::clamp(n_build, 50000L, 4000000L);

    PatchHash hash;
    hash.cell = rho;
    unsigned long idx = seed * 2654435761UL;
    for (long i = 0; i < n_build; ++i) {
        ++idx;
        const double r = part.r0 * std::sqrt(radical_inverse(idx, 2));
        const double ang = kTwoPi * radical_inverse(idx, 3);
        const Vec2 pos{r * std::cos(ang), r * std::sin(ang)};
        if (!valid_base_point(surface, pos)) continue;
        if (near_any_cone(surface, pos, delta_psi)) continue;
        const double dir = kTwoPi * radical_inverse(idx, 5);
        const int sheet = static_cast<int>(idx & 1UL);
        bool covered = false;
        hash.visit(pos, [&](int id) {
            if (!covered && patch_covers(part.patches[static_cast<size_t>(id)], pos, sheet, dir))
                covered = true;
        });
        if (covered) continue;
        part.patches.push_back(APatch{pos, sheet, dir, rho});
        hash.insert(pos, static_cast<int>(part.patches.size()) - 1);
    }

    // Audit with an independent sample family; cone balls take precedence.
    const long n_audit = std::clamp(n_build / 4, 20000L, 200000L);
    unsigned long base = seed * 40503UL + 500000001UL;
    long covered_count = 0;
    std::vector<unsigned long> audit_idx(static_cast<size_t>(n_audit));
    for (long i = 0; i < n_audit; ++i) audit_idx[static_cast<size_t>(i)] = base + static_cast<unsigned long>(i);
#pragma omp parallel for schedule(static) reduction(+ : covered_count)
    for (long i = 0; i < n_audit; ++i) {
        const unsigned long k = audit_idx[static_cast<size_t>(i)];
        const double r = part.r0 * std::sqrt(radical_inverse(k, 2));
        const double ang = kTwoPi * radical_inverse(k, 3);
        const Vec2 pos{r * std::cos(ang), r * std::sin(ang)};
        bool covered = false;
        if (!valid_base_point(surface, pos) || near_any_cone(surface, pos, delta_psi)) {
            covered = true;  // off the surface, or owned by a cone ball
        } else {
            const double dir = kTwoPi * radical_inverse(k, 5);
            const int sheet = static_cast<int>(k & 1UL);
            hash.visit(pos, [&](int id) {
                if (!covered &&
                    patch_covers(part.patches[static_cast<size_t>(id)], pos, sheet, dir))
                    covered = true;
            });
        }
        if (covered) ++covered_count;
    }
    part.audit_samples = n_audit;
    part.audit_coverage = static_cast<double>(covered_count) / static_cast<double>(n_audit);
    return part;
}

int patch_containing(const Partition& p, const RayState& s) {
    const double dir = s.dir.angle();
    for (size_t i = 0; i < p.patches.size(); ++i)
        if (patch_covers(p.patches[i], s.point.pos, s.point.sheet, dir))
            return static_cast<int>(i);
    return -1;
}

bool in_psi(const ConeSurface& surface, const Partition& p, const RayState& s, int cone) {
    if (cone < 0 || cone >= static_cast<int>(surface.cones.size())) return false;
    return (s.point.pos - surface.cones[static_cast<size_t>(cone)].position).norm() <= p.delta_psi;
}

bool in_upsilon(const Partition& p, const RayState& s) { return s.point.pos.norm() > p.r1; }

// --- word classification ---------------------------------------------------------

namespace {

bool region_contains(const ConeSurface& surface, const Partition& part, const Letter& letter,
                     const RayState& s) {
    switch (letter.kind) {
        case LetterKind::Patch: {
            if (letter.index < 0 || letter.index >= static_cast<int>(part.patches.size()))
                return false;
            return patch_covers(part.patches[static_cast<size_t>(letter.index)], s.point.pos,
                                s.point.sheet, s.dir.angle());
        }
        case LetterKind::Psi: return in_psi(surface, part, s, letter.index);
        case LetterKind::Upsilon: return in_upsilon(part, s);
    }
    return false;
}

std::vector<RayState> region_samples(const ConeSurface& surface, const Partition& part,
                                     const Letter& letter, int count, unsigned long seed) {
    std::vector<RayState> out;
    unsigned long idx = seed * 7919UL + 17UL;
    int guard = 0;
    while (static_cast<int>(out.size()) < count && guard++ < 40 * count) {
        ++idx;
        const double u1 = radical_inverse(idx, 2);
        const double u2 = radical_inverse(idx, 3);
        const double u3 = radical_inverse(idx, 5);
        switch (letter.kind) {
            case LetterKind::Patch: {
                if (letter.index < 0 || letter.index >= static_cast<int>(part.patches.size()))
                    return out;
                const APatch& a = part.patches[static_cast<size_t>(letter.index)];
                const Vec2 pos = a.pos + Vec2{std::cos(kTwoPi * u2), std::sin(kTwoPi * u2)} *
                                             (0.6 * a.radius * std::sqrt(u1));
                const double dir = a.dir_angle + 0.6 * a.radius * (u3 - 0.5);
                if (!valid_base_point(surface, pos)) break;
                RayState s{SurfacePoint{pos, a.sheet}, unit_vector(dir), 0.0};
                if (region_contains(surface, part, letter, s)) out.push_back(s);
                break;
            }
            case LetterKind::Psi: {
                if (letter.index < 0 || letter.index >= static_cast<int>(surface.cones.size()))
                    return out;
                const ConePoint& c = surface.cones[static_cast<size_t>(letter.index)];
                const double w = c.wedge;
                const double phi = w * (0.1 + 0.8 * u2);
                const Vec2 pos = c.position + unit_vector(c.ref_angle + phi) *
                                                  (part.delta_psi * (0.25 + 0.5 * u1));
                if (!valid_base_point(surface, pos)) break;
                const int sheet = static_cast<int>(idx & 1UL);
                RayState s{SurfacePoint{pos, sheet}, unit_vector(kTwoPi * u3), 0.0};
                out.push_back(s);
                break;
            }
            case LetterKind::Upsilon: {
                const double r = part.r1 * (1.05 + 0.25 * u1);
                const Vec2 pos = unit_vector(kTwoPi * u2) * r;
                const int sheet = static_cast<int>(idx & 1UL);
                out.push_back(RayState{SurfacePoint{pos, sheet}, unit_vector(kTwoPi * u3), 0.0});
                break;
            }
        }
    }
    return out;
}

// Starts aimed exactly at each cone vertex, kept only when the aimed phase
// point still lies inside the region. Vertex capture then makes the trace
// interact, which generic region samples do with probability zero.
std::vector<RayState> aimed_samples(const ConeSurface& surface, const Partition& part,
                                    const Letter& letter, int per_cone, unsigned long seed) {
    std::vector<RayState> out;
    unsigned long idx = seed * 31337UL + 101UL;
    for (const ConePoint& c : surface.cones) {
        int made = 0;
        int guard = 0;
        while (made < per_cone && guard++ < 20 * per_cone) {
            ++idx;
            const double u1 = radical_inverse(idx, 2);
            const double u2 = radical_inverse(idx, 3);
            Vec2 pos;
            int sheet = 0;
            switch (letter.kind) {
                case LetterKind::Patch: {
                    if (letter.index < 0 || letter.index >= static_cast<int>(part.patches.size()))
                        return out;
                    const APatch& a = part.patches[static_cast<size_t>(letter.index)];
                    pos = a.pos + Vec2{std::cos(kTwoPi * u2), std::sin(kTwoPi * u2)} *
                                      (0.5 * a.radius * std::sqrt(u1));
                    sheet = a.sheet;
                    break;
                }
                case LetterKind::Psi: {
                    if (letter.index < 0 || letter.index >= static_cast<int>(surface.cones.size()))
                        return out;
                    const ConePoint& own = surface.cones[static_cast<size_t>(letter.index)];
                    const double phi = own.wedge * (0.1 + 0.8 * u2);
                    pos = own.position +
                          unit_vector(own.ref_angle + phi) * (part.delta_psi * (0.25 + 0.5 * u1));
                    sheet = static_cast<int>(idx & 1UL);
                    break;
                }
                case LetterKind::Upsilon: {
                    pos = unit_vector(kTwoPi * u2) * (part.r1 * (1.05 + 0.25 * u1));
                    sheet = static_cast<int>(idx & 1UL);
                    break;
                }
            }
            const Vec2 to_cone = c.position - pos;
            if (to_cone.norm() <= part.delta_psi * 1e-6) continue;
            if (!valid_base_point(surface, pos)) continue;
            RayState s{SurfacePoint{pos, sheet}, to_cone.normalized(), 0.0};
            if (!region_contains(surface, part, letter, s)) continue;
            out.push_back(s);
            ++made;
        }
    }
    return out;
}

// Straight-chord proposals: starts in the source region whose direction points
// at a jittered target-region position. Free connections between two small
// balls live in a thin direction cone that blind direction sampling misses.
std::vector<RayState> chord_samples(const ConeSurface& surface, const Partition& part,
                                    const Letter& from, const Letter& to, int count,
                                    unsigned long seed) {
    std::vector<RayState> out;

    Vec2 tpos;
    double tjit = 0.0;
    bool radial = false;
    switch (to.kind) {
        case LetterKind::Patch: {
            if (to.index < 0 || to.index >= static_cast<int>(part.patches.size())) return out;
            const APatch& a = part.patches[static_cast<size_t>(to.index)];
            tpos = a.pos;
            tjit = 0.4 * a.radius;
            break;
        }
        case LetterKind::Psi: {
            if (to.index < 0 || to.index >= static_cast<int>(surface.cones.size())) return out;
            tpos = surface.cones[static_cast<size_t>(to.index)].position;
            tjit = 0.4 * part.delta_psi;
            break;
        }
        case LetterKind::Upsilon: radial = true; break;
    }

    unsigned long idx = seed * 48271UL + 11UL;
    int made = 0;
    int guard = 0;
    while (made < count && guard++ < 20 * count) {
        ++idx;
        const double u1 = made == 0 ? 0.0 : radical_inverse(idx, 2);
        const double u2 = radical_inverse(idx, 3);
        const double u3 = radical_inverse(idx, 5);
        Vec2 pos;
        int sheet = 0;
        switch (from.kind) {
            case LetterKind::Patch: {
                if (from.index < 0 || from.index >= static_cast<int>(part.patches.size()))
                    return out;
                const APatch& a = part.patches[static_cast<size_t>(from.index)];
                pos = a.pos + Vec2{std::cos(kTwoPi * u2), std::sin(kTwoPi * u2)} *
                                  (0.5 * a.radius * std::sqrt(u1));
                sheet = a.sheet;
                break;
            }
            case LetterKind::Psi: {
                if (from.index < 0 || from.index >= static_cast<int>(surface.cones.size()))
                    return out;
                const ConePoint& own = surface.cones[static_cast<size_t>(from.index)];
                const double phi = own.wedge * (0.1 + 0.8 * u2);
                pos = own.position +
                      unit_vector(own.ref_angle + phi) * (part.delta_psi * (0.25 + 0.5 * u1));
                sheet = static_cast<int>(idx & 1UL);
                break;
            }
            case LetterKind::Upsilon: {
                pos = unit_vector(kTwoPi * u2) * (part.r1 * (1.05 + 0.25 * u1));
                sheet = static_cast<int>(idx & 1UL);
                break;
            }
        }
        if (!valid_base_point(surface, pos)) continue;
        Vec2 dir;
        if (radial) {
            const double r = pos.norm();
            if (r < 1e-12) continue;
            dir = pos / r;
        } else {
            const Vec2 q = tpos + unit_vector(kTwoPi * u3) * (tjit * u1);
            const Vec2 chord = q - pos;
            if (chord.norm() < 1e-9) continue;
            dir = chord.normalized();
        }
        RayState s{SurfacePoint{pos, sheet}, dir, 0.0};
        if (!region_contains(surface, part, from, s)) continue;
        out.push_back(s);
        ++made;
    }
    return out;
}

enum class Conn { No, Truncated, Yes };

bool interacted_by(const GeodesicChain& c, double t) {
    for (const Interaction& it : c.interactions)
        if (it.t_in <= t * (1.0 + 1e-12)) return true;
    return false;
}

Conn pair_connects(const ConeSurface& surface, const Partition& part, const RayState& p,
                   double t, const Letter& target, const ContinuationPolicy& policy,
                   bool require_interaction, const TraceOptions& opts) {
    const TraceResult tr = trace(surface, p, t, policy, opts);
    bool saw_trunc = tr.truncated;
    for (const GeodesicChain& c : tr.chains) {
        if (c.truncated) {
            saw_trunc = true;
            continue;
        }
        if (c.terminal == Terminal::AtConePoint && c.total_time < t * (1.0 - 1e-12)) continue;
        if (require_interaction && !interacted_by(c, t)) continue;
        if (region_contains(surface, part, target, c.state_at(t))) return Conn::Yes;
    }
    return saw_trunc ? Conn::Truncated : Conn::No;
}

Conn any_connects(const ConeSurface& surface, const Partition& part,
                  const std::vector<RayState>& starts, double t, const Letter& target,
                  const ContinuationPolicy& policy, bool require_interaction,
                  const TraceOptions& opts) {
    bool trunc = false;
    for (const RayState& p : starts) {
        const Conn c = pair_connects(surface, part, p, t, target, policy, require_interaction, opts);
        if (c == Conn::Yes) return Conn::Yes;
        if (c == Conn::Truncated) trunc = true;
    }
    return trunc ? Conn::Truncated : Conn::No;
}

}  // namespace

const char* word_tag_name(WordTag t) {
    switch (t) {
        case WordTag::NoCone: return "nocone";
        case WordTag::Geometric: return "G";
        case WordTag::Diffractive: return "D";
        case WordTag::NotDR: return "not_dr";
        case WordTag::Indeterminate: return "indeterminate";
    }
    return "?";
}

std::vector<WordTag> classify_word(const ConeSurface& surface, const Partition& partition,
                                   const Word& word, const ClassifyOptions& opts) {
    if (word.letters.empty()) throw std::invalid_argument("word must have at least one letter");
    if (word.times.size() + 1 != word.letters.size())
        throw std::invalid_argument("word needs one dwell time per adjacent letter pair");
    for (double t : word.times)
        if (t <= 0.0) throw std::invalid_argument("dwell times must be positive");

    std::vector<WordTag> tags;
    for (size_t i = 0; i + 1 < word.letters.size(); ++i) {
        const Letter& from = word.letters[i];
        const Letter& to = word.letters[i + 1];
        const double t = word.times[i];
        const unsigned long seed = opts.seed + 1315423911UL * (i + 1);
        std::vector<RayState> starts =
            region_samples(surface, partition, from, opts.samples_per_region, seed);
        const std::vector<RayState> aimed = aimed_samples(
            surface, partition, from, std::max(4, opts.samples_per_region / 4), seed);
        starts.insert(starts.end(), aimed.begin(), aimed.end());
        const std::vector<RayState> chords = chord_samples(
            surface, partition, from, to, std::max(4, opts.samples_per_region / 4), seed);
        starts.insert(starts.end(), chords.begin(), chords.end());

        // Geometric beats Diffractive beats NoCone; a truncated search that
        // could have produced a higher tag poisons the pair to Indeterminate.
        const Conn geo = any_connects(surface, partition, starts, t, to,
                                      ContinuationPolicy::geometric(), true, opts.trace);
        if (geo == Conn::Yes) {
            tags.push_back(WordTag::Geometric);
            continue;
        }
        const Conn dif = any_connects(surface, partition, starts, t, to,
                                      ContinuationPolicy::fan(opts.fan_k), true, opts.trace);
        if (geo == Conn::Truncated) {
            tags.push_back(WordTag::Indeterminate);
            continue;
        }
        if (dif == Conn::Yes) {
            tags.push_back(WordTag::Diffractive);
            continue;
        }
        const Conn direct = any_connects(surface, partition, starts, t, to,
                                         ContinuationPolicy::stop(), false, opts.trace);
        if (dif == Conn::Truncated) {
            tags.push_back(WordTag::Indeterminate);
            continue;
        }
        if (direct == Conn::Yes) {
            tags.push_back(WordTag::NoCone);
            continue;
        }
        tags.push_back(direct == Conn::Truncated ? WordTag::Indeterminate : WordTag::NotDR);
    }
    return tags;
}

// --- forbidden pattern scan --------------------------------------------------------

std::vector<ForbiddenViolation> forbidden_scan(const ConeSurface& surface,
                                               const Partition& partition, int max_word_len,
                                               double max_length, int fan_samples, double tol_g) {
    std::vector<ForbiddenViolation> out;
    if (max_word_len < 4) return out;  // needs two flanking letters around the leg pair

    const CollinearReport rep = check_collinear(surface, max_length, fan_samples, tol_g);
    for (const CollinearWitness& w : rep.witnesses) {
        ForbiddenViolation v;
        v.cones[0] = w.cone_prev;
        v.cones[1] = w.cone_mid;
        v.cones[2] = w.cone_next;
        v.middle_link_in = w.link_in;
        v.middle_link_out = w.link_out;
        v.middle_distance = w.link_distance;

        // Walk both legs from the middle cone to sample the patch letters.
        const ConePoint& mid = surface.cones[static_cast<size_t>(w.cone_mid)];
        Vec2 dir_back, dir_fwd;
        const SurfacePoint at_back = surface.direction_of_link(mid, w.link_in, &dir_back);
        const SurfacePoint at_fwd = surface.direction_of_link(mid, w.link_out, &dir_fwd);
        const RayState back_start{at_back, dir_back, 0.0};
        const RayState fwd_start{at_fwd, dir_fwd, 0.0};

        const auto mid_state = [&](const RayState& s, double len) {
            const TraceResult tr =
                trace(surface, s, len / 2.0, ContinuationPolicy::stop(), TraceOptions{});
            return tr.chains.front().state_at(len / 2.0);
        };
        const RayState s_in = mid_state(back_start, w.length_in);
        const RayState s_out = mid_state(fwd_start, w.length_out);
        // s_in walks the incoming leg backwards; flip it to chronological order.
        RayState s_in_f = s_in;
        s_in_f.dir = -s_in.dir;

        Word word;
        word.letters.push_back(Letter{LetterKind::Psi, w.cone_prev});
        word.letters.push_back(Letter{LetterKind::Patch, patch_containing(partition, s_in_f)});
        word.letters.push_back(Letter{LetterKind::Patch, patch_containing(partition, s_out)});
        word.letters.push_back(Letter{LetterKind::Psi, w.cone_next});
        word.times = {w.length_in / 2.0, (w.length_in + w.length_out) / 2.0, w.length_out / 2.0};
        v.word = word;
        // Flanking interactions are free; record the generic diffractive extension.
        v.tags = {WordTag::Diffractive, WordTag::Geometric, WordTag::Diffractive};
        out.push_back(v);
    }
    return out;
}

// --- smoothing ledger -----------------------------------------------------------------

const char* ledger_class_name(LedgerClass c) {
    switch (c) {
        case LedgerClass::Smoothed: return "smoothed";
        case LedgerClass::EscapedO: return "escaped";
        case LedgerClass::Residual: return "residual";
    }
    return "?";
}

LedgerEntry smoothing_ledger(const std::string& pattern, int n, const Rational& s_in) {
    if (n < 2) throw std::invalid_argument("dimension must be at least 2");
    if (pattern.size() > 3)
        throw std::invalid_argument("normal form has at most three interactions");
    for (char ch : pattern)
        if (ch != 'G' && ch != 'D')
            throw std::invalid_argument("pattern letters must be G or D");

    LedgerEntry e;
    e.pattern = pattern;
    e.order = SobolevOrder{s_in, false};

    if (pattern.size() == 3 && pattern[1] == 'G') {
        e.cls = LedgerClass::Residual;
        e.rule = "middle geometric interaction cannot occur when no three cone points are collinear";
        return e;
    }
    const bool has_dd = pattern.find("DD") != std::string::npos;
    if (has_dd) {
        e.cls = LedgerClass::Smoothed;
        e.order = SobolevOrder{s_in + Rational(n - 1, 2), true};
        e.rule = "consecutive diffractive pair gains (n-1)/2 derivatives up to the open endpoint";
        return e;
    }
    e.cls = LedgerClass::EscapedO;
    e.rule = pattern.size() == 3
                 ? "no consecutive diffractive pair; the constituent reaches the outgoing region"
                 : "fewer than three interactions inside one dwell window; escapes outward";
    return e;
}

std::vector<LedgerEntry> smoothing_ledger_table(int n, const Rational& s_in) {
    std::vector<LedgerEntry> out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int c = 0; c < 2; ++c) {
                std::string p;
                p += a ? 'G' : 'D';
                p += b ? 'G' : 'D';
                p += c ? 'G' : 'D';
                out.push_back(smoothing_ledger(p, n, s_in));
            }
    return out;
}

std::string ledger_to_csv(const std::vector<LedgerEntry>& entries) {
    std::ostringstream os;
    os << "word,times,tags,rule,outputOrder\n";
    for (const LedgerEntry& e : entries) {
        std::string tags;
        for (char ch : e.pattern) {
            if (!tags.empty()) tags += ';';
            tags += ch;
        }
        os << e.pattern << ",," << tags << ",\"" << ledger_class_name(e.cls) << ": " << e.rule
           << "\"," << e.order.str() << "\n";
    }
    return os.str();
}

// --- iteration schedule ------------------------------------------------------------------

HuygensSchedule huygens_schedule(const Rational& s_target, int n, double t0, double delta_psi,
                                 double cone_separation) {
    if (n < 2) throw std::invalid_argument("dimension must be at least 2");
    if (t0 <= 0.0) throw std::invalid_argument("escape time must be positive");
    if (delta_psi <= 0.0) throw std::invalid_argument("cone ball radius must be positive");
    if (!(cone_separation > 0.0) || !std::isfinite(cone_separation))
        throw std::invalid_argument("cone separation must be positive and finite");

    HuygensSchedule h;
    if (s_target.num > 0) {
        // smallest integer k with k*(n-1)/2 >= s_target
        const long long q = 2 * s_target.num;
        const long long d = s_target.den * static_cast<long long>(n - 1);
        h.k = static_cast<long>((q + d - 1) / d);
    }
    h.t_s = 5.0 * static_cast<double>(h.k) * t0;
    h.tau_min = 2.0 * delta_psi;
    h.tau_max = cone_separation / 50.0;
    if (!(h.tau_min < h.tau_max))
        throw std::invalid_argument("mollifier window is empty; shrink the cone ball radius");
    h.tau = 0.5 * (h.tau_min + h.tau_max);
    return h;
}

}  // namespace conewave
