#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conewave/flow.hpp"

namespace conewave {

// --- exact regularity bookkeeping ------------------------------------------

struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d);
    static Rational integer(long long n) { return Rational(n, 1); }

    Rational operator+(const Rational& o) const;
    Rational operator-(const Rational& o) const;
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    bool operator<(const Rational& o) const;
    std::string str() const;
};

// Sobolev exponent, optionally "minus zero" (the open endpoint s - 0).
struct SobolevOrder {
    Rational value;
    bool minus_eps = false;
    std::string str() const;
};

// --- phase space partition ---------------------------------------------------

enum class LetterKind { Patch, Psi, Upsilon };

struct Letter {
    LetterKind kind = LetterKind::Patch;
    int index = 0;  // patch index, or cone id for Psi
    std::string str() const;
};

struct APatch {
    Vec2 pos;
    int sheet = 0;
    double dir_angle = 0.0;
    double radius = 0.0;
};

struct Partition {
    double delta_a = 0.0;
    double delta_psi = 0.0;
    double r0 = 0.0;
    double r1 = 0.0;
    std::vector<APatch> patches;
    double audit_coverage = 0.0;  // fraction of audit samples covered
    long audit_samples = 0;
};

// Greedy ball cover of the compact phase-space block, after carving out the
// cone neighborhoods (radius delta_psi) and the escape region (|z| > R1).
// Throws when delta_psi is not below cone_separation / 200.
Partition build_partition(const ConeSurface& surface, double delta_a, double delta_psi,
                          unsigned long seed = 1);

// Region membership for a phase point; patch balls use the product metric
// hypot(position distance, direction angle distance). Returns -1 when no
// patch contains the point.
int patch_containing(const Partition& p, const RayState& s);
bool in_psi(const ConeSurface& surface, const Partition& p, const RayState& s, int cone);
bool in_upsilon(const Partition& p, const RayState& s);

// --- words -------------------------------------------------------------------

enum class WordTag { NoCone, Geometric, Diffractive, NotDR, Indeterminate };
const char* word_tag_name(WordTag t);

struct Word {
    std::vector<Letter> letters;
    std::vector<double> times;  // one per adjacent pair
};

struct ClassifyOptions {
    int samples_per_region = 24;
    int fan_k = 64;
    double tol = 1e-6;
    unsigned long seed = 1;
    TraceOptions trace;
};

// Tag per adjacent letter pair: Geometric beats Diffractive beats NoCone
// (cone interactions must be accounted before free motion); NotDR when no
// connecting trajectory was found; Indeterminate propagates from truncated
// traces that could have produced a higher tag.
std::vector<WordTag> classify_word(const ConeSurface& surface, const Partition& partition,
                                   const Word& word, const ClassifyOptions& opts = {});

// --- forbidden pattern scan ---------------------------------------------------

struct ForbiddenViolation {
    Word word;
    std::vector<WordTag> tags;
    int cones[3] = {-1, -1, -1};
    double middle_link_in = 0.0;
    double middle_link_out = 0.0;
    double middle_distance = 0.0;  // link distance at the middle cone
};

// Hunts for realizable words whose middle interaction is geometric. Empty
// when max_word_len < 4: shorter words cannot host an interior interaction
// flanked by two more.
std::vector<ForbiddenViolation> forbidden_scan(const ConeSurface& surface,
                                               const Partition& partition, int max_word_len,
                                               double max_length, int fan_samples = 4096,
                                               double tol_g = 1e-7);

// --- smoothing ledger -----------------------------------------------------------

enum class LedgerClass { Smoothed, EscapedO, Residual };
const char* ledger_class_name(LedgerClass c);

struct LedgerEntry {
    std::string pattern;  // chronological interaction letters, 'G' and 'D'
    LedgerClass cls = LedgerClass::EscapedO;
    SobolevOrder order;
    std::string rule;
};

// pattern: chronological 'G'/'D' string with at most three letters.
LedgerEntry smoothing_ledger(const std::string& pattern, int n, const Rational& s_in);

// All three-interaction patterns, classified.
std::vector<LedgerEntry> smoothing_ledger_table(int n, const Rational& s_in);

std::string ledger_to_csv(const std::vector<LedgerEntry>& entries);

// --- iteration schedule -----------------------------------------------------------

struct HuygensSchedule {
    long k = 0;         // smallest k with k*(n-1)/2 >= s_target
    double t_s = 0.0;   // 5 * k * t0
    double tau_min = 0.0;
    double tau_max = 0.0;
    double tau = 0.0;   // chosen mollifier width (midpoint)
};

HuygensSchedule huygens_schedule(const Rational& s_target, int n, double t0, double delta_psi,
                                 double cone_separation);

}  // namespace conewave
