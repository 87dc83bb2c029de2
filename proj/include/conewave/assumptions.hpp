#pragma once

#include <optional>
#include <string>
#include <vector>

#include "conewave/flow.hpp"

namespace conewave {

enum class Verdict { Pass, Fail, Indeterminate };
const char* verdict_name(Verdict v);

// --- escape of the geometric flow ---------------------------------------

struct NonTrappingReport {
    Verdict verdict = Verdict::Indeterminate;
    double t0 = 0.0;            // certified escape bound (Pass only)
    double max_escape = 0.0;    // largest observed branch escape time
    double margin = 0.0;        // sample-cell diameter times Lipschitz factor
    long n_samples = 0;
    double horizon = 0.0;
    std::optional<GeodesicChain> witness;  // trapped chain (Fail only)
    std::string notes;
};

// Deterministic sample family for the escape sweep (positions in the R1 disc
// outside obstacles, directions and sheets low-discrepancy).
std::vector<RayState> nontrapping_samples(const ConeSurface& surface, long n, unsigned long seed);

// Escape time per sample under GeometricBranch continuation: the slowest
// branch. +inf marks a trapped sample, NaN a truncated trace. The parallel
// and serial paths fill identical slots and are bit-identical.
std::vector<double> sample_escape_times(const ConeSurface& surface,
                                        const std::vector<RayState>& samples, double horizon,
                                        const TraceOptions& opts, bool parallel);

NonTrappingReport check_nontrapping(const ConeSurface& surface, long n_samples, double horizon,
                                    unsigned long seed = 1, const TraceOptions& opts = {});

// --- no geometric geodesic through three cone points ---------------------

struct CollinearWitness {
    int cone_prev = -1;
    int cone_mid = -1;
    int cone_next = -1;
    double link_in = 0.0;   // arrival link at the middle cone
    double link_out = 0.0;  // departure link at the middle cone
    double link_distance = 0.0;
    double length_in = 0.0;
    double length_out = 0.0;
};

struct CollinearReport {
    Verdict verdict = Verdict::Indeterminate;
    std::vector<CollinearWitness> witnesses;
    double max_length = 0.0;
    int fan_samples = 0;
    bool resolutions_agree = true;
    std::string notes;
};

CollinearReport check_collinear(const ConeSurface& surface, double max_length,
                                int fan_samples = 4096, double tol_g = 1e-7);

// --- non-conjugacy along cone-to-cone geodesics ---------------------------

// Jacobi data (value, derivative) transported along a flat geodesic.
struct JacobiFrame {
    double a = 0.0;
    double b = 0.0;
};

JacobiFrame transport_jacobi(const JacobiFrame& f, double length);

struct ConjugacyCertificate {
    int cone_a = -1;
    int cone_b = -1;
    double length = 0.0;
    double det = 0.0;  // endpoint system determinant; nonzero = not conjugate
};

struct ConjugacyReport {
    Verdict verdict = Verdict::Indeterminate;
    std::vector<ConjugacyCertificate> certificates;
    double t_max = 0.0;
    std::string notes;
};

// Throws std::invalid_argument("unsupported geometry") off the flat metric.
ConjugacyReport check_conjugacy(const ConeSurface& surface, double t_max, int fan_samples = 4096);

// External report schema: {assumption, verdict, parameters, witnesses, certificates}.
std::string report_to_json(const NonTrappingReport& r);
std::string report_to_json(const CollinearReport& r);
std::string report_to_json(const ConjugacyReport& r);

}  // namespace conewave
