#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "json.hpp"

#include "conewave/assumptions.hpp"
#include "test_support.hpp"

using namespace conewave;
using namespace conewave::testing;

TEST_CASE("doubled square passes all three assumption checks") {
    const ConeSurface s = corpus_surface("square.json");

    const NonTrappingReport a1 = check_nontrapping(s, 2000, 40.0);
    CHECK(a1.verdict == Verdict::Pass);
    CHECK(std::isfinite(a1.t0));
    CHECK(a1.t0 > 0.0);
    CHECK(a1.margin > 0.0);
    CHECK(a1.t0 >= a1.max_escape);

    const CollinearReport a2 = check_collinear(s, 3.0);
    CHECK(a2.verdict == Verdict::Pass);
    CHECK(a2.witnesses.empty());
    CHECK(a2.resolutions_agree);

    const ConjugacyReport a3 = check_conjugacy(s, 3.0);
    CHECK(a3.verdict == Verdict::Pass);
    CHECK(!a3.certificates.empty());
}

TEST_CASE("escape sweep is bit-identical between the serial and parallel paths") {
    const ConeSurface s = corpus_surface("square.json");
    const auto samples = nontrapping_samples(s, 600, 3);
    const auto serial = sample_escape_times(s, samples, 40.0, {}, false);
    const auto parallel = sample_escape_times(s, samples, 40.0, {}, true);
    REQUIRE(serial.size() == parallel.size());
    for (std::size_t i = 0; i < serial.size(); ++i) {
        if (std::isnan(serial[i]))
            CHECK(std::isnan(parallel[i]));
        else
            CHECK(serial[i] == parallel[i]);
    }
}

TEST_CASE("doubling the sample density keeps the certificate within the margin") {
    const ConeSurface s = corpus_surface("square.json");
    const NonTrappingReport coarse = check_nontrapping(s, 1000, 40.0);
    const NonTrappingReport fine = check_nontrapping(s, 2000, 40.0);
    REQUIRE(coarse.verdict == Verdict::Pass);
    CHECK(fine.verdict == Verdict::Pass);
    CHECK(fine.t0 <= coarse.t0 + coarse.margin);
}

TEST_CASE("two facing parallel edges are detected as trapping") {
    const ConeSurface s = double_exterior(trapping_scene());
    const NonTrappingReport rep = check_nontrapping(s, 400, 30.0);
    CHECK(rep.verdict == Verdict::Fail);
    REQUIRE(rep.witness.has_value());
    CHECK(rep.witness->terminal == Terminal::Horizon);
    CHECK(rep.witness->total_time >= 30.0 - 1e-9);
}

TEST_CASE("the two-obstacle scene is non-trapping for the geometric flow") {
    const ConeSurface s = corpus_surface("fig1_two_obstacles.json");
    const NonTrappingReport rep = check_nontrapping(s, 1000, 120.0);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(std::isfinite(rep.t0));
}

TEST_CASE("slit cover fails the collinearity check with a pi-distance middle witness") {
    const ConeSurface s = corpus_surface("slit_cover.json");
    const CollinearReport rep = check_collinear(s, 4.0);
    REQUIRE(rep.verdict == Verdict::Fail);
    REQUIRE(!rep.witnesses.empty());
    for (const CollinearWitness& w : rep.witnesses) {
        CHECK(std::abs(w.link_distance - kPi) <= 1e-7);
        CHECK(w.cone_prev != w.cone_mid);
        CHECK(w.cone_mid != w.cone_next);
    }

    // The endpoint columns x = 0 and x = 2 are vertically collinear triples.
    bool found_column = false;
    for (const CollinearWitness& w : rep.witnesses) {
        const Vec2 a = s.cones[w.cone_prev].position;
        const Vec2 b = s.cones[w.cone_mid].position;
        const Vec2 c = s.cones[w.cone_next].position;
        if (std::abs(a.x - b.x) < 1e-12 && std::abs(b.x - c.x) < 1e-12) found_column = true;
    }
    CHECK(found_column);
}

TEST_CASE("collinearity witnesses survive a fan refinement") {
    const ConeSurface s = corpus_surface("slit_cover.json");
    const CollinearReport coarse = check_collinear(s, 4.0, 2048);
    const CollinearReport fine = check_collinear(s, 4.0, 4096);
    REQUIRE(!coarse.witnesses.empty());
    double coarse_worst = 0.0, fine_worst = 0.0;
    for (const auto& w : coarse.witnesses)
        coarse_worst = std::max(coarse_worst, std::abs(w.link_distance - kPi));
    for (const auto& w : fine.witnesses)
        fine_worst = std::max(fine_worst, std::abs(w.link_distance - kPi));
    CHECK(fine.witnesses.size() >= coarse.witnesses.size());
    CHECK(fine_worst <= std::max(coarse_worst, 1e-9));
}

TEST_CASE("a length bound below the cone separation makes the check vacuous") {
    const ConeSurface s = corpus_surface("square.json");
    const CollinearReport rep = check_collinear(s, 0.5);
    CHECK(rep.verdict == Verdict::Pass);
    CHECK(rep.witnesses.empty());
    CHECK(!rep.notes.empty());
}

TEST_CASE("jacobi transport is the flat shear") {
    const JacobiFrame f = transport_jacobi({2.0, 3.0}, 1.5);
    CHECK(f.a == doctest::Approx(6.5));
    CHECK(f.b == doctest::Approx(3.0));
}

TEST_CASE("conjugacy certificates carry the leg determinant") {
    for (const char* name : {"square.json", "fig1_two_obstacles.json", "slit_cover.json"}) {
        const ConeSurface s = corpus_surface(name);
        const ConjugacyReport rep = check_conjugacy(s, 4.0);
        CHECK(rep.verdict == Verdict::Pass);
        REQUIRE(!rep.certificates.empty());
        for (const ConjugacyCertificate& c : rep.certificates) {
            CHECK(c.length > 0.0);
            CHECK(std::abs(c.det - c.length) <= 1e-9 * (1.0 + c.length));
        }
    }
}

TEST_CASE("curved metrics are refused by the conjugacy checker") {
    ConeSurface s = corpus_surface("square.json");
    s.metric = MetricKind::Curved;
    CHECK_THROWS_AS(check_conjugacy(s, 3.0), std::invalid_argument);
}

TEST_CASE("assumption reports serialize with verdicts and parameters") {
    const ConeSurface s = corpus_surface("square.json");
    const auto j1 = nlohmann::json::parse(report_to_json(check_nontrapping(s, 200, 40.0)));
    CHECK(j1.at("assumption").get<int>() == 1);
    CHECK(j1.at("verdict").get<std::string>() == "pass");
    CHECK(j1.contains("parameters"));

    const auto j2 = nlohmann::json::parse(report_to_json(check_collinear(s, 3.0)));
    CHECK(j2.at("assumption").get<int>() == 2);
    CHECK(j2.at("witnesses").is_array());

    const auto j3 = nlohmann::json::parse(report_to_json(check_conjugacy(s, 3.0)));
    CHECK(j3.at("assumption").get<int>() == 3);
    CHECK(j3.at("certificates").is_array());
}
