#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "conewave/analysis.hpp"
#include "conewave/assumptions.hpp"
#include "conewave/fdtd.hpp"
#include "conewave/flow.hpp"
#include "conewave/manifest.hpp"
#include "conewave/surface.hpp"
#include "conewave/svg.hpp"
#include "conewave/words.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace conewave;

namespace {

// Missing inputs are usage errors (exit 64), unlike runtime failures (exit 2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_input_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open input file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool looks_like_surface(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    return j.contains("kind");
}

ConeSurface load_any_surface(const std::string& path) {
    const std::string text = read_input_file(path);
    if (looks_like_surface(text)) return surface_from_json(text);
    return double_exterior(normalized_scene(scene_from_json(text)));
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
}

Rational parse_rational(const std::string& s) {
    const std::size_t slash = s.find('/');
    if (slash == std::string::npos) return Rational(std::stoll(s), 1);
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

struct GlobalOpts {
    unsigned long seed = 1;
    int threads = 0;
    std::string out = ".";

    void apply() const {
#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#endif
        fs::create_directories(out);
    }
    std::string path(const std::string& name) const { return out + "/" + name; }
};

// --- scene ------------------------------------------------------------------

int run_scene_validate(const std::string& file) {
    const PolygonScene scene = normalized_scene(scene_from_json(read_input_file(file)));
    validate_scene(scene);
    std::size_t verts = 0;
    for (const auto& loop : scene.obstacles) verts += loop.size();
    std::cout << "scene ok: " << scene.obstacles.size() << " obstacle(s), " << verts
              << " vertices, R0=" << scene.R0 << ", R1=" << scene.R1 << ", bc=" << bc_name(scene.bc)
              << "\n";
    return 0;
}

int run_scene_double(const std::string& file, const GlobalOpts& g) {
    const ConeSurface surface = double_exterior(normalized_scene(scene_from_json(read_input_file(file))));
    const std::string out_path = g.path("surface.json");
    save_surface_file(surface, out_path);
    std::cout << "doubled surface with " << surface.cones.size() << " cone point(s):\n";
    for (const ConePoint& c : surface.cones)
        std::cout << "  cone " << c.id << " at (" << c.position.x << ", " << c.position.y
                  << "), angle " << c.cone_angle() << " rad (" << c.cone_angle() / kPi
                  << " pi)\n";
    std::cout << "wrote " << out_path << "\n";
    return 0;
}

// --- trace ------------------------------------------------------------------

ContinuationPolicy parse_policy(const std::string& s) {
    if (s == "geometric") return ContinuationPolicy::geometric();
    if (s == "stop") return ContinuationPolicy::stop();
    if (s.rfind("fan:", 0) == 0) {
        const int k = std::stoi(s.substr(4));
        if (k < 1) throw UsageError("fan resolution must be positive");
        return ContinuationPolicy::fan(k);
    }
    throw UsageError("policy must be geometric, fan:k, or stop");
}

int run_trace(const std::string& file, const std::string& start_str, const std::string& policy_str,
              double horizon, const std::string& svg_name, const GlobalOpts& g) {
    const ConeSurface surface = load_any_surface(file);
    const std::vector<double> sv = parse_doubles(start_str);
    if (sv.size() != 4) throw UsageError("--start needs x,y,theta,sheet");
    const RayState start{SurfacePoint{Vec2{sv[0], sv[1]}, static_cast<int>(sv[3])},
                         unit_vector(sv[2]), 0.0};
    const ContinuationPolicy policy = parse_policy(policy_str);

    const TraceResult result = trace(surface, start, horizon, policy);
    const std::string csv = chains_to_csv(surface, result);
    write_file(g.path("chains.csv"), csv);

    long escaped = 0, horizon_n = 0, at_cone = 0, inters = 0;
    for (const GeodesicChain& c : result.chains) {
        inters += static_cast<long>(c.interactions.size());
        if (c.terminal == Terminal::Escaped) ++escaped;
        else if (c.terminal == Terminal::Horizon) ++horizon_n;
        else ++at_cone;
    }
    std::cout << result.chains.size() << " chain(s): " << escaped << " escaped, " << horizon_n
              << " still inside at the horizon, " << at_cone << " ended at a cone point; "
              << inters << " interaction(s)" << (result.truncated ? " [truncated]" : "") << "\n";

    Manifest m;
    m.tool = "trace";
    m.config_json = "{\"start\":\"" + start_str + "\",\"policy\":\"" + policy_str +
                    "\",\"horizon\":" + std::to_string(horizon) + "}";
    m.add_file(g.out, "chains.csv");

    save_surface_file(surface, g.path("surface.json"));
    m.add_file(g.out, "surface.json");

    if (!svg_name.empty()) {
        const double r1 = surface.escape_radius();
        SvgCanvas canvas(-1.1 * r1, -1.1 * r1, 1.1 * r1, 1.1 * r1);
        draw_scene(canvas, surface.scene);
        draw_chains(canvas, result);
        write_file(g.path(svg_name), canvas.finish());
        m.add_file(g.out, svg_name);
    }
    save_manifest(m, g.path("manifest.json"));
    return 0;
}

// --- check ------------------------------------------------------------------

int run_check(const std::string& file, const std::string& which, long samples, double horizon,
              double max_length, int fan, double tol, double tmax, const GlobalOpts& g) {
    const ConeSurface surface = load_any_surface(file);
    const double r1 = surface.escape_radius();
    const double r0 = surface.scene.R0;
    if (horizon <= 0.0) horizon = 20.0 * r1;
    if (max_length <= 0.0) max_length = r0 > 0.0 ? 3.0 * r0 : 2.0 * r1;
    if (tmax <= 0.0) tmax = max_length;

    const bool all = which == "all";
    bool any_fail = false;
    Manifest m;
    m.tool = "check";
    m.config_json = "{\"assumption\":\"" + which + "\",\"samples\":" + std::to_string(samples) +
                    ",\"horizon\":" + std::to_string(horizon) + "}";

    if (all || which == "1") {
        const NonTrappingReport rep = check_nontrapping(surface, samples, horizon, g.seed);
        write_file(g.path("report_assumption1.json"), report_to_json(rep));
        m.add_file(g.out, "report_assumption1.json");
        std::cout << "assumption 1 (every geometric ray escapes): " << verdict_name(rep.verdict);
        if (rep.verdict == Verdict::Pass) std::cout << ", T0=" << rep.t0;
        std::cout << "\n";
        any_fail |= rep.verdict == Verdict::Fail;
    }
    if (all || which == "2") {
        const CollinearReport rep = check_collinear(surface, max_length, fan, tol);
        write_file(g.path("report_assumption2.json"), report_to_json(rep));
        m.add_file(g.out, "report_assumption2.json");
        std::cout << "assumption 2 (no three cone points collinear): " << verdict_name(rep.verdict);
        if (!rep.witnesses.empty())
            std::cout << ", " << rep.witnesses.size() << " witness triple(s)";
        std::cout << "\n";
        any_fail |= rep.verdict == Verdict::Fail;
    }
    if (all || which == "3") {
        const ConjugacyReport rep = check_conjugacy(surface, tmax, fan);
        write_file(g.path("report_assumption3.json"), report_to_json(rep));
        m.add_file(g.out, "report_assumption3.json");
        std::cout << "assumption 3 (no conjugate points along cone legs): "
                  << verdict_name(rep.verdict) << ", " << rep.certificates.size()
                  << " certificate(s)\n";
        any_fail |= rep.verdict == Verdict::Fail;
    }
    save_manifest(m, g.path("manifest.json"));
    return any_fail ? 1 : 0;
}

// --- words ------------------------------------------------------------------

std::string word_to_str(const Word& w) {
    std::string s;
    for (std::size_t i = 0; i < w.letters.size(); ++i) {
        if (i) s += ' ';
        s += w.letters[i].str();
    }
    return s;
}

int run_words(const std::string& file, double delta_a, double delta_psi, const std::string& scan,
              int n_dim, const std::string& s_str, int max_word_len, double max_length,
              double t0_for_schedule, const GlobalOpts& g) {
    const ConeSurface surface = load_any_surface(file);
    const Partition part = build_partition(surface, delta_a, delta_psi, g.seed);
    std::cout << "partition: " << part.patches.size() << " patch(es), coverage "
              << part.audit_coverage * 100.0 << "% over " << part.audit_samples << " samples\n";

    Manifest m;
    m.tool = "words";
    m.config_json = "{\"deltaA\":" + std::to_string(delta_a) +
                    ",\"deltaPsi\":" + std::to_string(delta_psi) + ",\"scan\":\"" + scan + "\"}";

    if (scan == "ledger") {
        const Rational s_in = parse_rational(s_str);
        const std::vector<LedgerEntry> table = smoothing_ledger_table(n_dim, s_in);
        write_file(g.path("ledger.csv"), ledger_to_csv(table));
        m.add_file(g.out, "ledger.csv");
        std::cout << "ledger: " << table.size() << " pattern(s) written\n";
    } else if (scan == "forbidden") {
        if (max_length <= 0.0)
            max_length = surface.scene.R0 > 0.0 ? 3.0 * surface.scene.R0
                                                : 2.0 * surface.escape_radius();
        const std::vector<ForbiddenViolation> hits =
            forbidden_scan(surface, part, max_word_len, max_length);
        std::ostringstream os;
        os.precision(17);
        os << "word,times,tags,coneA,coneB,coneC,middleLinkIn,middleLinkOut,middleDistance\n";
        for (const ForbiddenViolation& v : hits) {
            os << '"' << word_to_str(v.word) << "\",\"";
            for (std::size_t i = 0; i < v.word.times.size(); ++i)
                os << (i ? ";" : "") << v.word.times[i];
            os << "\",\"";
            for (std::size_t i = 0; i < v.tags.size(); ++i)
                os << (i ? ";" : "") << word_tag_name(v.tags[i]);
            os << "\"," << v.cones[0] << ',' << v.cones[1] << ',' << v.cones[2] << ','
               << v.middle_link_in << ',' << v.middle_link_out << ',' << v.middle_distance
               << '\n';
        }
        write_file(g.path("forbidden.csv"), os.str());
        m.add_file(g.out, "forbidden.csv");
        std::cout << "forbidden scan: " << hits.size() << " violating word(s)\n";
    } else if (!scan.empty()) {
        throw UsageError("--scan must be forbidden or ledger");
    }

    if (t0_for_schedule > 0.0) {
        const Rational s_in = parse_rational(s_str);
        const HuygensSchedule sched =
            huygens_schedule(s_in, n_dim, t0_for_schedule, delta_psi, surface.min_cone_distance());
        std::cout << "schedule: k=" << sched.k << ", T_s=" << sched.t_s << ", tau=" << sched.tau
                  << " in (" << sched.tau_min << ", " << sched.tau_max << ")\n";
    }
    save_manifest(m, g.path("manifest.json"));
    return 0;
}

// --- fdtd -------------------------------------------------------------------

std::vector<ProbeSpec> load_probe_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open probe file: " + path);
    std::vector<ProbeSpec> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string id, xs, ys, sh;
        if (!std::getline(ss, id, ',') || !std::getline(ss, xs, ',') || !std::getline(ss, ys, ','))
            throw UsageError("probe file line needs id,x,y[,sheet]: " + line);
        ProbeSpec p;
        p.id = id;
        p.pos = {std::stod(xs), std::stod(ys)};
        if (std::getline(ss, sh, ',')) p.sheet = std::stoi(sh);
        out.push_back(p);
    }
    return out;
}

ProbeSpec parse_probe_flag(const std::string& s) {
    const std::size_t colon = s.find(':');
    if (colon == std::string::npos) throw UsageError("--probe needs id:x,y[,sheet]");
    const std::vector<double> v = parse_doubles(s.substr(colon + 1));
    if (v.size() < 2 || v.size() > 3) throw UsageError("--probe needs id:x,y[,sheet]");
    ProbeSpec p;
    p.id = s.substr(0, colon);
    p.pos = {v[0], v[1]};
    if (v.size() == 3) p.sheet = static_cast<int>(v[2]);
    return p;
}

int run_fdtd(const std::string& file, bool doubled, GridSpec grid, const std::string& source_str,
             double sigma, double amplitude, const std::string& probe_file,
             const std::vector<std::string>& probe_flags, const GlobalOpts& g) {
    const std::vector<double> sv = parse_doubles(source_str);
    if (sv.size() < 3 || sv.size() > 4) throw UsageError("--source needs x,y,f0[,sheet]");
    SourceSpec source;
    source.pos = {sv[0], sv[1]};
    source.f0 = sv[2];
    if (sv.size() == 4) source.sheet = static_cast<int>(sv[3]);
    source.sigma = sigma;
    source.amplitude = amplitude;

    std::vector<ProbeSpec> probes;
    if (!probe_file.empty()) probes = load_probe_file(probe_file);
    for (const std::string& s : probe_flags) probes.push_back(parse_probe_flag(s));

    const std::string text = read_input_file(file);
    FdtdResult res;
    if (doubled) {
        const ConeSurface surface = looks_like_surface(text)
                                        ? surface_from_json(text)
                                        : double_exterior(normalized_scene(scene_from_json(text)));
        res = run_doubled(surface, grid, source, probes);
    } else {
        PolygonScene scene;
        if (looks_like_surface(text)) {
            const ConeSurface surface = surface_from_json(text);
            if (surface.kind != SurfaceKind::DoubledExterior)
                throw std::invalid_argument("grid solver supports doubled exteriors only");
            scene = surface.scene;
        } else {
            scene = normalized_scene(scene_from_json(text));
        }
        res = run_exterior(scene, grid, source, probes);
    }

    Manifest m;
    m.tool = "fdtd";
    m.config_json = "{\"h\":" + std::to_string(grid.h) + ",\"T\":" + std::to_string(grid.T) +
                    ",\"source\":\"" + source_str + "\",\"doubled\":" + (doubled ? "true" : "false") +
                    "}";

    // Long-format probe CSV with the top-band envelope energy density.
    {
        std::ostringstream os;
        os.precision(17);
        os << "t,probeId,u,dudt,E_chi,bandTop\n";
        std::vector<std::vector<double>> band_env(res.probes.size());
        const int hw = std::max(1, static_cast<int>(std::lround(1.0 / (source.f0 * res.dt))));
        for (std::size_t p = 0; p < res.probes.size(); ++p) {
            const std::vector<double> bp =
                band_pass(res.probes[p].u, res.dt, source.f0, 2.0 * source.f0);
            band_env[p] = envelope_rms(bp, hw);
        }
        std::size_t ei = 0;
        for (std::size_t i = 0; i < res.t.size(); ++i) {
            while (ei + 1 < res.energy.size() && res.energy[ei + 1].t <= res.t[i]) ++ei;
            const double echi = res.energy.empty() ? 0.0 : res.energy[ei].e_chi;
            for (std::size_t p = 0; p < res.probes.size(); ++p)
                os << res.t[i] << ',' << res.probes[p].spec.id << ',' << res.probes[p].u[i] << ','
                   << res.probes[p].dudt[i] << ',' << echi << ','
                   << band_env[p][i] * band_env[p][i] << '\n';
        }
        write_file(g.path("probes.csv"), os.str());
        m.add_file(g.out, "probes.csv");
    }
    {
        std::ostringstream os;
        os.precision(17);
        os << "t,e_total,e_chi\n";
        for (const EnergySample& es : res.energy)
            os << es.t << ',' << es.e_total << ',' << es.e_chi << '\n';
        write_file(g.path("energy.csv"), os.str());
        m.add_file(g.out, "energy.csv");
    }
    for (std::size_t si = 0; si < res.snapshots.size(); ++si) {
        std::ostringstream name;
        name << "field_" << si << "_s" << res.snapshots[si].sheet << ".bin";
        save_snapshot(g.path(name.str()), res.snapshots[si], res.nx, res.ny, res.h, res.origin);
        m.add_file(g.out, name.str());
    }
    save_manifest(m, g.path("manifest.json"));

    std::cout << "grid " << res.nx << "x" << res.ny << ", " << res.steps << " steps, dt=" << res.dt
              << "\n";
    if (!res.energy.empty())
        std::cout << "energy drift per 1k steps: " << res.energy_drift_per_1k
                  << ", sponge round trip: " << res.sponge_round_trip << "\n";
    return 0;
}

// --- report -----------------------------------------------------------------

struct ParsedChain {
    std::vector<ChainSegment> segments;
    std::string terminal;
};

std::vector<ParsedChain> parse_chain_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::string line;
    std::getline(in, line);  // header
    std::map<long, ParsedChain> by_id;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<std::string> cols;
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        if (cols.size() < 8) continue;
        const long id = std::stol(cols[0]);
        ChainSegment seg;
        seg.start.sheet = std::stoi(cols[2]);
        seg.start.pos = {std::stod(cols[3]), std::stod(cols[4])};
        seg.dir = {std::stod(cols[5]), std::stod(cols[6])};
        seg.length = std::stod(cols[7]);
        by_id[id].segments.push_back(seg);
        if (cols.size() >= 13 && !cols[12].empty()) by_id[id].terminal = cols[12];
    }
    std::vector<ParsedChain> out;
    for (auto& [id, pc] : by_id) out.push_back(std::move(pc));
    return out;
}

int run_report(const std::string& bundle, const GlobalOpts& g) {
    if (!fs::exists(bundle)) throw UsageError("bundle directory does not exist: " + bundle);

    std::vector<fs::path> manifests;
    std::vector<fs::path> roots{bundle};
    for (const auto& e : fs::directory_iterator(bundle))
        if (e.is_directory()) roots.push_back(e.path());
    std::sort(roots.begin(), roots.end());
    for (const fs::path& r : roots)
        if (fs::exists(r / "manifest.json")) manifests.push_back(r / "manifest.json");
    if (manifests.empty())
        throw std::runtime_error("bundle contains no manifests: " + bundle);

    std::vector<std::string> problems;
    for (const fs::path& mp : manifests)
        for (const std::string& bad : verify_manifest(mp.string()))
            problems.push_back(mp.parent_path().string() + "/" + bad);
    if (!problems.empty()) {
        std::string msg = "manifest verification failed for:";
        for (const std::string& p : problems) msg += "\n  " + p;
        throw std::runtime_error(msg);
    }

    const std::string report_dir = g.out == "." ? bundle + "/report" : g.out;
    fs::create_directories(report_dir);
    std::ostringstream summary;
    summary << "run bundle: " << bundle << "\n";
    summary << manifests.size() << " manifest(s) verified\n\n";

    for (const fs::path& mp : manifests) {
        const fs::path dir = mp.parent_path();
        std::ifstream min(mp);
        std::stringstream ss;
        ss << min.rdbuf();
        const Manifest man = manifest_from_json(ss.str());
        summary << "[" << man.tool << "] " << dir.string() << "\n";
        for (const ManifestEntry& e : man.entries)
            summary << "  " << e.name << " (" << e.bytes << " bytes, " << hash_hex(e.hash)
                    << ")\n";

        if (fs::exists(dir / "chains.csv")) {
            const std::vector<ParsedChain> chains = parse_chain_csv((dir / "chains.csv").string());
            TraceResult tr;
            long dashed = 0;
            for (const ParsedChain& pc : chains) {
                GeodesicChain c;
                c.segments = pc.segments;
                c.terminal = pc.terminal == "escaped"    ? Terminal::Escaped
                             : pc.terminal == "at_cone" ? Terminal::AtConePoint
                                                        : Terminal::Horizon;
                if (c.terminal == Terminal::Horizon) ++dashed;
                tr.chains.push_back(std::move(c));
            }
            double ext = 1.0;
            PolygonScene scene;
            bool have_scene = false;
            if (fs::exists(dir / "surface.json")) {
                const ConeSurface s = load_surface_file((dir / "surface.json").string());
                scene = s.scene;
                ext = s.escape_radius() * 1.1;
                have_scene = true;
            } else {
                for (const ParsedChain& pc : chains)
                    for (const ChainSegment& s : pc.segments) {
                        ext = std::max(ext, std::abs(s.start.pos.x) + s.length);
                        ext = std::max(ext, std::abs(s.start.pos.y) + s.length);
                    }
            }
            SvgCanvas canvas(-ext, -ext, ext, ext);
            if (have_scene) draw_scene(canvas, scene);
            draw_chains(canvas, tr);
            write_file(report_dir + "/trace.svg", canvas.finish());
            summary << "  trace: " << chains.size() << " chain(s), " << dashed
                    << " drawn dashed (still inside at the horizon) -> trace.svg\n";
        }
        if (fs::exists(dir / "energy.csv")) {
            std::ifstream ein(dir / "energy.csv");
            std::string line;
            std::getline(ein, line);
            std::vector<double> t, e_total, e_chi;
            while (std::getline(ein, line)) {
                const std::vector<double> v = parse_doubles(line);
                if (v.size() == 3) {
                    t.push_back(v[0]);
                    e_total.push_back(v[1]);
                    e_chi.push_back(v[2]);
                }
            }
            if (!t.empty()) {
                write_file(report_dir + "/energy.svg",
                           plot_series(t, {e_total, e_chi}, {"total", "near-field"}, "energy"));
                summary << "  energy: " << t.size() << " sample(s), final near-field "
                        << e_chi.back() << " -> energy.svg\n";
            }
        }
        if (fs::exists(dir / "probes.csv")) {
            std::ifstream pin(dir / "probes.csv");
            std::string line;
            std::getline(pin, line);
            std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> series;
            while (std::getline(pin, line)) {
                std::stringstream ss2(line);
                std::string ts, id, us;
                if (!std::getline(ss2, ts, ',') || !std::getline(ss2, id, ',') ||
                    !std::getline(ss2, us, ','))
                    continue;
                series[id].first.push_back(std::stod(ts));
                series[id].second.push_back(std::stod(us));
            }
            if (!series.empty()) {
                std::vector<std::vector<double>> ys;
                std::vector<std::string> labels;
                const std::vector<double>& t0 = series.begin()->second.first;
                bool ok = true;
                for (const auto& [id, tu] : series) {
                    if (tu.first.size() != t0.size()) ok = false;
                    ys.push_back(tu.second);
                    labels.push_back(id);
                }
                if (ok && !t0.empty()) {
                    write_file(report_dir + "/probes.svg",
                               plot_series(t0, ys, labels, "probe traces"));
                    summary << "  probes: " << series.size() << " probe(s) -> probes.svg\n";
                }
            }
        }
        for (const char* rn :
             {"report_assumption1.json", "report_assumption2.json", "report_assumption3.json"}) {
            if (!fs::exists(dir / rn)) continue;
            const nlohmann::json j = nlohmann::json::parse(read_input_file((dir / rn).string()));
            summary << "  " << rn << ": verdict " << j.value("verdict", "?") << "\n";
        }
        summary << "\n";
    }

    write_file(report_dir + "/summary.txt", summary.str());
    std::cout << summary.str();
    std::cout << "report written to " << report_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flat cone surfaces: geodesic flow, assumption checks, word calculus, wave solver"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file (ini format; command-line flags win)");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "sampling seed")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = library default)")
        ->capture_default_str();
    app.add_option("--out", g.out, "output directory")->capture_default_str();

    // scene
    CLI::App* scene = app.add_subcommand("scene", "validate or double a polygon scene");
    scene->require_subcommand(1);
    std::string scene_file;
    CLI::App* scene_val = scene->add_subcommand("validate", "check scene invariants");
    scene_val->add_option("file", scene_file, "scene json")->required();
    CLI::App* scene_dbl = scene->add_subcommand("double", "build the doubled surface");
    scene_dbl->add_option("file", scene_file, "scene json")->required();

    // trace
    CLI::App* tr = app.add_subcommand("trace", "trace a branched geodesic chain family");
    std::string tr_file, tr_start, tr_policy = "geometric", tr_svg;
    double tr_horizon = 10.0;
    tr->add_option("surface", tr_file, "surface or scene json")->required();
    tr->add_option("--start", tr_start, "x,y,theta,sheet")->required();
    tr->add_option("--policy", tr_policy, "geometric | fan:k | stop")->capture_default_str();
    tr->add_option("--horizon", tr_horizon, "time horizon")->required();
    tr->add_option("--svg", tr_svg, "also draw chains to this svg file");

    // check
    CLI::App* ck = app.add_subcommand("check", "run the geometric assumption checkers");
    std::string ck_file, ck_which = "all";
    long ck_samples = 2000;
    double ck_horizon = 0.0, ck_maxlen = 0.0, ck_tol = 1e-7, ck_tmax = 0.0;
    int ck_fan = 4096;
    ck->add_option("surface", ck_file, "surface or scene json")->required();
    ck->add_option("--assumption", ck_which, "all | 1 | 2 | 3")->capture_default_str();
    ck->add_option("--samples", ck_samples, "phase-space samples for the escape sweep")
        ->capture_default_str();
    ck->add_option("--horizon", ck_horizon, "escape horizon (0 = 20 R1)");
    ck->add_option("--max-length", ck_maxlen, "cone-leg length bound (0 = 3 R0)");
    ck->add_option("--fan", ck_fan, "departure fan resolution")->capture_default_str();
    ck->add_option("--tol", ck_tol, "link-distance tolerance")->capture_default_str();
    ck->add_option("--tmax", ck_tmax, "conjugacy time bound (0 = max-length)");

    // words
    CLI::App* wd = app.add_subcommand("words", "phase-space partition, scans, ledger");
    std::string wd_file, wd_scan, wd_s = "0";
    double wd_da = 0.0, wd_dp = 0.0, wd_maxlen = 0.0, wd_t0 = 0.0;
    int wd_n = 2, wd_maxword = 4;
    wd->add_option("surface", wd_file, "surface or scene json")->required();
    wd->add_option("--deltaA", wd_da, "patch scale")->required();
    wd->add_option("--deltaPsi", wd_dp, "cone ball radius")->required();
    wd->add_option("--scan", wd_scan, "forbidden | ledger");
    wd->add_option("--n", wd_n, "space dimension for smoothing orders")->capture_default_str();
    wd->add_option("--s", wd_s, "input regularity (rational, e.g. 3/2)")->capture_default_str();
    wd->add_option("--max-word-len", wd_maxword, "maximum word length for the forbidden scan")
        ->capture_default_str();
    wd->add_option("--max-length", wd_maxlen, "cone-leg length bound (0 = 3 R0)");
    wd->add_option("--t0", wd_t0, "escape bound; prints the iteration schedule when set");

    // fdtd
    CLI::App* fd = app.add_subcommand("fdtd", "finite-difference wave runs with probes");
    fd->set_help_flag("--help", "print help");  // frees -h for the grid step below
    std::string fd_file, fd_source, fd_probefile;
    std::vector<std::string> fd_probes;
    bool fd_doubled = false, fd_nosponge = false;
    GridSpec fd_grid;
    double fd_sigma = 0.0, fd_amp = 1.0;
    fd->add_option("scene", fd_file, "scene or surface json")->required();
    fd->add_option("--h", fd_grid.h, "grid step")->capture_default_str();
    fd->add_option("--dt", fd_grid.dt, "time step (0 = 0.7 h)");
    fd->add_option("--T", fd_grid.T, "final time")->required();
    fd->add_option("--source", fd_source, "x,y,f0[,sheet]")->required();
    fd->add_option("--sigma", fd_sigma, "source spatial width (0 = 2h)");
    fd->add_option("--amplitude", fd_amp, "source amplitude")->capture_default_str();
    fd->add_option("--probes", fd_probefile, "probe file: id,x,y[,sheet] per line");
    fd->add_option("--probe", fd_probes, "inline probe id:x,y[,sheet] (repeatable)");
    fd->add_flag("--doubled", fd_doubled, "run on both sheets of the doubled surface");
    fd->add_flag("--no-sponge", fd_nosponge, "reflecting outer wall instead of absorbing layer");
    fd->add_option("--sponge-cells", fd_grid.sponge_cells, "absorbing layer width in cells")
        ->capture_default_str();
    fd->add_option("--domain-radius", fd_grid.domain_radius, "half width of the grid (0 = auto)");
    fd->add_option("--energy-stride", fd_grid.energy_stride, "steps between energy samples")
        ->capture_default_str();
    fd->add_option("--snapshot", fd_grid.snapshot_times, "snapshot time (repeatable)");

    // report
    CLI::App* rp = app.add_subcommand("report", "summarize a bundle of run outputs");
    std::string rp_bundle;
    rp->add_option("bundle", rp_bundle, "directory with run manifests")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 64;
    }

    try {
        g.apply();
        if (*scene_val) return run_scene_validate(scene_file);
        if (*scene_dbl) return run_scene_double(scene_file, g);
        if (*tr) return run_trace(tr_file, tr_start, tr_policy, tr_horizon, tr_svg, g);
        if (*ck)
            return run_check(ck_file, ck_which, ck_samples, ck_horizon, ck_maxlen, ck_fan, ck_tol,
                             ck_tmax, g);
        if (*wd)
            return run_words(wd_file, wd_da, wd_dp, wd_scan, wd_n, wd_s, wd_maxword, wd_maxlen,
                             wd_t0, g);
        if (*fd) {
            fd_grid.sponge = !fd_nosponge;
            return run_fdtd(fd_file, fd_doubled, fd_grid, fd_source, fd_sigma, fd_amp,
                            fd_probefile, fd_probes, g);
        }
        if (*rp) return run_report(rp_bundle, g);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
