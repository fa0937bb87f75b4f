// revmix: batch driver for the reversible mixed-dynamics toolkit.
//
//   revmix portrait  --epsilon E [--grid N] [--iters T:K] [--seed S]
//   revmix scan      --epsilon-range lo:hi:step [--k 1,3,5] [--line eta0|etaPi]
//   revmix manifolds --epsilon E [--k Q] [--line L] [--center xi:eta] [--budget B]
//   revmix chain     --epsilon E [--grid N] [--noise R] [--samples M]
//   revmix regress   [--only 1,2,...]
//
// Every run writes config.json (the resolved RunConfig) into --out; passing
// it back with --config reproduces the run. Exit codes: 0 ok, 1 acceptance
// failure, 2 configuration error, 3 numerical failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revmix/acceptance.hpp"
#include "revmix/revmix.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace revmix;

namespace {

constexpr int kExitOk = 0, kExitAcceptance = 1, kExitConfig = 2, kExitNumerical = 3;

struct EpsRange {
    double lo = 0.30, hi = 0.62, step = 0.002;
};

struct RunConfig {
    std::string subcommand;
    double epsilon = 0.7;
    std::optional<EpsRange> epsilon_range;
    std::vector<int> k;
    std::string line = "both";  // eta0, etaPi or both
    int grid = 0;               // 0: subcommand default
    int transient = 900, keep = 100;
    std::string out = "revmix_out";
    std::uint64_t seed = 0;
    int threads = 1;
    double budget = 50.0;
    double noise = 0.0;  // 0: 1.5 box diagonals
    int samples = 9;
    std::optional<TorusPoint2> center;
    std::vector<int> only;
};

json to_json(const RunConfig& c) {
    json j{{"subcommand", c.subcommand},
           {"epsilon", c.epsilon},
           {"k", c.k},
           {"line", c.line},
           {"grid", c.grid},
           {"iters", {{"transient", c.transient}, {"keep", c.keep}}},
           {"out", c.out},
           {"seed", c.seed},
           {"threads", c.threads},
           {"budget", c.budget},
           {"noise", c.noise},
           {"samples", c.samples},
           {"only", c.only}};
    j["epsilon_range"] = c.epsilon_range ? json{{"lo", c.epsilon_range->lo}, {"hi", c.epsilon_range->hi},
                                                {"step", c.epsilon_range->step}}
                                         : json(nullptr);
    j["center"] = c.center ? json{{"xi", c.center->xi}, {"eta", c.center->eta}} : json(nullptr);
    return j;
}

RunConfig from_json(const json& j) {
    RunConfig c;
    c.subcommand = j.at("subcommand").get<std::string>();
    c.epsilon = j.value("epsilon", c.epsilon);
    c.k = j.value("k", c.k);
    c.line = j.value("line", c.line);
    c.grid = j.value("grid", c.grid);
    if (j.contains("iters")) {
        c.transient = j["iters"].value("transient", c.transient);
        c.keep = j["iters"].value("keep", c.keep);
    }
    c.out = j.value("out", c.out);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    c.budget = j.value("budget", c.budget);
    c.noise = j.value("noise", c.noise);
    c.samples = j.value("samples", c.samples);
    c.only = j.value("only", c.only);
    if (j.contains("epsilon_range") && !j["epsilon_range"].is_null()) {
        const auto& r = j["epsilon_range"];
        c.epsilon_range = EpsRange{r.at("lo").get<double>(), r.at("hi").get<double>(), r.at("step").get<double>()};
    }
    if (j.contains("center") && !j["center"].is_null()) {
        c.center = TorusPoint2{j["center"].at("xi").get<double>(), j["center"].at("eta").get<double>()};
    }
    return c;
}

std::vector<double> split_numbers(const std::string& s, std::size_t n, const char* what) {
    std::vector<double> v;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const std::size_t e = std::min(s.find(':', pos), s.size());
        try {
            std::size_t used = 0;
            const std::string tok = s.substr(pos, e - pos);
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(std::string(what) + ": cannot parse '" + s + "'");
        }
        pos = e + 1;
    }
    if (v.size() != n) throw ConfigError(std::string(what) + ": expected " + std::to_string(n) + " fields in '" + s + "'");
    return v;
}

std::vector<FixLine> lines_of(const std::string& l) {
    if (l == "eta0") return {FixLine::eta0};
    if (l == "etaPi") return {FixLine::etaPi};
    if (l == "both") return {FixLine::eta0, FixLine::etaPi};
    throw ConfigError("--line must be eta0, etaPi or both, got '" + l + "'");
}

void validate(const RunConfig& c) {
    (void)Params(c.epsilon);
    lines_of(c.line);
    if (c.epsilon_range) {
        const auto& r = *c.epsilon_range;
        (void)Params(r.lo);
        (void)Params(r.hi);
        if (!(r.lo < r.hi) || !(r.step > 0.0)) throw ConfigError("--epsilon-range needs lo < hi and step > 0");
    }
    for (int k : c.k) {
        if (k < 1) throw ConfigError("--k values must be positive");
    }
    if (c.grid < 0) throw ConfigError("--grid must be positive");
    if (c.transient < 0 || c.keep < 1) throw ConfigError("--iters needs T >= 0 and K >= 1");
    if (c.threads < 1) throw ConfigError("--threads must be >= 1");
    if (!(c.budget > 0.0)) throw ConfigError("--budget must be positive");
    if (c.noise < 0.0) throw ConfigError("--noise must be >= 0");
}

fs::path prepare_out(const RunConfig& c) {
    const fs::path dir(c.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    std::ofstream f(dir / "config.json");
    if (!f) throw ConfigError("cannot write " + (dir / "config.json").string());
    f << to_json(c).dump(2) << '\n';
    return dir;
}

// ---------------------------------------------------------------------------

int cmd_portrait(const RunConfig& c) {
    const fs::path dir = prepare_out(c);
    CloudSpec s;
    s.params = Params(c.epsilon);
    s.n = c.grid > 0 ? c.grid : 100;
    s.transient = c.transient;
    s.keep = c.keep;
    s.seed = c.seed;
    io::CsvWriter div(dir / "divergence.csv", {"direction", "epsilon", "mean_divergence[1/time]", "standard_error[1/time]",
                                               "subsample_logdet[1/time]", "subsample_divergence[1/time]",
                                               "crosscheck_deviation", "samples"});
    std::vector<DensityHistogram> hists;
    for (Direction d : {Direction::forward, Direction::backward}) {
        s.direction = d;
        const Cloud cl = iterate_cloud(s, c.threads);
        io::write_cloud(dir / (std::string("cloud_") + to_string(d) + ".csv"), cl.points);
        hists.push_back(histogram(cl.points));
        io::write_grid(dir / (std::string("density_") + to_string(d) + ".bin"), 256, 256, hists.back().bins);
        const auto& v = cl.divergence;
        div.row(to_string(d), c.epsilon, v.mean_per_time, v.standard_error, v.logdet_per_time,
                v.subsample_divergence_per_time, v.crosscheck_deviation, v.samples);
        std::printf("%-8s mean divergence %+.6e per unit time (SE %.1e), %zu samples\n", to_string(d), v.mean_per_time,
                    v.standard_error, v.samples);
    }
    const auto m = overlap_metrics(hists[0], hists[1]);
    io::CsvWriter ov(dir / "overlap.csv", {"epsilon", "l1", "support_jaccard", "mass_intersection"});
    ov.row(c.epsilon, m.l1, m.support_jaccard, m.mass_intersection);
    std::printf("overlap: L1 %.4f, support Jaccard %.4f, common mass %.4f\n", m.l1, m.support_jaccard,
                m.mass_intersection);
    return kExitOk;
}

int cmd_scan(const RunConfig& c) {
    const fs::path dir = prepare_out(c);
    const EpsRange r = c.epsilon_range.value_or(EpsRange{});
    const std::vector<int> ks = c.k.empty() ? std::vector<int>{1, 3, 5, 7, 9, 11} : c.k;
    io::CsvWriter births(dir / "births.csv", {"k", "line", "epsilon", "count_low", "count_high", "tangency",
                                              "xi[rad]", "eta[rad]", "label"});
    io::CsvWriter orbits(dir / "orbits.csv", io::orbit_header());
    int failures = 0;
    for (int k : ks) {
        for (FixLine line : lines_of(c.line)) {
            std::vector<BirthEvent> evs;
            try {
                evs = scan_births(k, line, r.lo, r.hi, r.step);
            } catch (const Error& e) {
                std::printf("k=%-2d %-5s error: %s\n", k, to_string(line), e.what());
                ++failures;
                continue;
            }
            if (evs.empty()) std::printf("k=%-2d %-5s no change of root count in [%g, %g]\n", k, to_string(line), r.lo, r.hi);
            for (const auto& ev : evs) {
                const std::size_t few = std::min(ev.count_low, ev.count_high);
                const std::size_t many = std::max(ev.count_low, ev.count_high);
                const std::size_t nt = std::max<std::size_t>(1, ev.tangencies.size());
                const std::string label = "0->" + std::to_string((many - few) / nt);
                std::printf("k=%-2d %-5s eps* = %.6f  roots %zu -> %zu  %zu tangencies (%s each)\n", k, to_string(line),
                            ev.epsilon, ev.count_low, ev.count_high, ev.tangencies.size(), label.c_str());
                for (std::size_t i = 0; i < ev.tangencies.size(); ++i) {
                    const auto& t = ev.tangencies[i];
                    births.row(k, to_string(line), ev.epsilon, ev.count_low, ev.count_high, i, t.point().xi,
                               t.point().eta, label);
                }
                try {
                    const bool up = ev.count_high > ev.count_low;
                    const double d = up ? 2e-3 : -2e-3;
                    for (const auto& o : acceptance::newborn_symmetric(k, line, ev.epsilon - d, ev.epsilon + d)) {
                        io::orbit_row(orbits, o);
                    }
                } catch (const Error& e) {
                    std::printf("      newborn orbits not classified: %s\n", e.what());
                }
            }
        }
    }
    return failures == 0 ? kExitOk : kExitNumerical;
}

std::vector<OrbitRecord> select_saddles(const RunConfig& c, const Params& p) {
    const int q = c.k.empty() ? 1 : c.k.front();
    if (q == 1) return fixed_point_saddles(p);
    TorusPoint2 center;
    if (c.center) {
        center = *c.center;
    } else {
        // most recent birth of period-q symmetric orbits below epsilon
        std::optional<Tangency> last;
        for (FixLine line : lines_of(c.line)) {
            for (const auto& ev : scan_births(q, line, std::max(0.0, c.epsilon - 0.03), c.epsilon, 2e-3)) {
                if (!ev.tangencies.empty() && (!last || ev.epsilon > last->epsilon)) last = ev.tangencies.front();
            }
        }
        if (!last) throw ConfigError("no period-" + std::to_string(q) + " birth within 0.03 below epsilon; pass --center");
        center = last->point();
        std::printf("period-%d family born at eps = %.6f near (%.6f, %.6f)\n", q, last->epsilon, center.xi, center.eta);
    }
    auto s = saddles_near(center, 0.12, q, p);
    if (s.empty()) throw ConfigError("selector matched no saddle of period " + std::to_string(q));
    return s;
}

int cmd_manifolds(const RunConfig& c) {
    const fs::path dir = prepare_out(c);
    const Params p(c.epsilon);
    const auto saddles = select_saddles(c, p);
    io::CsvWriter orbits(dir / "orbits.csv", io::orbit_header());
    for (const auto& s : saddles) io::orbit_row(orbits, s);

    GrowOptions go;
    go.budget = c.budget;
    std::vector<SaddleManifolds> mans;
    std::vector<Separatrix> all;
    for (std::size_t i = 0; i < saddles.size(); ++i) {
        mans.push_back(grow_all(saddles[i], static_cast<int>(i), p, go));
        for (const auto& b : mans.back().unstable) all.push_back(b);
        for (const auto& b : mans.back().stable) all.push_back(b);
    }
    io::write_polylines(dir / "polylines.csv", all);

    io::CsvWriter ev(dir / "events.csv", io::event_header());
    std::size_t count = 0;
    std::vector<std::vector<std::vector<HetCrossing>>> uv(saddles.size(), std::vector<std::vector<HetCrossing>>(saddles.size()));
    for (std::size_t i = 0; i < mans.size(); ++i) {
        for (std::size_t j = 0; j < mans.size(); ++j) {
            for (const auto& u : mans[i].unstable) {
                for (const auto& s : mans[j].stable) {
                    auto xs = crossings(u, s);
                    for (const auto& x : xs) {
                        ev.row(i == j ? "homoclinic" : "heteroclinic", c.epsilon, x.location.xi, x.location.eta, x.angle,
                               i, j);
                    }
                    count += xs.size();
                    uv[i][j].insert(uv[i][j].end(), xs.begin(), xs.end());
                }
            }
        }
        for (const auto& u : mans[i].unstable) {
            for (const auto& x : fix_r_crossings(u)) {
                ev.row("fix_r", c.epsilon, x.location.xi, x.location.eta, x.angle, i, -1);
                ++count;
            }
        }
    }
    std::printf("%zu saddles, %zu branches, %zu crossings\n", saddles.size(), all.size(), count);

    if (saddles.size() == 2) {
        const auto cert = heteroclinic_cycle(saddles[0], saddles[1], uv[0][1], uv[1][0]);
        json j{{"present", cert.present},
               {"j_contracting", cert.j_contracting},
               {"j_expanding", cert.j_expanding},
               {"connections_0_to_1", uv[0][1].size()},
               {"connections_1_to_0", uv[1][0].size()},
               {"min_angle_rad", cert.present ? json(cert.min_angle) : json(nullptr)}};
        std::ofstream(dir / "cycle.json") << j.dump(2) << '\n';
        std::printf("heteroclinic cycle: %s (J %.6f / %.6f, %zu + %zu connections)\n", cert.present ? "present" : "absent",
                    cert.j_contracting, cert.j_expanding, uv[0][1].size(), uv[1][0].size());
    }
    return kExitOk;
}

int cmd_chain(const RunConfig& c) {
    const fs::path dir = prepare_out(c);
    const int n = c.grid > 0 ? c.grid : 256;
    const BoxCover cover(n, n);
    const double noise = c.noise > 0.0 ? c.noise : default_noise(cover);
    const auto g = build_graph(Params(c.epsilon), cover, noise, c.samples, IntegratorSettings::fast(), c.threads);
    const auto d = chain_components(g);
    const auto att = reversible_attractor(g);
    const auto rep = reversible_repeller(g);
    std::vector<int> shared;
    std::set_intersection(att.boxes.begin(), att.boxes.end(), rep.boxes.begin(), rep.boxes.end(),
                          std::back_inserter(shared));
    const auto mirrored = reflect_boxes(cover, att.boxes);
    std::vector<int> dual_diff;
    std::set_symmetric_difference(mirrored.begin(), mirrored.end(), rep.boxes.begin(), rep.boxes.end(),
                                  std::back_inserter(dual_diff));
    const std::string relation = shared.empty() ? "disjoint" : (att.boxes == rep.boxes ? "equal" : "overlapping");

    const auto labels = label_grid(d);
    io::write_grid(dir / "components.bin", n, n, labels);
    std::vector<double> sets(static_cast<std::size_t>(cover.size()), 0.0);
    for (int b : att.boxes) sets[b] += 1.0;
    for (int b : rep.boxes) sets[b] += 2.0;
    io::write_grid(dir / "sets.bin", n, n, sets);

    std::size_t terminal = 0;
    for (std::size_t i = 0; i < d.components.size(); ++i) terminal += d.terminal(static_cast<int>(i)) ? 1 : 0;
    const json report{{"epsilon", c.epsilon},
                      {"boxes", cover.size()},
                      {"noise", noise},
                      {"edges", g.edge_count()},
                      {"components", d.components.size()},
                      {"terminal_components", terminal},
                      {"attractor_boxes", att.boxes.size()},
                      {"repeller_boxes", rep.boxes.size()},
                      {"shared_boxes", shared.size()},
                      {"r_duality_mismatch_boxes", dual_diff.size()},
                      {"relation", relation}};
    std::ofstream(dir / "report.json") << report.dump(2) << '\n';
    std::printf("%zu components; reversible attractor %zu boxes, repeller %zu boxes, shared %zu: %s\n",
                d.components.size(), att.boxes.size(), rep.boxes.size(), shared.size(), relation.c_str());
    std::printf("R(attractor) and repeller differ in %zu boxes\n", dual_diff.size());
    return kExitOk;
}

int cmd_regress(const RunConfig& c) {
    acceptance::Options o;
    o.threads = c.threads;
    std::vector<int> ids = c.only;
    if (ids.empty()) {
        for (int i = 1; i <= static_cast<int>(acceptance::all_criteria().size()); ++i) ids.push_back(i);
    }
    json rows = json::array();
    bool ok = true;
    for (int id : ids) {
        if (id < 1 || id > static_cast<int>(acceptance::all_criteria().size())) {
            throw ConfigError("unknown criterion " + std::to_string(id));
        }
        const auto r = acceptance::run(id, o);
        std::printf("%s\n", acceptance::summary_line(r).c_str());
        for (const auto& d : r.details) std::printf("      %s\n", d.c_str());
        std::fflush(stdout);
        rows.push_back({{"id", r.id}, {"title", r.title}, {"pass", r.pass}, {"seconds", r.seconds}, {"details", r.details}});
        ok = ok && r.pass;
    }
    const fs::path dir = prepare_out(c);
    std::ofstream(dir / "regress.json") << rows.dump(2) << '\n';
    return ok ? kExitOk : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reversible mixed-dynamics toolkit"};
    app.require_subcommand(1);
    RunConfig cfg;
    cfg.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    std::string eps_range, iters, center, config_path;

    auto common = [&](CLI::App* s) {
        s->add_option("--epsilon", cfg.epsilon, "coupling parameter");
        s->add_option("--epsilon-range", eps_range, "lo:hi:step");
        s->add_option("--k", cfg.k, "period(s)")->delimiter(',');
        s->add_option("--line", cfg.line, "eta0, etaPi or both");
        s->add_option("--grid", cfg.grid, "grid size N (cloud N x N, cover N x N)");
        s->add_option("--iters", iters, "transient:kept iterates");
        s->add_option("--out", cfg.out, "output directory");
        s->add_option("--seed", cfg.seed, "0: cell centres, else jittered initial points");
        s->add_option("--threads", cfg.threads, "worker threads");
        s->add_option("--config", config_path, "rerun from a saved config.json");
    };
    auto* portrait = app.add_subcommand("portrait", "forward and backward clouds, divergence, overlap");
    auto* scan = app.add_subcommand("scan", "births of symmetric periodic orbits");
    auto* manifolds = app.add_subcommand("manifolds", "separatrices of selected saddles and their crossings");
    auto* chain = app.add_subcommand("chain", "chain components on a box cover");
    auto* regress = app.add_subcommand("regress", "reference table with pass/fail per check");
    for (auto* s : {portrait, scan, manifolds, chain, regress}) common(s);
    manifolds->add_option("--budget", cfg.budget, "arclength budget per branch");
    manifolds->add_option("--center", center, "xi:eta of the family to select (period > 1)");
    chain->add_option("--noise", cfg.noise, "inflation radius (default 1.5 box diagonals)");
    chain->add_option("--samples", cfg.samples, "samples per box (perfect square)");
    regress->add_option("--only", cfg.only, "criteria to run")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        for (auto* s : app.get_subcommands()) cfg.subcommand = s->get_name();
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw ConfigError("cannot read " + config_path);
            json j;
            try {
                j = json::parse(f);
            } catch (const json::exception& e) {
                throw ConfigError(std::string("bad config: ") + e.what());
            }
            const std::string out = cfg.out;
            const bool out_given = app.get_subcommands().front()->count("--out") > 0;
            RunConfig loaded = from_json(j);
            if (loaded.subcommand != cfg.subcommand) {
                throw ConfigError("config is for '" + loaded.subcommand + "', not '" + cfg.subcommand + "'");
            }
            cfg = loaded;
            if (out_given) cfg.out = out;
        } else {
            if (!eps_range.empty()) {
                const auto v = split_numbers(eps_range, 3, "--epsilon-range");
                cfg.epsilon_range = EpsRange{v[0], v[1], v[2]};
            }
            if (!iters.empty()) {
                const auto v = split_numbers(iters, 2, "--iters");
                cfg.transient = static_cast<int>(v[0]);
                cfg.keep = static_cast<int>(v[1]);
            }
            if (!center.empty()) {
                const auto v = split_numbers(center, 2, "--center");
                cfg.center = TorusPoint2::normalized(v[0], v[1]);
            }
        }
        validate(cfg);

        if (cfg.subcommand == "portrait") return cmd_portrait(cfg);
        if (cfg.subcommand == "scan") return cmd_scan(cfg);
        if (cfg.subcommand == "manifolds") return cmd_manifolds(cfg);
        if (cfg.subcommand == "chain") return cmd_chain(cfg);
        return cmd_regress(cfg);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return kExitNumerical;
    }
}
