#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "lqglab/cardy_smirnov.hpp"
#include "lqglab/exponents.hpp"
#include "lqglab/gff_gmc.hpp"
#include "lqglab/mated_crt.hpp"
#include "lqglab/mullin.hpp"
#include "lqglab/perc_tri.hpp"

#ifndef LQGLAB_VERSION
#define LQGLAB_VERSION "0.0.0"
#endif

using namespace lqglab;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// Header plus rows, written as CSV or as a JSON array of records.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void write(const std::string& path, const std::string& format) const {
        std::ofstream os(path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + path);
        if (format == "json") {
            json arr = json::array();
            for (auto& r : rows) {
                json rec = json::object();
                for (std::size_t k = 0; k < columns.size(); ++k) {
                    const std::string& x = r[k];
                    if (x.find_first_not_of("-0123456789") == std::string::npos)
                        rec[columns[k]] = std::stoll(x);
                    else if (x == "nan")
                        rec[columns[k]] = nullptr;
                    else
                        rec[columns[k]] = std::stod(x);
                }
                arr.push_back(rec);
            }
            os << arr.dump() << '\n';
            return;
        }
        for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
        os << '\n';
        for (auto& r : rows) {
            for (std::size_t k = 0; k < r.size(); ++k) os << (k ? "," : "") << r[k];
            os << '\n';
        }
    }
};

void write_json(const std::string& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << j.dump(2) << '\n';
}

std::string sidecar(const std::string& out, const std::string& suffix) {
    fs::path p(out);
    return (p.parent_path() / (p.stem().string() + suffix)).string();
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw UsageError("bad number in list: " + tok);
        } catch (const std::logic_error&) {
            throw UsageError("bad number in list: " + tok);
        }
    }
    return v;
}

struct Common {
    std::uint64_t seed = 0;
    std::string out, format = "csv", manifest;
    int threads = 0;
};

struct Run {
    json result = json::object();
    std::vector<std::string> artifacts;
};

void need_out(const Common& c) {
    if (c.out.empty()) throw UsageError("--out is required");
}

Run sample_mullin(const Common& c, int n) {
    need_out(c);
    if (n < 1) throw UsageError("--n must be positive");
    Philox g(c.seed, 0);
    auto w = sample_excursion(StepSet::mullin(), 2 * n, {0, 0}, {0, 0}, g);
    auto d = extract_tree_map(sew_walk_to_refined(w));
    std::ofstream os(c.out, std::ios::binary);
    d.write(os);
    Run r;
    r.artifacts = {c.out};
    r.result = {{"edges", n}, {"vertices", d.map.vertex_count()}, {"walk", w.serialize()}};
    return r;
}

Run sample_perc_map(const Common& c, int l, int max_vertices) {
    need_out(c);
    Philox g(c.seed, 0);
    auto p = BoltzmannPercolated(l, max_vertices)(g);
    std::ofstream os(c.out, std::ios::binary);
    p.write(os);
    auto h = interior_color_histogram(p);
    Run r;
    r.artifacts = {c.out};
    r.result = {{"vertices", p.tri.map.vertex_count()},
                {"perimeter", p.tri.perimeter},
                {"interior_blue", h.blue},
                {"interior_yellow", h.yellow}};
    return r;
}

Run embed_cardy(const Common& c, const std::string& in, int lattice, long K, const std::string& arcs_s) {
    need_out(c);
    if (in.empty() == (lattice == 0)) throw UsageError("give exactly one of --in and --lattice");
    std::optional<LatticeTriangle> L;
    DiskTriangulation disk;
    BoundaryArcs arcs;
    if (lattice) {
        L.emplace(lattice);
        disk = L->disk;
        arcs = L->arcs;
    } else {
        std::ifstream is(in);
        if (!is) throw std::runtime_error("cannot open " + in);
        disk = DiskTriangulation::from_map(PlanarMap::read(is));
        auto bd = disk.boundary();
        const int P = int(bd.size());
        if (P < 3) throw std::invalid_argument("invalid arcs: perimeter below 3");
        if (arcs_s.empty()) {
            arcs = BoundaryArcs(disk, bd[0], bd[P / 3], bd[2 * P / 3]);
        } else {
            auto a = parse_list(arcs_s);
            if (a.size() != 3) throw UsageError("--arcs takes three half-edge ids");
            arcs = BoundaryArcs(disk, int(a[0]), int(a[1]), int(a[2]));
        }
    }
    auto e = cardy_smirnov_embed(disk, arcs, K, c.seed, thread_count(c.threads));
    Table t{{"vertex", "x", "y", "z", "stderr"}, {}};
    int degenerate = 0;
    for (int v = 0; v < disk.map.vertex_count(); ++v) {
        auto& p = e.positions[v];
        degenerate += e.degenerate[v];
        t.rows.push_back({std::to_string(v), num(p[0]), num(p[1]), num(p[2]),
                          e.degenerate[v] ? std::string("nan") : num(e.stderr_[v])});
    }
    t.write(c.out, c.format);
    Run r;
    r.artifacts = {c.out};
    r.result = {{"vertices", disk.map.vertex_count()}, {"samples", K}, {"degenerate", degenerate}};
    if (L) {
        double sup = 0;
        for (int v = 0; v < disk.map.vertex_count(); ++v)
            for (int i = 0; i < 3; ++i) sup = std::max(sup, std::abs(e.positions[v][i] - L->lattice_positions[v][i]));
        r.result["sup_deviation"] = sup;
    }
    return r;
}

Run gmc(const Common& c, double gamma, double eps, int grid, const std::string& domain, const std::string& bc,
        const std::string& field_out) {
    need_out(c);
    if (!(gamma > 0 && gamma < 2)) throw UsageError("--gamma must lie in (0,2)");
    GridGeometry geom = domain == "square" ? GridGeometry::unit_square(grid) : GridGeometry::unit_disk(grid);
    Boundary b = bc == "zero" ? Boundary::zero : bc == "free" ? Boundary::free_pinned : Boundary::whole_plane_pinned;
    Philox g(c.seed, 0);
    GridField f = domain == "square" && b == Boundary::zero ? DstGffSampler(geom).sample(g) : GffModel(geom, b).sample(g);
    LqgParams p{gamma};
    auto m = gmc_area(f, p, eps);
    Table t{{"i", "j", "mass"}, {}};
    for (int i = 0; i < geom.nx; ++i)
        for (int j = 0; j < geom.ny; ++j)
            if (geom.inside(i, j)) t.rows.push_back({std::to_string(i), std::to_string(j), num(m.mass[geom.index(i, j)])});
    t.write(c.out, c.format);
    Run r;
    r.artifacts = {c.out};
    if (!field_out.empty()) {
        Table ft{{"i", "j", "value"}, {}};
        for (int i = 0; i < geom.nx; ++i)
            for (int j = 0; j < geom.ny; ++j)
                if (geom.inside(i, j))
                    ft.rows.push_back({std::to_string(i), std::to_string(j), num(f.values[geom.index(i, j)])});
        ft.write(field_out, c.format);
        r.artifacts.push_back(field_out);
    }
    r.result = {{"total_mass", m.total()}, {"mesh", geom.mesh}, {"sites", geom.masked_count()}};
    return r;
}

json fit_json(double exponent, double se, const std::string& what) {
    return {{"quantity", what}, {"exponent", exponent}, {"stderr", se}, {"fit", "least squares of log y on log x"}};
}

Run mated_crt_dim(const Common& c, double gamma, int n, const std::string& radii_s, int centers) {
    need_out(c);
    auto radii = parse_list(radii_s);
    Philox g(c.seed, 0);
    auto graph = sample_mated_crt(gamma, n, g);
    auto bg = ball_growth_exponent(graph, radii, centers, c.seed, thread_count(c.threads));
    Table t{{"r", "mean_volume", "stderr"}, {}};
    for (std::size_t k = 0; k < radii.size(); ++k)
        t.rows.push_back({num(radii[k]), num(bg.mean_volume[k]), num(bg.stderr_[k])});
    t.write(c.out, c.format);
    Run r;
    auto fit = sidecar(c.out, ".fit.json");
    write_json(fit, fit_json(bg.exponent, bg.exponent_stderr, "ball growth"));
    r.artifacts = {c.out, fit};
    r.result = {{"exponent", bg.exponent}, {"stderr", bg.exponent_stderr}, {"edges", graph.edge_count()}};
    return r;
}

Run arm_exponents(const Common& c, const std::string& type, double r0, double rmin, double rmax, long trials, double p) {
    need_out(c);
    if (type != "one" && type != "two") throw UsageError("--type must be one or two");
    auto radii = dyadic_radii(rmin, rmax);
    auto est = arm_exponent_mc(type == "one" ? ArmType::one_arm_blue : ArmType::two_arm_bichromatic, r0, radii, trials,
                               c.seed, thread_count(c.threads), p);
    Table t{{"r", "R", "p_hat", "stderr"}, {}};
    for (auto& a : est.annuli) t.rows.push_back({num(a.r), num(a.R), num(a.p_hat), num(a.stderr_)});
    t.write(c.out, c.format);
    auto fit = sidecar(c.out, ".fit.json");
    write_json(fit, fit_json(est.exponent, est.stderr_, type == "one" ? "one-arm" : "two-arm"));
    Run r;
    r.artifacts = {c.out, fit};
    r.result = {{"exponent", est.exponent}, {"stderr", est.stderr_}, {"trials", trials}};
    return r;
}

Run walk_stats(const Common& c, const std::string& steps, int length, int l) {
    need_out(c);
    auto S = StepSet::by_name(steps);
    Philox g(c.seed, 0);
    auto w = sample_excursion(S, length, {l, 0}, {0, 0}, g);
    auto rw = rescale_walk(w);
    Table t{{"t", "L", "R"}, {}};
    for (std::size_t k = 0; k < rw.t.size(); ++k) t.rows.push_back({num(rw.t[k]), num(rw.L[k]), num(rw.R[k])});
    t.write(c.out, c.format);
    Run r;
    r.artifacts = {c.out};
    r.result = {{"step_correlation", step_correlation(S)}, {"length", length}};
    return r;
}

json charges(double gamma, double cM) {
    if (std::isnan(gamma) == std::isnan(cM)) throw UsageError("give exactly one of --gamma and --cM");
    if (!std::isnan(cM)) gamma = gamma_from_cM(cM);
    auto ch = charges_from_gamma(gamma);
    json j = {{"gamma", ch.gamma}, {"c_L", ch.c_L},         {"c_M", ch.c_M},
              {"Q", ch.Q},         {"kappa", ch.kappa_small}, {"kappa_prime", ch.kappa_large}};
    j["rho"] = ch.kappa_large > 4 ? json(mot_correlation(ch.kappa_large)) : json(nullptr);
    return j;
}

json options_of(const CLI::App* sub) {
    json cfg = json::object();
    for (const auto* o : sub->get_options()) {
        if (o->get_lnames().empty()) continue;
        const auto& name = o->get_lnames()[0];
        if (name == "help" || name == "config") continue;
        if (o->count()) {
            auto res = o->results();
            cfg[name] = res.size() == 1 ? res[0] : json(res).dump();
        } else if (!o->get_default_str().empty()) {
            cfg[name] = o->get_default_str();
        }
    }
    return cfg;
}

void print_json_error(const std::string& kind, const std::string& msg) {
    std::cerr << json{{"error", kind}, {"message", msg}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discrete random geometry experiments", "lqglab"};
    app.set_version_flag("--version", LQGLAB_VERSION);
    app.set_config("--config", "", "TOML or INI file with the same keys as the flags; flags win");
    app.require_subcommand(1);

    Common c;
    auto common = [&](CLI::App* s, bool stochastic, bool has_out = true) {
        if (stochastic) s->add_option("--seed", c.seed, "RNG seed")->required();
        if (has_out) s->add_option("--out", c.out, "output path");
        s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        s->add_option("--threads", c.threads, "worker threads (0 = all); LQGLAB_THREADS overrides")
            ->capture_default_str();
        s->add_option("--manifest", c.manifest, "manifest path (default: manifest.json next to --out)");
    };

    int n = 0, l = 0, maxv = 64, lattice = 0, grid = 64, centers = 2000, length = 0;
    long K = 1000, trials = 10000;
    double gamma = std::numeric_limits<double>::quiet_NaN(), cM = gamma, eps = 0.05, tol = 1e-12, r0 = 2, rmin = 32,
           rmax = 256, p = 0.5;
    std::string in, arcs, domain = "square", bc = "zero", field_out, radii = "4,8,16,32", type = "one",
                steps = "mullin";

    auto* s_mullin = app.add_subcommand("sample-mullin", "uniform tree-decorated map with n edges");
    common(s_mullin, true);
    s_mullin->add_option("--n", n, "edges")->required();

    auto* s_perc = app.add_subcommand("sample-perc-map", "Boltzmann percolated triangulation of an (l+2)-gon");
    common(s_perc, true);
    s_perc->add_option("--l", l, "perimeter minus two")->required();
    s_perc->add_option("--max-vertices", maxv, "size cutoff")->capture_default_str();

    auto* s_cardy = app.add_subcommand("embed-cardy-smirnov", "Monte Carlo Cardy-Smirnov embedding");
    common(s_cardy, true);
    s_cardy->add_option("--in", in, "PMAP file of a disk triangulation");
    s_cardy->add_option("--lattice", lattice, "use the lattice triangle with this side instead");
    s_cardy->add_option("--samples", K, "colorings")->capture_default_str();
    s_cardy->add_option("--arcs", arcs, "three boundary half-edges a,b,c (default: evenly spaced)");

    auto* s_gmc = app.add_subcommand("gmc", "GMC area measure of a discrete GFF");
    common(s_gmc, true);
    s_gmc->add_option("--gamma", gamma, "gamma in (0,2)")->required();
    s_gmc->add_option("--eps", eps, "circle-average radius")->capture_default_str();
    s_gmc->add_option("--grid", grid, "lattice points per unit length")->capture_default_str();
    s_gmc->add_option("--domain", domain, "square or disk")->check(CLI::IsMember({"square", "disk"}))->capture_default_str();
    s_gmc->add_option("--boundary", bc, "zero, free or whole-plane")
        ->check(CLI::IsMember({"zero", "free", "whole-plane"}))
        ->capture_default_str();
    s_gmc->add_option("--field-out", field_out, "also dump the field as i,j,value");

    auto* s_crt = app.add_subcommand("mated-crt-dim", "ball-growth exponent of the mated-CRT map");
    common(s_crt, true);
    s_crt->add_option("--gamma", gamma, "gamma in (0,2)")->required();
    s_crt->add_option("--n", n, "cells")->required();
    s_crt->add_option("--radii", radii, "comma-separated radii")->capture_default_str();
    s_crt->add_option("--centers", centers, "ball centers")->capture_default_str();

    auto* s_back = app.add_subcommand("backbone", "root of the backbone exponent equation");
    common(s_back, false);
    s_back->add_option("--tol", tol, "bracket tolerance")->capture_default_str();

    auto* s_arm = app.add_subcommand("arm-exponents", "one- or two-arm exponent on the triangular lattice");
    common(s_arm, true);
    s_arm->add_option("--type", type, "one or two")->capture_default_str();
    s_arm->add_option("--rmax", rmax, "largest outer radius")->capture_default_str();
    s_arm->add_option("--rmin", rmin, "smallest outer radius in the fit")->capture_default_str();
    s_arm->add_option("--r0", r0, "inner radius")->capture_default_str();
    s_arm->add_option("--trials", trials, "trials")->capture_default_str();
    s_arm->add_option("--p", p, "site occupation probability")->capture_default_str();

    auto* s_walk = app.add_subcommand("walk-stats", "rescaled excursion trace");
    common(s_walk, true);
    s_walk->add_option("--steps", steps, "mullin or kreweras")->check(CLI::IsMember({"mullin", "kreweras"}))->capture_default_str();
    s_walk->add_option("--length", length, "walk length")->required();
    s_walk->add_option("--l", l, "start at (l,0)")->capture_default_str();

    auto* s_ch = app.add_subcommand("charges", "central charges and related constants");
    common(s_ch, false, false);
    s_ch->add_option("--gamma", gamma, "gamma in (0,2]");
    s_ch->add_option("--cM", cM, "matter central charge <= 1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_json_error("usage", e.what());
        return 2;
    }

    auto* sub = app.get_subcommands().front();
    const std::string cmd = sub->get_name();
    auto t0 = std::chrono::steady_clock::now();
    Run run;
    try {
        if (cmd == "sample-mullin")
            run = sample_mullin(c, n);
        else if (cmd == "sample-perc-map")
            run = sample_perc_map(c, l, maxv);
        else if (cmd == "embed-cardy-smirnov")
            run = embed_cardy(c, in, lattice, K, arcs);
        else if (cmd == "gmc")
            run = gmc(c, gamma, eps, grid, domain, bc, field_out);
        else if (cmd == "mated-crt-dim")
            run = mated_crt_dim(c, gamma, n, radii, centers);
        else if (cmd == "arm-exponents")
            run = arm_exponents(c, type, r0, rmin, rmax, trials, p);
        else if (cmd == "walk-stats")
            run = walk_stats(c, steps, length, l);
        else if (cmd == "backbone") {
            auto b = backbone_exponent(tol);
            run.result = {{"root", b.root}, {"residual", b.residual}, {"bracket", b.bracket}, {"sign_changes", b.sign_changes}};
            if (!c.out.empty()) {
                write_json(c.out, run.result);
                run.artifacts = {c.out};
            }
        } else if (cmd == "charges") {
            run.result = charges(gamma, cM);
        }
    } catch (const UsageError& e) {
        print_json_error("usage", e.what());
        return 2;
    } catch (const std::exception& e) {
        print_json_error("runtime", e.what());
        return 1;
    }
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    std::cout << run.result.dump() << '\n';

    std::string mpath = c.manifest;
    if (mpath.empty() && !c.out.empty()) mpath = (fs::path(c.out).parent_path() / "manifest.json").string();
    if (!mpath.empty()) {
        json m = {{"command", cmd},
                  {"config", options_of(sub)},
                  {"seed", c.seed},
                  {"threads", thread_count(c.threads)},
                  {"version", LQGLAB_VERSION},
                  {"wall_time_s", wall},
                  {"artifacts", run.artifacts},
                  {"result", run.result}};
        try {
            write_json(mpath, m);
        } catch (const std::exception& e) {
            print_json_error("runtime", e.what());
            return 1;
        }
    }
    return 0;
}
