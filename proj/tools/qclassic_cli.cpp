// Batch front-end: every subcommand reads JSON/CSV inputs, writes CSV
// and JSON artifacts into --out and records them in a manifest with
// checksums. Identical config and seed give byte-identical outputs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qcl/billiard.hpp"
#include "qcl/classical.hpp"
#include "qcl/io.hpp"
#include "qcl/stats.hpp"
#include "qcl/vanhove.hpp"
#include "qcl/weylwigner.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qcl;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Common {
    std::string out = "out";
    std::uint64_t seed = 1;
    int workers = 1;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--out", c.out, "output directory")->envname("QCLASSIC_OUT");
    sub->add_option("--seed", c.seed, "RNG seed")->envname("QCLASSIC_SEED");
    sub->add_option("--workers", c.workers, "worker count (reproducibility-neutral)")
        ->envname("QCLASSIC_WORKERS");
}

// Artifact registry backing the manifest.
struct Session {
    Common common;
    std::string subcommand;
    json config;
    std::vector<std::string> artifacts;

    fs::path dir() const { return fs::path(common.out); }

    std::string path(const std::string& name) {
        artifacts.push_back(name);
        return (dir() / name).string();
    }

    void begin() {
        std::error_code ec;
        fs::create_directories(dir(), ec);
        if (ec) throw IoError("cannot create output directory: " + common.out);
    }

    void finish() {
        json m;
        m["version"] = kVersion;
        m["subcommand"] = subcommand;
        m["seed"] = common.seed;
        m["workers"] = common.workers;
        m["config"] = config;
        m["artifacts"] = json::array();
        for (const std::string& a : artifacts) {
            char hex[32];
            std::snprintf(hex, sizeof hex, "%016llx",
                          static_cast<unsigned long long>(file_checksum((dir() / a).string())));
            m["artifacts"].push_back({{"file", a}, {"fnv1a64", hex}});
        }
        std::ofstream out(dir() / "manifest.json", std::ios::binary);
        if (!out) throw IoError("cannot write manifest");
        out << m.dump(2) << "\n";
    }
};

json parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config: " + path);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw std::invalid_argument("malformed JSON config: " + path);
    return j;
}

Poly poly_from_json(const json& j) {
    if (!j.contains("terms") || !j["terms"].is_array())
        throw std::invalid_argument("polynomial spec needs a terms array");
    int dof = j.value("dof", 1);
    Poly p(dof);
    for (const auto& t : j["terms"]) {
        cplx coeff;
        if (t.contains("coeff") && t["coeff"].is_array())
            coeff = cplx(t["coeff"][0].get<double>(), t["coeff"][1].get<double>());
        else
            coeff = cplx(t.value("coeff", 0.0));
        Poly::Expo e{};
        auto powers = t.value("powers", std::vector<int>{});
        if (static_cast<int>(powers.size()) > 2 * dof)
            throw std::invalid_argument("polynomial term has too many powers");
        for (std::size_t v = 0; v < powers.size(); ++v)
            e[v] = static_cast<std::uint8_t>(powers[v]);
        p.add_term(e, coeff);
    }
    return p;
}

PhaseGrid grid_from_json(const json& j) {
    if (!j.contains("mins") || !j.contains("maxs") || !j.contains("counts"))
        throw std::invalid_argument("grid spec needs mins/maxs/counts");
    std::vector<Axis> axes;
    for (std::size_t a = 0; a < j["mins"].size(); ++a) {
        Axis ax;
        ax.min = j["mins"][a].get<double>();
        ax.max = j["maxs"][a].get<double>();
        ax.count = j["counts"][a].get<int>();
        axes.push_back(ax);
    }
    return PhaseGrid(axes);
}

void write_json(const std::string& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

// ---- decohere -------------------------------------------------------

struct DecohereArgs {
    Common common;
    std::string state_file, obs_file;
    std::string scenario = "gaussian";
    double sigma = 0.5, gamma = 0.5;
    double omega_max = 16;
    int count = 201;
    double hbar = 1;
    double t_max = 6;
    int steps = 120;
    double theta = 1e-3;
};

std::pair<VanHoveState, VanHoveObservable> scenario_pair(const DecohereArgs& a) {
    OmegaGrid grid{a.omega_max, a.count};
    grid.validate();
    VanHoveState rho(grid, 1, 1, a.hbar);
    VanHoveObservable obs(grid, 1, 1, a.hbar);
    double center = a.omega_max / 2;
    auto nu_profile = [&](double nu, bool state_side) {
        if (a.scenario == "gaussian")
            return std::exp(-nu * nu / (4 * a.sigma * a.sigma));  // each side
        return state_side ? a.gamma * a.gamma / (nu * nu + a.gamma * a.gamma) : 1.0;
    };
    double norm = 0;
    for (int w = 0; w < grid.count; ++w) {
        double ridge = std::exp(-0.5 * std::pow(grid.omega(w) - center, 2));
        rho.sing(0, w, 0, 0) = ridge;
        obs.sing(0, w, 0, 0) = 1.0;
        norm += grid.weight(w) * ridge;
    }
    for (cplx& z : rho.singular) z /= norm;
    for (int w = 0; w < grid.count; ++w)
        for (int wp = 0; wp < grid.count; ++wp) {
            double nu = grid.omega(w) - grid.omega(wp);
            double bar = 0.5 * (grid.omega(w) + grid.omega(wp));
            double ridge = std::exp(-0.5 * (bar - center) * (bar - center)) / norm;
            rho.reg(0, w, wp, 0, 0) = nu_profile(nu, true) * ridge;
            obs.reg(0, w, wp, 0, 0) = nu_profile(nu, false);
        }
    rho.validate();
    obs.validate();
    return {std::move(rho), std::move(obs)};
}

void run_decohere(const DecohereArgs& a) {
    Session s{a.common, "decohere", {}, {}};
    s.config = {{"scenario", a.scenario}, {"sigma", a.sigma},       {"gamma", a.gamma},
                {"omega_max", a.omega_max}, {"count", a.count},     {"hbar", a.hbar},
                {"t_max", a.t_max},       {"steps", a.steps},       {"theta", a.theta},
                {"state", a.state_file},  {"observable", a.obs_file}};
    s.begin();

    VanHoveState rho;
    VanHoveObservable obs;
    if (!a.state_file.empty() || !a.obs_file.empty()) {
        if (a.state_file.empty() || a.obs_file.empty())
            throw std::invalid_argument("decohere: need both --state and --obs, or neither");
        VanHoveKernel ks = load_vanhove(a.state_file), ko = load_vanhove(a.obs_file);
        rho = VanHoveState(ks.grid, ks.charts, ks.m_dim, ks.hbar);
        rho.singular = ks.singular;
        rho.regular = ks.regular;
        obs = VanHoveObservable(ko.grid, ko.charts, ko.m_dim, ko.hbar);
        obs.singular = ko.singular;
        obs.regular = ko.regular;
        rho.validate();
        obs.validate();
    } else {
        if (a.scenario != "gaussian" && a.scenario != "lorentzian")
            throw std::invalid_argument("decohere: unknown scenario " + a.scenario);
        std::tie(rho, obs) = scenario_pair(a);
    }

    std::ofstream csv(s.path("decohere.csv"), std::ios::binary);
    if (!csv) throw IoError("cannot write decohere.csv");
    csv << "t,total_re,total_im,singular_re,regular_envelope\n";
    char buf[160];
    for (int i = 0; i <= a.steps; ++i) {
        double t = a.t_max * i / a.steps;
        MeanValueParts mv = mean_value_parts(rho, obs, t);
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", t, mv.total().real(),
                      mv.total().imag(), mv.singular.real(), std::abs(mv.regular));
        csv << buf;
    }
    csv.close();

    double td = decoherence_time(rho, obs, a.theta);
    write_json(s.path("summary.json"),
               {{"decoherence_time", td},
                {"theta", a.theta},
                {"envelope_at_0", regular_envelope(rho, obs, 0)}});
    s.finish();
}

// ---- symb / quantize / star / bracket -------------------------------

void run_symb(const Common& common, const std::string& input, const std::string& kind) {
    Session s{common, "symb", {{"input", input}, {"kind", kind}}, {}};
    s.begin();
    if (kind != "observable" && kind != "state")
        throw std::invalid_argument("symb: kind must be observable or state");
    OperatorMatrix op = load_operator(input);
    WignerSymbol sym =
        wigner_symb(op, kind == "state" ? SymbolKind::state : SymbolKind::observable);
    save_phase_function(sym.function, s.path("symbol.csv"), sym.hbar);
    s.artifacts.push_back("symbol.csv.json");
    s.finish();
}

void run_quantize(const Common& common, const std::string& input) {
    Session s{common, "quantize", {{"input", input}}, {}};
    s.begin();
    json j = parse_config(input);
    Poly p = poly_from_json(j);
    OperatorMatrix op = weyl_quantize(p, j.value("dim", 65), j.value("dq", 0.25),
                                      j.value("origin", 0.0), j.value("hbar", 1.0),
                                      j.value("max_degree", 8));
    save_operator(op, s.path("operator.json"));
    s.finish();
}

void run_star(const Common& common, const std::string& a_file, const std::string& b_file,
              double hbar, int order, bool bracket) {
    Session s{common,
              bracket ? "bracket" : "star",
              {{"a", a_file}, {"b", b_file}, {"hbar", hbar}, {"order", order}},
              {}};
    s.begin();
    PhaseFunction fa = load_phase_function(a_file);
    PhaseFunction fb = load_phase_function(b_file);
    std::string warning;
    PhaseFunction out = bracket ? moyal_bracket(fa, fb, hbar, order, &warning)
                                : star_product(fa, fb, hbar, order, &warning);
    save_phase_function(out, s.path(bracket ? "bracket.csv" : "star.csv"), hbar);
    s.artifacts.push_back(s.artifacts.back() + ".json");
    json summary = {{"max_abs", out.max_abs()}, {"max_imag", out.max_imag()}};
    if (!warning.empty()) summary["warning"] = warning;
    write_json(s.path("summary.json"), summary);
    s.finish();
}

// ---- charts ---------------------------------------------------------

void run_charts_build(const Common& common, const std::string& config_file) {
    Session s{common, "charts build", {{"config", config_file}}, {}};
    s.begin();
    json cfg = parse_config(config_file);
    if (!cfg.contains("boxes") || !cfg["boxes"].is_array() || cfg["boxes"].empty())
        throw std::invalid_argument("charts build: config needs boxes");
    std::vector<Box> boxes;
    for (const auto& bj : cfg["boxes"])
        boxes.push_back(Box{bj["lo"].get<std::vector<double>>(),
                            bj["hi"].get<std::vector<double>>()});
    Atlas atlas = build_partition(boxes, cfg.value("epsilon", 0.1), cfg.value("hbar", 1e-4),
                                  cfg.value("action_scale", 1.0));
    PhaseGrid grid = grid_from_json(cfg.at("grid"));
    atlas.validate(grid);
    if (cfg.contains("hamiltonian")) {
        PhaseFunction H = PhaseFunction::from_poly(grid, poly_from_json(cfg["hamiltonian"]));
        for (Chart& ch : atlas.charts) ch.constants.push_back(H);
    }
    save_atlas(atlas, s.path("atlas.json"));
    for (const Chart& ch : atlas.charts)
        for (std::size_t k = 0; k < ch.constants.size(); ++k) {
            std::string name =
                "atlas_chart" + std::to_string(ch.id) + "_const" + std::to_string(k) + ".csv";
            s.artifacts.push_back(name);
            s.artifacts.push_back(name + ".json");
        }
    auto [r1, r2] = atlas.scale_ratios();
    write_json(s.path("report.json"), {{"partition_defect", atlas.partition_defect(grid)},
                                       {"hbar_over_eps2", r1},
                                       {"eps2_over_S", r2},
                                       {"charts", atlas.charts.size()}});
    s.finish();
}

void run_charts_verify(const Common& common, const std::string& atlas_file) {
    Session s{common, "charts verify", {{"atlas", atlas_file}}, {}};
    s.begin();
    Atlas atlas = load_atlas(atlas_file);
    std::vector<Axis> axes;
    for (std::size_t a = 0; a < atlas.charts[0].box.lo.size(); ++a) {
        double lo = atlas.charts[0].box.lo[a], hi = atlas.charts[0].box.hi[a];
        for (const Chart& ch : atlas.charts) {
            lo = std::min(lo, ch.box.lo[a]);
            hi = std::max(hi, ch.box.hi[a]);
        }
        axes.push_back(Axis{lo, hi, 33});
    }
    PhaseGrid grid(axes);
    atlas.validate(grid);
    auto [r1, r2] = atlas.scale_ratios();
    write_json(s.path("report.json"), {{"partition_defect", atlas.partition_defect(grid)},
                                       {"hbar_over_eps2", r1},
                                       {"eps2_over_S", r2},
                                       {"charts", atlas.charts.size()},
                                       {"ok", true}});
    s.finish();
}

// ---- classical ------------------------------------------------------

// chi-square p for a 2-D ensemble against the density's interpolant,
// with expected masses accumulated cell by cell
double fp_pvalue_2d(const ClassicalDensity& rho, const std::vector<PhasePoint>& pts, int bins) {
    const PhaseGrid& g = rho.function.grid();
    double qlo = g.axis(0).min, qhi = g.axis(0).max;
    double plo = g.axis(1).min, phi = g.axis(1).max;
    std::vector<double> mass(static_cast<std::size_t>(bins) * bins, 0.0);
    double total = 0;
    for (int i = 0; i + 1 < g.axis(0).count; ++i)
        for (int j = 0; j + 1 < g.axis(1).count; ++j) {
            double w = rho.function.real_at(g.flat({i, j})) +
                       rho.function.real_at(g.flat({i + 1, j})) +
                       rho.function.real_at(g.flat({i, j + 1})) +
                       rho.function.real_at(g.flat({i + 1, j + 1}));
            double qc = 0.5 * (g.axis(0).coord(i) + g.axis(0).coord(i + 1));
            double pc = 0.5 * (g.axis(1).coord(j) + g.axis(1).coord(j + 1));
            int bi = std::min(bins - 1, static_cast<int>(bins * (qc - qlo) / (qhi - qlo)));
            int bj = std::min(bins - 1, static_cast<int>(bins * (pc - plo) / (phi - plo)));
            mass[static_cast<std::size_t>(bi) * bins + bj] += w;
            total += w;
        }
    for (double& m : mass) m /= total;
    std::vector<double> obs(mass.size(), 0.0);
    for (const PhasePoint& x : pts) {
        int bi = std::clamp(static_cast<int>(bins * (x[0] - qlo) / (qhi - qlo)), 0, bins - 1);
        int bj = std::clamp(static_cast<int>(bins * (x[1] - plo) / (phi - plo)), 0, bins - 1);
        obs[static_cast<std::size_t>(bi) * bins + bj] += 1;
    }
    double n = static_cast<double>(pts.size());
    double chi2 = 0, pool_obs = 0, pool_exp = 0;
    int dof = -1;
    for (std::size_t b = 0; b < mass.size(); ++b) {
        double e = mass[b] * n;
        if (e < 10) {
            pool_obs += obs[b];
            pool_exp += e;
            continue;
        }
        chi2 += (obs[b] - e) * (obs[b] - e) / e;
        ++dof;
    }
    if (pool_exp > 0) {
        chi2 += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        ++dof;
    }
    return chi_square_pvalue(chi2, dof);
}

void run_classical(const Common& common, const std::string& config_file) {
    Session s{common, "classical", {{"config", config_file}}, {}};
    s.begin();
    json cfg = parse_config(config_file);
    for (const char* key : {"atlas", "grid", "eta", "specs"})
        if (!cfg.contains(key))
            throw std::invalid_argument(std::string("classical: config needs ") + key);
    Atlas atlas = load_atlas(cfg["atlas"].get<std::string>());
    PhaseGrid grid = grid_from_json(cfg["grid"]);
    double eta = cfg["eta"].get<double>();
    int vol_samples = cfg.value("volume_samples", 200000);

    std::vector<LevelSpec> specs;
    for (const auto& sj : cfg["specs"])
        specs.push_back(LevelSpec{sj.value("chart", 0), sj["levels"].get<std::vector<double>>(),
                                  sj.value("weight", 1.0)});

    std::vector<MicroVolume> volumes;
    json vol_report = json::array();
    for (const LevelSpec& spec : specs) {
        const Chart& ch = atlas.charts.at(spec.chart);
        MicroVolume v = config_volume(ch, spec.levels, vol_samples, common.seed, eta);
        vol_report.push_back({{"chart", v.chart},
                              {"levels", v.levels},
                              {"volume", v.volume},
                              {"mc_error", v.mc_error},
                              {"volume_half_eta", v.volume_half_eta}});
        volumes.push_back(std::move(v));
    }

    ClassicalDensity rho = classical_density(atlas, specs, volumes, eta, grid);
    save_phase_function(rho.function, s.path("density.csv"), atlas.hbar);
    s.artifacts.push_back("density.csv.json");
    double normalization = integrate_phase(rho.function).real();
    double min_value = 0;
    for (std::size_t f = 0; f < grid.size(); ++f)
        min_value = std::min(min_value, rho.function.real_at(f));

    json report = {{"normalization", normalization},
                   {"min_value", min_value},
                   {"volumes", vol_report},
                   {"chi_square_p", nullptr}};

    if (cfg.contains("ensemble")) {
        const json& ej = cfg["ensemble"];
        int n = ej.value("n", 20000);
        double t_end = ej.value("t_end", 1.0), dt = ej.value("dt", 0.01);
        const PhaseFunction& H = atlas.charts.at(0).constants.at(0);
        auto [e0, e1] = sample_trajectories(rho, H, n, t_end, common.seed, dt);
        std::ofstream csv(s.path("ensemble.csv"), std::ios::binary);
        if (!csv) throw IoError("cannot write ensemble.csv");
        csv << "t";
        for (int a = 0; a < grid.dof(); ++a) csv << ",q" << a + 1;
        for (int a = 0; a < grid.dof(); ++a) csv << ",p" << a + 1;
        csv << ",weight\n";
        char buf[64];
        auto dump = [&](const Ensemble& e, double t) {
            for (std::size_t i = 0; i < e.points.size(); ++i) {
                std::snprintf(buf, sizeof buf, "%.17g", t);
                csv << buf;
                for (double c : e.points[i]) {
                    std::snprintf(buf, sizeof buf, ",%.17g", c);
                    csv << buf;
                }
                std::snprintf(buf, sizeof buf, ",%.17g\n", e.weights[i]);
                csv << buf;
            }
        };
        dump(e0, 0.0);
        dump(e1, t_end);
        csv.close();
        if (grid.naxes() == 2) report["chi_square_p"] = fp_pvalue_2d(rho, e1.points, 32);
    }
    write_json(s.path("report.json"), report);
    s.finish();
}

// ---- billiard -------------------------------------------------------

struct BilliardArgs {
    Common common;
    double lx = 1, ly = 1, radius = 0.5, d = 0.15;
    std::vector<double> start = {0.5, 0.0, 0.3, 1.0};
    double t_end = 20, dt = 1e-5, record_dt = 0.01;
    bool want_lyapunov = false;
};

const char* domain_name(DomainLabel d) {
    switch (d) {
        case DomainLabel::D0: return "D0";
        case DomainLabel::D1: return "D1";
        case DomainLabel::D2: return "D2";
        case DomainLabel::D3: return "D3";
        case DomainLabel::D4: return "D4";
    }
    return "?";
}

void run_billiard(const BilliardArgs& a) {
    Session s{a.common, "billiard", {}, {}};
    s.config = {{"lx", a.lx},   {"ly", a.ly},     {"radius", a.radius},
                {"d", a.d},     {"start", a.start}, {"t_end", a.t_end},
                {"dt", a.dt},   {"record_dt", a.record_dt}, {"lyapunov", a.want_lyapunov}};
    s.begin();
    if (a.start.size() != 4)
        throw std::invalid_argument("billiard: --start needs qx,qy,px,py");
    BilliardSpec spec;
    spec.lx = a.lx;
    spec.ly = a.ly;
    spec.radius = a.radius;
    spec.wall_width = a.d;
    BilliardTrajectory tr = simulate_billiard(spec, a.start, a.t_end, a.dt, a.record_dt);

    std::ofstream csv(s.path("trajectory.csv"), std::ios::binary);
    if (!csv) throw IoError("cannot write trajectory.csv");
    csv << "t,qx,qy,px,py,domain,H,Px,Py,Ptheta\n";
    char buf[220];
    std::map<std::string, long> counts;
    for (const BilliardSample& smp : tr.samples) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%.17g\n",
                      smp.t, smp.x[0], smp.x[1], smp.x[2], smp.x[3], domain_name(smp.domain),
                      smp.H, smp.px, smp.py, smp.ptheta);
        csv << buf;
        ++counts[domain_name(smp.domain)];
    }
    csv.close();

    json summary = {{"energy_drift", tr.energy_drift},
                    {"samples", tr.samples.size()},
                    {"domain_counts", counts}};
    if (a.want_lyapunov) {
        LyapunovResult ly = lyapunov(spec, a.start, std::max(a.t_end, 1000.0), 1e-4);
        summary["lyapunov"] = {{"lambda_max", ly.lambda_max}, {"stderr", ly.stderr_est}};
    }
    write_json(s.path("summary.json"), summary);
    s.finish();
}

// ---- walkthrough ----------------------------------------------------

void run_walkthrough(const Common& common, const std::string& scenario) {
    if (scenario == "moyal") {
        Session s{common, "walkthrough moyal", {{"scenario", scenario}}, {}};
        s.begin();
        json rows = json::array();
        for (double hbar : {0.01, 0.1, 1.0}) {
            Poly q = Poly::q(0, 1), p = Poly::p(0, 1);
            Poly comm = star_product(q, p, hbar, 8) - star_product(p, q, hbar, 8);
            Poly target = Poly::constant(cplx(0, hbar), 1);
            rows.push_back({{"hbar", hbar}, {"deformation_defect", comm.max_coeff_diff(target)}});
        }
        write_json(s.path("summary.json"), {{"canonical_pairs", rows}});
        s.finish();
    } else if (scenario == "decoherence") {
        DecohereArgs a;
        a.common = common;
        run_decohere(a);
    } else if (scenario == "classical-limit") {
        Session s{common, "walkthrough classical-limit", {{"scenario", scenario}}, {}};
        s.begin();
        PhaseGrid grid({Axis{-2, 2, 129}, Axis{-2, 2, 129}});
        Atlas atlas = build_partition({Box{{-2, -2}, {2, 2}}}, 0.2, 1e-4, 1.0);
        Poly h = (Poly::q(0, 1) * Poly::q(0, 1) + Poly::p(0, 1) * Poly::p(0, 1)) * 0.5;
        PhaseFunction H = PhaseFunction::from_poly(grid, h);
        atlas.charts[0].constants.push_back(H);
        MicroVolume vol =
            config_volume(atlas.charts[0], {1.0}, 200000, common.seed, 0.08);
        ClassicalDensity rho =
            classical_density(atlas, {LevelSpec{0, {1.0}, 1.0}}, {vol}, 0.08, grid);
        save_phase_function(rho.function, s.path("density.csv"), atlas.hbar);
        s.artifacts.push_back("density.csv.json");
        double min_value = 0;
        for (std::size_t f = 0; f < grid.size(); ++f)
            min_value = std::min(min_value, rho.function.real_at(f));
        write_json(s.path("report.json"),
                   {{"normalization", integrate_phase(rho.function).real()},
                    {"min_value", min_value},
                    {"volume", vol.volume},
                    {"volume_mc_error", vol.mc_error}});
        s.finish();
    } else if (scenario == "billiard") {
        BilliardArgs a;
        a.common = common;
        a.t_end = 20;
        run_billiard(a);
    } else {
        throw std::invalid_argument("walkthrough: unknown scenario " + scenario);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"phase-space toolkit batch front-end"};
    app.require_subcommand(1);

    Common common;

    auto* symb = app.add_subcommand("symb", "operator JSON to phase-space symbol CSV");
    std::string symb_input, symb_kind = "observable";
    symb->add_option("--input", symb_input, "operator JSON")->required();
    symb->add_option("--kind", symb_kind, "observable|state");
    add_common(symb, common);

    auto* quant = app.add_subcommand("quantize", "polynomial JSON to operator JSON");
    std::string quant_input;
    quant->add_option("--input", quant_input, "polynomial JSON")->required();
    add_common(quant, common);

    auto* star = app.add_subcommand("star", "star product of two phase-function CSVs");
    auto* bracket = app.add_subcommand("bracket", "Moyal bracket of two phase-function CSVs");
    std::string ab_a, ab_b;
    double ab_hbar = 1;
    int ab_order = 8;
    for (CLI::App* sub : {star, bracket}) {
        sub->add_option("--a", ab_a, "first operand CSV")->required();
        sub->add_option("--b", ab_b, "second operand CSV")->required();
        sub->add_option("--hbar", ab_hbar, "deformation parameter");
        sub->add_option("--order", ab_order, "series truncation order");
        add_common(sub, common);
    }

    DecohereArgs da;
    auto* deco = app.add_subcommand("decohere", "mean-value decay of a van Hove pair");
    deco->add_option("--state", da.state_file, "state kernel JSON");
    deco->add_option("--obs", da.obs_file, "observable kernel JSON");
    deco->add_option("--scenario", da.scenario, "gaussian|lorentzian (built-in kernels)");
    deco->add_option("--sigma", da.sigma, "gaussian width");
    deco->add_option("--gamma", da.gamma, "lorentzian width");
    deco->add_option("--omega-max", da.omega_max, "energy band top");
    deco->add_option("--count", da.count, "energy grid points");
    deco->add_option("--hbar", da.hbar, "hbar");
    deco->add_option("--t-max", da.t_max, "last sample time");
    deco->add_option("--steps", da.steps, "number of time steps");
    deco->add_option("--theta", da.theta, "decoherence threshold");
    add_common(deco, common);

    auto* charts = app.add_subcommand("charts", "atlas construction and verification");
    charts->require_subcommand(1);
    auto* cbuild = charts->add_subcommand("build", "build an atlas from a config");
    std::string charts_config, charts_atlas;
    cbuild->add_option("--config", charts_config, "atlas config JSON")->required();
    add_common(cbuild, common);
    auto* cverify = charts->add_subcommand("verify", "validate a stored atlas");
    cverify->add_option("--atlas", charts_atlas, "atlas JSON")->required();
    add_common(cverify, common);

    auto* classical = app.add_subcommand("classical", "volumes, densities and ensembles");
    std::string classical_config;
    classical->add_option("--config", classical_config, "classical config JSON")->required();
    add_common(classical, common);

    BilliardArgs ba;
    auto* billiard = app.add_subcommand("billiard", "Sinai billiard simulation");
    billiard->add_option("--lx", ba.lx, "half-width in x");
    billiard->add_option("--ly", ba.ly, "half-width in y");
    billiard->add_option("--radius", ba.radius, "disc radius (0 disables)");
    billiard->add_option("--d", ba.d, "wall width");
    billiard->add_option("--start", ba.start, "qx,qy,px,py")->delimiter(',')->expected(4);
    billiard->add_option("--t-end", ba.t_end, "simulation span");
    billiard->add_option("--dt", ba.dt, "integrator step");
    billiard->add_option("--record-dt", ba.record_dt, "sampling cadence");
    billiard->add_flag("--lyapunov", ba.want_lyapunov, "also estimate lambda_max");
    add_common(billiard, common);

    auto* walk = app.add_subcommand("walkthrough", "end-to-end scenario");
    std::string walk_scenario;
    walk->add_option("scenario", walk_scenario, "moyal|decoherence|classical-limit|billiard")
        ->required();
    add_common(walk, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (symb->parsed()) run_symb(common, symb_input, symb_kind);
        if (quant->parsed()) run_quantize(common, quant_input);
        if (star->parsed()) run_star(common, ab_a, ab_b, ab_hbar, ab_order, false);
        if (bracket->parsed()) run_star(common, ab_a, ab_b, ab_hbar, ab_order, true);
        if (deco->parsed()) {
            da.common = common;
            run_decohere(da);
        }
        if (cbuild->parsed()) run_charts_build(common, charts_config);
        if (cverify->parsed()) run_charts_verify(common, charts_atlas);
        if (classical->parsed()) run_classical(common, classical_config);
        if (billiard->parsed()) {
            ba.common = common;
            run_billiard(ba);
        }
        if (walk->parsed()) run_walkthrough(common, walk_scenario);
    } catch (const IoError& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 4;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid input: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical contract violation: %s\n", e.what());
        return 3;
    }
    return 0;
}
