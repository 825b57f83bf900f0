// End-to-end acceptance gate: eleven numbered checks, one PASS/FAIL
// line each, nonzero exit when any fail. Each check is self-contained
// and prints its wall time.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "qcl/billiard.hpp"
#include "qcl/charts.hpp"
#include "qcl/classical.hpp"
#include "qcl/rng.hpp"
#include "qcl/stats.hpp"
#include "qcl/vanhove.hpp"
#include "qcl/weylwigner.hpp"

using namespace qcl;

namespace {

constexpr double kPi = std::numbers::pi;

int failures = 0;

struct Criterion {
    int id;
    const char* label;
    std::vector<std::string> notes;
    bool ok = true;

    void check(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back(what);
        }
    }
    void expect_near(double got, double want, double tol, const std::string& what) {
        check(std::abs(got - want) <= tol,
              what + ": got " + std::to_string(got) + ", want " + std::to_string(want) +
                  " +/- " + std::to_string(tol));
    }
};

void run(int id, const char* label, const std::function<void(Criterion&)>& body) {
    Criterion c{id, label};
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.notes.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %2d %s (%.1f s)\n", c.ok ? "PASS" : "FAIL", id, label, secs);
    for (const std::string& n : c.notes) std::printf("       - %s\n", n.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
}

Poly powp(const Poly& b, int n) {
    Poly r = Poly::constant(1.0, b.dof());
    for (int i = 0; i < n; ++i) r = r * b;
    return r;
}

Poly ho1() { return (powp(Poly::q(), 2) + powp(Poly::p(), 2)) * cplx(0.5); }

OperatorMatrix projector(int dim, double dq, double hbar,
                         const std::function<double(double)>& wave) {
    OperatorMatrix rho(dim, dq, 0.0, hbar);
    std::vector<double> psi(dim);
    double s2 = 0;
    for (int i = 0; i < dim; ++i) {
        psi[i] = wave(rho.position(i));
        s2 += psi[i] * psi[i];
    }
    for (double& x : psi) x /= std::sqrt(s2);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) rho.at(i, j) = psi[i] * psi[j];
    return rho;
}

OperatorMatrix random_hermitian(int dim, double dq, double hbar, CounterRng& rng) {
    OperatorMatrix a(dim, dq, 0.0, hbar);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j <= i; ++j) {
            cplx v(rng.normal(), i == j ? 0.0 : rng.normal());
            a.at(i, j) = v;
            a.at(j, i) = std::conj(v);
        }
    return a;
}

struct VhPair {
    VanHoveState rho;
    VanHoveObservable obs;
};

// Single-chart m_dim=1 pair: regular product conj(rho)*obs carries a
// prescribed nu profile under a narrow ridge in (w + w')/2.
VhPair factorized_pair(const OmegaGrid& g, double hbar,
                       const std::function<double(double)>& rho_nu,
                       const std::function<double(double)>& obs_nu) {
    VhPair out{VanHoveState(g, 1, 1, hbar), VanHoveObservable(g, 1, 1, hbar)};
    double center = 0.5 * g.omega_max;
    double norm = 0;
    for (int w = 0; w < g.count; ++w) {
        double n = std::exp(-0.5 * (g.omega(w) - center) * (g.omega(w) - center));
        out.rho.sing(0, w, 0, 0) = n;
        norm += n * g.weight(w);
        out.obs.sing(0, w, 0, 0) = 1.0;
    }
    for (int w = 0; w < g.count; ++w) out.rho.sing(0, w, 0, 0) /= norm;
    for (int w = 0; w < g.count; ++w)
        for (int wp = 0; wp < g.count; ++wp) {
            double nu = g.omega(w) - g.omega(wp);
            double mid = 0.5 * (g.omega(w) + g.omega(wp));
            double env = std::exp(-0.5 * (mid - center) * (mid - center));
            out.rho.reg(0, w, wp, 0, 0) = env * rho_nu(nu);
            out.obs.reg(0, w, wp, 0, 0) = env * obs_nu(nu);
        }
    out.rho.validate();
    out.obs.validate();
    return out;
}

VanHoveState random_state(const OmegaGrid& g, int charts, int m_dim, double hbar,
                          CounterRng& rng) {
    VanHoveState rho(g, charts, m_dim, hbar);
    auto crand = [&] { return cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)); };
    for (int c = 0; c < charts; ++c) {
        for (int w = 0; w < g.count; ++w) {
            std::vector<cplx> b(static_cast<std::size_t>(m_dim) * m_dim);
            for (cplx& z : b) z = crand();
            for (int m = 0; m < m_dim; ++m)
                for (int mp = 0; mp < m_dim; ++mp) {
                    cplx s = 0;
                    for (int k = 0; k < m_dim; ++k)
                        s += b[static_cast<std::size_t>(m) * m_dim + k] *
                             std::conj(b[static_cast<std::size_t>(mp) * m_dim + k]);
                    rho.sing(c, w, m, mp) = s;
                }
        }
        for (int w = 0; w < g.count; ++w)
            for (int wp = 0; wp <= w; ++wp)
                for (int m = 0; m < m_dim; ++m)
                    for (int mp = 0; mp < m_dim; ++mp) {
                        cplx z = (w == wp && m == mp) ? cplx(rng.uniform(-1, 1)) : crand();
                        rho.reg(0, w, wp, m, mp) = z;
                        rho.reg(0, wp, w, mp, m) = std::conj(z);
                    }
    }
    double p = rho.total_probability();
    for (cplx& z : rho.singular) z /= p;
    for (cplx& z : rho.regular) z /= p;
    rho.validate();
    return rho;
}

// chi-square p for an ensemble against the density's multilinear
// interpolant; expected masses accumulated cell by cell, cells never
// straddle bins.
double fp_pvalue(const ClassicalDensity& rho, const std::vector<PhasePoint>& pts, int bins) {
    const PhaseGrid& g = rho.function.grid();
    double qlo = g.axis(0).min, qhi = g.axis(0).max;
    double plo = g.axis(1).min, phi = g.axis(1).max;
    std::vector<double> mass(static_cast<std::size_t>(bins) * bins, 0.0);
    double total = 0;
    for (int i = 0; i + 1 < g.axis(0).count; ++i)
        for (int j = 0; j + 1 < g.axis(1).count; ++j) {
            double w = rho.function.at(g.flat({i, j})).real() +
                       rho.function.at(g.flat({i + 1, j})).real() +
                       rho.function.at(g.flat({i, j + 1})).real() +
                       rho.function.at(g.flat({i + 1, j + 1})).real();
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
    const double n = static_cast<double>(pts.size());
    double chi2 = 0, pool_exp = 0, pool_obs = 0;
    int used = 0;
    for (std::size_t b = 0; b < mass.size(); ++b) {
        double e = mass[b] * n;
        if (e >= 10) {
            chi2 += (obs[b] - e) * (obs[b] - e) / e;
            ++used;
        } else {
            pool_exp += e;
            pool_obs += obs[b];
        }
    }
    if (pool_exp >= 10) {
        chi2 += (pool_obs - pool_exp) * (pool_obs - pool_exp) / pool_exp;
        ++used;
    }
    return chi_square_pvalue(chi2, used - 1);
}

// Maximal runs of a constant, non-overlap domain label.
struct Segment {
    DomainLabel domain;
    std::size_t first, last;
};

std::vector<Segment> segments(const BilliardTrajectory& tr) {
    std::vector<Segment> out;
    for (std::size_t i = 0; i < tr.samples.size(); ++i) {
        if (tr.samples[i].overlap) continue;
        if (!out.empty() && out.back().domain == tr.samples[i].domain &&
            out.back().last + 1 == i) {
            out.back().last = i;
        } else {
            out.push_back({tr.samples[i].domain, i, i});
        }
    }
    return out;
}

double seg_drift(const BilliardTrajectory& tr, const Segment& s, double BilliardSample::*member,
                 bool interior_only) {
    double ref = 0, drift = 0;
    bool have_ref = false;
    for (std::size_t i = s.first; i <= s.last; ++i) {
        const BilliardSample& smp = tr.samples[i];
        if (interior_only &&
            billiard_potential(tr.spec, smp.x[0], smp.x[1]) != 0.0)
            continue;
        if (!have_ref) {
            ref = smp.*member;
            have_ref = true;
        }
        drift = std::max(drift, std::abs(smp.*member - ref));
    }
    return drift;
}

}  // namespace

int main() {
    // 1: canonical pairs deform exactly by i hbar
    run(1, "canonical deformation q*p - p*q = i hbar", [](Criterion& c) {
        for (double hbar : {0.01, 0.1, 1.0}) {
            Poly q = Poly::q(), p = Poly::p();
            Poly comm = star_product(q, p, hbar, 8) - star_product(p, q, hbar, 8);
            c.check(comm.max_coeff_diff(Poly::constant(cplx(0, hbar))) == 0.0,
                    "polynomial backend not exact at hbar=" + std::to_string(hbar));

            PhaseGrid g({Axis{-2, 2, 33}, Axis{-2, 2, 33}});
            PhaseFunction fq = PhaseFunction::sample(g, [](const PhasePoint& x) { return x[0]; });
            PhaseFunction fp = PhaseFunction::sample(g, [](const PhasePoint& x) { return x[1]; });
            fq.drop_exact_form();
            fp.drop_exact_form();
            PhaseFunction qp = star_product(fq, fp, hbar, 4);
            PhaseFunction pq = star_product(fp, fq, hbar, 4);
            double worst = 0;
            for (std::size_t i = 0; i < g.size(); ++i)
                worst = std::max(worst, std::abs(qp.at(i) - pq.at(i) - cplx(0, hbar)));
            c.check(worst <= 1e-8 * hbar,
                    "grid backend defect " + std::to_string(worst / hbar) + " relative");
        }
    });

    // 2: hbar^2 scaling of the Moyal corrections
    run(2, "classical-limit scaling slopes are 2", [](Criterion& c) {
        Poly q = Poly::q(), p = Poly::p();
        Poly q3 = powp(q, 3), p3 = powp(p, 3);
        Poly poisson = powp(q, 2) * powp(p, 2) * cplx(9.0);  // {q^3, p^3}
        Poly H = powp(q, 2) + powp(p, 2);
        Poly H2 = H * H;
        std::vector<double> lh, lmb, lst;
        for (double hbar = 1e-3; hbar <= 0.1 + 1e-12; hbar *= 2) {
            Poly dmb = moyal_bracket(q3, p3, hbar, 10) - poisson;
            Poly dst = star_product(H, H2, hbar, 10) - H * H2;
            lh.push_back(std::log(hbar));
            lmb.push_back(std::log(dmb.max_coeff()));
            lst.push_back(std::log(dst.max_coeff()));
        }
        c.expect_near(fit_slope(lh, lmb), 2.0, 0.1, "Moyal-vs-Poisson slope");
        c.expect_near(fit_slope(lh, lst), 2.0, 0.1, "commuting star-product slope");
    });

    // 3: trace pairing across the transform
    run(3, "trace pairing quantum vs phase space", [](Criterion& c) {
        CounterRng rng(7771, 0);
        for (int t = 0; t < 20; ++t) {
            OperatorMatrix a = random_hermitian(65, 0.2, 1.0, rng);
            OperatorMatrix b = random_hermitian(65, 0.2, 1.0, rng);
            TracePairing r = trace_pairing(a, b);
            c.check(r.discrepancy <= 1e-6 * std::abs(r.quantum),
                    "pair " + std::to_string(t) + " discrepancy " +
                        std::to_string(r.discrepancy / std::abs(r.quantum)));
        }
        for (double hbar : {1.0, 0.5}) {
            OperatorMatrix rho =
                projector(129, 0.125, hbar,
                          [hbar](double x) { return std::exp(-x * x / (2 * hbar)); });
            OperatorMatrix H = weyl_quantize(ho1(), 129, 0.125, 0.0, hbar);
            TracePairing tp = trace_pairing(rho, H);
            c.expect_near(tp.quantum, 0.5 * hbar, 1e-4, "oscillator ground-state energy");
            c.expect_near(tp.classical, 0.5 * hbar, 1e-4, "phase-space pairing");
        }
    });

    // 4: self-induced decoherence laws
    run(4, "decoherence envelope and time laws", [](Criterion& c) {
        const OmegaGrid grid{16.0, 201};
        const double hbar = 1.0, sigma = 0.5;
        VhPair pg = factorized_pair(
            grid, hbar, [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); },
            [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); });
        double env0 = regular_envelope(pg.rho, pg.obs, 0.0);
        cplx sing0 = mean_value_parts(pg.rho, pg.obs, 0.0).singular;
        double t_floor = hbar / sigma * std::sqrt(2 * std::log(1e3));
        for (int k = 1; k <= 40; ++k) {
            double t = t_floor * k / 40;
            double expect = std::exp(-sigma * sigma * t * t / (2 * hbar * hbar));
            MeanValueParts mv = mean_value_parts(pg.rho, pg.obs, t);
            double env = std::abs(mv.regular) / env0;
            c.check(std::abs(env - expect) <= 0.02 * expect,
                    "gaussian envelope at t=" + std::to_string(t) + ": " + std::to_string(env) +
                        " vs " + std::to_string(expect));
            c.check(mv.singular == sing0, "singular part changed at t=" + std::to_string(t));
        }

        const double gamma = 1.0, theta = 0.1;
        VhPair pl = factorized_pair(
            grid, hbar, [&](double nu) { return gamma * gamma / (nu * nu + gamma * gamma); },
            [&](double) { return 1.0; });
        double td = decoherence_time(pl.rho, pl.obs, theta);
        double law = (hbar / gamma) * std::log(1 / theta);
        c.check(std::abs(td - law) <= 0.05 * law,
                "lorentzian decoherence time " + std::to_string(td) + " vs " +
                    std::to_string(law));
    });

    // 5: pointer basis diagonalizes and reconstructs
    run(5, "pointer basis reconstruction", [](Criterion& c) {
        OmegaGrid g{4.0, 64};
        CounterRng rng(907, 0);
        const int m = 4;
        VanHoveState rho = random_state(g, 1, m, 1.0, rng);
        PointerBasisResult res = pointer_basis(rho);
        c.check(res.transform.unitarity_defect() < 1e-12, "transform not unitary");
        try {
            res.state.validate(1e-9);
        } catch (const std::exception& e) {
            c.check(false, std::string("transformed state invalid: ") + e.what());
        }
        double worst = 0, offdiag = 0;
        for (int w = 0; w < g.count; ++w)
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) {
                    if (a != b) offdiag = std::max(offdiag, std::abs(res.state.sing(0, w, a, b)));
                    cplx s = 0;
                    for (int p = 0; p < m; ++p)
                        s += res.transform.at(0, w, a, p) * res.state.sing(0, w, p, p) *
                             std::conj(res.transform.at(0, w, b, p));
                    worst = std::max(worst, std::abs(s - rho.sing(0, w, a, b)));
                }
        c.check(offdiag <= 1e-10, "residual off-diagonal " + std::to_string(offdiag));
        c.check(worst <= 1e-10, "reconstruction defect " + std::to_string(worst));
    });

    // 6: local constants by characteristics
    run(6, "transport residuals and Lipschitz gate", [](Criterion& c) {
        {
            PhaseGrid g({Axis{-1, 1, 257}, Axis{0.5, 1.5, 257}});
            PhaseFunction H = PhaseFunction::from_poly(g, powp(Poly::p(), 2) * cplx(0.5));
            SeedSpec spec{{0, 0.0}, [](const PhasePoint& x) { return x[1]; }, nullptr};
            TransportResult tr = transport_constant(H, spec);
            c.check(tr.unreached == 0, "free particle left unreached nodes");
            c.check(tr.residual <= 1e-6,
                    "free particle residual " + std::to_string(tr.residual));
        }
        {
            // oscillator on a half-plane chart, seeded from the p axis
            PhaseGrid g({Axis{-0.5, 0.5, 257}, Axis{2.5, 3.5, 257}});
            PhaseFunction H = PhaseFunction::from_poly(g, ho1());
            SeedSpec spec{{0, 0.0}, [](const PhasePoint& x) { return x[1]; },
                          [](const PhasePoint& x) { return x[1] > 0; }};
            TransportResult tr = transport_constant(H, spec);
            c.check(tr.unreached == 0, "oscillator chart left unreached nodes");
            c.check(tr.residual <= 1e-6,
                    "oscillator chart residual " + std::to_string(tr.residual));
        }
        {
            std::vector<Axis> axes = {Axis{-0.5, 0.5, 17}, Axis{-0.5, 0.5, 17},
                                      Axis{0.7, 1.3, 17}, Axis{0.7, 1.3, 17}};
            PhaseGrid g{axes};
            Poly h = Poly::constant(0.0, 2);
            for (int v = 0; v < 4; ++v) h += powp(Poly::variable(v, 2), 2) * cplx(0.5);
            PhaseFunction H = PhaseFunction::from_poly(g, h);
            SeedSpec spec{{0, 0.0},
                          [](const PhasePoint& x) { return 0.5 * (x[1] * x[1] + x[3] * x[3]); },
                          [](const PhasePoint& x) { return x[2] > 0; }};
            TransportOptions opt;
            opt.probe_dt = 0.25;
            opt.t_max = 8;
            Chart ch = build_involutive_set(H, {spec}, 0, 1e-6, opt);
            c.check(ch.bracket_residuals[1] <= 1e-6,
                    "2-DOF bracket residual " + std::to_string(ch.bracket_residuals[1]));
        }
        {
            std::vector<Axis> axes4(4, Axis{-1, 1, 9});
            PhaseGrid g{axes4};
            PhaseFunction bad = PhaseFunction::sample(g, [](const PhasePoint& x) {
                return 0.5 * (x[2] * x[2] + x[3] * x[3]) + 1.0 / (x[0] - x[1]);
            });
            c.check(!lipschitz_check(bad).ok, "singular potential accepted");
            Poly h2 = (powp(Poly::p(0, 2), 2) + powp(Poly::p(1, 2), 2)) * cplx(0.5) +
                      powp(Poly::q(0, 2) - Poly::q(1, 2), 2);
            LipschitzReport good = lipschitz_check(PhaseFunction::from_poly(g, h2));
            c.check(good.ok && std::abs(good.bound - 2.0) < 1e-6,
                    "quadratic interaction rejected");
        }
    });

    // 7: partition of identity and frontier overlap scaling
    run(7, "bump partition and overlap exponent", [](Criterion& c) {
        std::vector<Box> tiles = {Box{{-1, -1}, {0, 0}}, Box{{0, -1}, {1, 0}},
                                  Box{{-1, 0}, {0, 1}}, Box{{0, 0}, {1, 1}}};
        Atlas atlas = build_partition(tiles, 0.15, 1e-4, 1.0);
        CounterRng rng(313, 0);
        double defect = 0;
        for (int k = 0; k < 10000; ++k) {
            PhasePoint x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
            double s = 0;
            for (int ch = 0; ch < 4; ++ch) s += atlas.bump(ch).value(x);
            defect = std::max(defect, std::abs(s - 1.0));
        }
        c.check(defect <= 1e-12, "partition defect " + std::to_string(defect));

        PhaseGrid g{{Axis{-1, 1, 4097}, Axis{0, 1, 3}}};
        PhaseFunction A =
            PhaseFunction::sample(g, [](const PhasePoint& x) { return std::exp(-x[0] * x[0]); });
        std::vector<Box> halves = {Box{{-1, 0}, {0, 1}}, Box{{0, 0}, {1, 1}}};
        std::vector<double> le, lo;
        for (double eps : {0.025, 0.05, 0.1, 0.2}) {
            Atlas two = build_partition(halves, eps, 1e-6, 1.0);
            double ov = cross_overlap(localize(A, two, 0), localize(A, two, 1));
            le.push_back(std::log(eps));
            lo.push_back(std::log(ov));
        }
        // overlap exponent 2(N+1) with N = 0
        c.expect_near(fit_slope(le, lo), 2.0, 0.2, "overlap exponent");
    });

    // 8: classical limit density
    run(8, "classical density invariants and recombination", [](Criterion& c) {
        PhaseGrid g({Axis{-2, 2, 257}, Axis{-2, 2, 257}});
        const double eta = 0.08;
        Atlas full = build_partition({Box{{-2, -2}, {2, 2}}}, 0.2, 1e-4, 1.0);
        full.charts[0].constants.push_back(PhaseFunction::from_poly(g, ho1()));
        MicroVolume vol = config_volume(full.charts[0], {1.0}, 400000, 21, eta);
        ClassicalDensity rho =
            classical_density(full, {LevelSpec{0, {1.0}, 1.0}}, {vol}, eta, g);
        double min = 0;
        for (std::size_t f = 0; f < g.size(); ++f)
            min = std::min(min, rho.function.real_at(f));
        c.check(min >= -1e-12, "density minimum " + std::to_string(min));
        c.expect_near(integrate_phase(rho.function).real(), 1.0, 1e-3, "normalization");

        // angular sectors: theta = pi left half, 2 pi - theta right half;
        // sector-volume recombination must match the full-shell density
        Chart left;
        left.box = Box{{-2, -2}, {0, 2}};
        left.constants.push_back(PhaseFunction::from_poly(
            PhaseGrid({Axis{-2, 0, 129}, Axis{-2, 2, 257}}), ho1()));
        Chart right;
        right.box = Box{{0, -2}, {2, 2}};
        right.constants.push_back(PhaseFunction::from_poly(
            PhaseGrid({Axis{0, 2, 129}, Axis{-2, 2, 257}}), ho1()));
        MicroVolume vl = config_volume(left, {1.0}, 400000, 31, eta);
        MicroVolume vr = config_volume(right, {1.0}, 400000, 32, eta);
        double err = 3 * std::sqrt(vl.mc_error * vl.mc_error + vr.mc_error * vr.mc_error +
                                   vol.mc_error * vol.mc_error);
        c.check(std::abs(vl.volume + vr.volume - vol.volume) <= err,
                "sector volumes " + std::to_string(vl.volume) + " + " +
                    std::to_string(vr.volume) + " vs " + std::to_string(vol.volume) +
                    " (3 sigma = " + std::to_string(err) + ")");
        // with exact half sectors each volume is theta = pi
        c.check(std::abs(vl.volume - kPi) <= 3 * vl.mc_error + 0.05,
                "left sector measure " + std::to_string(vl.volume));

        // contrast: the first excited oscillator state has a genuinely
        // negative Wigner symbol region
        OperatorMatrix exc = projector(129, 0.125, 1.0, [](double q) {
            return q * std::exp(-q * q / 2);
        });
        WignerSymbol W = wigner_symb(exc, SymbolKind::state);
        double wmin = 0;
        for (std::size_t f = 0; f < W.function.grid().size(); ++f)
            wmin = std::min(wmin, W.function.at(f).real());
        c.check(wmin < -0.01, "excited-state symbol minimum " + std::to_string(wmin));
    });

    // 9: Frobenius-Perron invariance of the density
    run(9, "ensemble invariance under the flow", [](Criterion& c) {
        PhaseGrid g({Axis{-2, 2, 257}, Axis{-2, 2, 257}});
        Atlas atlas = build_partition({Box{{-2, -2}, {2, 2}}}, 0.2, 1e-4, 1.0);
        PhaseFunction H = PhaseFunction::from_poly(g, ho1());
        atlas.charts[0].constants.push_back(H);
        MicroVolume vol = config_volume(atlas.charts[0], {1.0}, 400000, 21, 0.08);
        ClassicalDensity rho =
            classical_density(atlas, {LevelSpec{0, {1.0}, 1.0}}, {vol}, 0.08, g);
        for (double t : {1.0, 10.0, 100.0}) {
            auto [e0, e1] = sample_trajectories(rho, H, 100000, t, 7, 0.05);
            double p = fp_pvalue(rho, e1.points, 32);
            c.check(p > 0.01, "p = " + std::to_string(p) + " at t = " + std::to_string(t));
        }
    });

    // 10: Sinai billiard conservation, specular limit, chaos
    run(10, "billiard domains, specular limit, Lyapunov", [](Criterion& c) {
        BilliardSpec spec;  // lx = ly = 1
        spec.radius = 0.5;
        spec.wall_width = 0.15;
        const double tol_flat = 1e-5, tol_disc = 1e-4;

        auto domain_table = [&](const BilliardTrajectory& tr, Criterion& cr,
                                std::vector<bool>& seen) {
            double e0 = tr.samples.front().H;
            for (const Segment& s : segments(tr)) {
                if (s.last - s.first < 2) continue;
                seen[static_cast<int>(s.domain)] = true;
                bool interior = s.domain == DomainLabel::D0;
                double dh = seg_drift(tr, s, &BilliardSample::H, interior);
                cr.check(dh <= tol_flat * e0, "H drift " + std::to_string(dh / e0));
                switch (s.domain) {
                    case DomainLabel::D0:
                    case DomainLabel::D1:
                    case DomainLabel::D3: {
                        double d = seg_drift(tr, s, &BilliardSample::px, interior);
                        cr.check(d <= tol_flat * e0, "Px drift " + std::to_string(d / e0));
                        break;
                    }
                    case DomainLabel::D2: {
                        double d = seg_drift(tr, s, &BilliardSample::py, false);
                        cr.check(d <= tol_flat * e0, "Py drift " + std::to_string(d / e0));
                        break;
                    }
                    case DomainLabel::D4: {
                        double d = seg_drift(tr, s, &BilliardSample::ptheta, false);
                        cr.check(d <= tol_disc * e0, "Ptheta drift " + std::to_string(d / e0));
                        break;
                    }
                }
            }
        };

        std::vector<bool> seen(5, false);
        BilliardTrajectory flat =
            simulate_billiard(spec, {0.5, 0.0, 0.3, 1.0}, 50.0, 1e-5, 0.01);
        domain_table(flat, c, seen);
        BilliardTrajectory disc =
            simulate_billiard(spec, {0.0, 0.0, -0.857, -0.514}, 10.0, 1e-5, 0.01);
        domain_table(disc, c, seen);
        for (int d = 0; d < 5; ++d)
            c.check(seen[d], "domain D" + std::to_string(d) + " never visited");

        // specular limit under four halvings of the wall width
        SpecularReport sp =
            specular_limit(spec, {0.0, 0.0, 0.6, 0.8}, {0.016, 0.008, 0.004, 0.002, 0.001});
        c.check(sp.monotone, "flat-wall specular error not monotone");
        c.check(sp.errors.back() < sp.errors.front(), "flat-wall error did not shrink");
        SpecularReport sd = specular_limit(spec, {0.0, 0.0, -0.857, -0.514},
                                           {0.016, 0.008, 0.004, 0.002, 0.001});
        c.check(sd.monotone, "disc specular error not monotone");
        c.check(sd.errors.back() < sd.errors.front(), "disc error did not shrink");

        // chaos with the obstacle, none without
        BilliardSpec sinai = spec;
        sinai.radius = 0.25;
        sinai.wall_width = 0.1;
        LyapunovResult ly = lyapunov(sinai, {0.5, 0.3, 0.8, 0.6}, 1000.0, 1e-4);
        c.check(ly.lambda_max > 0 && ly.lambda_max > 5 * ly.stderr_est,
                "dispersing lambda " + std::to_string(ly.lambda_max) + " +/- " +
                    std::to_string(ly.stderr_est));
        BilliardSpec rect = spec;
        rect.ly = 0.7;
        rect.radius = 0.0;
        rect.wall_width = 0.2;
        LyapunovResult l0 = lyapunov(rect, {0.1, 0.05, 0.8, 0.6}, 4000.0, 1e-4);
        c.check(std::abs(l0.lambda_max) < 3 * l0.stderr_est,
                "integrable lambda " + std::to_string(l0.lambda_max) + " +/- " +
                    std::to_string(l0.stderr_est));

        // long-run energy conservation
        BilliardTrajectory longrun =
            simulate_billiard(spec, {0.5, 0.0, 0.3, 1.0}, 1000.0, 1e-5, 1.0);
        c.check(longrun.energy_drift <= 1e-6,
                "relative energy drift " + std::to_string(longrun.energy_drift));
    });

    // 11: m-tracing
    run(11, "partial trace oracle and traced equilibrium", [](Criterion& c) {
        OmegaGrid g{4.0, 9};
        CounterRng rng(908, 0);
        VanHoveState big = random_state(g, 1, 6, 1.0, rng);
        VanHoveState out = m_trace(big, 3, 2);
        double worst = 0;
        for (int w = 0; w < g.count; ++w)
            for (int r = 0; r < 3; ++r)
                for (int rp = 0; rp < 3; ++rp) {
                    cplx s = big.sing(0, w, 2 * r, 2 * rp) + big.sing(0, w, 2 * r + 1, 2 * rp + 1);
                    worst = std::max(worst, std::abs(out.sing(0, w, r, rp) - s));
                    for (int wp = 0; wp < g.count; ++wp) {
                        cplx t = big.reg(0, w, wp, 2 * r, 2 * rp) +
                                 big.reg(0, w, wp, 2 * r + 1, 2 * rp + 1);
                        worst = std::max(worst, std::abs(out.reg(0, w, wp, r, rp) - t));
                    }
                }
        c.check(worst <= 1e-12, "contraction oracle defect " + std::to_string(worst));
        c.check(std::abs(out.total_probability() - 1.0) <= 1e-10, "trace not preserved");

        // traced microcanonical equilibrium is flat in the ignored angle
        PhaseGrid pg({Axis{-2, 2, 257}, Axis{-2, 2, 257}});
        PhaseFunction H = PhaseFunction::from_poly(pg, ho1());
        Chart ch;
        ch.box = Box{{-2, -2}, {2, 2}};
        ch.constants.push_back(H);
        MicroVolume vol = config_volume(ch, {1.0}, 400000, 21, 0.08);
        ClassifyResult global;
        global.kind = ConstantClass::global;
        ClassicalDensity traced =
            traced_equilibrium({H}, {global}, {GlobalLevelSpec{{1.0}, 1.0}}, {vol}, 0.08, pg);
        auto [e0, e1] = sample_trajectories(traced, H, 20000, 0.0, 5150, 0.01);
        const int nb = 16;
        std::vector<double> counts(nb, 0.0);
        for (const PhasePoint& x : e0.points) {
            double th = std::atan2(x[1], x[0]) + kPi;
            counts[std::min(nb - 1, static_cast<int>(nb * th / (2 * kPi)))] += 1;
        }
        double expect = e0.points.size() / static_cast<double>(nb);
        double chi2 = 0;
        for (double n : counts) chi2 += (n - expect) * (n - expect) / expect;
        double p = chi_square_pvalue(chi2, nb - 1);
        c.check(p > 0.01, "angular flatness p = " + std::to_string(p));
    });

    if (failures) std::printf("%d criteria FAILED\n", failures);
    else std::printf("all 11 criteria passed\n");
    return failures ? 1 : 0;
}
