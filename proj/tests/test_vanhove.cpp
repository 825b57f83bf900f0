#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "qcl/rng.hpp"
#include "qcl/vanhove.hpp"

using namespace qcl;

namespace {

// Single-chart, m_dim=1 pair whose regular product conj(rho)*obs has a
// prescribed nu-profile times a narrow Gaussian in (w + w')/2 centered
// well inside [0, omega_max], so the truncated square domain does not
// distort the nu integral.
struct Pair {
    VanHoveState rho;
    VanHoveObservable obs;
};

Pair factorized_pair(const OmegaGrid& g, double hbar,
                     const std::function<double(double)>& rho_nu,
                     const std::function<double(double)>& obs_nu) {
    Pair out{VanHoveState(g, 1, 1, hbar), VanHoveObservable(g, 1, 1, hbar)};
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

cplx crand(CounterRng& rng) { return cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)); }

VanHoveState random_state(const OmegaGrid& g, int charts, int m_dim, double hbar,
                          CounterRng& rng) {
    VanHoveState rho(g, charts, m_dim, hbar);
    for (int c = 0; c < charts; ++c) {
        // Hermitian PSD singular blocks from B B^dagger
        for (int w = 0; w < g.count; ++w) {
            std::vector<cplx> b(static_cast<std::size_t>(m_dim) * m_dim);
            for (auto& z : b) z = crand(rng);
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
                        cplx z = (w == wp && m == mp) ? cplx(rng.uniform(-1, 1)) : crand(rng);
                        rho.reg(c, w, wp, m, mp) = z;
                        rho.reg(c, wp, w, mp, m) = std::conj(z);
                    }
    }
    double p = rho.total_probability();
    for (auto& z : rho.singular) z /= p;
    for (auto& z : rho.regular) z /= p;
    rho.validate();
    return rho;
}

VanHoveObservable random_observable(const OmegaGrid& g, int charts, int m_dim, double hbar,
                                    CounterRng& rng) {
    VanHoveObservable obs(g, charts, m_dim, hbar);
    for (int c = 0; c < charts; ++c) {
        for (int w = 0; w < g.count; ++w)
            for (int m = 0; m < m_dim; ++m)
                for (int mp = 0; mp <= m; ++mp) {
                    cplx z = (m == mp) ? cplx(rng.uniform(-1, 1)) : crand(rng);
                    obs.sing(c, w, m, mp) = z;
                    obs.sing(c, w, mp, m) = std::conj(z);
                }
        for (int w = 0; w < g.count; ++w)
            for (int wp = 0; wp <= w; ++wp)
                for (int m = 0; m < m_dim; ++m)
                    for (int mp = 0; mp < m_dim; ++mp) {
                        cplx z = (w == wp && m == mp) ? cplx(rng.uniform(-1, 1)) : crand(rng);
                        obs.reg(c, w, wp, m, mp) = z;
                        obs.reg(c, wp, w, mp, m) = std::conj(z);
                    }
    }
    obs.validate();
    return obs;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

const OmegaGrid kGrid{16.0, 201};  // dw = 0.08, time horizon pi/(4 dw) ~ 9.8

}  // namespace

TEST_CASE("kernel shape and validation") {
    OmegaGrid g{4.0, 9};
    CHECK_THROWS(VanHoveKernel(OmegaGrid{-1.0, 9}, 1, 1, 1.0));
    CHECK_THROWS(VanHoveKernel(OmegaGrid{4.0, 1}, 1, 1, 1.0));
    CHECK_THROWS(VanHoveKernel(g, 0, 1, 1.0));
    CHECK_THROWS(VanHoveKernel(g, 1, 0, 1.0));
    CHECK_THROWS(VanHoveKernel(g, 1, 1, 0.0));

    VanHoveKernel k(g, 2, 3, 1.0);
    CHECK(k.singular.size() == 2u * 9 * 3 * 3);
    CHECK(k.regular.size() == 2u * 9 * 9 * 3 * 3);
    CHECK(g.omega(0) == 0.0);
    CHECK(g.omega(8) == doctest::Approx(4.0));
    CHECK(g.weight(0) == doctest::Approx(0.25));
    CHECK(g.weight(4) == doctest::Approx(0.5));

    VanHoveState rho(g, 1, 2, 1.0);
    for (int w = 0; w < g.count; ++w) rho.sing(0, w, 0, 0) = 1.0;
    double p = rho.total_probability();
    CHECK(p == doctest::Approx(4.0));
    CHECK_THROWS(rho.validate());  // probability != 1
    for (auto& z : rho.singular) z /= p;
    CHECK_NOTHROW(rho.validate());

    rho.sing(0, 3, 1, 1) = cplx(0, 0.5);  // non-real diagonal
    CHECK_THROWS(rho.validate());
    rho.sing(0, 3, 1, 1) = 0.0;
    rho.sing(0, 3, 0, 1) = cplx(0.2, 0.1);  // breaks hermiticity
    CHECK_THROWS(rho.validate());
    rho.sing(0, 3, 1, 0) = cplx(0.2, -0.1);
    CHECK_NOTHROW(rho.validate());
}

TEST_CASE("mean value: singular pairing is time independent") {
    OmegaGrid g{1.0, 201};  // dw = 0.005 admits t = 100
    CounterRng rng(901, 0);
    VanHoveState rho = random_state(g, 2, 2, 1.0, rng);
    std::fill(rho.regular.begin(), rho.regular.end(), cplx(0.0));
    VanHoveObservable obs = random_observable(g, 2, 2, 1.0, rng);

    cplx v0 = mean_value(rho, obs, 0.0);
    CHECK(std::abs(mean_value(rho, obs, 10.0) - v0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(mean_value(rho, obs, 100.0) - v0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(v0.imag()) < 1e-10);  // self-adjoint pair gives a real value
}

TEST_CASE("mean value: resolution guard and shape mismatch") {
    CounterRng rng(902, 0);
    VanHoveState rho = random_state(kGrid, 1, 1, 1.0, rng);
    VanHoveObservable obs = random_observable(kGrid, 1, 1, 1.0, rng);
    CHECK_NOTHROW(mean_value(rho, obs, 9.8));
    CHECK_THROWS(mean_value(rho, obs, 10.0));  // dw * t = 0.8 > pi/4
    VanHoveObservable bad = random_observable(kGrid, 2, 1, 1.0, rng);
    CHECK_THROWS(mean_value(rho, bad, 0.0));
}

TEST_CASE("mean value: Gaussian nu profile decays as exp(-sigma^2 t^2 / 2)") {
    const double sigma = 0.5, hbar = 1.0;
    Pair pr = factorized_pair(kGrid, hbar,
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); },
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); });
    double a0 = mean_value_parts(pr.rho, pr.obs, 0.0).regular.real();
    CHECK(a0 > 0);
    for (double t = 0.5; t <= 7.5; t += 0.5) {
        double pred = std::exp(-sigma * sigma * t * t / (2 * hbar * hbar));
        if (pred < 1e-3) break;
        cplx r = mean_value_parts(pr.rho, pr.obs, t).regular;
        CHECK(std::abs(r - a0 * pred) < 0.02 * a0 * pred);
    }
}

TEST_CASE("mean value at t=0 matches a brute-force double sum") {
    OmegaGrid g{8.0, 64};
    CounterRng rng(903, 0);
    VanHoveState rho = random_state(g, 1, 2, 0.7, rng);
    VanHoveObservable obs = random_observable(g, 1, 2, 0.7, rng);

    cplx oracle = 0;
    for (int w = 0; w < g.count; ++w)
        for (int m = 0; m < 2; ++m)
            for (int mp = 0; mp < 2; ++mp)
                oracle += std::conj(rho.sing(0, w, m, mp)) * obs.sing(0, w, m, mp) * g.weight(w);
    for (int w = 0; w < g.count; ++w)
        for (int wp = 0; wp < g.count; ++wp)
            for (int m = 0; m < 2; ++m)
                for (int mp = 0; mp < 2; ++mp)
                    oracle += std::conj(rho.reg(0, w, wp, m, mp)) * obs.reg(0, w, wp, m, mp) *
                              g.weight(w) * g.weight(wp);
    CHECK(std::abs(mean_value(rho, obs, 0.0) - oracle) < 1e-10);
}

TEST_CASE("mean value is sesquilinear") {
    OmegaGrid g{4.0, 33};
    CounterRng rng(904, 0);
    VanHoveState r1 = random_state(g, 1, 2, 1.0, rng);
    VanHoveState r2 = random_state(g, 1, 2, 1.0, rng);
    VanHoveObservable o1 = random_observable(g, 1, 2, 1.0, rng);
    VanHoveObservable o2 = random_observable(g, 1, 2, 1.0, rng);

    cplx a(0.3, -0.7), b(-1.1, 0.4);
    VanHoveState mix = r1;
    for (std::size_t i = 0; i < mix.singular.size(); ++i)
        mix.singular[i] = a * r1.singular[i] + b * r2.singular[i];
    for (std::size_t i = 0; i < mix.regular.size(); ++i)
        mix.regular[i] = a * r1.regular[i] + b * r2.regular[i];
    VanHoveObservable omix = o1;
    for (std::size_t i = 0; i < omix.singular.size(); ++i)
        omix.singular[i] = a * o1.singular[i] + b * o2.singular[i];
    for (std::size_t i = 0; i < omix.regular.size(); ++i)
        omix.regular[i] = a * o1.regular[i] + b * o2.regular[i];

    double t = 0.3;
    cplx lhs = mean_value(mix, o1, t);
    cplx rhs = std::conj(a) * mean_value(r1, o1, t) + std::conj(b) * mean_value(r2, o1, t);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));
    lhs = mean_value(r1, omix, t);
    rhs = a * mean_value(r1, o1, t) + b * mean_value(r1, o2, t);
    CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));
}

TEST_CASE("weak limit: fixed point, time independence and decay bound") {
    const double sigma = 0.5;
    Pair pr = factorized_pair(kGrid, 1.0,
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); },
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); });

    VanHoveState star = weak_limit(pr.rho);
    CHECK_NOTHROW(star.validate());
    VanHoveState star2 = weak_limit(star);  // fixed point of a purely singular state
    CHECK(max_abs_diff(star.singular, star2.singular) == 0.0);
    CHECK(max_abs_diff(star.regular, star2.regular) == 0.0);

    cplx w0 = mean_value(star, pr.obs, 0.0);
    for (double t : {0.5, 2.0, 5.0, 9.5})
        CHECK(std::abs(mean_value(star, pr.obs, t) - w0) < 1e-14);

    double amp = std::abs(mean_value_parts(pr.rho, pr.obs, 0.0).regular);
    double t_star = std::sqrt(2 * std::log(amp / 1e-3)) / sigma;
    for (double t = t_star * 1.01; t < 9.5; t += 0.7)
        CHECK(std::abs(mean_value(pr.rho, pr.obs, t) - mean_value(star, pr.obs, t)) < 1e-3);
}

TEST_CASE("evolve: identity, additivity, isometry, invertibility") {
    OmegaGrid g{6.0, 49};
    CounterRng rng(905, 0);
    VanHoveState rho = random_state(g, 2, 2, 0.5, rng);

    VanHoveState e0 = evolve(rho, 0.0);
    CHECK(max_abs_diff(e0.regular, rho.regular) == 0.0);
    CHECK(max_abs_diff(e0.singular, rho.singular) == 0.0);

    VanHoveState a = evolve(evolve(rho, 1.3), 2.4);
    VanHoveState b = evolve(rho, 3.7);
    CHECK(max_abs_diff(a.regular, b.regular) < 1e-13);

    double n0 = 0, n1 = 0;
    for (std::size_t i = 0; i < rho.regular.size(); ++i) {
        n0 += std::norm(rho.regular[i]);
        n1 += std::norm(a.regular[i]);
    }
    CHECK(n1 == doctest::Approx(n0).epsilon(1e-14));

    VanHoveState back = evolve(a, -3.7);
    CHECK(max_abs_diff(back.regular, rho.regular) < 1e-14);
    CHECK(max_abs_diff(back.singular, rho.singular) == 0.0);

    VanHoveState wl = weak_limit(evolve(rho, 2.2));
    VanHoveState wr = weak_limit(rho);
    CHECK(max_abs_diff(wl.singular, wr.singular) == 0.0);
    CHECK(max_abs_diff(wl.regular, wr.regular) == 0.0);
}

TEST_CASE("Riemann-Lebesgue: envelope decays monotonically on a dyadic ladder") {
    const double sigma = 0.8;
    Pair pr = factorized_pair(kGrid, 1.0,
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); },
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); });
    VanHoveState star = weak_limit(pr.rho);
    double prev = 1e300;
    for (double t = 0.07; t < 9.0; t *= 2) {
        MeanValueParts parts = mean_value_parts(pr.rho, pr.obs, t);
        // singular contribution is bit-identical across t
        CHECK(parts.singular == mean_value_parts(pr.rho, pr.obs, 0.0).singular);
        double dev = std::abs(parts.total() - mean_value(star, pr.obs, t));
        CHECK(dev < prev);
        prev = dev;
    }
    CHECK(prev < 1e-10);
}

TEST_CASE("decoherence time: Gaussian and Lorentzian laws") {
    const double hbar = 1.0, theta = 0.1;

    double sigma = 0.5;
    Pair pg = factorized_pair(kGrid, hbar,
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); },
                              [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); });
    double td = decoherence_time(pg.rho, pg.obs, theta);
    double law = (hbar / sigma) * std::sqrt(2 * std::log(1 / theta));
    CHECK(std::abs(td - law) < 0.05 * law);

    double gamma = 1.0;
    Pair pl = factorized_pair(kGrid, hbar,
                              [&](double nu) { return gamma * gamma / (nu * nu + gamma * gamma); },
                              [&](double) { return 1.0; });
    td = decoherence_time(pl.rho, pl.obs, theta);
    law = (hbar / gamma) * std::log(1 / theta);
    CHECK(std::abs(td - law) < 0.05 * law);
}

TEST_CASE("decoherence time: tenfold width scales the time by one tenth") {
    const double hbar = 1.0, theta = 0.1;
    auto td_for = [&](double sigma) {
        Pair p = factorized_pair(kGrid, hbar,
                                 [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); },
                                 [&](double nu) { return std::exp(-nu * nu / (4 * sigma * sigma)); });
        return decoherence_time(p.rho, p.obs, theta);
    };
    double t1 = td_for(0.4), t10 = td_for(4.0);
    CHECK(std::abs(t10 - 0.1 * t1) < 0.05 * 0.1 * t1);
}

TEST_CASE("decoherence time: error cases") {
    CounterRng rng(906, 0);
    VanHoveState rho = random_state(kGrid, 1, 1, 1.0, rng);
    VanHoveObservable obs = random_observable(kGrid, 1, 1, 1.0, rng);
    CHECK_THROWS(decoherence_time(rho, obs, 0.0));
    CHECK_THROWS(decoherence_time(rho, obs, 1.0));

    VanHoveState flat(kGrid, 1, 1, 1.0);
    VanHoveObservable one(kGrid, 1, 1, 1.0);
    for (int w = 0; w < kGrid.count; ++w) {
        flat.sing(0, w, 0, 0) = 1.0 / kGrid.omega_max;
        flat.reg(0, w, w, 0, 0) = 1.0;  // only nu = 0: no oscillation, no decay
        one.sing(0, w, 0, 0) = 1.0;
        one.reg(0, w, w, 0, 0) = 1.0;
    }
    CHECK_THROWS_AS(decoherence_time(flat, one, 0.5), std::runtime_error);

    VanHoveState empty = weak_limit(flat);
    CHECK_THROWS(decoherence_time(empty, one, 0.5));  // zero regular part
}

TEST_CASE("pointer basis: diagonal input is a fixed point") {
    OmegaGrid g{2.0, 5};
    VanHoveState rho(g, 1, 2, 1.0);
    for (int w = 0; w < g.count; ++w) {
        rho.sing(0, w, 0, 0) = 0.4;
        rho.sing(0, w, 1, 1) = 0.1;
        rho.reg(0, w, (w + 1) % g.count, 0, 1) = cplx(0.2, 0.1);
        rho.reg(0, (w + 1) % g.count, w, 1, 0) = cplx(0.2, -0.1);
    }
    PointerBasisResult res = pointer_basis(rho);
    CHECK(res.transform.unitarity_defect() < 1e-12);
    for (int w = 0; w < g.count; ++w)
        for (int m = 0; m < 2; ++m)
            for (int p = 0; p < 2; ++p)
                CHECK(std::abs(res.transform.at(0, w, m, p) - (m == p ? 1.0 : 0.0)) < 1e-12);
    CHECK(max_abs_diff(res.state.singular, rho.singular) < 1e-12);
    CHECK(max_abs_diff(res.state.regular, rho.regular) < 1e-12);
}

TEST_CASE("pointer basis: symmetric 2x2 block has the closed-form rotation") {
    OmegaGrid g{2.0, 3};
    const double a = 0.35, b = 0.15;
    VanHoveState rho(g, 1, 2, 1.0);
    for (int w = 0; w < g.count; ++w) {
        rho.sing(0, w, 0, 0) = a;
        rho.sing(0, w, 1, 1) = a;
        rho.sing(0, w, 0, 1) = b;
        rho.sing(0, w, 1, 0) = b;
    }
    PointerBasisResult res = pointer_basis(rho);
    const double r = 1.0 / std::sqrt(2.0);
    for (int w = 0; w < g.count; ++w) {
        CHECK(res.state.sing(0, w, 0, 0).real() == doctest::Approx(a + b).epsilon(1e-12));
        CHECK(res.state.sing(0, w, 1, 1).real() == doctest::Approx(a - b).epsilon(1e-12));
        CHECK(std::abs(res.state.sing(0, w, 0, 1)) < 1e-12);
        CHECK(std::abs(res.transform.at(0, w, 0, 0) - r) < 1e-10);
        CHECK(std::abs(res.transform.at(0, w, 1, 0) - r) < 1e-10);
        CHECK(std::abs(res.transform.at(0, w, 0, 1) - r) < 1e-10);
        CHECK(std::abs(res.transform.at(0, w, 1, 1) + r) < 1e-10);
    }
}

TEST_CASE("pointer basis: random Hermitian blocks reconstruct and stay valid") {
    OmegaGrid g{4.0, 9};
    CounterRng rng(907, 0);
    VanHoveState rho = random_state(g, 1, 3, 1.0, rng);
    PointerBasisResult res = pointer_basis(rho);
    CHECK(res.transform.unitarity_defect() < 1e-12);
    CHECK_NOTHROW(res.state.validate(1e-9));

    for (int w = 0; w < g.count; ++w) {
        // eigenvalues descending and non-negative (PSD input)
        double prev = 1e300;
        for (int p = 0; p < 3; ++p) {
            double lam = res.state.sing(0, w, p, p).real();
            CHECK(lam >= -1e-12);
            CHECK(lam <= prev + 1e-12);
            prev = lam;
            for (int pp = 0; pp < 3; ++pp)
                if (p != pp) CHECK(std::abs(res.state.sing(0, w, p, pp)) < 1e-10);
        }
        // U diag(lambda) U^dagger reconstructs the input block
        for (int m = 0; m < 3; ++m)
            for (int mp = 0; mp < 3; ++mp) {
                cplx s = 0;
                for (int p = 0; p < 3; ++p)
                    s += res.transform.at(0, w, m, p) * res.state.sing(0, w, p, p) *
                         std::conj(res.transform.at(0, w, mp, p));
                CHECK(std::abs(s - rho.sing(0, w, m, mp)) < 1e-10);
            }
        // regular kernel conjugated consistently: U rho' U^dagger restores it
        for (int wp = 0; wp < g.count; ++wp)
            for (int m = 0; m < 3; ++m)
                for (int mp = 0; mp < 3; ++mp) {
                    cplx s = 0;
                    for (int p = 0; p < 3; ++p)
                        for (int pp = 0; pp < 3; ++pp)
                            s += res.transform.at(0, w, m, p) * res.state.reg(0, w, wp, p, pp) *
                                 std::conj(res.transform.at(0, wp, mp, pp));
                    CHECK(std::abs(s - rho.reg(0, w, wp, m, mp)) < 1e-10);
                }
    }

    VanHoveState broken = rho;
    broken.sing(0, 2, 0, 1) += cplx(0, 0.3);
    CHECK_THROWS(pointer_basis(broken));
}

TEST_CASE("m trace: product structure, identity split and contraction oracle") {
    OmegaGrid g{4.0, 9};
    CounterRng rng(908, 0);

    // rho_r (x) rho_m with unit m-weight traces back to rho_r
    VanHoveState r_part = random_state(g, 1, 2, 1.0, rng);
    std::vector<cplx> mblock = {cplx(0.6), cplx(0.1, 0.2), cplx(0.1, -0.2), cplx(0.4)};
    VanHoveState prod(g, 1, 4, 1.0);
    for (int w = 0; w < g.count; ++w)
        for (int r = 0; r < 2; ++r)
            for (int rp = 0; rp < 2; ++rp)
                for (int m = 0; m < 2; ++m)
                    for (int mp = 0; mp < 2; ++mp) {
                        cplx v = r_part.sing(0, w, r, rp) * mblock[2 * m + mp];
                        prod.sing(0, w, 2 * r + m, 2 * rp + mp) = v;
                        for (int wp = 0; wp < g.count; ++wp)
                            prod.reg(0, w, wp, 2 * r + m, 2 * rp + mp) =
                                r_part.reg(0, w, wp, r, rp) * mblock[2 * m + mp];
                    }
    VanHoveState traced = m_trace(prod, 2, 2);
    CHECK(traced.m_dim == 2);
    CHECK(max_abs_diff(traced.singular, r_part.singular) < 1e-12);
    CHECK(max_abs_diff(traced.regular, r_part.regular) < 1e-12);
    CHECK(traced.total_probability() == doctest::Approx(1.0).epsilon(1e-12));

    VanHoveState same = m_trace(r_part, 2, 1);
    CHECK(max_abs_diff(same.singular, r_part.singular) == 0.0);
    CHECK(max_abs_diff(same.regular, r_part.regular) == 0.0);

    VanHoveState big = random_state(g, 2, 6, 1.0, rng);
    VanHoveState out = m_trace(big, 3, 2);
    for (int c = 0; c < 2; ++c)
        for (int w = 0; w < g.count; ++w)
            for (int r = 0; r < 3; ++r)
                for (int rp = 0; rp < 3; ++rp) {
                    cplx s = big.sing(c, w, 2 * r, 2 * rp) + big.sing(c, w, 2 * r + 1, 2 * rp + 1);
                    CHECK(std::abs(out.sing(c, w, r, rp) - s) < 1e-12);
                }
    CHECK(out.total_probability() == doctest::Approx(1.0).epsilon(1e-10));

    VanHoveState wl = m_trace(weak_limit(big), 3, 2);
    VanHoveState lw = weak_limit(m_trace(big, 3, 2));
    CHECK(max_abs_diff(wl.singular, lw.singular) == 0.0);
    CHECK(max_abs_diff(wl.regular, lw.regular) == 0.0);

    CHECK_THROWS(m_trace(big, 4, 2));  // 8 != 6
}
