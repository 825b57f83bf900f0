#include "qcl/vanhove.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qcl {

namespace {
constexpr double kPi = std::numbers::pi;
}

VanHoveKernel::VanHoveKernel(OmegaGrid g, int charts_, int m_dim_, double hbar_)
    : grid(g), charts(charts_), m_dim(m_dim_), hbar(hbar_) {
    grid.validate();
    if (charts < 1) throw std::invalid_argument("VanHoveKernel: charts must be >= 1");
    if (m_dim < 1) throw std::invalid_argument("VanHoveKernel: m_dim must be >= 1");
    if (hbar <= 0) throw std::invalid_argument("VanHoveKernel: hbar must be > 0");
    std::size_t mm = static_cast<std::size_t>(m_dim) * m_dim;
    singular.assign(static_cast<std::size_t>(charts) * grid.count * mm, 0.0);
    regular.assign(static_cast<std::size_t>(charts) * grid.count * grid.count * mm, 0.0);
}

std::size_t VanHoveKernel::sing_index(int c, int w, int m, int mp) const {
    return ((static_cast<std::size_t>(c) * grid.count + w) * m_dim + m) * m_dim + mp;
}

std::size_t VanHoveKernel::reg_index(int c, int w, int wp, int m, int mp) const {
    return (((static_cast<std::size_t>(c) * grid.count + w) * grid.count + wp) * m_dim + m) *
               m_dim + mp;
}

bool VanHoveKernel::same_shape(const VanHoveKernel& o) const {
    return grid == o.grid && charts == o.charts && m_dim == o.m_dim && hbar == o.hbar;
}

double VanHoveKernel::selfadjoint_defect() const {
    double d = 0;
    for (int c = 0; c < charts; ++c) {
        for (int w = 0; w < grid.count; ++w)
            for (int m = 0; m < m_dim; ++m)
                for (int mp = 0; mp < m_dim; ++mp)
                    d = std::max(d, std::abs(sing(c, w, m, mp) - std::conj(sing(c, w, mp, m))));
        for (int w = 0; w < grid.count; ++w)
            for (int wp = 0; wp < grid.count; ++wp)
                for (int m = 0; m < m_dim; ++m)
                    for (int mp = 0; mp < m_dim; ++mp)
                        d = std::max(d, std::abs(reg(c, w, wp, m, mp) -
                                                 std::conj(reg(c, wp, w, mp, m))));
    }
    return d;
}

double VanHoveKernel::regular_l1() const {
    double s = 0;
    for (int c = 0; c < charts; ++c)
        for (int w = 0; w < grid.count; ++w)
            for (int wp = 0; wp < grid.count; ++wp)
                for (int m = 0; m < m_dim; ++m)
                    for (int mp = 0; mp < m_dim; ++mp)
                        s += std::abs(reg(c, w, wp, m, mp)) * grid.weight(w) * grid.weight(wp);
    return s;
}

void VanHoveObservable::validate(double tol) const {
    if (selfadjoint_defect() > tol)
        throw std::invalid_argument("VanHoveObservable: self-adjointness violated");
    if (!std::isfinite(regular_l1()))
        throw std::invalid_argument("VanHoveObservable: regular kernel not integrable");
}

double VanHoveState::total_probability() const {
    double p = 0;
    for (int c = 0; c < charts; ++c)
        for (int w = 0; w < grid.count; ++w)
            for (int m = 0; m < m_dim; ++m) p += sing(c, w, m, m).real() * grid.weight(w);
    return p;
}

void VanHoveState::validate(double tol) const {
    if (selfadjoint_defect() > 1e-8)
        throw std::invalid_argument("VanHoveState: hermiticity violated");
    for (int c = 0; c < charts; ++c)
        for (int w = 0; w < grid.count; ++w)
            for (int m = 0; m < m_dim; ++m) {
                cplx d = sing(c, w, m, m);
                if (std::abs(d.imag()) > tol || d.real() < -tol)
                    throw std::invalid_argument("VanHoveState: diagonal not real non-negative");
            }
    if (std::abs(total_probability() - 1.0) > tol)
        throw std::invalid_argument("VanHoveState: total probability differs from 1");
}

double PointerTransform::unitarity_defect() const {
    double d = 0;
    for (int c = 0; c < charts; ++c)
        for (int w = 0; w < grid.count; ++w)
            for (int a = 0; a < m_dim; ++a)
                for (int b = 0; b < m_dim; ++b) {
                    cplx s = 0;
                    for (int m = 0; m < m_dim; ++m) s += at(c, w, a, m) * std::conj(at(c, w, b, m));
                    d = std::max(d, std::abs(s - (a == b ? 1.0 : 0.0)));
                }
    return d;
}

namespace {

void check_resolution(const VanHoveKernel& k, double t) {
    if (k.grid.spacing() * std::abs(t) / k.hbar > kPi / 4 + 1e-12)
        throw std::invalid_argument(
            "mean_value: omega resolution too coarse for this time (dw*|t|/hbar > pi/4)");
}

}  // namespace

MeanValueParts mean_value_parts(const VanHoveState& rho, const VanHoveObservable& obs, double t) {
    if (!rho.same_shape(obs)) throw std::invalid_argument("mean_value: shape mismatch");
    check_resolution(rho, t);
    const OmegaGrid& g = rho.grid;
    MeanValueParts out{0.0, 0.0};
    for (int c = 0; c < rho.charts; ++c) {
        for (int w = 0; w < g.count; ++w)
            for (int m = 0; m < rho.m_dim; ++m)
                for (int mp = 0; mp < rho.m_dim; ++mp)
                    out.singular +=
                        std::conj(rho.sing(c, w, m, mp)) * obs.sing(c, w, m, mp) * g.weight(w);
        for (int w = 0; w < g.count; ++w)
            for (int wp = 0; wp < g.count; ++wp) {
                double ph = (g.omega(w) - g.omega(wp)) * t / rho.hbar;
                cplx e(std::cos(ph), std::sin(ph));
                cplx s = 0;
                for (int m = 0; m < rho.m_dim; ++m)
                    for (int mp = 0; mp < rho.m_dim; ++mp)
                        s += std::conj(rho.reg(c, w, wp, m, mp)) * obs.reg(c, w, wp, m, mp);
                out.regular += e * s * g.weight(w) * g.weight(wp);
            }
    }
    return out;
}

cplx mean_value(const VanHoveState& rho, const VanHoveObservable& obs, double t) {
    return mean_value_parts(rho, obs, t).total();
}

double regular_envelope(const VanHoveState& rho, const VanHoveObservable& obs, double t) {
    return std::abs(mean_value_parts(rho, obs, t).regular);
}

VanHoveState weak_limit(const VanHoveState& rho) {
    VanHoveState out = rho;
    std::fill(out.regular.begin(), out.regular.end(), cplx(0.0));
    return out;
}

VanHoveState evolve(const VanHoveState& rho, double t) {
    VanHoveState out = rho;
    const OmegaGrid& g = rho.grid;
    for (int c = 0; c < rho.charts; ++c)
        for (int w = 0; w < g.count; ++w)
            for (int wp = 0; wp < g.count; ++wp) {
                double ph = (g.omega(w) - g.omega(wp)) * t / rho.hbar;
                cplx e(std::cos(ph), std::sin(ph));
                for (int m = 0; m < rho.m_dim; ++m)
                    for (int mp = 0; mp < rho.m_dim; ++mp)
                        out.reg(c, w, wp, m, mp) = e * rho.reg(c, w, wp, m, mp);
            }
    return out;
}

namespace {

// Cyclic Jacobi diagonalization of a Hermitian n x n matrix (row-major).
// Returns eigenvalues in eval and eigenvectors as columns of V.
void jacobi_hermitian(std::vector<cplx> a, int n, std::vector<double>& eval,
                      std::vector<cplx>& V) {
    auto A = [&](int i, int j) -> cplx& { return a[static_cast<std::size_t>(i) * n + j]; };
    V.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) V[static_cast<std::size_t>(i) * n + i] = 1.0;
    auto Vat = [&](int i, int j) -> cplx& { return V[static_cast<std::size_t>(i) * n + j]; };

    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off = std::max(off, std::abs(A(p, q)));
        if (off < 1e-15) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                cplx apq = A(p, q);
                if (std::abs(apq) < 1e-300) continue;
                double app = A(p, p).real(), aqq = A(q, q).real();
                // unitary 2x2 rotation [[c, -conj(s)], [s, c]] eliminating apq
                double theta = 0.5 * std::atan2(2 * std::abs(apq), aqq - app);
                double c = std::cos(theta);
                cplx u = apq / std::abs(apq);
                cplx s = std::sin(theta) * u;
                for (int k = 0; k < n; ++k) {
                    cplx akp = A(k, p), akq = A(k, q);
                    A(k, p) = c * akp - std::conj(s) * akq;
                    A(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    cplx apk = A(p, k), aqk = A(q, k);
                    A(p, k) = c * apk - s * aqk;
                    A(q, k) = std::conj(s) * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    cplx vkp = Vat(k, p), vkq = Vat(k, q);
                    Vat(k, p) = c * vkp - std::conj(s) * vkq;
                    Vat(k, q) = s * vkp + c * vkq;
                }
            }
    }
    eval.resize(n);
    for (int i = 0; i < n; ++i) eval[i] = A(i, i).real();
}

}  // namespace

PointerBasisResult pointer_basis(const VanHoveState& rho, double herm_tol) {
    const OmegaGrid& g = rho.grid;
    const int n = rho.m_dim;
    PointerBasisResult out{PointerTransform{g, rho.charts, n, {}}, rho};
    out.transform.u.assign(static_cast<std::size_t>(rho.charts) * g.count * n * n, 0.0);

    for (int c = 0; c < rho.charts; ++c)
        for (int w = 0; w < g.count; ++w) {
            std::vector<cplx> block(static_cast<std::size_t>(n) * n);
            double defect = 0;
            for (int m = 0; m < n; ++m)
                for (int mp = 0; mp < n; ++mp) {
                    block[static_cast<std::size_t>(m) * n + mp] = rho.sing(c, w, m, mp);
                    defect = std::max(defect, std::abs(rho.sing(c, w, m, mp) -
                                                       std::conj(rho.sing(c, w, mp, m))));
                }
            if (defect > herm_tol)
                throw std::invalid_argument("pointer_basis: singular kernel not Hermitian");

            std::vector<double> eval;
            std::vector<cplx> V;
            jacobi_hermitian(block, n, eval, V);

            // descending eigenvalues, stable under ties
            std::vector<int> order(n);
            for (int i = 0; i < n; ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(),
                             [&](int a, int b) { return eval[a] > eval[b]; });

            // phase fixing: largest-magnitude component real positive
            std::vector<cplx> U(static_cast<std::size_t>(n) * n);
            for (int p = 0; p < n; ++p) {
                int src = order[p];
                int best = 0;
                double bm = -1;
                for (int m = 0; m < n; ++m) {
                    double mag = std::abs(V[static_cast<std::size_t>(m) * n + src]);
                    if (mag > bm + 1e-14) {
                        bm = mag;
                        best = m;
                    }
                }
                cplx pivot = V[static_cast<std::size_t>(best) * n + src];
                cplx phase = (std::abs(pivot) > 0) ? std::abs(pivot) / pivot : cplx(1.0);
                for (int m = 0; m < n; ++m)
                    U[static_cast<std::size_t>(m) * n + p] =
                        V[static_cast<std::size_t>(m) * n + src] * phase;
            }
            for (int m = 0; m < n; ++m)
                for (int p = 0; p < n; ++p)
                    out.transform.u[out.transform.index(c, w, m, p)] =
                        U[static_cast<std::size_t>(m) * n + p];

            for (int p = 0; p < n; ++p)
                for (int pp = 0; pp < n; ++pp)
                    out.state.sing(c, w, p, pp) =
                        (p == pp) ? cplx(eval[order[p]]) : cplx(0.0);
        }

    // regular kernel: rho'(w,w')_{pp'} = sum_{mm'} conj(U(w)_{mp}) rho(w,w')_{mm'} U(w')_{m'p'}
    for (int c = 0; c < rho.charts; ++c)
        for (int w = 0; w < g.count; ++w)
            for (int wp = 0; wp < g.count; ++wp)
                for (int p = 0; p < n; ++p)
                    for (int pp = 0; pp < n; ++pp) {
                        cplx s = 0;
                        for (int m = 0; m < n; ++m)
                            for (int mp = 0; mp < n; ++mp)
                                s += std::conj(out.transform.at(c, w, m, p)) *
                                     rho.reg(c, w, wp, m, mp) * out.transform.at(c, wp, mp, pp);
                        out.state.reg(c, w, wp, p, pp) = s;
                    }
    return out;
}

VanHoveState m_trace(const VanHoveState& rho, int r_dim, int m_dim) {
    if (r_dim < 1 || m_dim < 1 || r_dim * m_dim != rho.m_dim)
        throw std::invalid_argument("m_trace: dimensions do not factor the composite index");
    VanHoveState out(rho.grid, rho.charts, r_dim, rho.hbar);
    auto comp = [&](int r, int m) { return r * m_dim + m; };
    for (int c = 0; c < rho.charts; ++c) {
        for (int w = 0; w < rho.grid.count; ++w)
            for (int r = 0; r < r_dim; ++r)
                for (int rp = 0; rp < r_dim; ++rp) {
                    cplx s = 0;
                    for (int m = 0; m < m_dim; ++m) s += rho.sing(c, w, comp(r, m), comp(rp, m));
                    out.sing(c, w, r, rp) = s;
                }
        for (int w = 0; w < rho.grid.count; ++w)
            for (int wp = 0; wp < rho.grid.count; ++wp)
                for (int r = 0; r < r_dim; ++r)
                    for (int rp = 0; rp < r_dim; ++rp) {
                        cplx s = 0;
                        for (int m = 0; m < m_dim; ++m)
                            s += rho.reg(c, w, wp, comp(r, m), comp(rp, m));
                        out.reg(c, w, wp, r, rp) = s;
                    }
    }
    return out;
}

double decoherence_time(const VanHoveState& rho, const VanHoveObservable& obs, double threshold,
                        const DecoherenceOptions& opt) {
    if (!(threshold > 0 && threshold < 1))
        throw std::invalid_argument("decoherence_time: threshold must be in (0,1)");
    double e0 = regular_envelope(rho, obs, 0.0);
    if (e0 <= 0)
        throw std::invalid_argument("decoherence_time: regular contribution vanishes at t=0");
    double horizon = opt.horizon > 0 ? opt.horizon
                                     : kPi * rho.hbar / (4 * rho.grid.spacing());
    double t0 = opt.t0 > 0 ? opt.t0 : rho.hbar / rho.grid.omega_max;
    double target = threshold * e0;

    double lo = 0.0, hi = -1.0;
    for (double t = t0; t <= horizon * (1 + 1e-12); t *= 2) {
        if (regular_envelope(rho, obs, t) < target) {
            hi = t;
            break;
        }
        lo = t;
    }
    if (hi < 0 && regular_envelope(rho, obs, horizon) < target) {
        lo = std::min(lo, horizon);
        hi = horizon;
    }
    if (hi < 0)
        throw std::runtime_error("decoherence_time: no decay below threshold within horizon");
    for (int it = 0; it < 80 && (hi - lo) > 1e-12 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        if (regular_envelope(rho, obs, mid) < target)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace qcl
