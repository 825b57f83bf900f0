#include "qcl/phasespace.hpp"

#include <algorithm>
#include <cmath>

#include "qcl/simd.hpp"

namespace qcl {

double SymplecticForm::lower(int a, int b) const {
    if (a < dof && b >= dof && b - dof == a) return 1.0;
    if (a >= dof && b < dof && a - dof == b) return -1.0;
    return 0.0;
}

double SymplecticForm::upper(int a, int b) const {
    if (a < dof && b >= dof && b - dof == a) return -1.0;
    if (a >= dof && b < dof && a - dof == b) return 1.0;
    return 0.0;
}

PhaseGrid::PhaseGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || axes_.size() % 2 != 0)
        throw std::invalid_argument("PhaseGrid: need an even, positive number of axes");
    size_ = 1;
    strides_.resize(axes_.size());
    // row-major: last axis fastest
    for (int a = naxes() - 1; a >= 0; --a) {
        axes_[a].validate();
        strides_[a] = size_;
        size_ *= axes_[a].count;
    }
}

std::size_t PhaseGrid::flat(const std::vector<int>& idx) const {
    std::size_t f = 0;
    for (int a = 0; a < naxes(); ++a) f += static_cast<std::size_t>(idx[a]) * strides_[a];
    return f;
}

std::vector<int> PhaseGrid::unflat(std::size_t f) const {
    std::vector<int> idx(naxes());
    for (int a = 0; a < naxes(); ++a) {
        idx[a] = static_cast<int>(f / strides_[a]);
        f %= strides_[a];
    }
    return idx;
}

PhasePoint PhaseGrid::node(std::size_t f) const {
    auto idx = unflat(f);
    PhasePoint x(naxes());
    for (int a = 0; a < naxes(); ++a) x[a] = axes_[a].coord(idx[a]);
    return x;
}

bool PhaseGrid::operator==(const PhaseGrid& o) const {
    if (naxes() != o.naxes()) return false;
    for (int a = 0; a < naxes(); ++a) {
        const Axis &x = axes_[a], &y = o.axes_[a];
        if (x.count != y.count || x.periodic != y.periodic || x.min != y.min || x.max != y.max)
            return false;
    }
    return true;
}

bool PhaseGrid::contains(const PhasePoint& x) const {
    for (int a = 0; a < naxes(); ++a)
        if (x[a] < axes_[a].min - 1e-12 || x[a] > axes_[a].max + 1e-12) return false;
    return true;
}

PhaseFunction::PhaseFunction(PhaseGrid grid, std::vector<cplx> values,
                             std::optional<Poly> exact_form)
    : grid_(std::move(grid)), values_(std::move(values)), exact_(std::move(exact_form)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("PhaseFunction: values shape does not match grid");
}

PhaseFunction PhaseFunction::from_poly(const PhaseGrid& grid, const Poly& poly) {
    if (poly.dof() != grid.dof())
        throw std::invalid_argument("PhaseFunction::from_poly: dof mismatch");
    std::vector<cplx> v(grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) v[f] = poly.eval(grid.node(f));
    return PhaseFunction(grid, std::move(v), poly);
}

PhaseFunction PhaseFunction::sample(const PhaseGrid& grid,
                                    const std::function<double(const PhasePoint&)>& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
    return PhaseFunction(grid, std::move(v));
}

PhaseFunction PhaseFunction::sample_complex(const PhaseGrid& grid,
                                            const std::function<cplx(const PhasePoint&)>& f) {
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid.node(i));
    return PhaseFunction(grid, std::move(v));
}

cplx PhaseFunction::interpolate(const PhasePoint& x) const {
    const int na = grid_.naxes();
    std::vector<int> base(na);
    std::vector<double> frac(na);
    for (int a = 0; a < na; ++a) {
        const Axis& ax = grid_.axis(a);
        double u = (x[a] - ax.min) / ax.spacing();
        if (ax.periodic) {
            double span = ax.count;  // wrap in index space
            u = std::fmod(u, span);
            if (u < 0) u += span;
            base[a] = static_cast<int>(u) % ax.count;
            frac[a] = u - std::floor(u);
        } else {
            if (u <= 0) {
                base[a] = 0;
                frac[a] = 0;
            } else if (u >= ax.count - 1) {
                base[a] = ax.count - 2;
                frac[a] = 1;
            } else {
                base[a] = static_cast<int>(u);
                frac[a] = u - base[a];
            }
        }
    }
    cplx acc = 0;
    const int corners = 1 << na;
    std::vector<int> idx(na);
    for (int c = 0; c < corners; ++c) {
        double w = 1;
        for (int a = 0; a < na; ++a) {
            int hi = (c >> a) & 1;
            w *= hi ? frac[a] : (1 - frac[a]);
            int i = base[a] + hi;
            if (grid_.axis(a).periodic) i %= grid_.axis(a).count;
            idx[a] = i;
        }
        if (w != 0) acc += w * values_[grid_.flat(idx)];
    }
    return acc;
}

PhaseFunction PhaseFunction::derivative(int axis) const {
    const Axis& ax = grid_.axis(axis);
    if (ax.count < 3)
        throw std::invalid_argument("derivative: fewer than 3 nodes on axis");
    if (exact_) {
        return PhaseFunction::from_poly(grid_, exact_->derivative(axis));
    }
    const double h = ax.spacing();
    std::vector<cplx> out(grid_.size());
    const std::size_t s = grid_.stride(axis);
    const int n = ax.count;
    for (std::size_t f = 0; f < grid_.size(); ++f) {
        int i = static_cast<int>((f / s) % static_cast<std::size_t>(n));
        if (ax.periodic) {
            std::size_t fp = f + ((i + 1) % n - i) * s;
            std::size_t fm = f + ((i - 1 + n) % n - i) * s;
            out[f] = (values_[fp] - values_[fm]) / (2 * h);
        } else if (i == 0) {
            out[f] = (-3.0 * values_[f] + 4.0 * values_[f + s] - values_[f + 2 * s]) / (2 * h);
        } else if (i == n - 1) {
            out[f] = (3.0 * values_[f] - 4.0 * values_[f - s] + values_[f - 2 * s]) / (2 * h);
        } else {
            out[f] = (values_[f + s] - values_[f - s]) / (2 * h);
        }
    }
    return PhaseFunction(grid_, std::move(out));
}

double PhaseFunction::max_abs() const {
    double m = 0;
    for (const cplx& v : values_) m = std::max(m, std::abs(v));
    return m;
}

double PhaseFunction::max_imag() const {
    double m = 0;
    for (const cplx& v : values_) m = std::max(m, std::abs(v.imag()));
    return m;
}

bool PhaseFunction::is_real(double tol) const {
    return max_imag() <= tol * std::max(1e-300, max_abs());
}

PhaseFunction poisson_bracket(const PhaseFunction& f, const PhaseFunction& g) {
    if (f.exact_form() && g.exact_form()) {
        Poly b = poisson_bracket(*f.exact_form(), *g.exact_form());
        return PhaseFunction::from_poly(f.grid(), b);
    }
    if (!(f.grid() == g.grid()))
        throw std::invalid_argument("poisson_bracket: grid mismatch");
    const int d = f.grid().dof();
    std::vector<cplx> out(f.grid().size(), 0.0);
    for (int j = 0; j < d; ++j) {
        PhaseFunction fq = f.derivative(j), gp = g.derivative(d + j);
        PhaseFunction fp = f.derivative(d + j), gq = g.derivative(j);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += fq.at(i) * gp.at(i) - fp.at(i) * gq.at(i);
    }
    return PhaseFunction(f.grid(), std::move(out));
}

cplx integrate_phase(const PhaseFunction& f, const std::optional<Box>& region) {
    const PhaseGrid& g = f.grid();
    const int na = g.naxes();
    if (region) {
        for (int a = 0; a < na; ++a) {
            if (region->lo[a] < g.axis(a).min - 1e-12 || region->hi[a] > g.axis(a).max + 1e-12)
                throw std::invalid_argument("integrate_phase: region outside grid bounds");
        }
    }
    // per-axis trapezoid weights (uniform on periodic axes), restricted to
    // the region by zeroing nodes outside it
    std::vector<std::vector<double>> w(na);
    for (int a = 0; a < na; ++a) {
        const Axis& ax = g.axis(a);
        w[a].assign(ax.count, ax.spacing());
        if (!ax.periodic) {
            w[a].front() *= 0.5;
            w[a].back() *= 0.5;
        }
        if (region) {
            for (int i = 0; i < ax.count; ++i) {
                double c = ax.coord(i);
                if (c < region->lo[a] - 1e-12 || c > region->hi[a] + 1e-12) w[a][i] = 0;
            }
        }
    }
    std::vector<double> re(g.size()), im(g.size());
    for (std::size_t fl = 0; fl < g.size(); ++fl) {
        auto idx = g.unflat(fl);
        double wt = 1;
        for (int a = 0; a < na; ++a) wt *= w[a][idx[a]];
        re[fl] = f.at(fl).real() * wt;
        im[fl] = f.at(fl).imag() * wt;
    }
    return {simd::pairwise_sum(re.data(), re.size()), simd::pairwise_sum(im.data(), im.size())};
}

HamiltonianFlow::HamiltonianFlow(const PhaseFunction& H)
    : dof_(H.grid().dof()), H_(H), grid_backed_(!H.exact_form().has_value()) {
    if (H.exact_form()) {
        poly_ = H.exact_form();
        for (int a = 0; a < 2 * dof_; ++a) poly_grads_.push_back(poly_->derivative(a));
    } else {
        for (int a = 0; a < 2 * dof_; ++a) grid_grads_.push_back(H.derivative(a));
    }
}

std::vector<double> HamiltonianFlow::rhs(const PhasePoint& x) const {
    std::vector<double> r(2 * dof_);
    if (poly_) {
        for (int j = 0; j < dof_; ++j) {
            r[j] = poly_grads_[dof_ + j].eval(x).real();          // dq/dt = dH/dp
            r[dof_ + j] = -poly_grads_[j].eval(x).real();         // dp/dt = -dH/dq
        }
    } else {
        if (!H_.grid().contains(x)) throw DomainExit(0.0);
        for (int j = 0; j < dof_; ++j) {
            r[j] = grid_grads_[dof_ + j].interpolate(x).real();
            r[dof_ + j] = -grid_grads_[j].interpolate(x).real();
        }
    }
    return r;
}

double HamiltonianFlow::energy(const PhasePoint& x) const {
    if (poly_) return poly_->eval(x).real();
    return H_.interpolate(x).real();
}

std::vector<double> HamiltonianFlow::dHdq(const PhasePoint& x) const {
    if (grid_backed_ && !H_.grid().contains(x)) throw DomainExit(0.0);
    std::vector<double> r(dof_);
    for (int j = 0; j < dof_; ++j)
        r[j] = poly_ ? poly_grads_[j].eval(x).real() : grid_grads_[j].interpolate(x).real();
    return r;
}

std::vector<double> HamiltonianFlow::dHdp(const PhasePoint& x) const {
    if (grid_backed_ && !H_.grid().contains(x)) throw DomainExit(0.0);
    std::vector<double> r(dof_);
    for (int j = 0; j < dof_; ++j)
        r[j] = poly_ ? poly_grads_[dof_ + j].eval(x).real()
                     : grid_grads_[dof_ + j].interpolate(x).real();
    return r;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

using Vec = std::vector<double>;

Vec axpy(const Vec& x, double h, std::initializer_list<std::pair<double, const Vec*>> ks) {
    Vec r = x;
    for (auto& [c, k] : ks)
        for (std::size_t i = 0; i < r.size(); ++i) r[i] += h * c * (*k)[i];
    return r;
}

// One adaptive RK45 step (h may be negative); updates x, t, h.
void rk45_step(const HamiltonianFlow& flow, Vec& x, double& t, double& h, double t_end,
               double tol) {
    const double dir = t_end >= t ? 1.0 : -1.0;
    for (int tries = 0; tries < 60; ++tries) {
        if (dir * (t + h) > dir * t_end) h = t_end - t;
        Vec k1 = flow.rhs(x);
        Vec k2 = flow.rhs(axpy(x, h, {{a21, &k1}}));
        Vec k3 = flow.rhs(axpy(x, h, {{a31, &k1}, {a32, &k2}}));
        Vec k4 = flow.rhs(axpy(x, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        Vec k5 = flow.rhs(axpy(x, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        Vec k6 = flow.rhs(
            axpy(x, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        Vec x5 = axpy(x, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        Vec k7 = flow.rhs(x5);
        double err = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                            e7 * k7[i]);
            double sc = tol * (1.0 + std::max(std::abs(x[i]), std::abs(x5[i])));
            err = std::max(err, std::abs(e) / sc);
        }
        if (err <= 1.0) {
            t += h;
            x = x5;
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
            return;
        }
        h *= std::max(0.1, 0.9 * std::pow(err, -0.2));
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
            throw std::runtime_error("hamilton_flow: step-size underflow");
    }
    throw std::runtime_error("hamilton_flow: adaptive step failed to converge");
}

// Strang-split (kick-drift-kick) order-2 step.
void strang_step(const HamiltonianFlow& flow, Vec& x, double dt) {
    const int d = static_cast<int>(x.size()) / 2;
    Vec gq = flow.dHdq(x);
    for (int j = 0; j < d; ++j) x[d + j] -= 0.5 * dt * gq[j];
    Vec gp = flow.dHdp(x);
    for (int j = 0; j < d; ++j) x[j] += dt * gp[j];
    gq = flow.dHdq(x);
    for (int j = 0; j < d; ++j) x[d + j] -= 0.5 * dt * gq[j];
}

// Yoshida triple-jump composition of Strang steps (4th order, symplectic).
void leapfrog_step(const HamiltonianFlow& flow, Vec& x, double dt) {
    static const double cbrt2 = std::cbrt(2.0);
    static const double w1 = 1.0 / (2.0 - cbrt2);
    static const double w0 = -cbrt2 * w1;
    strang_step(flow, x, w1 * dt);
    strang_step(flow, x, w0 * dt);
    strang_step(flow, x, w1 * dt);
}

}  // namespace

Trajectory hamilton_flow(const PhaseFunction& H, const PhasePoint& start, double t_end,
                         double dt, Integrator integrator, const FlowOptions& opt) {
    if (dt <= 0) throw std::invalid_argument("hamilton_flow: dt must be > 0");
    HamiltonianFlow flow(H);
    Trajectory traj;
    Vec x = start;
    double t = 0;
    auto record = [&](double tt, const Vec& xx) {
        traj.times.push_back(tt);
        traj.states.push_back(xx);
        traj.energy.push_back(flow.energy(xx));
    };
    record(0.0, x);
    double next_record = opt.record_dt > 0 ? opt.record_dt : 0.0;
    try {
        if (integrator == Integrator::adaptive) {
            double h = dt;
            while (t < t_end - 1e-14) {
                rk45_step(flow, x, t, h, t_end, opt.tol);
                if (opt.record_dt <= 0 || t >= next_record - 1e-12 || t >= t_end - 1e-14) {
                    record(t, x);
                    next_record += opt.record_dt;
                }
            }
        } else {
            long nfull = static_cast<long>(std::floor(t_end / dt + 1e-12));
            double rem = t_end - nfull * dt;
            long rec_every =
                opt.record_dt > 0 ? std::max(1L, static_cast<long>(opt.record_dt / dt)) : 1;
            for (long s = 0; s < nfull; ++s) {
                leapfrog_step(flow, x, dt);
                t = (s + 1) * dt;
                if ((s + 1) % rec_every == 0 || (s + 1 == nfull && rem <= 1e-12)) record(t, x);
            }
            if (rem > 1e-12) {
                leapfrog_step(flow, x, rem);
                t = t_end;
                record(t, x);
            }
        }
    } catch (const DomainExit&) {
        throw DomainExit(t);
    }
    return traj;
}

PhasePoint flow_to(const HamiltonianFlow& flow, PhasePoint x, double t_end, double dt,
                   Integrator integrator, double tol) {
    double t = 0;
    const double dir = t_end >= 0 ? 1.0 : -1.0;
    if (integrator == Integrator::adaptive) {
        double h = dt * dir;
        while (dir * (t_end - t) > 1e-14) rk45_step(flow, x, t, h, t_end, tol);
    } else {
        long nsteps = static_cast<long>(std::ceil(std::abs(t_end) / dt - 1e-12));
        for (long s = 0; s < nsteps; ++s) leapfrog_step(flow, x, dir * dt);
    }
    return x;
}

}  // namespace qcl
