#include "qcl/billiard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qcl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Barrier profile in u = s/d: V0 u^4/(1-u)^2, so V(0)=V'(0)=0 and the
// barrier diverges at full depth u=1.
double profile(double u, double v0) {
    if (u <= 0) return 0;
    if (u >= 1) return kInf;
    double r = 1 - u;
    return v0 * u * u * u * u / (r * r);
}

double profile_d1(double u, double v0, double d) {
    if (u <= 0) return 0;
    if (u >= 1) return kInf;
    double r = 1 - u;
    return v0 / d * u * u * u * (4 - 2 * u) / (r * r * r);
}

double profile_d2(double u, double v0, double d) {
    if (u <= 0) return 0;
    if (u >= 1) return kInf;
    double r = 1 - u;
    return v0 / (d * d) * 2 * u * u * (6 - 4 * u + u * u) / (r * r * r * r);
}

// Penetration depths into the five wall zones, in the fixed order
// lower, vertical-left, upper, vertical-right, disc.
struct Zones {
    double s[5];
};

Zones zones_at(const BilliardSpec& sp, double qx, double qy) {
    Zones z;
    double d = sp.wall_width;
    z.s[0] = (d - sp.ly) - qy;
    z.s[1] = (d - sp.lx) - qx;
    z.s[2] = qy - (sp.ly - d);
    z.s[3] = qx - (sp.lx - d);
    if (sp.radius > 0) {
        double ux = qx - sp.corner()[0], uy = qy - sp.corner()[1];
        z.s[4] = (sp.radius + d) - std::hypot(ux, uy);
    } else {
        z.s[4] = -1;
    }
    return z;
}

struct Mat2 {
    double xx = 0, xy = 0, yy = 0;
};

// Potential, force and Hessian in one pass.
void wall_terms(const BilliardSpec& sp, double qx, double qy, double* v,
                std::array<double, 2>* f, Mat2* k) {
    double d = sp.wall_width, v0 = sp.barrier_height();
    Zones z = zones_at(sp, qx, qy);
    if (v) *v = 0;
    if (f) *f = {0, 0};
    if (k) *k = {};
    // flat walls act along one axis each
    struct Flat {
        int zone, axis;
        double sign;  // direction of increasing penetration
    };
    const Flat flats[4] = {{0, 1, -1}, {1, 0, -1}, {2, 1, 1}, {3, 0, 1}};
    for (const Flat& w : flats) {
        double s = z.s[w.zone];
        if (s <= 0) continue;
        double u = s / d;
        if (v) *v += profile(u, v0);
        if (f) (*f)[w.axis] -= w.sign * profile_d1(u, v0, d);
        if (k) (w.axis == 0 ? k->xx : k->yy) += profile_d2(u, v0, d);
    }
    if (z.s[4] > 0) {
        double ux = qx - sp.corner()[0], uy = qy - sp.corner()[1];
        double r = std::hypot(ux, uy);
        double u = z.s[4] / d;
        if (v) *v += profile(u, v0);
        if (r > 0) {
            double rx = ux / r, ry = uy / r;
            double dv = profile_d1(u, v0, d);  // dV/ds, s decreasing in r
            if (f) {
                (*f)[0] += dv * rx;
                (*f)[1] += dv * ry;
            }
            if (k) {
                double d2 = profile_d2(u, v0, d), tang = dv / r;
                k->xx += d2 * rx * rx + tang * (1 - rx * rx);
                k->xy += (d2 - tang) * rx * ry;
                k->yy += d2 * ry * ry + tang * (1 - ry * ry);
            }
        }
    }
}

double angle_between(double ax, double ay, double bx, double by) {
    return std::abs(std::atan2(ax * by - ay * bx, ax * bx + ay * by));
}

}  // namespace

void BilliardSpec::validate() const {
    if (!(lx > 0) || !(ly > 0)) throw std::invalid_argument("BilliardSpec: half-widths must be > 0");
    if (radius < 0) throw std::invalid_argument("BilliardSpec: negative radius");
    if (radius >= std::min(lx, ly))
        throw std::invalid_argument("BilliardSpec: disc must fit inside the rectangle");
    double cap = radius > 0 ? radius / 2 : std::min(lx, ly) / 2;
    if (!(wall_width > 0) || wall_width >= cap)
        throw std::invalid_argument("BilliardSpec: wall width out of range");
    if (!(energy_scale > 0)) throw std::invalid_argument("BilliardSpec: energy scale must be > 0");
}

double billiard_potential(const BilliardSpec& spec, double qx, double qy) {
    spec.validate();
    double v;
    wall_terms(spec, qx, qy, &v, nullptr, nullptr);
    return v;
}

std::array<double, 2> billiard_force(const BilliardSpec& spec, double qx, double qy) {
    std::array<double, 2> f;
    wall_terms(spec, qx, qy, nullptr, &f, nullptr);
    return f;
}

DomainLabel billiard_domain(const BilliardSpec& spec, double qx, double qy, bool* overlap) {
    Zones z = zones_at(spec, qx, qy);
    double thr = spec.wall_width / 100;
    int best = -1, active = 0;
    for (int i = 0; i < 5; ++i) {
        if (z.s[i] <= thr) continue;
        ++active;
        if (best < 0 || z.s[i] > z.s[best]) best = i;
    }
    if (overlap) *overlap = active > 1;
    static const DomainLabel map[5] = {DomainLabel::D1, DomainLabel::D2, DomainLabel::D3,
                                       DomainLabel::D2, DomainLabel::D4};
    return best < 0 ? DomainLabel::D0 : map[best];
}

BilliardTrajectory simulate_billiard(const BilliardSpec& spec, const PhasePoint& start,
                                     double t_end, double dt, double record_dt,
                                     double drift_abort) {
    spec.validate();
    if (start.size() != 4) throw std::invalid_argument("simulate_billiard: need (qx,qy,px,py)");
    if (!(dt > 0) || !(t_end >= 0)) throw std::invalid_argument("simulate_billiard: bad times");
    double qx = start[0], qy = start[1], px = start[2], py = start[3];
    if (billiard_potential(spec, qx, qy) != 0)
        throw std::invalid_argument("simulate_billiard: start must be in the interior");
    double ke = 0.5 * (px * px + py * py);
    if (ke >= spec.barrier_height())
        throw std::invalid_argument("simulate_billiard: energy above the wall cap");

    BilliardTrajectory out;
    out.spec = spec;
    double h0 = ke;  // V(start) = 0
    double scale = std::max(std::abs(h0), 1e-12);
    long nsteps = std::lround(t_end / dt);
    long every = record_dt > 0 ? std::max(1l, std::lround(record_dt / dt)) : 1;

    auto record = [&](long step) {
        BilliardSample s;
        s.t = step * dt;
        s.x = {qx, qy, px, py};
        s.domain = billiard_domain(spec, qx, qy, &s.overlap);
        double v;
        wall_terms(spec, qx, qy, &v, nullptr, nullptr);
        s.H = 0.5 * (px * px + py * py) + v;
        s.px = px;
        s.py = py;
        s.ptheta = (qx - spec.corner()[0]) * py - (qy - spec.corner()[1]) * px;
        double drift = std::abs(s.H - h0) / scale;
        out.energy_drift = std::max(out.energy_drift, drift);
        if (drift > drift_abort)
            throw std::runtime_error("simulate_billiard: energy drift " + std::to_string(drift) +
                                     " at t=" + std::to_string(s.t) +
                                     "; step too large for the wall stiffness (dt=" +
                                     std::to_string(dt) + ")");
        out.samples.push_back(std::move(s));
    };

    record(0);
    std::array<double, 2> f = billiard_force(spec, qx, qy);
    for (long i = 1; i <= nsteps; ++i) {
        px += 0.5 * dt * f[0];
        py += 0.5 * dt * f[1];
        qx += dt * px;
        qy += dt * py;
        f = billiard_force(spec, qx, qy);
        px += 0.5 * dt * f[0];
        py += 0.5 * dt * f[1];
        if (i % every == 0 || i == nsteps) record(i);
    }
    return out;
}

SpecularReport specular_limit(BilliardSpec spec, const PhasePoint& start,
                              const std::vector<double>& d_values) {
    if (start.size() != 4) throw std::invalid_argument("specular_limit: need (qx,qy,px,py)");
    if (d_values.empty()) throw std::invalid_argument("specular_limit: empty d list");
    for (std::size_t i = 0; i + 1 < d_values.size(); ++i)
        if (!(d_values[i] > d_values[i + 1]) || !(d_values[i + 1] > 0))
            throw std::invalid_argument("specular_limit: d values must be positive decreasing");

    double q0x = start[0], q0y = start[1], px = start[2], py = start[3];
    double speed = std::hypot(px, py);
    if (speed == 0) throw std::invalid_argument("specular_limit: zero velocity");

    // hard-wall oracle: first boundary hit along the launch ray
    double t_hit = kInf;
    double nx = 0, ny = 0;  // inward normal at the hit point
    auto consider = [&](double t, double cnx, double cny) {
        if (t > 1e-12 && t < t_hit) {
            t_hit = t;
            nx = cnx;
            ny = cny;
        }
    };
    if (px > 0) consider((spec.lx - q0x) / px, -1, 0);
    if (px < 0) consider((-spec.lx - q0x) / px, 1, 0);
    if (py > 0) consider((spec.ly - q0y) / py, 0, -1);
    if (py < 0) consider((-spec.ly - q0y) / py, 0, 1);
    if (spec.radius > 0) {
        double cx = spec.corner()[0], cy = spec.corner()[1];
        double ox = q0x - cx, oy = q0y - cy;
        double b = ox * px + oy * py;
        double c = ox * ox + oy * oy - spec.radius * spec.radius;
        double disc = b * b - speed * speed * c;
        if (disc > 0) {
            double t = (-b - std::sqrt(disc)) / (speed * speed);
            if (t > 1e-12 && t < t_hit) {
                t_hit = t;
                double hx = ox + t * px, hy = oy + t * py;
                nx = hx / spec.radius;
                ny = hy / spec.radius;
            }
        }
    }
    if (!std::isfinite(t_hit)) throw std::runtime_error("specular_limit: launch ray hits nothing");
    double bx = q0x + t_hit * px, by = q0y + t_hit * py;
    double dot = px * nx + py * ny;
    double ux = px - 2 * dot * nx, uy = py - 2 * dot * ny;  // ideal outgoing direction

    SpecularReport rep;
    rep.d_values = d_values;
    for (double d : d_values) {
        spec.wall_width = d;
        spec.validate();
        // free flight is exact, so jump to just outside the zone band
        double vn = std::max(std::abs(dot), 0.1 * speed);  // normal approach speed
        double t_enter = std::max(0.0, t_hit - 3 * d / vn);
        double qx = q0x + t_enter * px, qy = q0y + t_enter * py;
        double vx = px, vy = py;
        double dt = d / (2000 * speed);
        std::array<double, 2> f = billiard_force(spec, qx, qy);
        bool entered = false;
        long budget = std::lround((t_hit - t_enter + 10 * d / vn + 0.5) / dt);
        long step = 0;
        for (; step < budget; ++step) {
            vx += 0.5 * dt * f[0];
            vy += 0.5 * dt * f[1];
            qx += dt * vx;
            qy += dt * vy;
            f = billiard_force(spec, qx, qy);
            vx += 0.5 * dt * f[0];
            vy += 0.5 * dt * f[1];
            double v;
            wall_terms(spec, qx, qy, &v, nullptr, nullptr);
            if (v > 0) entered = true;
            else if (entered && (vx * nx + vy * ny) > 0)
                break;  // back in the interior, heading away from the wall
        }
        if (step >= budget)
            throw std::runtime_error("specular_limit: bounce not completed within time budget");
        double dir_err = angle_between(vx, vy, ux, uy);
        // perpendicular miss of the outgoing ray at the oracle bounce point
        double vs = std::hypot(vx, vy);
        double offset = std::abs((bx - qx) * vy / vs - (by - qy) * vx / vs);
        rep.errors.push_back(dir_err + offset / std::hypot(bx - q0x, by - q0y));
    }
    rep.monotone = true;
    for (std::size_t i = 0; i + 1 < rep.errors.size(); ++i)
        if (!(rep.errors[i + 1] < rep.errors[i])) rep.monotone = false;
    return rep;
}

LyapunovResult lyapunov(const BilliardSpec& spec, const PhasePoint& start, double t_end,
                        double dt, int blocks) {
    spec.validate();
    if (start.size() != 4) throw std::invalid_argument("lyapunov: need (qx,qy,px,py)");
    if (!(t_end > 0) || !(dt > 0) || blocks < 2) throw std::invalid_argument("lyapunov: bad args");
    double qx = start[0], qy = start[1], px = start[2], py = start[3];
    if (billiard_potential(spec, qx, qy) != 0)
        throw std::invalid_argument("lyapunov: start must be in the interior");

    double wx = 0.6, wy = 0.8, wpx = 0.0, wpy = 0.0;  // unit tangent vector
    long nsteps = std::lround(t_end / dt);
    long renorm = std::max(1l, std::lround(0.25 / dt));
    long discard = nsteps / 10;  // transient
    std::vector<double> logs;
    double pending = 0;

    std::array<double, 2> f;
    Mat2 k;
    wall_terms(spec, qx, qy, nullptr, &f, &k);
    for (long i = 1; i <= nsteps; ++i) {
        px += 0.5 * dt * f[0];
        py += 0.5 * dt * f[1];
        wpx -= 0.5 * dt * (k.xx * wx + k.xy * wy);
        wpy -= 0.5 * dt * (k.xy * wx + k.yy * wy);
        qx += dt * px;
        qy += dt * py;
        wx += dt * wpx;
        wy += dt * wpy;
        wall_terms(spec, qx, qy, nullptr, &f, &k);
        px += 0.5 * dt * f[0];
        py += 0.5 * dt * f[1];
        wpx -= 0.5 * dt * (k.xx * wx + k.xy * wy);
        wpy -= 0.5 * dt * (k.xy * wx + k.yy * wy);
        if (i % renorm == 0) {
            double n = std::sqrt(wx * wx + wy * wy + wpx * wpx + wpy * wpy);
            if (!(n > 0) || !std::isfinite(n))
                throw std::runtime_error("lyapunov: tangent vector degenerated");
            wx /= n;
            wy /= n;
            wpx /= n;
            wpy /= n;
            if (i > discard)
                logs.push_back(std::log(n));
            else
                pending += std::log(n);  // discarded transient
        }
    }
    (void)pending;
    if (static_cast<int>(logs.size()) < blocks)
        throw std::runtime_error("lyapunov: too few renormalizations for block averaging");

    double span = renorm * dt;
    std::size_t per = logs.size() / blocks;
    std::vector<double> rates;
    for (int b = 0; b < blocks; ++b) {
        double s = 0;
        for (std::size_t j = b * per; j < (b + 1) * per; ++j) s += logs[j];
        rates.push_back(s / (per * span));
    }
    double mean = 0;
    for (double r : rates) mean += r;
    mean /= blocks;
    double var = 0;
    for (double r : rates) var += (r - mean) * (r - mean);
    var /= (blocks - 1);
    // convergence trend between the two halves contributes to the error
    // bar: a slowly decaying local rate (zero-exponent case) is then
    // honestly consistent with 0
    int half = blocks / 2;
    double first = 0, second = 0;
    for (int b = 0; b < half; ++b) first += rates[b];
    for (int b = blocks - half; b < blocks; ++b) second += rates[b];
    double trend = (first - second) / half;
    return {mean, std::sqrt(var / blocks + 0.25 * trend * trend)};
}

}  // namespace qcl
