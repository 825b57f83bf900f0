#include "qcl/charts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "qcl/weylwigner.hpp"

namespace qcl {

namespace {

bool stencil_clean(const std::vector<bool>& mask, const PhaseGrid& grid, std::size_t f) {
    if (!mask[f]) return false;
    for (int a = 0; a < grid.naxes(); ++a) {
        std::size_t s = grid.stride(a);
        if (!mask[f - s] || !mask[f + s]) return false;  // caller keeps f interior
    }
    return true;
}

// max |{A, B}| over interior nodes whose central-difference stencils
// avoid unreached nodes of either field.
double bracket_max(const PhaseFunction& A, const PhaseFunction& B, const std::vector<bool>* maskA,
                   const std::vector<bool>* maskB, double interior_fraction,
                   std::size_t* argmax = nullptr) {
    const PhaseGrid& grid = A.grid();
    if (!(grid == B.grid())) throw std::invalid_argument("bracket_max: grid mismatch");
    const int d = grid.dof();
    std::vector<PhaseFunction> dA, dB;
    for (int a = 0; a < grid.naxes(); ++a) {
        dA.push_back(A.derivative(a));
        dB.push_back(B.derivative(a));
    }
    std::vector<bool> interior = interior_mask(grid, interior_fraction);
    double best = 0;
    for (std::size_t f = 0; f < grid.size(); ++f) {
        if (!interior[f]) continue;
        if (maskA && !stencil_clean(*maskA, grid, f)) continue;
        if (maskB && !stencil_clean(*maskB, grid, f)) continue;
        cplx v = 0;
        for (int i = 0; i < d; ++i)
            v += dA[i].at(f) * dB[d + i].at(f) - dA[d + i].at(f) * dB[i].at(f);
        if (std::abs(v) > best) {
            best = std::abs(v);
            if (argmax) *argmax = f;
        }
    }
    return best;
}

}  // namespace

TransportResult transport_constant(const PhaseFunction& H, const SeedSpec& spec,
                                   const TransportOptions& opt) {
    const PhaseGrid& grid = H.grid();
    const int axis = spec.surface.axis;
    if (axis < 0 || axis >= grid.naxes())
        throw std::invalid_argument("transport_constant: hypersurface axis out of range");
    if (!spec.seed) throw std::invalid_argument("transport_constant: missing seed field");
    const double sval = spec.surface.value;
    HamiltonianFlow flow(H);
    auto gate_ok = [&](const PhasePoint& x) { return !spec.gate || spec.gate(x); };

    std::vector<cplx> vals(grid.size(), 0.0);
    std::vector<bool> reached(grid.size(), false);
    int unreached = 0;

    for (std::size_t f = 0; f < grid.size(); ++f) {
        PhasePoint x0 = grid.node(f);
        if (std::abs(x0[axis] - sval) <= opt.crossing_tol && gate_ok(x0)) {
            vals[f] = spec.seed(x0);
            reached[f] = true;
            continue;
        }

        struct Walker {
            PhasePoint x;
            double s = 0;
            bool alive = true;
        };
        Walker walk[2] = {{x0, x0[axis] - sval}, {x0, x0[axis] - sval}};
        const double dirs[2] = {1.0, -1.0};
        bool assigned = false;

        const int steps = static_cast<int>(std::ceil(opt.t_max / opt.probe_dt));
        for (int k = 0; k < steps && !assigned; ++k) {
            for (int w = 0; w < 2 && !assigned; ++w) {
                if (!walk[w].alive) continue;
                PhasePoint xn;
                try {
                    xn = flow_to(flow, walk[w].x, dirs[w] * opt.probe_dt, opt.dt,
                                 Integrator::adaptive, opt.tol);
                } catch (const DomainExit&) {
                    walk[w].alive = false;
                    continue;
                }
                double sn = xn[axis] - sval;
                if (walk[w].s * sn <= 0.0 && walk[w].s != sn) {
                    // refine the crossing inside this probe segment
                    double tlo = 0, thi = dirs[w] * opt.probe_dt;
                    PhasePoint xc = sn == 0.0 ? xn : walk[w].x;
                    double sc = sn == 0.0 ? 0.0 : walk[w].s;
                    for (int it = 0; it < 80 && std::abs(sc) > opt.crossing_tol; ++it) {
                        double tm = 0.5 * (tlo + thi);
                        PhasePoint xm =
                            flow_to(flow, walk[w].x, tm, opt.dt, Integrator::adaptive, opt.tol);
                        double sm = xm[axis] - sval;
                        if (walk[w].s * sm <= 0.0) {
                            thi = tm;
                        } else {
                            tlo = tm;
                        }
                        xc = xm;
                        sc = sm;
                    }
                    if (std::abs(flow.rhs(xc)[axis]) < 1e-10)
                        throw std::runtime_error(
                            "transport_constant: flow tangent to the hypersurface at a crossing");
                    if (std::abs(sc) <= opt.crossing_tol && gate_ok(xc)) {
                        vals[f] = spec.seed(xc);
                        reached[f] = true;
                        assigned = true;
                        break;
                    }
                }
                walk[w].x = xn;
                walk[w].s = sn;
            }
            if (!walk[0].alive && !walk[1].alive) break;
        }
        if (!assigned && !reached[f]) ++unreached;
    }

    TransportResult out{PhaseFunction(grid, std::move(vals)), std::move(reached), unreached, 0.0};
    out.residual = bracket_max(H, out.field, nullptr, &out.reached, opt.interior_fraction);
    return out;
}

Chart build_involutive_set(const PhaseFunction& H, const std::vector<SeedSpec>& seeds, int id,
                           double bracket_tol, const TransportOptions& opt) {
    const PhaseGrid& grid = H.grid();
    Chart ch;
    ch.id = id;
    for (int a = 0; a < grid.naxes(); ++a) {
        ch.box.lo.push_back(grid.axis(a).min);
        ch.box.hi.push_back(grid.axis(a).max);
    }
    ch.constants.push_back(H);
    std::vector<std::vector<bool>> masks;
    masks.emplace_back(grid.size(), true);
    for (const SeedSpec& s : seeds) {
        TransportResult tr = transport_constant(H, s, opt);
        ch.constants.push_back(tr.field);
        masks.push_back(std::move(tr.reached));
    }

    const int n = static_cast<int>(ch.constants.size());
    ch.bracket_residuals.assign(static_cast<std::size_t>(n) * n, 0.0);
    double worst = 0;
    int wi = 0, wj = 0;
    std::size_t wloc = 0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            std::size_t loc = 0;
            double r = bracket_max(ch.constants[i], ch.constants[j], &masks[i], &masks[j],
                                   opt.interior_fraction, &loc);
            ch.bracket_residuals[static_cast<std::size_t>(i) * n + j] = r;
            ch.bracket_residuals[static_cast<std::size_t>(j) * n + i] = r;
            if (r > worst) {
                worst = r;
                wi = i;
                wj = j;
                wloc = loc;
            }
        }
    if (worst > bracket_tol)
        throw std::runtime_error("build_involutive_set: constants " + std::to_string(wi) + "," +
                                 std::to_string(wj) + " fail involution: residual " +
                                 std::to_string(worst) + " at node " + std::to_string(wloc));
    return ch;
}

LipschitzReport lipschitz_check(const PhaseFunction& H, double cap,
                                const std::optional<Hypersurface>& surface) {
    const PhaseGrid& grid = H.grid();
    LipschitzReport rep;
    std::vector<bool> interior = interior_mask(grid, 0.8);
    for (int a = 0; a < grid.naxes(); ++a) {
        PhaseFunction da = H.derivative(a);
        for (int b = a; b < grid.naxes(); ++b) {
            PhaseFunction dab = da.derivative(b);
            for (std::size_t f = 0; f < grid.size(); ++f) {
                if (!interior[f]) continue;
                double v = std::abs(dab.at(f));
                if (!std::isfinite(v)) {
                    rep.bound = std::numeric_limits<double>::infinity();
                } else {
                    rep.bound = std::max(rep.bound, v);
                }
            }
        }
    }
    rep.ok = std::isfinite(rep.bound) && rep.bound <= cap;

    if (surface) {
        const int axis = surface->axis;
        if (axis < 0 || axis >= grid.naxes())
            throw std::invalid_argument("lipschitz_check: hypersurface axis out of range");
        HamiltonianFlow flow(H);
        std::size_t step = std::max<std::size_t>(1, grid.size() / 4096);
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < grid.size(); f += step) {
            if (!interior[f]) continue;
            PhasePoint x = grid.node(f);
            x[axis] = surface->value;
            dmin = std::min(dmin, std::abs(flow.rhs(x)[axis]));
        }
        rep.delta_ok = std::isfinite(dmin) && dmin > 1e-12;
    }
    return rep;
}

namespace {

double mollifier(double u) { return u > 0 ? std::exp(-1.0 / u) : 0.0; }

// C-infinity ramp: 0 for u <= 0, 1 for u >= 1.
double ramp(double u) {
    if (u <= 0) return 0;
    if (u >= 1) return 1;
    double a = mollifier(u);
    return a / (a + mollifier(1 - u));
}

bool intervals_overlap(double lo1, double hi1, double lo2, double hi2) {
    return std::min(hi1, hi2) - std::max(lo1, lo2) > 1e-12;
}

}  // namespace

double BumpFunction::value(const PhasePoint& x) const {
    double v = 1;
    for (std::size_t a = 0; a < lo.size(); ++a) {
        double t = x[a];
        if (lo[a].active) {
            v *= ramp((t - (lo[a].face - 0.5 * epsilon)) / epsilon);
        } else if (t < box.lo[a] - 1e-12) {
            return 0;
        }
        if (hi[a].active) {
            v *= ramp(((hi[a].face + 0.5 * epsilon) - t) / epsilon);
        } else if (t > box.hi[a] + 1e-12) {
            return 0;
        }
    }
    return v;
}

const BumpFunction& Atlas::bump(int chart_id) const {
    for (const BumpFunction& b : bumps)
        if (b.chart == chart_id) return b;
    throw std::invalid_argument("Atlas: unknown chart id " + std::to_string(chart_id));
}

std::pair<double, double> Atlas::scale_ratios() const {
    return {hbar / (epsilon * epsilon), epsilon * epsilon / action_scale};
}

double Atlas::partition_defect(const PhaseGrid& grid) const {
    double worst = 0;
    for (std::size_t f = 0; f < grid.size(); ++f) {
        PhasePoint x = grid.node(f);
        double s = 0;
        for (const BumpFunction& b : bumps) s += b.value(x);
        worst = std::max(worst, std::abs(s - 1));
    }
    return worst;
}

void Atlas::validate(const PhaseGrid& grid) const {
    for (std::size_t i = 0; i < charts.size(); ++i)
        for (std::size_t j = i + 1; j < charts.size(); ++j) {
            bool overlap = true;
            for (std::size_t a = 0; a < charts[i].box.lo.size(); ++a)
                overlap = overlap && intervals_overlap(charts[i].box.lo[a], charts[i].box.hi[a],
                                                       charts[j].box.lo[a], charts[j].box.hi[a]);
            if (overlap) throw std::runtime_error("Atlas: chart interiors overlap");
        }
    if (partition_defect(grid) > 1e-12)
        throw std::runtime_error("Atlas: partition of identity violated");
    auto [r1, r2] = scale_ratios();
    if (!(r1 < 0.1 && r2 < 0.1))
        throw std::runtime_error("Atlas: scale ordering hbar << epsilon^2 << S violated");
}

Atlas build_partition(const std::vector<Box>& boxes, double epsilon, double hbar,
                      double action_scale) {
    if (boxes.empty()) throw std::invalid_argument("build_partition: no boxes");
    if (!(epsilon > 0)) throw std::invalid_argument("build_partition: epsilon must be > 0");
    const std::size_t naxes = boxes[0].lo.size();
    for (const Box& b : boxes)
        if (b.lo.size() != naxes || b.hi.size() != naxes)
            throw std::invalid_argument("build_partition: inconsistent box dimensions");

    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = i + 1; j < boxes.size(); ++j) {
            bool overlap = true;
            for (std::size_t a = 0; a < naxes; ++a)
                overlap = overlap && intervals_overlap(boxes[i].lo[a], boxes[i].hi[a],
                                                       boxes[j].lo[a], boxes[j].hi[a]);
            if (overlap) throw std::invalid_argument("build_partition: overlapping interiors");
        }

    Atlas atlas;
    atlas.epsilon = epsilon;
    atlas.hbar = hbar;
    atlas.action_scale = action_scale;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        Chart ch;
        ch.id = static_cast<int>(i);
        ch.box = boxes[i];
        ch.frontier_width = epsilon;
        atlas.charts.push_back(std::move(ch));

        BumpFunction b;
        b.chart = static_cast<int>(i);
        b.epsilon = epsilon;
        b.box = boxes[i];
        b.lo.assign(naxes, FaceRamp{});
        b.hi.assign(naxes, FaceRamp{});
        atlas.bumps.push_back(std::move(b));
    }

    for (std::size_t i = 0; i < boxes.size(); ++i)
        for (std::size_t j = 0; j < boxes.size(); ++j) {
            if (i == j) continue;
            for (std::size_t a = 0; a < naxes; ++a) {
                if (std::abs(boxes[i].hi[a] - boxes[j].lo[a]) > 1e-9) continue;
                bool touch = true;
                for (std::size_t c = 0; c < naxes; ++c)
                    if (c != a)
                        touch = touch && intervals_overlap(boxes[i].lo[c], boxes[i].hi[c],
                                                           boxes[j].lo[c], boxes[j].hi[c]);
                if (!touch) continue;
                atlas.bumps[i].hi[a] = FaceRamp{true, boxes[i].hi[a]};
                atlas.bumps[j].lo[a] = FaceRamp{true, boxes[j].lo[a]};
            }
        }

    for (const BumpFunction& b : atlas.bumps)
        for (std::size_t a = 0; a < naxes; ++a) {
            double extent = b.box.hi[a] - b.box.lo[a];
            if ((b.lo[a].active || b.hi[a].active) && epsilon > extent)
                throw std::invalid_argument(
                    "build_partition: epsilon exceeds a chart extent (stacked frontiers)");
        }
    return atlas;
}

PhaseFunction localize(const PhaseFunction& A, const Atlas& atlas, int chart_id) {
    const BumpFunction& b = atlas.bump(chart_id);
    const PhaseGrid& grid = A.grid();
    std::vector<cplx> vals(grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) vals[f] = A.at(f) * b.value(grid.node(f));
    return PhaseFunction(grid, std::move(vals));
}

double cross_overlap(const PhaseFunction& a, const PhaseFunction& b) {
    const PhaseGrid& grid = a.grid();
    if (!(grid == b.grid())) throw std::invalid_argument("cross_overlap: grid mismatch");
    std::vector<cplx> ab(grid.size()), aa(grid.size()), bb(grid.size());
    for (std::size_t f = 0; f < grid.size(); ++f) {
        ab[f] = std::conj(a.at(f)) * b.at(f);
        aa[f] = std::norm(a.at(f));
        bb[f] = std::norm(b.at(f));
    }
    cplx num = integrate_phase(PhaseFunction(grid, std::move(ab)));
    double na = integrate_phase(PhaseFunction(grid, std::move(aa))).real();
    double nb = integrate_phase(PhaseFunction(grid, std::move(bb))).real();
    if (!(na > 0) || !(nb > 0))
        throw std::invalid_argument("cross_overlap: zero-norm input");
    return std::norm(num) / (na * nb);
}

}  // namespace qcl
