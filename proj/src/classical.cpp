#include "qcl/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "qcl/rng.hpp"
#include "qcl/weylwigner.hpp"

namespace qcl {

namespace {

double gauss(double x, double eta) {
    return std::exp(-0.5 * x * x / (eta * eta)) / (eta * std::sqrt(2 * std::numbers::pi));
}

double eval_field(const PhaseFunction& f, const PhasePoint& x) {
    if (f.exact_form()) return f.exact_form()->eval_real(x);
    return f.interpolate(x).real();
}

// Pairwise-summed mean and standard error, reproducible across orders.
struct Accum {
    std::vector<double> vals;
    void add(double v) { vals.push_back(v); }
    double sum() const {
        std::vector<double> v = vals;
        while (v.size() > 1) {
            std::vector<double> next((v.size() + 1) / 2);
            for (std::size_t i = 0; i < next.size(); ++i)
                next[i] = v[2 * i] + (2 * i + 1 < v.size() ? v[2 * i + 1] : 0.0);
            v.swap(next);
        }
        return v.empty() ? 0.0 : v[0];
    }
};

double smoothed_indicator(const Chart& chart, const std::vector<double>& levels,
                          const PhasePoint& x, double eta) {
    double w = 1;
    for (std::size_t k = 0; k < chart.constants.size(); ++k)
        w *= gauss(eval_field(chart.constants[k], x) - levels[k], eta);
    return w;
}

}  // namespace

MicroVolume config_volume(const Chart& chart, const std::vector<double>& levels, int samples,
                          std::uint64_t seed, double eta) {
    if (chart.constants.empty())
        throw std::invalid_argument("config_volume: chart carries no constants");
    if (levels.size() != chart.constants.size())
        throw std::invalid_argument("config_volume: one level per chart constant required");
    if (samples < 16) throw std::invalid_argument("config_volume: too few samples");
    if (!(eta > 0)) throw std::invalid_argument("config_volume: eta must be > 0");

    const std::size_t d = chart.box.lo.size();
    double box_vol = 1;
    for (std::size_t a = 0; a < d; ++a) box_vol *= chart.box.hi[a] - chart.box.lo[a];

    CounterRng rng(seed, 0);
    Accum full, full2, half;
    for (int s = 0; s < samples; ++s) {
        PhasePoint x(d);
        for (std::size_t a = 0; a < d; ++a) x[a] = rng.uniform(chart.box.lo[a], chart.box.hi[a]);
        double w = smoothed_indicator(chart, levels, x, eta);
        full.add(w);
        full2.add(w * w);
        half.add(smoothed_indicator(chart, levels, x, 0.5 * eta));
    }
    const double n = samples;
    double mean = full.sum() / n;
    double var = std::max(0.0, full2.sum() / n - mean * mean);

    MicroVolume out;
    out.chart = chart.id;
    out.levels = levels;
    out.eta = eta;
    out.volume = box_vol * mean;
    out.mc_error = box_vol * std::sqrt(var / n);
    out.volume_half_eta = box_vol * half.sum() / n;
    if (out.volume <= 3 * out.mc_error)
        throw std::runtime_error(
            "config_volume: level set indistinguishable from empty at this sample count");
    return out;
}

namespace {

// mean grid increment of a constant's values along every axis; eta must
// resolve this scale.
double mean_value_step(const PhaseFunction& f) {
    const PhaseGrid& g = f.grid();
    double total = 0;
    std::size_t count = 0;
    for (int a = 0; a < g.naxes(); ++a) {
        std::size_t s = g.stride(a);
        for (std::size_t i = 0; i + s < g.size(); i += 1) {
            std::vector<int> idx = g.unflat(i);
            if (idx[a] + 1 >= g.axis(a).count) continue;
            total += std::abs(f.at(i + s) - f.at(i));
            ++count;
        }
    }
    return count ? total / count : 0.0;
}

ClassicalDensity finalize_density(const PhaseGrid& grid, std::vector<double> vals, double eta) {
    std::vector<cplx> cv(vals.begin(), vals.end());
    PhaseFunction f(grid, std::move(cv));
    double norm = integrate_phase(f).real();
    if (!(norm > 0)) throw std::runtime_error("classical density: zero total mass on the grid");
    for (cplx& v : f.values()) v /= norm;
    return ClassicalDensity{std::move(f), eta};
}

}  // namespace

ClassicalDensity classical_density(const Atlas& atlas, const std::vector<LevelSpec>& specs,
                                   const std::vector<MicroVolume>& volumes, double eta,
                                   const PhaseGrid& grid) {
    if (specs.empty()) throw std::invalid_argument("classical_density: no level specs");
    double wsum = 0;
    for (const LevelSpec& s : specs) {
        if (s.weight < 0) throw std::invalid_argument("classical_density: negative weight");
        wsum += s.weight;
    }
    if (std::abs(wsum - 1) > 1e-10)
        throw std::invalid_argument("classical_density: weights must sum to 1");

    std::vector<double> vals(grid.size(), 0.0);
    for (const LevelSpec& spec : specs) {
        const Chart* chart = nullptr;
        for (const Chart& c : atlas.charts)
            if (c.id == spec.chart) chart = &c;
        if (!chart) throw std::invalid_argument("classical_density: unknown chart id");
        if (chart->constants.empty() || spec.levels.size() != chart->constants.size())
            throw std::invalid_argument("classical_density: spec/constants shape mismatch");

        const MicroVolume* vol = nullptr;
        for (const MicroVolume& v : volumes)
            if (v.chart == spec.chart && v.levels == spec.levels) vol = &v;
        if (!vol) throw std::invalid_argument("classical_density: missing volume for a spec");

        for (const PhaseFunction& c : chart->constants) {
            PhaseFunction sampled =
                c.grid() == grid ? c : PhaseFunction::sample(grid, [&](const PhasePoint& x) {
                    return eval_field(c, x);
                });
            if (eta < 2 * mean_value_step(sampled))
                throw std::invalid_argument(
                    "classical_density: eta under-resolves a constant on this grid");
        }

        const BumpFunction& bump = atlas.bump(spec.chart);
        for (std::size_t f = 0; f < grid.size(); ++f) {
            PhasePoint x = grid.node(f);
            double b = bump.value(x);
            if (b == 0) continue;
            double w = spec.weight / vol->volume * b;
            for (std::size_t k = 0; k < chart->constants.size(); ++k)
                w *= gauss(eval_field(chart->constants[k], x) - spec.levels[k], eta);
            vals[f] += w;
        }
    }
    return finalize_density(grid, std::move(vals), eta);
}

std::pair<Ensemble, Ensemble> sample_trajectories(const ClassicalDensity& rho,
                                                  const PhaseFunction& H, int n, double t_end,
                                                  std::uint64_t seed, double dt) {
    const PhaseGrid& grid = rho.function.grid();
    const int d = grid.naxes();
    double peak = 0;
    for (std::size_t f = 0; f < grid.size(); ++f) peak = std::max(peak, rho.function.real_at(f));
    if (!(peak > 0)) throw std::invalid_argument("sample_trajectories: empty density");
    peak *= 1.05;  // head-room over the interpolated surface

    CounterRng rng(seed, 1);
    Ensemble start;
    start.seed = seed;
    long attempts = 0;
    while (static_cast<int>(start.points.size()) < n) {
        ++attempts;
        if (attempts > 10000L * n && attempts * 1e-4 > static_cast<double>(n))
            throw std::runtime_error("sample_trajectories: rejection efficiency below 1e-4");
        PhasePoint x(d);
        for (int a = 0; a < d; ++a) x[a] = rng.uniform(grid.axis(a).min, grid.axis(a).max);
        if (rng.next_double() * peak < rho.function.interpolate(x).real())
            start.points.push_back(std::move(x));
    }
    start.weights.assign(n, 1.0 / n);

    Ensemble end = start;
    if (t_end != 0) {
        HamiltonianFlow flow(H);
        for (PhasePoint& x : end.points)
            x = flow_to(flow, x, t_end, dt, Integrator::symplectic);
    }
    return {std::move(start), std::move(end)};
}

ClassifyResult classify_series(const std::vector<std::vector<double>>& series,
                               const std::vector<std::vector<double>>& times,
                               double tol_factor) {
    if (series.empty() || series.size() != times.size())
        throw std::invalid_argument("classify_series: malformed probe data");
    double lo = series[0][0], hi = series[0][0];
    for (const auto& s : series)
        for (double v : s) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double range = hi - lo;
    const double scale = std::max(range, std::max(std::abs(lo), std::abs(hi)));
    ClassifyResult res;
    res.drift_tol = tol_factor * std::max(scale, 1e-300);
    const double jump_thresh = std::max(0.1 * range, 10 * res.drift_tol);

    bool any_jump = false;
    for (std::size_t p = 0; p < series.size(); ++p) {
        const auto& s = series[p];
        const auto& t = times[p];
        if (s.size() != t.size() || s.size() < 2)
            throw std::invalid_argument("classify_series: malformed probe data");
        const std::size_t n = s.size();
        const std::size_t max_trans = std::max<std::size_t>(5, n / 20);
        // a plateau restarts where the next two samples stay put
        auto stable_at = [&](std::size_t j) {
            if (j + 2 >= n) return false;
            return std::abs(s[j + 1] - s[j]) <= res.drift_tol &&
                   std::abs(s[j + 2] - s[j]) <= res.drift_tol;
        };
        auto drift_error = [&](double dev) {
            throw std::runtime_error(
                "classify: constant drifts beyond tolerance inside a segment (probe " +
                std::to_string(p) + ", drift " + std::to_string(dev) + ")");
        };
        std::size_t seg_start = 0;
        double ref = s[0];
        auto close_segment = [&](std::size_t seg_end) {
            if (seg_end - seg_start < 3) return;  // transition sliver, not a plateau
            double dev = 0;
            for (std::size_t k = seg_start; k < seg_end; ++k)
                dev = std::max(dev, std::abs(s[k] - ref));
            res.max_drift = std::max(res.max_drift, dev);
        };
        std::size_t k = 1;
        while (k < n) {
            if (std::abs(s[k] - ref) <= res.drift_tol) {
                ++k;
                continue;
            }
            // deviation: scan ahead for the next plateau
            close_segment(k);
            std::size_t j = k;
            while (j < n && !stable_at(j)) ++j;
            if (j >= n) {
                // ran off the end mid-transition; a genuine jump leaves a
                // short tail, anything else is drift
                if (n - k <= max_trans && std::abs(s[n - 1] - ref) > jump_thresh) break;
                drift_error(std::abs(s[n - 1] - ref));
            }
            if (j - k > max_trans || std::abs(s[j] - ref) <= jump_thresh)
                drift_error(std::abs(s[j] - ref));
            any_jump = true;
            res.jump_times.push_back(t[j]);
            seg_start = j;
            ref = s[j];
            k = j + 1;
        }
        close_segment(n);
    }
    res.kind = any_jump ? ConstantClass::local : ConstantClass::global;
    return res;
}

ClassifyResult classify_constant(const PhaseFunction& F, const PhaseFunction& H,
                                 const std::vector<PhasePoint>& starts, double t_end, double dt,
                                 double tol_factor, double bracket_tol, Integrator integrator) {
    PhaseFunction br = poisson_bracket(H, F);
    std::vector<bool> interior = interior_mask(F.grid(), 0.8);
    double worst = 0;
    for (std::size_t f = 0; f < br.grid().size(); ++f)
        if (interior[f]) worst = std::max(worst, std::abs(br.at(f)));
    if (worst > bracket_tol)
        throw std::invalid_argument("classify_constant: F is not even locally conserved ({H,F} " +
                                    std::to_string(worst) + ")");

    std::vector<std::vector<double>> series, times;
    FlowOptions opt;
    opt.record_dt = std::max(dt, t_end / 4096);
    for (const PhasePoint& x0 : starts) {
        Trajectory tr = hamilton_flow(H, x0, t_end, dt, integrator, opt);
        std::vector<double> s;
        s.reserve(tr.states.size());
        for (const PhasePoint& x : tr.states) s.push_back(eval_field(F, x));
        series.push_back(std::move(s));
        times.push_back(tr.times);
    }
    return classify_series(series, times, tol_factor);
}

ClassicalDensity traced_equilibrium(const std::vector<PhaseFunction>& globals,
                                    const std::vector<ClassifyResult>& classes,
                                    const std::vector<GlobalLevelSpec>& specs,
                                    const std::vector<MicroVolume>& volumes, double eta,
                                    const PhaseGrid& grid) {
    if (globals.empty()) throw std::invalid_argument("traced_equilibrium: no constants");
    if (classes.size() != globals.size())
        throw std::invalid_argument("traced_equilibrium: one classification per constant");
    for (const ClassifyResult& c : classes)
        if (c.kind != ConstantClass::global)
            throw std::invalid_argument(
                "traced_equilibrium: a local constant cannot serve as a thermodynamic variable");
    double wsum = 0;
    for (const GlobalLevelSpec& s : specs) {
        if (s.levels.size() != globals.size())
            throw std::invalid_argument("traced_equilibrium: spec/constant shape mismatch");
        wsum += s.weight;
    }
    if (std::abs(wsum - 1) > 1e-10)
        throw std::invalid_argument("traced_equilibrium: weights must sum to 1");

    std::vector<double> vals(grid.size(), 0.0);
    for (const GlobalLevelSpec& spec : specs) {
        const MicroVolume* vol = nullptr;
        for (const MicroVolume& v : volumes)
            if (v.levels == spec.levels) vol = &v;
        if (!vol) throw std::invalid_argument("traced_equilibrium: missing volume for a spec");
        for (std::size_t f = 0; f < grid.size(); ++f) {
            PhasePoint x = grid.node(f);
            double w = spec.weight / vol->volume;
            for (std::size_t k = 0; k < globals.size(); ++k)
                w *= gauss(eval_field(globals[k], x) - spec.levels[k], eta);
            vals[f] += w;
        }
    }
    return finalize_density(grid, std::move(vals), eta);
}

}  // namespace qcl
