#pragma once

// Classical statistical limit: Monte Carlo configuration volumes of
// level sets, smoothed non-negative limit densities, trajectory
// ensembles with push-forward invariance, classification of constants
// as global or local, and traced equilibria over the global set.

#include <cstdint>
#include <utility>
#include <vector>

#include "qcl/charts.hpp"
#include "qcl/phasespace.hpp"

namespace qcl {

struct LevelSpec {
    int chart = 0;
    std::vector<double> levels;  // one value per chart constant, H first
    double weight = 1;
};

struct MicroVolume {
    int chart = 0;
    std::vector<double> levels;
    double volume = 0;
    double mc_error = 0;       // standard error of the estimate
    double eta = 0;            // Gaussian level-smoothing width
    double volume_half_eta = 0;  // convergence probe at eta / 2
};

struct ClassicalDensity {
    PhaseFunction function;  // real, non-negative, unit integral
    double eta = 0;
};

struct Ensemble {
    std::vector<PhasePoint> points;
    std::vector<double> weights;  // non-negative, sum 1
    std::uint64_t seed = 0;
};

// Monte Carlo measure of {O_k = level_k} inside the chart box, with the
// level deltas smoothed to Gaussians of width eta. Deterministic for a
// given seed. Throws when the level set is indistinguishable from
// empty at the given sample count.
MicroVolume config_volume(const Chart& chart, const std::vector<double>& levels, int samples,
                          std::uint64_t seed, double eta);

// rho_*: sum over specs of [weight / C] times the product of smoothed
// level deltas of the chart constants, times the chart bump, sampled on
// the grid and renormalized to unit integral. Throws on a missing
// volume or when eta under-resolves the constants' grid increments.
ClassicalDensity classical_density(const Atlas& atlas, const std::vector<LevelSpec>& specs,
                                   const std::vector<MicroVolume>& volumes, double eta,
                                   const PhaseGrid& grid);

// Rejection-samples n points from the density and pushes them forward
// by the flow of H. Returns the t=0 and t=t_end ensembles. Throws when
// the rejection efficiency drops below 1e-4.
std::pair<Ensemble, Ensemble> sample_trajectories(const ClassicalDensity& rho,
                                                  const PhaseFunction& H, int n, double t_end,
                                                  std::uint64_t seed, double dt = 0.01);

enum class ConstantClass { global, local };

struct ClassifyResult {
    ConstantClass kind = ConstantClass::global;
    double max_drift = 0;   // worst in-segment drift over all probes
    double drift_tol = 0;   // 1e-4 x dynamic range unless overridden
    std::vector<double> jump_times;  // chart-transition jumps (local only)
};

// Core classifier on recorded series of F along probe trajectories:
// global when every probe stays within drift_tol of its start, local
// when the series are piecewise constant with jumps, and an error when
// F drifts beyond tolerance without plateau structure.
ClassifyResult classify_series(const std::vector<std::vector<double>>& series,
                               const std::vector<std::vector<double>>& times,
                               double tol_factor = 1e-4);

// Convenience wrapper: verifies {F, H} is small on the grid interior,
// integrates the probes, samples F along them (exact polynomial
// evaluation when available) and delegates to classify_series.
ClassifyResult classify_constant(const PhaseFunction& F, const PhaseFunction& H,
                                 const std::vector<PhasePoint>& starts, double t_end, double dt,
                                 double tol_factor = 1e-4, double bracket_tol = 1e-3,
                                 Integrator integrator = Integrator::symplectic);

struct GlobalLevelSpec {
    std::vector<double> levels;  // one per global constant, H first
    double weight = 1;
};

// Equilibrium over the global constants alone: rho_T = sum over specs
// of [weight / C] times smoothed level deltas of the globals, with no
// chart-local dependence. Every supplied constant must be classified
// global; volumes are matched by level values (chart id ignored).
ClassicalDensity traced_equilibrium(const std::vector<PhaseFunction>& globals,
                                    const std::vector<ClassifyResult>& classes,
                                    const std::vector<GlobalLevelSpec>& specs,
                                    const std::vector<MicroVolume>& volumes, double eta,
                                    const PhaseGrid& grid);

}  // namespace qcl
