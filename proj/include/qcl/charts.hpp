#pragma once

// Local constants of motion built by transporting hypersurface seeds
// along the Hamiltonian flow, chart atlases with smooth bump-function
// partitions of identity, and localization of observables onto charts.

#include <functional>
#include <optional>
#include <vector>

#include "qcl/phasespace.hpp"

namespace qcl {

// Plane { x : x[axis] = value } used as the seeding hypersurface.
struct Hypersurface {
    int axis = 0;
    double value = 0;
};

struct TransportOptions {
    double t_max = 20;          // search horizon per node, both time directions
    double probe_dt = 0.05;     // coarse step between crossing checks
    double dt = 1e-2;           // integrator step hint
    double tol = 1e-9;          // adaptive integrator tolerance
    double crossing_tol = 1e-11;  // |x[axis] - value| at the refined crossing
    double interior_fraction = 0.8;  // residual is reported on this band
};

struct SeedSpec {
    Hypersurface surface;
    std::function<double(const PhasePoint&)> seed;
    // Optional restriction: a crossing only counts when the gate holds there.
    std::function<bool(const PhasePoint&)> gate;
};

struct TransportResult {
    PhaseFunction field;
    std::vector<bool> reached;  // per grid node; unreached values are zero
    int unreached = 0;
    double residual = 0;  // max |{H, field}| over clean interior nodes
};

// Solves {H, O} = 0 on the grid of H by following each node's
// characteristic (forward and backward, nearest crossing first) to the
// hypersurface and assigning the seed value there. Nodes whose
// characteristic never reaches the surface within the horizon, or
// leaves a grid-backed Hamiltonian's domain, are flagged, not
// fabricated. Throws when the flow is tangent to the surface at a
// located crossing.
TransportResult transport_constant(const PhaseFunction& H, const SeedSpec& seed,
                                   const TransportOptions& opt = {});

struct Chart {
    int id = 0;
    Box box;
    double frontier_width = 0;
    std::vector<PhaseFunction> constants;  // H first, then the transported set
    std::vector<PhaseFunction> angles;     // optional conjugate coordinates
    std::vector<double> bracket_residuals;  // n x n row-major, max |{O_I, O_J}|
};

// Transports every seed and verifies the whole family is in involution
// on the chart interior. Throws, naming the worst pair, when any
// pairwise bracket residual exceeds bracket_tol.
Chart build_involutive_set(const PhaseFunction& H, const std::vector<SeedSpec>& seeds, int id,
                           double bracket_tol = 1e-6, const TransportOptions& opt = {});

struct LipschitzReport {
    double bound = 0;     // max second-derivative magnitude over the interior
    bool ok = false;      // bound finite and below the cap
    bool delta_ok = true;  // flow transversal to the given hypersurface
};

LipschitzReport lipschitz_check(const PhaseFunction& H, double cap = 1e6,
                                const std::optional<Hypersurface>& surface = std::nullopt);

// Smooth ramp over a band of width epsilon centered on a shared face.
struct FaceRamp {
    bool active = false;
    double face = 0;
};

struct BumpFunction {
    int chart = -1;
    double epsilon = 0;
    std::vector<FaceRamp> lo, hi;  // per axis
    Box box;

    // 1 on the shrunk interior, a smooth ramp across each active
    // frontier band, 0 outside.
    double value(const PhasePoint& x) const;
};

struct Atlas {
    std::vector<Chart> charts;
    std::vector<BumpFunction> bumps;
    double epsilon = 0;
    double hbar = 1;
    double action_scale = 1;

    const BumpFunction& bump(int chart_id) const;
    // (hbar / epsilon^2, epsilon^2 / action_scale); both must stay < 0.1
    std::pair<double, double> scale_ratios() const;
    double partition_defect(const PhaseGrid& grid) const;  // max |sum_i B_i - 1|
    void validate(const PhaseGrid& grid) const;
};

// Builds complementary smooth ramps across every face shared by two
// boxes. Throws on overlapping interiors or when epsilon exceeds a
// chart extent (stacked frontiers are unsupported).
Atlas build_partition(const std::vector<Box>& boxes, double epsilon, double hbar,
                      double action_scale);

// A * B_chart sampled on A's grid.
PhaseFunction localize(const PhaseFunction& A, const Atlas& atlas, int chart_id);

// Orthogonality defect |<a, b>|^2 / (|a|^2 |b|^2) under the phase-space
// inner product.
double cross_overlap(const PhaseFunction& a, const PhaseFunction& b);

}  // namespace qcl
