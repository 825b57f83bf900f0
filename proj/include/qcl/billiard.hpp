#pragma once

// Sinai billiard with smoothed walls: rectangle plus a dispersing
// quarter-disc at one corner, each hard boundary replaced by a soft
// barrier of width d. Five domains carry per-domain conserved pairs:
// interior and horizontal walls (H, P_x), vertical walls (H, P_y),
// disc wall (H, P_theta about the disc centre).

#include <array>
#include <cstdint>
#include <vector>

#include "qcl/phasespace.hpp"

namespace qcl {

struct BilliardSpec {
    double lx = 1;            // rectangle half-width in x
    double ly = 1;            // rectangle half-width in y
    double radius = 0.25;     // disc radius; 0 disables the disc
    double wall_width = 0.05; // soft-barrier width d
    double energy_scale = 1;  // typical kinetic energy; barrier height is 1e3 x this

    std::array<double, 2> corner() const { return {-lx, -ly}; }  // disc centre
    double barrier_height() const { return 1e3 * energy_scale; }
    void validate() const;
};

enum class DomainLabel { D0, D1, D2, D3, D4 };
// D0 interior, D1 lower wall, D2 vertical walls, D3 upper wall, D4 disc.

struct BilliardSample {
    double t = 0;
    PhasePoint x;  // (qx, qy, px, py)
    DomainLabel domain = DomainLabel::D0;
    bool overlap = false;  // two wall zones penetrated at once (corner)
    double H = 0, px = 0, py = 0, ptheta = 0;
};

struct BilliardTrajectory {
    BilliardSpec spec;
    std::vector<BilliardSample> samples;
    double energy_drift = 0;  // max relative |H - H0| over the run
};

// Sum of the soft wall terms; exactly 0 in the interior. Each term
// depends only on its wall's normal coordinate (x, y or r).
double billiard_potential(const BilliardSpec& spec, double qx, double qy);

// -grad V at (qx, qy).
std::array<double, 2> billiard_force(const BilliardSpec& spec, double qx, double qy);

// Zone with the deepest penetration beyond d/100, else D0.
DomainLabel billiard_domain(const BilliardSpec& spec, double qx, double qy,
                            bool* overlap = nullptr);

// Fixed-step velocity-Verlet integration; records state, domain label
// and the candidate constants every record_dt (0 = every step). Throws
// when the relative energy drift exceeds drift_abort (step too large
// for the wall stiffness) or the start is not in the interior.
BilliardTrajectory simulate_billiard(const BilliardSpec& spec, const PhasePoint& start,
                                     double t_end, double dt, double record_dt = 0,
                                     double drift_abort = 1e-6);

struct SpecularReport {
    std::vector<double> d_values;
    std::vector<double> errors;  // outgoing-ray angular error vs the hard-wall oracle
    bool monotone = false;       // strictly decreasing along d_values
};

// Single wall interaction per entry of d_values (positive, decreasing):
// integrates through one bounce and measures the angle between the
// outgoing ray and the ideal specular reflection off the hard boundary,
// as seen from the launch point. Throws when the bounce does not
// complete within the time budget.
SpecularReport specular_limit(BilliardSpec spec, const PhasePoint& start,
                              const std::vector<double>& d_values);

struct LyapunovResult {
    double lambda_max = 0;
    double stderr_est = 0;  // block-averaging standard error
};

// Largest Lyapunov exponent by tangent-vector renormalization along
// the smooth flow; stderr from block averages of the local rates.
LyapunovResult lyapunov(const BilliardSpec& spec, const PhasePoint& start, double t_end,
                        double dt = 5e-5, int blocks = 10);

}  // namespace qcl
