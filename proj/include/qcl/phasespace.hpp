#pragma once

// Phase-space geometry: uniform grids, sampled functions, Poisson
// brackets, quadrature and Hamiltonian flow.

#include <complex>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qcl/poly.hpp"

namespace qcl {

// Coordinates ordered (q^1..q^d, p^1..p^d), all dimensionless multiples
// of sqrt(S) for the configured action scale.
using PhasePoint = std::vector<double>;

struct Axis {
    double min = 0;
    double max = 1;
    int count = 3;
    bool periodic = false;

    double spacing() const { return (max - min) / (count - 1); }
    double coord(int i) const { return min + i * spacing(); }
    void validate() const {
        if (count < 3) throw std::invalid_argument("Axis: count must be >= 3");
        if (!(max > min)) throw std::invalid_argument("Axis: zero or negative extent");
    }
};

// Implicit block symplectic matrix for d degrees of freedom:
// omega_ab = [[0, I], [-I, 0]] in (q, p) ordering.
struct SymplecticForm {
    int dof = 1;
    double lower(int a, int b) const;  // omega_ab
    double upper(int a, int b) const;  // omega^ab, inverse of omega_ab
};

class PhaseGrid {
public:
    PhaseGrid() = default;
    explicit PhaseGrid(std::vector<Axis> axes);

    int naxes() const { return static_cast<int>(axes_.size()); }
    int dof() const { return naxes() / 2; }
    const Axis& axis(int a) const { return axes_.at(a); }
    std::size_t size() const { return size_; }

    std::size_t flat(const std::vector<int>& idx) const;
    std::vector<int> unflat(std::size_t f) const;
    PhasePoint node(std::size_t f) const;
    std::size_t stride(int a) const { return strides_.at(a); }

    bool operator==(const PhaseGrid& o) const;
    bool contains(const PhasePoint& x) const;

private:
    std::vector<Axis> axes_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

class PhaseFunction {
public:
    PhaseFunction() = default;
    PhaseFunction(PhaseGrid grid, std::vector<cplx> values,
                  std::optional<Poly> exact_form = std::nullopt);

    static PhaseFunction from_poly(const PhaseGrid& grid, const Poly& poly);
    static PhaseFunction sample(const PhaseGrid& grid,
                                const std::function<double(const PhasePoint&)>& f);
    static PhaseFunction sample_complex(const PhaseGrid& grid,
                                        const std::function<cplx(const PhasePoint&)>& f);

    const PhaseGrid& grid() const { return grid_; }
    const std::vector<cplx>& values() const { return values_; }
    std::vector<cplx>& values() { return values_; }
    const std::optional<Poly>& exact_form() const { return exact_; }
    void drop_exact_form() { exact_.reset(); }

    cplx at(std::size_t f) const { return values_[f]; }
    double real_at(std::size_t f) const { return values_[f].real(); }

    // Multilinear interpolation; clamps to the boundary on non-periodic axes.
    cplx interpolate(const PhasePoint& x) const;

    // 2nd-order finite-difference derivative along one axis (periodic wrap
    // when flagged, one-sided at non-periodic edges); exact when a
    // polynomial form is present.
    PhaseFunction derivative(int axis) const;

    double max_abs() const;
    double max_imag() const;
    bool is_real(double tol = 1e-10) const;

private:
    PhaseGrid grid_;
    std::vector<cplx> values_;
    std::optional<Poly> exact_;
};

struct Box {
    std::vector<double> lo, hi;  // per axis
};

// {f, g}_pb: exact on polynomial forms, central differences on grids.
PhaseFunction poisson_bracket(const PhaseFunction& f, const PhaseFunction& g);

// Trapezoidal quadrature over the region (whole grid if absent);
// periodic axes get uniform weights.
cplx integrate_phase(const PhaseFunction& f, const std::optional<Box>& region = std::nullopt);

struct Trajectory {
    std::vector<double> times;
    std::vector<PhasePoint> states;
    std::vector<double> energy;
};

enum class Integrator { adaptive, symplectic };

// Thrown when a trajectory leaves the grid domain of a sampled Hamiltonian.
struct DomainExit : std::runtime_error {
    double exit_time;
    explicit DomainExit(double t)
        : std::runtime_error("trajectory exited grid domain at t=" + std::to_string(t)),
          exit_time(t) {}
};

// Hamiltonian vector field dq/dt = dH/dp, dp/dt = -dH/dq, evaluated from
// the polynomial form when present, otherwise from interpolated
// finite-difference gradients.
class HamiltonianFlow {
public:
    explicit HamiltonianFlow(const PhaseFunction& H);

    std::vector<double> rhs(const PhasePoint& x) const;
    double energy(const PhasePoint& x) const;
    std::vector<double> dHdq(const PhasePoint& x) const;
    std::vector<double> dHdp(const PhasePoint& x) const;

private:
    int dof_;
    std::optional<Poly> poly_;
    std::vector<Poly> poly_grads_;        // 2d partials when polynomial
    std::vector<PhaseFunction> grid_grads_;
    PhaseFunction H_;
    bool grid_backed_;
};

struct FlowOptions {
    double tol = 1e-9;       // adaptive tolerance
    double record_dt = 0.0;  // 0 = record every step
};

Trajectory hamilton_flow(const PhaseFunction& H, const PhasePoint& start, double t_end,
                         double dt, Integrator integrator, const FlowOptions& opt = {});

// Single end-point integration (no per-step recording).
PhasePoint flow_to(const HamiltonianFlow& flow, PhasePoint x, double t_end, double dt,
                   Integrator integrator, double tol = 1e-9);

}  // namespace qcl
