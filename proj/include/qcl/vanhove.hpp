#pragma once

// Observables and states with a singular kernel on the energy diagonal
// plus a regular kernel over energy pairs, per chart block: mean-value
// functionals, free evolution, weak limits (decoherence of the regular
// part), pointer-basis diagonalization and partial tracing of the
// discrete m indices.

#include <complex>
#include <stdexcept>
#include <vector>

namespace qcl {

using cplx = std::complex<double>;

struct OmegaGrid {
    double omega_max = 1;
    int count = 2;

    void validate() const {
        if (!(omega_max > 0)) throw std::invalid_argument("OmegaGrid: omega_max must be > 0");
        if (count < 2) throw std::invalid_argument("OmegaGrid: count must be >= 2");
    }
    double spacing() const { return omega_max / (count - 1); }
    double omega(int k) const { return k * spacing(); }
    double weight(int k) const {
        return (k == 0 || k == count - 1) ? 0.5 * spacing() : spacing();
    }
    bool operator==(const OmegaGrid& o) const {
        return omega_max == o.omega_max && count == o.count;
    }
};

// Common kernel storage: singular over (chart, omega, m, m'), regular
// over (chart, omega, omega', m, m'), both row-major in that order.
struct VanHoveKernel {
    OmegaGrid grid;
    int charts = 1;
    int m_dim = 1;
    double hbar = 1;
    std::vector<cplx> singular;
    std::vector<cplx> regular;

    VanHoveKernel() = default;
    VanHoveKernel(OmegaGrid g, int charts_, int m_dim_, double hbar_);

    std::size_t sing_index(int c, int w, int m, int mp) const;
    std::size_t reg_index(int c, int w, int wp, int m, int mp) const;
    cplx& sing(int c, int w, int m, int mp) { return singular[sing_index(c, w, m, mp)]; }
    cplx sing(int c, int w, int m, int mp) const { return singular[sing_index(c, w, m, mp)]; }
    cplx& reg(int c, int w, int wp, int m, int mp) { return regular[reg_index(c, w, wp, m, mp)]; }
    cplx reg(int c, int w, int wp, int m, int mp) const {
        return regular[reg_index(c, w, wp, m, mp)];
    }

    bool same_shape(const VanHoveKernel& o) const;
    // max |X(w)_{mm'} - conj(X(w)_{m'm})| and the regular analogue
    double selfadjoint_defect() const;
    double regular_l1() const;  // discrete L1 norm of the regular kernel
};

struct VanHoveObservable : VanHoveKernel {
    using VanHoveKernel::VanHoveKernel;
    void validate(double tol = 1e-8) const;
};

struct VanHoveState : VanHoveKernel {
    using VanHoveKernel::VanHoveKernel;
    double total_probability() const;  // sum_{c,m} int rho(w)_{mm} dw, trapezoid
    void validate(double tol = 1e-10) const;
};

struct PointerTransform {
    OmegaGrid grid;
    int charts = 1;
    int m_dim = 1;
    std::vector<cplx> u;  // per (chart, omega): m x p unitary, row-major

    std::size_t index(int c, int w, int m, int p) const {
        return ((static_cast<std::size_t>(c) * grid.count + w) * m_dim + m) * m_dim + p;
    }
    cplx at(int c, int w, int m, int p) const { return u[index(c, w, m, p)]; }
    double unitarity_defect() const;
};

struct MeanValueParts {
    cplx singular;
    cplx regular;
    cplx total() const { return singular + regular; }
};

// Trapezoid pairing sum_{c,m,m'} [ int conj(rho(w)) O(w) dw
//   + int int conj(rho(w,w')) e^{i(w-w')t/hbar} O(w,w') dw dw' ].
// Requires the resolution guard dw * |t| / hbar <= pi/4.
MeanValueParts mean_value_parts(const VanHoveState& rho, const VanHoveObservable& obs, double t);
cplx mean_value(const VanHoveState& rho, const VanHoveObservable& obs, double t);

// Envelope of the regular contribution: the magnitude of the complex
// pair integral at time t.
double regular_envelope(const VanHoveState& rho, const VanHoveObservable& obs, double t);

// Zeroes the regular kernel; the singular kernel is untouched.
VanHoveState weak_limit(const VanHoveState& rho);

// Multiplies the regular kernel by e^{i(w-w')t/hbar}.
VanHoveState evolve(const VanHoveState& rho, double t);

struct PointerBasisResult {
    PointerTransform transform;
    VanHoveState state;
};

// Per-(chart, omega) eigendecomposition of the Hermitian singular
// block; eigenvalues sorted descending, eigenvector phases fixed by
// making the largest-magnitude component real positive. The regular
// kernel is conjugated by U(w), U(w').
PointerBasisResult pointer_basis(const VanHoveState& rho, double herm_tol = 1e-8);

// Partial trace over the trailing m factor of the composite index
// (r, m), r-major: out(w)_{r r'} = sum_m in(w)_{rm, r'm}.
VanHoveState m_trace(const VanHoveState& rho, int r_dim, int m_dim);

struct DecoherenceOptions {
    double t0 = 0.0;       // initial ladder time; 0 = hbar / omega_max
    double horizon = 0.0;  // 0 = resolution limit pi*hbar/(4 dw)
};

// Smallest t at which the regular envelope falls below
// threshold * envelope(0), located on a geometric ladder and refined
// by bisection. Throws if no decay below threshold within the horizon.
double decoherence_time(const VanHoveState& rho, const VanHoveObservable& obs, double threshold,
                        const DecoherenceOptions& opt = {});

}  // namespace qcl
