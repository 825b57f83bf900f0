#pragma once

// The symb / symb^-1 isomorphism between position-basis operator
// matrices and phase-space functions, star products, Moyal brackets and
// the trace pairing.
//
// Conventions: operators are plain matrices in an orthonormal discrete
// position basis of odd size; the discrete Wigner transform uses modular
// index arithmetic on the odd lattice (2 is invertible mod dim), which
// makes symb(I) = 1, symb(diag(q_j)) = q and the trace pairing identity
// exact. The transform's normalization prefactor is therefore 1 for
// observables; states carry the extra 1/(2 pi hbar) per degree of
// freedom so that integrate_phase(symbol) = trace.

#include <optional>
#include <string>
#include <vector>

#include "qcl/phasespace.hpp"
#include "qcl/poly.hpp"

namespace qcl {

struct OperatorMatrix {
    int dim = 0;          // odd position-basis size
    double dq = 1;        // grid spacing
    double origin = 0;    // center position
    double hbar = 1;
    std::vector<cplx> entries;  // row-major dim x dim

    OperatorMatrix() = default;
    OperatorMatrix(int dim_, double dq_, double origin_, double hbar_);

    cplx& at(int i, int j) { return entries[static_cast<std::size_t>(i) * dim + j]; }
    cplx at(int i, int j) const { return entries[static_cast<std::size_t>(i) * dim + j]; }
    double position(int i) const { return origin + (i - (dim - 1) / 2) * dq; }
    double momentum(int k) const;  // p_k = 2 pi hbar (k - M)/(dim dq)

    cplx trace() const;
    double hermiticity_defect() const;  // max |A - A^dagger|
    bool finite() const;

    static OperatorMatrix identity(int dim, double dq, double origin, double hbar);
    static OperatorMatrix position_op(int dim, double dq, double origin, double hbar);
    static OperatorMatrix momentum_op(int dim, double dq, double origin, double hbar);

    OperatorMatrix multiply(const OperatorMatrix& o) const;
    OperatorMatrix adjoint() const;
    OperatorMatrix add(const OperatorMatrix& o, cplx weight = 1.0) const;
};

enum class SymbolKind { observable, state };

struct WignerSymbol {
    PhaseFunction function;  // 2-dimensional, both axes periodic
    double hbar = 1;
    SymbolKind kind = SymbolKind::observable;
};

// Discrete Wigner transform on the odd modular lattice.
WignerSymbol wigner_symb(const OperatorMatrix& op, SymbolKind kind = SymbolKind::observable);

// Weyl (fully symmetrized) quantization of a polynomial observable in
// (q, p); p realized as the spectral derivative on the periodic grid.
OperatorMatrix weyl_quantize(const Poly& f, int dim, double dq, double origin, double hbar,
                             int max_degree = 8);

// Star product / Moyal bracket. Polynomial route (exact, terminating)
// when both inputs carry exact forms; otherwise a truncated
// bidifferential series with finite-difference derivatives on
// non-periodic axes and spectral derivatives on periodic ones.
// On grid inputs the order is clamped to 8 (warning reported if set).
PhaseFunction star_product(const PhaseFunction& f, const PhaseFunction& g, double hbar,
                           int order, std::string* warning = nullptr);
PhaseFunction moyal_bracket(const PhaseFunction& f, const PhaseFunction& g, double hbar,
                            int order, std::string* warning = nullptr);

struct TracePairing {
    double quantum;      // Tr(rho^dagger O)
    double classical;    // integral of symb(rho) symb(O)
    double discrepancy;  // |quantum - classical|
};

TracePairing trace_pairing(const OperatorMatrix& rho, const OperatorMatrix& obs);

// True where a node lies in the trusted interior band of every
// non-periodic axis (fraction of each axis span, centered).
std::vector<bool> interior_mask(const PhaseGrid& grid, double fraction = 0.8);

}  // namespace qcl
