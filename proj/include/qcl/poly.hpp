#pragma once

// Sparse multivariate polynomial over phase-space coordinates
// (q_1..q_d, p_1..p_d), complex coefficients. Exact arithmetic backend
// for Poisson brackets, star products and Moyal brackets on the dense
// polynomial subalgebra.

#include <array>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace qcl {

using cplx = std::complex<double>;

class Poly {
public:
    static constexpr int kMaxVars = 8;  // up to 4 degrees of freedom
    using Expo = std::array<std::uint8_t, kMaxVars>;

    // dof = number of degrees of freedom d; variables 0..d-1 are q,
    // d..2d-1 are p.
    explicit Poly(int dof = 1) : dof_(dof) {
        if (dof < 1 || 2 * dof > kMaxVars) throw std::invalid_argument("Poly: bad dof");
    }

    int dof() const { return dof_; }
    int nvars() const { return 2 * dof_; }
    bool is_zero() const { return terms_.empty(); }
    int degree() const;

    static Poly constant(cplx c, int dof = 1);
    static Poly variable(int var, int dof);  // x_var
    static Poly q(int i = 0, int dof = 1) { return variable(i, dof); }
    static Poly p(int i = 0, int dof = 1) { return variable(dof + i, dof); }

    Poly& add_term(const Expo& e, cplx c);

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator*(cplx s) const;
    Poly operator-() const { return *this * cplx(-1.0); }
    Poly& operator+=(const Poly& o) { return *this = *this + o; }

    Poly derivative(int var) const;

    cplx eval(const std::vector<double>& x) const;
    double eval_real(const std::vector<double>& x) const { return eval(x).real(); }

    // Max |coefficient| of (this - o); exact-comparison helper.
    double max_coeff_diff(const Poly& o) const;
    double max_coeff() const;

    bool has_real_coeffs(double tol = 1e-14) const;

    const std::map<Expo, cplx>& terms() const { return terms_; }

private:
    void check_dof(const Poly& o) const {
        if (dof_ != o.dof_) throw std::invalid_argument("Poly: dof mismatch");
    }
    void prune();

    int dof_;
    std::map<Expo, cplx> terms_;
};

// Poisson bracket sum_j (df/dq_j dg/dp_j - df/dp_j dg/dq_j), exact.
Poly poisson_bracket(const Poly& f, const Poly& g);

// Moyal star product, truncated at `order` terms of the bidifferential
// series; the series terminates once order >= deg f + deg g.
Poly star_product(const Poly& f, const Poly& g, double hbar, int order);

// (1/ihbar)(f*g - g*f) with both star products truncated at `order`.
Poly moyal_bracket(const Poly& f, const Poly& g, double hbar, int order);

}  // namespace qcl
