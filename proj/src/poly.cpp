#include "qcl/poly.hpp"

#include <cmath>

namespace qcl {

namespace {
constexpr double kPruneTol = 0.0;  // drop exact zeros only
}

int Poly::degree() const {
    int d = 0;
    for (const auto& [e, c] : terms_) {
        int t = 0;
        for (int v = 0; v < nvars(); ++v) t += e[v];
        if (t > d) d = t;
    }
    return d;
}

Poly Poly::constant(cplx c, int dof) {
    Poly r(dof);
    if (c != cplx(0.0)) r.terms_[Expo{}] = c;
    return r;
}

Poly Poly::variable(int var, int dof) {
    Poly r(dof);
    if (var < 0 || var >= 2 * dof) throw std::invalid_argument("Poly: bad variable index");
    Expo e{};
    e[var] = 1;
    r.terms_[e] = 1.0;
    return r;
}

Poly& Poly::add_term(const Expo& e, cplx c) {
    for (int v = 2 * dof_; v < kMaxVars; ++v)
        if (e[v] != 0) throw std::invalid_argument("Poly: exponent beyond dof");
    terms_[e] += c;
    prune();
    return *this;
}

void Poly::prune() {
    for (auto it = terms_.begin(); it != terms_.end();) {
        if (std::abs(it->second) <= kPruneTol)
            it = terms_.erase(it);
        else
            ++it;
    }
}

Poly Poly::operator+(const Poly& o) const {
    check_dof(o);
    Poly r = *this;
    for (const auto& [e, c] : o.terms_) r.terms_[e] += c;
    r.prune();
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (o * cplx(-1.0)); }

Poly Poly::operator*(const Poly& o) const {
    check_dof(o);
    Poly r(dof_);
    for (const auto& [ea, ca] : terms_) {
        for (const auto& [eb, cb] : o.terms_) {
            Expo e{};
            for (int v = 0; v < kMaxVars; ++v) {
                int s = ea[v] + eb[v];
                if (s > 255) throw std::overflow_error("Poly: exponent overflow");
                e[v] = static_cast<std::uint8_t>(s);
            }
            r.terms_[e] += ca * cb;
        }
    }
    r.prune();
    return r;
}

Poly Poly::operator*(cplx s) const {
    Poly r(dof_);
    if (s == cplx(0.0)) return r;
    for (const auto& [e, c] : terms_) r.terms_[e] = c * s;
    return r;
}

Poly Poly::derivative(int var) const {
    if (var < 0 || var >= nvars()) throw std::invalid_argument("Poly: bad derivative var");
    Poly r(dof_);
    for (const auto& [e, c] : terms_) {
        if (e[var] == 0) continue;
        Expo d = e;
        d[var] -= 1;
        r.terms_[d] += c * static_cast<double>(e[var]);
    }
    r.prune();
    return r;
}

cplx Poly::eval(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != nvars())
        throw std::invalid_argument("Poly::eval: wrong point dimension");
    cplx s = 0.0;
    for (const auto& [e, c] : terms_) {
        double m = 1.0;
        for (int v = 0; v < nvars(); ++v)
            for (int k = 0; k < e[v]; ++k) m *= x[v];
        s += c * m;
    }
    return s;
}

double Poly::max_coeff_diff(const Poly& o) const {
    Poly d = *this - o;
    return d.max_coeff();
}

double Poly::max_coeff() const {
    double m = 0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
}

bool Poly::has_real_coeffs(double tol) const {
    for (const auto& [e, c] : terms_)
        if (std::abs(c.imag()) > tol * std::max(1.0, std::abs(c))) return false;
    return true;
}

Poly poisson_bracket(const Poly& f, const Poly& g) {
    if (f.dof() != g.dof()) throw std::invalid_argument("poisson_bracket: dof mismatch");
    const int d = f.dof();
    Poly r(d);
    for (int j = 0; j < d; ++j) {
        r += f.derivative(j) * g.derivative(d + j);
        r += (f.derivative(d + j) * g.derivative(j)) * cplx(-1.0);
    }
    return r;
}

namespace {

// One application of the bidifferential operator
// f (<-d_a omega^{ab} ->d_b) g expanded as a signed list of (f', g') pairs.
struct Term {
    Poly f, g;
    double sign;
};

std::vector<Term> apply_bidiff(const std::vector<Term>& in) {
    std::vector<Term> out;
    for (const Term& t : in) {
        const int d = t.f.dof();
        for (int j = 0; j < d; ++j) {
            Poly fq = t.f.derivative(j);
            Poly gp = t.g.derivative(d + j);
            if (!fq.is_zero() && !gp.is_zero()) out.push_back({fq, gp, t.sign});
            Poly fp = t.f.derivative(d + j);
            Poly gq = t.g.derivative(j);
            if (!fp.is_zero() && !gq.is_zero()) out.push_back({fp, gq, -t.sign});
        }
    }
    return out;
}

}  // namespace

Poly star_product(const Poly& f, const Poly& g, double hbar, int order) {
    if (f.dof() != g.dof()) throw std::invalid_argument("star_product: dof mismatch");
    if (order < 0) throw std::invalid_argument("star_product: negative order");
    Poly result = f * g;
    std::vector<Term> terms = {{f, g, 1.0}};
    cplx factor = 1.0;
    for (int n = 1; n <= order; ++n) {
        terms = apply_bidiff(terms);
        if (terms.empty()) break;
        // exp(-ihbar/2 <-d_a omega^{ab} ->d_b) with omega^{qp} = -1 turns
        // the n-th power into (+ihbar/2)^n / n! times the Poisson-type
        // bidifferential, so {q,p}: q*p = qp + ihbar/2.
        factor *= cplx(0.0, hbar / 2.0) / static_cast<double>(n);
        Poly sum(f.dof());
        for (const Term& t : terms) sum += (t.f * t.g) * cplx(t.sign);
        result += sum * factor;
    }
    return result;
}

Poly moyal_bracket(const Poly& f, const Poly& g, double hbar, int order) {
    Poly fg = star_product(f, g, hbar, order);
    Poly gf = star_product(g, f, hbar, order);
    return (fg - gf) * (cplx(1.0) / cplx(0.0, hbar));
}

}  // namespace qcl
