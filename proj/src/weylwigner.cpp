#include "qcl/weylwigner.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "qcl/simd.hpp"

namespace qcl {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr int kMaxGridOrder = 8;
}  // namespace

OperatorMatrix::OperatorMatrix(int dim_, double dq_, double origin_, double hbar_)
    : dim(dim_), dq(dq_), origin(origin_), hbar(hbar_),
      entries(static_cast<std::size_t>(dim_) * dim_, 0.0) {
    if (dim < 1) throw std::invalid_argument("OperatorMatrix: dim must be positive");
    if (dq <= 0) throw std::invalid_argument("OperatorMatrix: dq must be > 0");
    if (hbar <= 0) throw std::invalid_argument("OperatorMatrix: hbar must be > 0");
}

double OperatorMatrix::momentum(int k) const {
    return 2 * kPi * hbar * (k - (dim - 1) / 2) / (dim * dq);
}

cplx OperatorMatrix::trace() const {
    cplx t = 0;
    for (int i = 0; i < dim; ++i) t += at(i, i);
    return t;
}

double OperatorMatrix::hermiticity_defect() const {
    double m = 0;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            m = std::max(m, std::abs(at(i, j) - std::conj(at(j, i))));
    return m;
}

bool OperatorMatrix::finite() const {
    for (const cplx& e : entries)
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}

OperatorMatrix OperatorMatrix::identity(int dim, double dq, double origin, double hbar) {
    OperatorMatrix m(dim, dq, origin, hbar);
    for (int i = 0; i < dim; ++i) m.at(i, i) = 1.0;
    return m;
}

OperatorMatrix OperatorMatrix::position_op(int dim, double dq, double origin, double hbar) {
    OperatorMatrix m(dim, dq, origin, hbar);
    for (int i = 0; i < dim; ++i) m.at(i, i) = m.position(i);
    return m;
}

OperatorMatrix OperatorMatrix::momentum_op(int dim, double dq, double origin, double hbar) {
    // p = F^dagger diag(p_k) F with the centered unitary DFT
    OperatorMatrix m(dim, dq, origin, hbar);
    const int M = (dim - 1) / 2;
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) {
            cplx s = 0;
            for (int k = 0; k < dim; ++k) {
                double ph = 2 * kPi * (k - M) * (a - b) / dim;
                s += m.momentum(k) * cplx(std::cos(ph), std::sin(ph));
            }
            m.at(a, b) = s / static_cast<double>(dim);
        }
    }
    return m;
}

OperatorMatrix OperatorMatrix::multiply(const OperatorMatrix& o) const {
    if (dim != o.dim) throw std::invalid_argument("OperatorMatrix::multiply: dim mismatch");
    OperatorMatrix r(dim, dq, origin, hbar);
    // row x column via the complex dot kernel on a transposed copy
    std::vector<cplx> ot(static_cast<std::size_t>(dim) * dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) ot[static_cast<std::size_t>(j) * dim + i] = o.at(i, j);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            r.at(i, j) = simd::cdot(&entries[static_cast<std::size_t>(i) * dim],
                                    &ot[static_cast<std::size_t>(j) * dim], dim);
    return r;
}

OperatorMatrix OperatorMatrix::adjoint() const {
    OperatorMatrix r(dim, dq, origin, hbar);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) r.at(i, j) = std::conj(at(j, i));
    return r;
}

OperatorMatrix OperatorMatrix::add(const OperatorMatrix& o, cplx weight) const {
    if (dim != o.dim) throw std::invalid_argument("OperatorMatrix::add: dim mismatch");
    OperatorMatrix r = *this;
    for (std::size_t i = 0; i < entries.size(); ++i) r.entries[i] += weight * o.entries[i];
    return r;
}

WignerSymbol wigner_symb(const OperatorMatrix& op, SymbolKind kind) {
    if (op.dim % 2 == 0)
        throw std::invalid_argument("wigner_symb: dim must be odd (half-integer offsets)");
    if (!op.finite()) throw std::invalid_argument("wigner_symb: non-finite entries");
    const int N = op.dim;
    const int M = (N - 1) / 2;

    Axis qax{op.position(0), op.position(N - 1), N, true};
    Axis pax{op.momentum(0), op.momentum(N - 1), N, true};
    PhaseGrid grid({qax, pax});

    // W(q_j, p_k) = sum_m e^{-i p_k (2 m dq)/hbar} <q_{j+m}| op |q_{j-m}>
    // with modular index arithmetic on the odd lattice.
    // e^{-i p_k 2 m dq / hbar} = e^{-4 pi i (k - M) m / N}.
    std::vector<cplx> tw(N);  // e^{-4 pi i m / N} powers handled per (k, m)
    std::vector<cplx> values(grid.size());
    // gather the diagonal-sum arrays d_j[m] = op[(j+m)%N][(j-m)%N]
    std::vector<cplx> d(N);
    std::vector<cplx> ph(N);
    for (int j = 0; j < N; ++j) {
        for (int m = 0; m < N; ++m)
            d[m] = op.at((j + m) % N, ((j - m) % N + N) % N);
        for (int k = 0; k < N; ++k) {
            for (int m = 0; m < N; ++m) {
                double a = -4 * kPi * (k - M) * m / N;
                ph[m] = {std::cos(a), std::sin(a)};
            }
            values[static_cast<std::size_t>(j) * N + k] = simd::cdot(d.data(), ph.data(), N);
        }
    }
    if (kind == SymbolKind::state) {
        double norm = 1.0 / (2 * kPi * op.hbar);  // one degree of freedom
        simd::cscale(values.data(), norm, values.data(), values.size());
    }
    return {PhaseFunction(grid, std::move(values)), op.hbar, kind};
}

namespace {

// All distinct interleavings of a q-factors and b p-factors.
void orderings(int a, int b, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
    if (a == 0 && b == 0) {
        out.push_back(cur);
        return;
    }
    if (a > 0) {
        cur.push_back(0);
        orderings(a - 1, b, cur, out);
        cur.pop_back();
    }
    if (b > 0) {
        cur.push_back(1);
        orderings(a, b - 1, cur, out);
        cur.pop_back();
    }
}

}  // namespace

OperatorMatrix weyl_quantize(const Poly& f, int dim, double dq, double origin, double hbar,
                             int max_degree) {
    if (f.dof() != 1) throw std::invalid_argument("weyl_quantize: one degree of freedom only");
    if (f.degree() > max_degree)
        throw std::invalid_argument("weyl_quantize: polynomial degree exceeds limit");
    OperatorMatrix qop = OperatorMatrix::position_op(dim, dq, origin, hbar);
    OperatorMatrix pop = OperatorMatrix::momentum_op(dim, dq, origin, hbar);
    OperatorMatrix result(dim, dq, origin, hbar);
    for (const auto& [e, c] : f.terms()) {
        int a = e[0], b = e[1];
        if (a == 0 && b == 0) {
            result = result.add(OperatorMatrix::identity(dim, dq, origin, hbar), c);
            continue;
        }
        std::vector<std::vector<int>> ords;
        std::vector<int> cur;
        orderings(a, b, cur, ords);
        OperatorMatrix sum(dim, dq, origin, hbar);
        for (const auto& ord : ords) {
            OperatorMatrix prod = (ord[0] == 0) ? qop : pop;
            for (std::size_t i = 1; i < ord.size(); ++i)
                prod = prod.multiply(ord[i] == 0 ? qop : pop);
            sum = sum.add(prod);
        }
        result = result.add(sum, c / static_cast<double>(ords.size()));
    }
    return result;
}

namespace {

// Spectral derivative along a periodic axis via direct centered DFT.
PhaseFunction spectral_derivative(const PhaseFunction& f, int axis) {
    const PhaseGrid& g = f.grid();
    const Axis& ax = g.axis(axis);
    const int N = ax.count;
    const int M = (N - 1) / 2;
    const double L = N * ax.spacing();  // periodic cell length
    std::vector<cplx> out(g.size());
    const std::size_t s = g.stride(axis);
    // lines along `axis`
    std::vector<cplx> line(N), hat(N), ph(N);
    for (std::size_t base = 0; base < g.size(); ++base) {
        auto idx = g.unflat(base);
        if (idx[axis] != 0) continue;
        for (int i = 0; i < N; ++i) line[i] = f.at(base + i * s);
        // forward centered DFT
        for (int k = 0; k < N; ++k) {
            for (int i = 0; i < N; ++i) {
                double a = -2 * kPi * (k - M) * i / N;
                ph[i] = {std::cos(a), std::sin(a)};
            }
            hat[k] = simd::cdot(line.data(), ph.data(), N);
        }
        // multiply by i kappa, inverse transform
        for (int k = 0; k < N; ++k) hat[k] *= cplx(0.0, 2 * kPi * (k - M) / L);
        for (int i = 0; i < N; ++i) {
            for (int k = 0; k < N; ++k) {
                double a = 2 * kPi * (k - M) * i / N;
                ph[k] = {std::cos(a), std::sin(a)};
            }
            out[base + i * s] = simd::cdot(hat.data(), ph.data(), N) / static_cast<double>(N);
        }
    }
    return PhaseFunction(g, std::move(out));
}

PhaseFunction grid_derivative(const PhaseFunction& f, int axis) {
    return f.grid().axis(axis).periodic ? spectral_derivative(f, axis) : f.derivative(axis);
}

// Cache of mixed partials d_q^a d_p^b f for the 2-axis grid backend.
class PartialCache {
public:
    explicit PartialCache(const PhaseFunction& f) { cache_[{0, 0}] = f; }

    const PhaseFunction& get(int aq, int ap) {
        auto it = cache_.find({aq, ap});
        if (it != cache_.end()) return it->second;
        if (ap > 0) {
            PhaseFunction d = grid_derivative(get(aq, ap - 1), 1);
            return cache_.emplace(std::make_pair(aq, ap), std::move(d)).first->second;
        }
        PhaseFunction d = grid_derivative(get(aq - 1, 0), 0);
        return cache_.emplace(std::make_pair(aq, ap), std::move(d)).first->second;
    }

private:
    std::map<std::pair<int, int>, PhaseFunction> cache_;
};

double binom(int n, int k) {
    double r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

PhaseFunction star_grid(const PhaseFunction& f, const PhaseFunction& g, double hbar, int order,
                        std::string* warning) {
    if (!(f.grid() == g.grid())) throw std::invalid_argument("star_product: grid mismatch");
    if (f.grid().naxes() != 2)
        throw std::invalid_argument("star_product: grid backend supports one degree of freedom");
    if (order > kMaxGridOrder) {
        if (warning)
            *warning = "star_product: order clamped to " + std::to_string(kMaxGridOrder) +
                       " (grid derivative accuracy limit)";
        order = kMaxGridOrder;
    }
    PartialCache cf(f), cg(g);
    std::vector<cplx> acc(f.grid().size(), 0.0);
    cplx factor = 1.0;  // (i hbar / 2)^n / n!
    for (int n = 0; n <= order; ++n) {
        if (n > 0) factor *= cplx(0.0, hbar / 2.0) / static_cast<double>(n);
        for (int k = 0; k <= n; ++k) {
            const PhaseFunction& df = cf.get(n - k, k);
            const PhaseFunction& dg = cg.get(k, n - k);
            cplx w = factor * binom(n, k) * ((k % 2) ? -1.0 : 1.0);
            for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += w * df.at(i) * dg.at(i);
        }
    }
    return PhaseFunction(f.grid(), std::move(acc));
}

}  // namespace

PhaseFunction star_product(const PhaseFunction& f, const PhaseFunction& g, double hbar,
                           int order, std::string* warning) {
    if (order < 0) throw std::invalid_argument("star_product: negative order");
    if (f.exact_form() && g.exact_form()) {
        Poly s = star_product(*f.exact_form(), *g.exact_form(), hbar, order);
        PhaseFunction r = PhaseFunction::from_poly(f.grid(), s);
        return r;
    }
    return star_grid(f, g, hbar, order, warning);
}

PhaseFunction moyal_bracket(const PhaseFunction& f, const PhaseFunction& g, double hbar,
                            int order, std::string* warning) {
    if (f.exact_form() && g.exact_form()) {
        Poly b = moyal_bracket(*f.exact_form(), *g.exact_form(), hbar, order);
        return PhaseFunction::from_poly(f.grid(), b);
    }
    PhaseFunction fg = star_product(f, g, hbar, order, warning);
    PhaseFunction gf = star_product(g, f, hbar, order, warning);
    std::vector<cplx> v(fg.grid().size());
    const cplx inv_ih = cplx(1.0) / cplx(0.0, hbar);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = inv_ih * (fg.at(i) - gf.at(i));
    return PhaseFunction(fg.grid(), std::move(v));
}

TracePairing trace_pairing(const OperatorMatrix& rho, const OperatorMatrix& obs) {
    if (rho.dim != obs.dim || rho.dq != obs.dq || rho.hbar != obs.hbar)
        throw std::invalid_argument("trace_pairing: basis mismatch");
    cplx q = 0;
    for (int i = 0; i < rho.dim; ++i)
        for (int j = 0; j < rho.dim; ++j) q += std::conj(rho.at(j, i)) * obs.at(j, i);
    WignerSymbol ws = wigner_symb(rho, SymbolKind::state);
    WignerSymbol wo = wigner_symb(obs, SymbolKind::observable);
    std::vector<cplx> prod(ws.function.values().size());
    simd::cmul(ws.function.values().data(), wo.function.values().data(), prod.data(),
               prod.size());
    cplx c = integrate_phase(PhaseFunction(ws.function.grid(), std::move(prod)));
    TracePairing r{q.real(), c.real(), std::abs(q.real() - c.real())};
    return r;
}

std::vector<bool> interior_mask(const PhaseGrid& grid, double fraction) {
    std::vector<bool> mask(grid.size(), true);
    for (std::size_t f = 0; f < grid.size(); ++f) {
        auto idx = grid.unflat(f);
        for (int a = 0; a < grid.naxes(); ++a) {
            const Axis& ax = grid.axis(a);
            double lo = ax.min + (1 - fraction) / 2 * (ax.max - ax.min);
            double hi = ax.max - (1 - fraction) / 2 * (ax.max - ax.min);
            double c = ax.coord(idx[a]);
            if (c < lo || c > hi) mask[f] = false;
        }
    }
    return mask;
}

}  // namespace qcl
