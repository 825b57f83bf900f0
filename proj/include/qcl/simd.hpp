#pragma once

// Runtime-dispatched arithmetic kernels. Every kernel has a scalar
// reference implementation and an AVX2 variant; the active backend is
// chosen once at startup (override with QCL_SIMD=scalar|avx2).
//
// All reductions use the same 4-lane blocked accumulation order in both
// backends, so scalar and AVX2 results agree to the last few ulps and
// outputs do not depend on the selected backend beyond ~1e-15 relative.

#include <complex>
#include <cstddef>
#include <string>

namespace qcl::simd {

using cplx = std::complex<double>;

struct Kernels {
    // sum_i a[i]
    double (*reduce_add)(const double* a, std::size_t n);
    // sum_i a[i] * w[i]
    double (*dot)(const double* a, const double* w, std::size_t n);
    // sum_i a[i] * b[i]   (complex)
    cplx (*cdot)(const cplx* a, const cplx* b, std::size_t n);
    // sum_i conj(a[i]) * b[i]
    cplx (*cdotc)(const cplx* a, const cplx* b, std::size_t n);
    // out[i] = a[i] * b[i]  (complex, pointwise)
    void (*cmul)(const cplx* a, const cplx* b, cplx* out, std::size_t n);
    // out[i] = a[i] * s
    void (*cscale)(const cplx* a, cplx s, cplx* out, std::size_t n);
};

// Active kernel table (dispatch decided on first use).
const Kernels& active();

// Backend name actually in use: "scalar" or "avx2".
const std::string& backend_name();

// Reference (scalar) table, always available; used by equivalence tests.
const Kernels& scalar();
#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported();
const Kernels& avx2();
#endif

// Convenience wrappers.
inline double reduce_add(const double* a, std::size_t n) { return active().reduce_add(a, n); }
inline double dot(const double* a, const double* w, std::size_t n) { return active().dot(a, w, n); }
inline cplx cdot(const cplx* a, const cplx* b, std::size_t n) { return active().cdot(a, b, n); }
inline cplx cdotc(const cplx* a, const cplx* b, std::size_t n) { return active().cdotc(a, b, n); }
inline void cmul(const cplx* a, const cplx* b, cplx* out, std::size_t n) { active().cmul(a, b, out, n); }
inline void cscale(const cplx* a, cplx s, cplx* out, std::size_t n) { active().cscale(a, s, out, n); }

// Pairwise (cascade) summation; reproducible and O(log n) error growth.
// Used where accumulation order must not depend on chunking.
double pairwise_sum(const double* a, std::size_t n);

}  // namespace qcl::simd
