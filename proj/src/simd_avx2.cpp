#include "qcl/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace qcl::simd {

namespace {

double hsum_pairwise(__m256d v) {
    // ((l0 + l2) + (l1 + l3)), same tree as the scalar reference.
    alignas(32) double lanes[4];
    _mm256_storeu_pd(lanes, v);
    return (lanes[0] + lanes[2]) + (lanes[1] + lanes[3]);
}

double reduce_add_avx2(const double* a, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
    double tail = 0;
    for (; i < n; ++i) tail += a[i];
    return hsum_pairwise(acc) + tail;
}

double dot_avx2(const double* a, const double* w, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(w + i)));
    double tail = 0;
    for (; i < n; ++i) tail += a[i] * w[i];
    return hsum_pairwise(acc) + tail;
}

// Two complex numbers per 256-bit vector, interleaved (re, im, re, im).
cplx cdot_avx2(const cplx* a, const cplx* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(pa + 2 * i);
        __m256d y = _mm256_loadu_pd(pb + 2 * i);
        __m256d y_sw = _mm256_permute_pd(y, 0x5);  // swap re/im
        // re: xr*yr - xi*yi ; im: xr*yi + xi*yr
        acc_re = _mm256_add_pd(acc_re, _mm256_mul_pd(x, y));
        acc_im = _mm256_add_pd(acc_im, _mm256_mul_pd(x, y_sw));
    }
    alignas(32) double lre[4], lim[4];
    _mm256_storeu_pd(lre, acc_re);
    _mm256_storeu_pd(lim, acc_im);
    // acc_re lanes: (xr*yr, xi*yi) pairs; lane l of the scalar reference is
    // re[l] = sum(xr*yr - xi*yi) -> (lre[0]-lre[1]) + (lre[2]-lre[3]) etc.
    double re = (lre[0] - lre[1]) + (lre[2] - lre[3]);
    double im = (lim[0] + lim[1]) + (lim[2] + lim[3]);
    double tr = 0, ti = 0;
    for (; i < n; ++i) {
        tr += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        ti += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {re + tr, im + ti};
}

cplx cdotc_avx2(const cplx* a, const cplx* b, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    __m256d acc_re = _mm256_setzero_pd();
    __m256d acc_im = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(pa + 2 * i);
        __m256d y = _mm256_loadu_pd(pb + 2 * i);
        __m256d y_sw = _mm256_permute_pd(y, 0x5);
        acc_re = _mm256_add_pd(acc_re, _mm256_mul_pd(x, y));
        acc_im = _mm256_add_pd(acc_im, _mm256_mul_pd(x, y_sw));
    }
    alignas(32) double lre[4], lim[4];
    _mm256_storeu_pd(lre, acc_re);
    _mm256_storeu_pd(lim, acc_im);
    double re = (lre[0] + lre[1]) + (lre[2] + lre[3]);
    double im = (lim[0] - lim[1]) + (lim[2] - lim[3]);
    double tr = 0, ti = 0;
    for (; i < n; ++i) {
        tr += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        ti += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {re + tr, im + ti};
}

void cmul_avx2(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    const double* pb = reinterpret_cast<const double*>(b);
    double* po = reinterpret_cast<double*>(out);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(pa + 2 * i);
        __m256d y = _mm256_loadu_pd(pb + 2 * i);
        __m256d yr = _mm256_permute_pd(y, 0x0);   // (yr, yr)
        __m256d yi = _mm256_permute_pd(y, 0xF);   // (yi, yi)
        __m256d x_sw = _mm256_permute_pd(x, 0x5); // (xi, xr)
        __m256d t = _mm256_mul_pd(x_sw, yi);      // (xi*yi, xr*yi)
        __m256d r = _mm256_fmaddsub_pd(x, yr, t); // (xr*yr - xi*yi, xi*yr + xr*yi)
        _mm256_storeu_pd(po + 2 * i, r);
    }
    for (; i < n; ++i) out[i] = a[i] * b[i];
}

void cscale_avx2(const cplx* a, cplx s, cplx* out, std::size_t n) {
    const double* pa = reinterpret_cast<const double*>(a);
    double* po = reinterpret_cast<double*>(out);
    __m256d sr = _mm256_set1_pd(s.real());
    __m256d si = _mm256_set1_pd(s.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        __m256d x = _mm256_loadu_pd(pa + 2 * i);
        __m256d x_sw = _mm256_permute_pd(x, 0x5);
        __m256d t = _mm256_mul_pd(x_sw, si);
        __m256d r = _mm256_fmaddsub_pd(x, sr, t);
        _mm256_storeu_pd(po + 2 * i, r);
    }
    for (; i < n; ++i) out[i] = a[i] * s;
}

}  // namespace

bool avx2_supported() { return __builtin_cpu_supports("avx2"); }

const Kernels& avx2() {
    static const Kernels k = {reduce_add_avx2, dot_avx2, cdot_avx2,
                              cdotc_avx2,      cmul_avx2, cscale_avx2};
    return k;
}

}  // namespace qcl::simd

#endif
