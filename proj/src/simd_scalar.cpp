#include "qcl/simd.hpp"

#include <cstdlib>

namespace qcl::simd {

namespace {

// Blocked 4-lane accumulation, matching the AVX2 lane layout exactly.
double reduce_add_scalar(const double* a, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] += a[i + l];
    double tail = 0;
    for (; i < n; ++i) tail += a[i];
    return ((acc[0] + acc[2]) + (acc[1] + acc[3])) + tail;
}

double dot_scalar(const double* a, const double* w, std::size_t n) {
    double acc[4] = {0, 0, 0, 0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (int l = 0; l < 4; ++l) acc[l] += a[i + l] * w[i + l];
    double tail = 0;
    for (; i < n; ++i) tail += a[i] * w[i];
    return ((acc[0] + acc[2]) + (acc[1] + acc[3])) + tail;
}

cplx cdot_scalar(const cplx* a, const cplx* b, std::size_t n) {
    double re[2] = {0, 0}, im[2] = {0, 0};
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        for (int l = 0; l < 2; ++l) {
            const cplx& x = a[i + l];
            const cplx& y = b[i + l];
            re[l] += x.real() * y.real() - x.imag() * y.imag();
            im[l] += x.real() * y.imag() + x.imag() * y.real();
        }
    }
    double tr = 0, ti = 0;
    for (; i < n; ++i) {
        tr += a[i].real() * b[i].real() - a[i].imag() * b[i].imag();
        ti += a[i].real() * b[i].imag() + a[i].imag() * b[i].real();
    }
    return {(re[0] + re[1]) + tr, (im[0] + im[1]) + ti};
}

cplx cdotc_scalar(const cplx* a, const cplx* b, std::size_t n) {
    double re[2] = {0, 0}, im[2] = {0, 0};
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        for (int l = 0; l < 2; ++l) {
            const cplx& x = a[i + l];
            const cplx& y = b[i + l];
            re[l] += x.real() * y.real() + x.imag() * y.imag();
            im[l] += x.real() * y.imag() - x.imag() * y.real();
        }
    }
    double tr = 0, ti = 0;
    for (; i < n; ++i) {
        tr += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
        ti += a[i].real() * b[i].imag() - a[i].imag() * b[i].real();
    }
    return {(re[0] + re[1]) + tr, (im[0] + im[1]) + ti};
}

void cmul_scalar(const cplx* a, const cplx* b, cplx* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void cscale_scalar(const cplx* a, cplx s, cplx* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * s;
}

}  // namespace

const Kernels& scalar() {
    static const Kernels k = {reduce_add_scalar, dot_scalar, cdot_scalar,
                              cdotc_scalar,      cmul_scalar, cscale_scalar};
    return k;
}

double pairwise_sum(const double* a, std::size_t n) {
    if (n <= 16) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += a[i];
        return s;
    }
    std::size_t h = n / 2;
    return pairwise_sum(a, h) + pairwise_sum(a + h, n - h);
}

}  // namespace qcl::simd
