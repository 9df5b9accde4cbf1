#include "nozzle/kernels/kernels.hpp"

#if defined(NOZZLE_BUILD_AVX2) && defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>
#define NOZZLE_AVX2_ENABLED 1
#endif

namespace nozzle::kernels {

#ifdef NOZZLE_AVX2_ENABLED

namespace {

// exp(x) for |x| < 708: range reduction by ln 2 then a degree-13 Taylor
// polynomial on |r| <= ln2/2 (truncation below 1e-17 relative).
__m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)), _mm256_set1_pd(708.0));
    const __m256d k = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
    r = _mm256_fnmadd_pd(k, ln2_lo, r);

    static constexpr double c[] = {1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
                                   1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,      1.0 / 720.0,
                                   1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,         0.5,
                                   1.0,                1.0};
    __m256d poly = _mm256_set1_pd(c[0]);
    for (int i = 1; i < 14; ++i) poly = _mm256_fmadd_pd(poly, r, _mm256_set1_pd(c[i]));

    // 2^k through the exponent field.
    const __m128i k32 = _mm256_cvtpd_epi32(k);
    __m256i k64 = _mm256_cvtepi32_epi64(k32);
    k64 = _mm256_slli_epi64(_mm256_add_epi64(k64, _mm256_set1_epi64x(1023)), 52);
    return _mm256_mul_pd(poly, _mm256_castsi256_pd(k64));
}

// log(x) for positive normal x: x = m 2^e with m in [sqrt(1/2), sqrt(2)),
// log m = 2 atanh(s), s = (m-1)/(m+1), odd series through s^27.
__m256d log_pd(__m256d x) {
    const __m256i bits = _mm256_castpd_si256(x);
    const __m256i mant_mask = _mm256_set1_epi64x(0x000FFFFFFFFFFFFFLL);
    const __m256i one_bits = _mm256_set1_epi64x(0x3FF0000000000000LL);
    __m256d m = _mm256_castsi256_pd(_mm256_or_si256(_mm256_and_si256(bits, mant_mask), one_bits));
    // Biased exponent as double via the 2^52 trick.
    const __m256i ebits = _mm256_srli_epi64(bits, 52);
    const __m256d two52 = _mm256_set1_pd(4503599627370496.0);
    __m256d e = _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(ebits, _mm256_castpd_si256(two52))), two52);
    e = _mm256_sub_pd(e, _mm256_set1_pd(1023.0));

    const __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(1.4142135623730951), _CMP_GE_OQ);
    m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
    e = _mm256_blendv_pd(e, _mm256_add_pd(e, _mm256_set1_pd(1.0)), big);

    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
    const __m256d s2 = _mm256_mul_pd(s, s);
    __m256d poly = _mm256_set1_pd(1.0 / 27.0);
    for (int k = 25; k >= 1; k -= 2) poly = _mm256_fmadd_pd(poly, s2, _mm256_set1_pd(1.0 / k));
    const __m256d log_m = _mm256_mul_pd(_mm256_add_pd(s, s), poly);

    const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
    const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
    return _mm256_add_pd(_mm256_fmadd_pd(e, ln2_hi, log_m), _mm256_mul_pd(e, ln2_lo));
}

}  // namespace

bool avx2_available() {
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void shear_rate_avx2(const GradientBatch& g, std::size_t n, double gamma_min, double* out) {
    const __m256d two = _mm256_set1_pd(2.0), half = _mm256_set1_pd(0.5), gmin = _mm256_set1_pd(gamma_min);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d exx = _mm256_loadu_pd(g.dudx + i);
        const __m256d eyy = _mm256_loadu_pd(g.dvdy + i);
        const __m256d ezz = g.hoop ? _mm256_loadu_pd(g.hoop + i) : _mm256_setzero_pd();
        const __m256d exy = _mm256_mul_pd(half, _mm256_add_pd(_mm256_loadu_pd(g.dudy + i), _mm256_loadu_pd(g.dvdx + i)));
        __m256d s = _mm256_mul_pd(exx, exx);
        s = _mm256_fmadd_pd(eyy, eyy, s);
        s = _mm256_fmadd_pd(ezz, ezz, s);
        s = _mm256_fmadd_pd(_mm256_mul_pd(two, exy), exy, s);
        s = _mm256_mul_pd(two, s);
        _mm256_storeu_pd(out + i, _mm256_max_pd(_mm256_sqrt_pd(s), gmin));
    }
    if (i < n) {
        GradientBatch tail{g.dudx + i, g.dudy + i, g.dvdx + i, g.dvdy + i, g.hoop ? g.hoop + i : nullptr};
        shear_rate_scalar(tail, n - i, gamma_min, out + i);
    }
}

void cross_wlf_avx2(const double* gamma_dot, const double* T, std::size_t n, const CrossWlfParams& p, double* eta) {
    const __m256d Tref = _mm256_set1_pd(p.T_ref), A1 = _mm256_set1_pd(-p.A1), A2 = _mm256_set1_pd(p.A2);
    const __m256d D1 = _mm256_set1_pd(p.D1), inv_tau = _mm256_set1_pd(1.0 / p.tau_star);
    const __m256d m = _mm256_set1_pd(1.0 - p.n), one = _mm256_set1_pd(1.0), zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dT = _mm256_sub_pd(_mm256_loadu_pd(T + i), Tref);
        const __m256d eta0 = _mm256_mul_pd(D1, exp_pd(_mm256_div_pd(_mm256_mul_pd(A1, dT), _mm256_add_pd(A2, dT))));
        const __m256d x = _mm256_mul_pd(_mm256_mul_pd(eta0, _mm256_loadu_pd(gamma_dot + i)), inv_tau);
        const __m256d pos = _mm256_cmp_pd(x, zero, _CMP_GT_OQ);
        const __m256d safe_x = _mm256_blendv_pd(one, x, pos);
        const __m256d powx = _mm256_and_pd(exp_pd(_mm256_mul_pd(m, log_pd(safe_x))), pos);
        _mm256_storeu_pd(eta + i, _mm256_div_pd(eta0, _mm256_add_pd(one, powx)));
    }
    if (i < n) cross_wlf_scalar(gamma_dot + i, T + i, n - i, p, eta + i);
}

#else

bool avx2_available() { return false; }

void shear_rate_avx2(const GradientBatch& g, std::size_t n, double gamma_min, double* out) {
    shear_rate_scalar(g, n, gamma_min, out);
}

void cross_wlf_avx2(const double* gamma_dot, const double* T, std::size_t n, const CrossWlfParams& p, double* eta) {
    cross_wlf_scalar(gamma_dot, T, n, p, eta);
}

#endif

}  // namespace nozzle::kernels
