#include <immintrin.h>

#include "edm/kernels.hpp"

namespace edm::kernels {
namespace {

inline std::uint32_t popcnt(Word w) { return static_cast<std::uint32_t>(_mm_popcnt_u64(w)); }

// Per-64-bit-lane popcount (Mula's nibble lookup).
inline __m256i popcount_epi64(__m256i v) {
    const __m256i lut = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1, 2, 1,
                                         2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
    const __m256i low_mask = _mm256_set1_epi8(0x0f);
    const __m256i lo = _mm256_and_si256(v, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    const __m256i cnt = _mm256_add_epi8(_mm256_shuffle_epi8(lut, lo), _mm256_shuffle_epi8(lut, hi));
    return _mm256_sad_epu8(cnt, _mm256_setzero_si256());
}

inline std::uint32_t hsum_epi64(__m256i v) {
    alignas(32) std::uint64_t lanes[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), v);
    return static_cast<std::uint32_t>(lanes[0] + lanes[1] + lanes[2] + lanes[3]);
}

inline double hsum_pd(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void threshold_mask(const double* values, std::size_t n, double threshold, Word* out) {
    const __m256d q = _mm256_set1_pd(threshold);
    const std::size_t n_words = words_for(n);
    for (std::size_t w = 0; w < n_words; ++w) {
        const std::size_t base = w * 64;
        const std::size_t end = (base + 64 < n) ? base + 64 : n;
        Word bits = 0;
        std::size_t i = base;
        for (; i + 4 <= end; i += 4) {
            const __m256d v = _mm256_loadu_pd(values + i);
            const auto m = static_cast<Word>(_mm256_movemask_pd(_mm256_cmp_pd(v, q, _CMP_GT_OQ)));
            bits |= m << (i - base);
        }
        for (; i < end; ++i) {
            bits |= static_cast<Word>(values[i] > threshold) << (i - base);
        }
        out[w] = bits;
    }
}

CellCounts cell_counts(const Word* a, const Word* b, const Word* labels, const Word* mask,
                       std::size_t n_words) {
    std::uint32_t n = 0, na = 0, nb = 0, nab = 0;
    std::uint32_t p = 0, pa = 0, pb = 0, pab = 0;
    std::size_t w = 0;
    if (n_words >= 4) {
        __m256i vn = _mm256_setzero_si256(), vna = vn, vnb = vn, vnab = vn;
        __m256i vp = vn, vpa = vn, vpb = vn, vpab = vn;
        for (; w + 4 <= n_words; w += 4) {
            const __m256i m = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(mask + w));
            const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(labels + w));
            const __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + w));
            const __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + w));
            const __m256i mp = _mm256_and_si256(m, y);
            const __m256i ab = _mm256_and_si256(va, vb);
            vn = _mm256_add_epi64(vn, popcount_epi64(m));
            vna = _mm256_add_epi64(vna, popcount_epi64(_mm256_and_si256(va, m)));
            vnb = _mm256_add_epi64(vnb, popcount_epi64(_mm256_and_si256(vb, m)));
            vnab = _mm256_add_epi64(vnab, popcount_epi64(_mm256_and_si256(ab, m)));
            vp = _mm256_add_epi64(vp, popcount_epi64(mp));
            vpa = _mm256_add_epi64(vpa, popcount_epi64(_mm256_and_si256(va, mp)));
            vpb = _mm256_add_epi64(vpb, popcount_epi64(_mm256_and_si256(vb, mp)));
            vpab = _mm256_add_epi64(vpab, popcount_epi64(_mm256_and_si256(ab, mp)));
        }
        n = hsum_epi64(vn);
        na = hsum_epi64(vna);
        nb = hsum_epi64(vnb);
        nab = hsum_epi64(vnab);
        p = hsum_epi64(vp);
        pa = hsum_epi64(vpa);
        pb = hsum_epi64(vpb);
        pab = hsum_epi64(vpab);
    }
    for (; w < n_words; ++w) {
        const Word m = mask[w];
        const Word mp = m & labels[w];
        const Word ab = a[w] & b[w];
        n += popcnt(m);
        na += popcnt(a[w] & m);
        nb += popcnt(b[w] & m);
        nab += popcnt(ab & m);
        p += popcnt(mp);
        pa += popcnt(a[w] & mp);
        pb += popcnt(b[w] & mp);
        pab += popcnt(ab & mp);
    }
    CellCounts c;
    c.total = {n - na - nb + nab, nb - nab, na - nab, nab};
    c.positive = {p - pa - pb + pab, pb - pab, pa - pab, pab};
    return c;
}

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    }
    double s = hsum_pd(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        s += x[i] * y[i];
    }
    return s;
}

void gemv(const double* w, const double* x, const double* bias, double* out, std::size_t rows,
          std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        out[r] = bias[r] + dot(w + r * cols, x, cols);
    }
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

}  // namespace

const Table& avx2_table() {
    static const Table table{"avx2", threshold_mask, cell_counts, dot, gemv, axpy};
    return table;
}

}  // namespace edm::kernels
