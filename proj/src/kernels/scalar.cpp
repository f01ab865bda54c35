#include <bit>

#include "edm/kernels.hpp"

namespace edm::kernels {
namespace {

void threshold_mask(const double* values, std::size_t n, double threshold, Word* out) {
    const std::size_t n_words = words_for(n);
    for (std::size_t w = 0; w < n_words; ++w) {
        Word bits = 0;
        const std::size_t base = w * 64;
        const std::size_t end = (base + 64 < n) ? base + 64 : n;
        for (std::size_t i = base; i < end; ++i) {
            bits |= static_cast<Word>(values[i] > threshold) << (i - base);
        }
        out[w] = bits;
    }
}

CellCounts cell_counts(const Word* a, const Word* b, const Word* labels, const Word* mask,
                       std::size_t n_words) {
    std::uint32_t n = 0, na = 0, nb = 0, nab = 0;
    std::uint32_t p = 0, pa = 0, pb = 0, pab = 0;
    for (std::size_t w = 0; w < n_words; ++w) {
        const Word m = mask[w];
        const Word mp = m & labels[w];
        const Word ab = a[w] & b[w];
        n += std::popcount(m);
        na += std::popcount(a[w] & m);
        nb += std::popcount(b[w] & m);
        nab += std::popcount(ab & m);
        p += std::popcount(mp);
        pa += std::popcount(a[w] & mp);
        pb += std::popcount(b[w] & mp);
        pab += std::popcount(ab & mp);
    }
    CellCounts c;
    c.total = {n - na - nb + nab, nb - nab, na - nab, nab};
    c.positive = {p - pa - pb + pab, pb - pab, pa - pab, pab};
    return c;
}

double dot(const double* x, const double* y, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
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
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += alpha * x[i];
    }
}

}  // namespace

const Table& scalar() {
    static const Table table{"scalar", threshold_mask, cell_counts, dot, gemv, axpy};
    return table;
}

}  // namespace edm::kernels
