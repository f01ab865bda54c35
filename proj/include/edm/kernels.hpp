#pragma once

// Data-parallel inner loops behind a runtime-selected function table.
//
// Every kernel has a portable scalar reference in kernels/scalar.cpp. When
// the library is built with EDM_ENABLE_AVX2 and the CPU reports AVX2+FMA, the
// AVX2 variants from kernels/avx2.cpp are used instead. The bitwise kernels
// are bit-exact across variants; the floating-point ones differ only by
// summation order.

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>

#include "edm/bits.hpp"

namespace edm::kernels {

// Row counts of the four input cells of a two-input unit, indexed by
// (a << 1) | b, restricted to a row mask. `positive` counts rows whose label
// bit is set.
struct CellCounts {
    std::array<std::uint32_t, 4> total{};
    std::array<std::uint32_t, 4> positive{};

    friend bool operator==(const CellCounts&, const CellCounts&) = default;
};

struct Table {
    std::string_view name;

    // out[i] bit = values[i] > threshold, for i < n. Writes words_for(n) words.
    void (*threshold_mask)(const double* values, std::size_t n, double threshold, Word* out);

    CellCounts (*cell_counts)(const Word* a, const Word* b, const Word* labels, const Word* mask,
                              std::size_t n_words);

    double (*dot)(const double* x, const double* y, std::size_t n);

    // out[r] = bias[r] + sum_c w[r * cols + c] * x[c]
    void (*gemv)(const double* w, const double* x, const double* bias, double* out, std::size_t rows,
                 std::size_t cols);

    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const Table& scalar();

// nullptr when not compiled in or not supported by the running CPU.
const Table* avx2();

// Best available table. EDM_KERNELS=scalar in the environment forces the
// scalar reference.
const Table& active();

}  // namespace edm::kernels
