#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace edm {

using Word = std::uint64_t;

constexpr std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

// Fixed-length bit vector over sample rows. Bits past size() are kept zero.
class BitVector {
public:
    BitVector() = default;
    explicit BitVector(std::size_t size, bool value = false)
        : words_(words_for(size), value ? ~Word{0} : Word{0}), size_(size) {
        trim();
    }

    std::size_t size() const { return size_; }
    std::size_t word_count() const { return words_.size(); }

    bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1U; }
    void set(std::size_t i, bool value = true) {
        const Word bit = Word{1} << (i & 63);
        if (value) {
            words_[i >> 6] |= bit;
        } else {
            words_[i >> 6] &= ~bit;
        }
    }

    std::span<const Word> words() const { return words_; }
    std::span<Word> words() { return words_; }
    const Word* data() const { return words_.data(); }
    Word* data() { return words_.data(); }

    std::size_t count() const {
        std::size_t total = 0;
        for (Word w : words_) {
            total += static_cast<std::size_t>(std::popcount(w));
        }
        return total;
    }

    // Clears bits beyond size(); call after writing whole words.
    void trim() {
        if (size_ % 64 != 0 && !words_.empty()) {
            words_.back() &= (Word{1} << (size_ % 64)) - 1;
        }
    }

    friend bool operator==(const BitVector&, const BitVector&) = default;

private:
    std::vector<Word> words_;
    std::size_t size_ = 0;
};

}  // namespace edm
