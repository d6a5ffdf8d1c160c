// Bit-packed binary feature columns. Model training touches these through
// popcount combinations only, which keeps the per-candidate retraining cost
// in the evaluate-by-retraining loop small.
#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "lucid/relational.hpp"

namespace lucid {

class BitColumn {
public:
    BitColumn() = default;
    explicit BitColumn(uint32_t n) : n_(n), words_((n + 63) / 64, 0) {}

    uint32_t size() const { return n_; }
    void set(uint32_t i) { words_[i >> 6] |= (1ULL << (i & 63)); }
    bool get(uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    uint32_t count() const {
        uint32_t c = 0;
        for (uint64_t w : words_) c += static_cast<uint32_t>(std::popcount(w));
        return c;
    }

    size_t n_words() const { return words_.size(); }
    uint64_t word(size_t i) const { return words_[i]; }
    uint64_t& word(size_t i) { return words_[i]; }

    void clear() { std::fill(words_.begin(), words_.end(), 0); }

    void or_with(const BitColumn& o) {
        for (size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
    }

    bool operator==(const BitColumn& o) const { return n_ == o.n_ && words_ == o.words_; }

    // True iff every set bit of *this is set in o.
    bool subset_of(const BitColumn& o) const {
        for (size_t i = 0; i < words_.size(); ++i)
            if (words_[i] & ~o.words_[i]) return false;
        return true;
    }

    uint64_t hash() const {
        uint64_t h = 0x9e3779b97f4a7c15ULL + n_;
        for (uint64_t w : words_) {
            h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        }
        return h;
    }

private:
    uint32_t n_ = 0;
    std::vector<uint64_t> words_;

    friend uint32_t and_count(const BitColumn&, const BitColumn&);
    friend uint32_t and_count(const BitColumn&, const BitColumn&, const BitColumn&);
    friend uint32_t andnot_count(const BitColumn&, const BitColumn&);
};

inline uint32_t and_count(const BitColumn& a, const BitColumn& b) {
    uint32_t c = 0;
    for (size_t i = 0; i < a.words_.size(); ++i)
        c += static_cast<uint32_t>(std::popcount(a.words_[i] & b.words_[i]));
    return c;
}

inline uint32_t and_count(const BitColumn& a, const BitColumn& b, const BitColumn& c) {
    uint32_t n = 0;
    for (size_t i = 0; i < a.words_.size(); ++i)
        n += static_cast<uint32_t>(std::popcount(a.words_[i] & b.words_[i] & c.words_[i]));
    return n;
}

// |a & ~b|
inline uint32_t andnot_count(const BitColumn& a, const BitColumn& b) {
    uint32_t c = 0;
    for (size_t i = 0; i < a.words_.size(); ++i)
        c += static_cast<uint32_t>(std::popcount(a.words_[i] & ~b.words_[i]));
    return c;
}

// Examples-by-features 0/1 matrix with labels; rows follow the example order
// used to build it.
struct FeatureMatrix {
    uint32_t n_rows = 0;
    std::vector<BitColumn> columns;
    BitColumn labels;

    size_t n_features() const { return columns.size(); }
    uint8_t value(uint32_t row, size_t feature) const {
        return columns[feature].get(row) ? 1 : 0;
    }
    std::vector<uint8_t> row(uint32_t r) const {
        std::vector<uint8_t> out(columns.size());
        for (size_t j = 0; j < columns.size(); ++j) out[j] = value(r, j);
        return out;
    }
};

}  // namespace lucid
