#pragma once

#include <array>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <vector>

namespace rankmap {

// Exact fixed-point accumulator for doubles.
//
// The running sum is held as an integer spread over 32-bit limbs covering the
// entire double exponent range, so adding values and merging accumulators are
// integer operations: associative, commutative, and free of rounding. The
// rounded double is produced once, at read time, with round-to-nearest-even.
//
// This is what lets a chunked reduction (partial sums per worker, folded in
// any grouping) return bit-identical results to a single sequential pass: the
// reduce operates on exact state, so the grouping cannot matter.
class ExactAccumulator {
public:
    ExactAccumulator() { limb_.fill(0); }

    void reset() {
        limb_.fill(0);
        pending_ = 0;
    }

    // x must be finite; +-0 contributes nothing.
    void add(double x) {
        assert(std::isfinite(x));
        if (x == 0.0) return;
        const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
        const bool neg = (bits >> 63) != 0;
        const std::uint64_t biased = (bits >> 52) & 0x7ff;
        std::uint64_t sig = bits & ((std::uint64_t(1) << 52) - 1);
        int e2;  // x = +-sig * 2^e2, sig < 2^53
        if (biased == 0) {
            e2 = -1074;
        } else {
            sig |= std::uint64_t(1) << 52;
            e2 = static_cast<int>(biased) - 1075;
        }
        const int k = e2 + 1074;  // bit offset into the accumulator, 0..2045
        const int li = k >> 5;
        const int sh = k & 31;
        const unsigned __int128 w = static_cast<unsigned __int128>(sig) << sh;
        const std::int64_t p0 = static_cast<std::int64_t>(static_cast<std::uint64_t>(w) & 0xffffffffu);
        const std::int64_t p1 = static_cast<std::int64_t>(static_cast<std::uint64_t>(w >> 32) & 0xffffffffu);
        const std::int64_t p2 = static_cast<std::int64_t>(static_cast<std::uint64_t>(w >> 64));
        if (neg) {
            limb_[li] -= p0;
            limb_[li + 1] -= p1;
            limb_[li + 2] -= p2;
        } else {
            limb_[li] += p0;
            limb_[li + 1] += p1;
            limb_[li + 2] += p2;
        }
        if (++pending_ >= kRenormEvery) normalize();
    }

    // Exact merge of another accumulator's state.
    void merge(const ExactAccumulator& o) {
        for (int i = 0; i < kLimbs; ++i) limb_[i] += o.limb_[i];
        pending_ += o.pending_ + 1;
        if (pending_ >= kRenormEvery) normalize();
    }

    // Rounds the exact sum to the nearest double (ties to even).
    double round() const {
        // Canonicalize into limbs in [0, 2^32) plus a sign carry.
        std::array<std::uint64_t, kLimbs + 2> mag{};
        std::int64_t carry = 0;
        for (int i = 0; i < kLimbs; ++i) {
            const std::int64_t v = limb_[i] + carry;
            const std::int64_t lo = v & 0xffffffffll;
            carry = (v - lo) >> 32;
            mag[static_cast<std::size_t>(i)] = static_cast<std::uint64_t>(lo);
        }
        // In-range sums leave carry in {0, -1}: 0 for non-negative totals,
        // -1 for negative totals stored in two's complement.
        const bool negative = carry != 0;
        if (negative) {
            std::uint64_t borrow = 1;
            for (int i = 0; i < kLimbs; ++i) {
                const std::uint64_t t = (~mag[static_cast<std::size_t>(i)] & 0xffffffffu) + borrow;
                mag[static_cast<std::size_t>(i)] = t & 0xffffffffu;
                borrow = t >> 32;
            }
        }
        int top_limb = -1;
        for (int i = kLimbs - 1; i >= 0; --i) {
            if (mag[static_cast<std::size_t>(i)] != 0) {
                top_limb = i;
                break;
            }
        }
        if (top_limb < 0) return 0.0;
        const int top_bit = 32 * top_limb + (63 - std::countl_zero(mag[static_cast<std::size_t>(top_limb)]));

        std::uint64_t mant;
        int e;
        if (top_bit <= 52) {
            mant = (mag[1] << 32) | mag[0];
            e = -1074;
        } else {
            const int lo_bit = top_bit - 52;
            mant = window(mag, lo_bit) & ((std::uint64_t(1) << 53) - 1);
            const int rb = lo_bit - 1;
            const bool round_bit = ((window(mag, rb) & 1ull)) != 0;
            const bool sticky = any_bits_below(mag, rb);
            if (round_bit && (sticky || (mant & 1ull))) {
                ++mant;
                if (mant == (std::uint64_t(1) << 53)) {
                    mant >>= 1;
                    e = top_bit - 52 - 1074 + 1;
                    const double r = std::ldexp(static_cast<double>(mant), e);
                    return negative ? -r : r;
                }
            }
            e = top_bit - 52 - 1074;
        }
        const double r = std::ldexp(static_cast<double>(mant), e);
        return negative ? -r : r;
    }

private:
    // 67 limbs * 32 bits = 2144 bits; addends only ever touch bits 0..2098,
    // leaving headroom for carries and sign.
    static constexpr int kLimbs = 67;
    // Each add perturbs a limb by < 2^32; renormalizing every 2^26 operations
    // keeps magnitudes far below int64 overflow even across merges.
    static constexpr std::uint32_t kRenormEvery = 1u << 26;

    void normalize() {
        std::int64_t carry = 0;
        for (int i = 0; i < kLimbs; ++i) {
            const std::int64_t v = limb_[i] + carry;
            const std::int64_t lo = v & 0xffffffffll;
            carry = (v - lo) >> 32;
            limb_[i] = lo;
        }
        // Fold the sign carry back into the top limb; round() regenerates it.
        limb_[kLimbs - 1] += carry << 32;
        pending_ = 0;
    }

    // 64 bits of the magnitude starting at bit `lo` (lo may be any index; the
    // array carries two zero limbs of padding for the top window).
    static std::uint64_t window(const std::array<std::uint64_t, kLimbs + 2>& mag, int lo) {
        if (lo < 0) return 0;
        const int li = lo >> 5;
        const int off = lo & 31;
        const unsigned __int128 x =
            (static_cast<unsigned __int128>(mag[static_cast<std::size_t>(li) + 2]) << 64) |
            (static_cast<unsigned __int128>(mag[static_cast<std::size_t>(li) + 1]) << 32) |
            mag[static_cast<std::size_t>(li)];
        return static_cast<std::uint64_t>(x >> off);
    }

    static bool any_bits_below(const std::array<std::uint64_t, kLimbs + 2>& mag, int p) {
        if (p <= 0) return false;
        const int li = p >> 5;
        const int off = p & 31;
        if ((mag[static_cast<std::size_t>(li)] & ((std::uint64_t(1) << off) - 1)) != 0) return true;
        for (int i = 0; i < li; ++i)
            if (mag[static_cast<std::size_t>(i)] != 0) return true;
        return false;
    }

    std::array<std::int64_t, kLimbs> limb_;
    std::uint32_t pending_ = 0;
};

// Exactly-rounded sum of a sequence.
inline double exact_sum(const double* p, std::size_t n) {
    ExactAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(p[i]);
    return acc.round();
}

inline double exact_sum(const std::vector<double>& v) { return exact_sum(v.data(), v.size()); }

// Dot product as the exactly-rounded sum of individually rounded products.
// Each product is computed the same way no matter how the index range is
// later split, so chunked evaluations agree bitwise with this one.
inline double exact_dot(const double* a, const double* b, std::size_t n) {
    ExactAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) acc.add(a[i] * b[i]);
    return acc.round();
}

inline double exact_dot(const std::vector<double>& a, const std::vector<double>& b) {
    assert(a.size() == b.size());
    return exact_dot(a.data(), b.data(), a.size());
}

inline double exact_norm_sq(const std::vector<double>& v) {
    return exact_dot(v.data(), v.data(), v.size());
}

}  // namespace rankmap
