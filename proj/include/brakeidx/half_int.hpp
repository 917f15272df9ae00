#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>

namespace brakeidx {

/// Exact half-integer, stored doubled. Every index value in the library is one
/// of these so that terms like (n-3)/2 never touch floating point.
class HalfInt {
public:
    constexpr HalfInt() = default;

    static constexpr HalfInt from_doubled(std::int64_t doubled) {
        HalfInt h;
        h.doubled_ = doubled;
        return h;
    }
    static constexpr HalfInt from_int(std::int64_t value) { return from_doubled(2 * value); }
    static constexpr HalfInt half() { return from_doubled(1); }

    /// Rounds 2x to the nearest integer; throws if x is not within `tol` of a half-integer.
    static HalfInt round(double x, double tol = 1e-6) {
        const double d = 2.0 * x;
        const double r = std::nearbyint(d);
        if (!std::isfinite(d) || std::abs(d - r) > 2.0 * tol) {
            throw std::domain_error("value " + std::to_string(x) + " is not a half-integer");
        }
        return from_doubled(static_cast<std::int64_t>(r));
    }

    constexpr std::int64_t doubled() const { return doubled_; }
    constexpr bool is_integer() const { return doubled_ % 2 == 0; }
    constexpr double to_double() const { return static_cast<double>(doubled_) / 2.0; }

    /// Integer value; throws when the value is a proper half-integer.
    std::int64_t to_int() const {
        if (!is_integer()) throw std::domain_error("HalfInt " + str() + " is not an integer");
        return doubled_ / 2;
    }

    /// Parity of an integer-valued HalfInt (0 even, 1 odd).
    int parity() const {
        const auto v = to_int();
        return static_cast<int>(((v % 2) + 2) % 2);
    }

    std::string str() const {
        if (is_integer()) return std::to_string(doubled_ / 2);
        return std::to_string(doubled_) + "/2";
    }

    constexpr HalfInt operator-() const { return from_doubled(-doubled_); }
    constexpr HalfInt& operator+=(HalfInt o) {
        doubled_ += o.doubled_;
        return *this;
    }
    constexpr HalfInt& operator-=(HalfInt o) {
        doubled_ -= o.doubled_;
        return *this;
    }
    friend constexpr HalfInt operator+(HalfInt a, HalfInt b) { return a += b; }
    friend constexpr HalfInt operator-(HalfInt a, HalfInt b) { return a -= b; }
    friend constexpr HalfInt operator*(std::int64_t k, HalfInt a) { return from_doubled(k * a.doubled_); }
    friend constexpr HalfInt operator*(HalfInt a, std::int64_t k) { return from_doubled(k * a.doubled_); }

    friend constexpr bool operator==(HalfInt, HalfInt) = default;
    friend constexpr auto operator<=>(HalfInt a, HalfInt b) { return a.doubled_ <=> b.doubled_; }

    friend std::ostream& operator<<(std::ostream& os, HalfInt h) { return os << h.str(); }

private:
    std::int64_t doubled_ = 0;
};

/// k/2 as a HalfInt.
constexpr HalfInt halves(std::int64_t k) { return HalfInt::from_doubled(k); }

}  // namespace brakeidx
