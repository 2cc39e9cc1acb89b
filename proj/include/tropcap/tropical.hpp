#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "tropcap/linalg.hpp"

namespace tropcap::tropical {

/// Element of the max-plus semiring (R ∪ {-inf}, max, +).
/// `+` is the tropical sum (max) and `*` the tropical product (+).
class Tropical {
public:
    constexpr Tropical() = default;  // bottom
    constexpr explicit Tropical(double v) : value_(v) {}

    static constexpr Tropical bottom() { return Tropical(-std::numeric_limits<double>::infinity()); }
    /// Multiplicative identity, the real number 0.
    static constexpr Tropical one() { return Tropical(0.0); }

    constexpr double value() const { return value_; }
    constexpr bool is_bottom() const { return value_ == -std::numeric_limits<double>::infinity(); }

    friend constexpr Tropical operator+(Tropical a, Tropical b) {
        return Tropical(a.value_ >= b.value_ ? a.value_ : b.value_);
    }
    friend constexpr Tropical operator*(Tropical a, Tropical b) {
        if (a.is_bottom() || b.is_bottom()) return bottom();
        return Tropical(a.value_ + b.value_);
    }
    friend constexpr bool operator==(Tropical a, Tropical b) = default;

private:
    double value_ = -std::numeric_limits<double>::infinity();
};

/// c + <a, x>. Exponents are real vectors: routing polynomials use rows of
/// the router matrix as exponents.
struct Monomial {
    Vector exponent;
    double coefficient = 0.0;

    double eval(const Vector& x) const;
};

struct EvalResult {
    double value = 0.0;
    std::vector<std::size_t> argmax;  // ascending, never empty
};

/// Tie band used for argmax and singular-locus tests:
/// 1e-9 * max(1, |value|).
double tie_tolerance(double value);

/// Pointwise max of affine functions. Immutable after construction.
class Polynomial {
public:
    Polynomial(std::vector<Monomial> monomials);

    Eigen::Index dimension() const { return dimension_; }
    const std::vector<Monomial>& monomials() const { return monomials_; }

    /// Maximum over monomials, evaluated left to right, plus every monomial
    /// within the tie band of the maximum.
    EvalResult eval(const Vector& x) const;

    /// True iff at least two monomials attain the maximum (within the band).
    bool on_singular_locus(const Vector& x) const;

private:
    std::vector<Monomial> monomials_;
    Eigen::Index dimension_;
};

/// Formal difference P ⊘ Q, evaluated as P(x) - Q(x).
class RationalFunction {
public:
    RationalFunction(Polynomial numerator, Polynomial denominator);

    const Polynomial& numerator() const { return numerator_; }
    const Polynomial& denominator() const { return denominator_; }
    double eval(const Vector& x) const;

private:
    Polynomial numerator_;
    Polynomial denominator_;
};

/// max(0, x_j) written as the tropical polynomial 0 ⊕ x_j.
Polynomial relu_polynomial(Eigen::Index dimension, Eigen::Index coordinate);

/// k-th elementary symmetric tropical polynomial of the affine logits
/// z = W x + b. One monomial per size-k coalition, in lexicographic
/// coalition order (see `combinatorics.hpp`), with exponent sum_{i in I} w_i
/// and coefficient sum_{i in I} b_i.
Polynomial build_sym_trop_k(const Matrix& weights, const Vector& bias, int k);

/// S_top1 = max_i z_i(x); equal to build_sym_trop_k(weights, bias, 1).
inline Polynomial build_top1(const Matrix& weights, const Vector& bias) {
    return build_sym_trop_k(weights, bias, 1);
}

}  // namespace tropcap::tropical
