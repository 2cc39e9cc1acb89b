#include "tropcap/tropical.hpp"

#include <cmath>
#include <string>

#include "tropcap/combinatorics.hpp"
#include "tropcap/errors.hpp"

namespace tropcap::tropical {

double Monomial::eval(const Vector& x) const {
    require_dimension(x.size(), exponent.size(), "monomial evaluation");
    double acc = coefficient;
    for (Eigen::Index j = 0; j < x.size(); ++j) acc += exponent(j) * x(j);
    return acc;
}

double tie_tolerance(double value) { return 1e-9 * std::max(1.0, std::abs(value)); }

Polynomial::Polynomial(std::vector<Monomial> monomials) : monomials_(std::move(monomials)) {
    if (monomials_.empty()) throw ContractViolation("tropical polynomial needs at least one monomial");
    dimension_ = monomials_.front().exponent.size();
    for (const auto& m : monomials_) {
        require_dimension(m.exponent.size(), dimension_, "tropical polynomial monomial");
    }
}

EvalResult Polynomial::eval(const Vector& x) const {
    require_dimension(x.size(), dimension_, "tropical polynomial evaluation");
    std::vector<double> values(monomials_.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < monomials_.size(); ++i) {
        values[i] = monomials_[i].eval(x);
        if (values[i] > best) best = values[i];
    }
    EvalResult result;
    result.value = best;
    const double tol = tie_tolerance(best);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (best - values[i] <= tol) result.argmax.push_back(i);
    }
    return result;
}

bool Polynomial::on_singular_locus(const Vector& x) const { return eval(x).argmax.size() >= 2; }

RationalFunction::RationalFunction(Polynomial numerator, Polynomial denominator)
    : numerator_(std::move(numerator)), denominator_(std::move(denominator)) {
    require_dimension(denominator_.dimension(), numerator_.dimension(), "tropical rational function");
}

double RationalFunction::eval(const Vector& x) const {
    return numerator_.eval(x).value - denominator_.eval(x).value;
}

Polynomial relu_polynomial(Eigen::Index dimension, Eigen::Index coordinate) {
    if (coordinate < 0 || coordinate >= dimension) throw ContractViolation("relu coordinate out of range");
    Monomial zero{Vector::Zero(dimension), 0.0};
    Monomial xj{Vector::Unit(dimension, coordinate), 0.0};
    return Polynomial({zero, xj});
}

Polynomial build_sym_trop_k(const Matrix& weights, const Vector& bias, int k) {
    const int n = static_cast<int>(weights.rows());
    require_dimension(bias.size(), weights.rows(), "router bias");
    if (k < 1 || k > n) {
        throw ContractViolation("k = " + std::to_string(k) + " out of range [1, " + std::to_string(n) + "]");
    }
    std::vector<Monomial> monomials;
    for (const auto& coalition : k_subsets(n, k)) {
        Monomial m{Vector::Zero(weights.cols()), 0.0};
        for (int i : coalition) {
            m.exponent += weights.row(i).transpose();
            m.coefficient += bias(i);
        }
        monomials.push_back(std::move(m));
    }
    return Polynomial(std::move(monomials));
}

}  // namespace tropcap::tropical
