#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "tsl/rational.hpp"

namespace tsl {

/// Dense row-major matrix of exact rationals.
class RationalMatrix {
  public:
    RationalMatrix() = default;
    RationalMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols) {}

    static RationalMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Rational& operator()(std::size_t r, std::size_t c) const {
        return data_[r * cols_ + c];
    }

    friend RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b);
    bool operator==(const RationalMatrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

using RationalVector = std::vector<Rational>;

RationalMatrix power(const RationalMatrix& m, std::size_t exponent);

/// Row vector times matrix.
RationalVector left_multiply(const RationalVector& v, const RationalMatrix& m);

/// Solves A X = B exactly (B may have several columns). Throws
/// InternalInconsistency if A is singular.
RationalMatrix solve(RationalMatrix a, RationalMatrix b);

/// Weights w >= 0 summing to 1 with sum_i w_i points[i] = target, if any.
/// Exact two-phase simplex with Bland's rule.
std::optional<RationalVector> convex_combination(const RationalVector& target,
                                                 const std::vector<RationalVector>& points);

} // namespace tsl
