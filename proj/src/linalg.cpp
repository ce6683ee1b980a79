#include "tsl/linalg.hpp"

#include "tsl/errors.hpp"

namespace tsl {

RationalMatrix RationalMatrix::identity(std::size_t n) {
    RationalMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1;
    return m;
}

RationalMatrix operator*(const RationalMatrix& a, const RationalMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("matrix product shape mismatch");
    RationalMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const auto& aik = a(i, k);
            if (sgn(aik) == 0)
                continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                if (sgn(b(k, j)) != 0)
                    out(i, j) += aik * b(k, j);
        }
    return out;
}

RationalMatrix power(const RationalMatrix& m, std::size_t exponent) {
    RationalMatrix result = RationalMatrix::identity(m.rows());
    RationalMatrix base = m;
    while (exponent) {
        if (exponent & 1)
            result = result * base;
        exponent >>= 1;
        if (exponent)
            base = base * base;
    }
    return result;
}

RationalVector left_multiply(const RationalVector& v, const RationalMatrix& m) {
    if (v.size() != m.rows())
        throw DimensionError("vector-matrix shape mismatch");
    RationalVector out(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        if (sgn(v[i]) == 0)
            continue;
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (sgn(m(i, j)) != 0)
                out[j] += v[i] * m(i, j);
    }
    return out;
}

RationalMatrix solve(RationalMatrix a, RationalMatrix b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.rows() != n)
        throw DimensionError("solve needs a square system");
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && sgn(a(pivot, col)) == 0)
            ++pivot;
        if (pivot == n)
            throw InternalInconsistency("singular linear system");
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j)
                std::swap(a(col, j), a(pivot, j));
            for (std::size_t j = 0; j < b.cols(); ++j)
                std::swap(b(col, j), b(pivot, j));
        }
        const Rational inv = 1 / a(col, col);
        for (std::size_t j = col; j < n; ++j)
            a(col, j) *= inv;
        for (std::size_t j = 0; j < b.cols(); ++j)
            b(col, j) *= inv;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || sgn(a(r, col)) == 0)
                continue;
            const Rational f = a(r, col);
            for (std::size_t j = col; j < n; ++j)
                if (sgn(a(col, j)) != 0)
                    a(r, j) -= f * a(col, j);
            for (std::size_t j = 0; j < b.cols(); ++j)
                if (sgn(b(col, j)) != 0)
                    b(r, j) -= f * b(col, j);
        }
    }
    return b;
}

std::optional<RationalVector> convex_combination(const RationalVector& target,
                                                 const std::vector<RationalVector>& points) {
    const std::size_t m = points.size();
    if (m == 0)
        return std::nullopt;
    const std::size_t d = target.size();
    for (const auto& p : points)
        if (p.size() != d)
            throw DimensionError("convex combination: point dimension mismatch");

    // Phase-one tableau: rows = d coordinate equations + the weight-sum
    // equation; columns = m weights, rows artificial variables, rhs.
    const std::size_t rows = d + 1;
    const std::size_t cols = m + rows + 1;
    RationalMatrix t(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t j = 0; j < m; ++j)
            t(r, j) = r < d ? points[j][r] : Rational(1);
        t(r, cols - 1) = r < d ? target[r] : Rational(1);
        if (sgn(t(r, cols - 1)) < 0)
            for (std::size_t j = 0; j < cols; ++j)
                t(r, j) = -t(r, j);
        t(r, m + r) = 1;
    }
    std::vector<std::size_t> basis(rows);
    for (std::size_t r = 0; r < rows; ++r)
        basis[r] = m + r;

    // Objective: minimize the sum of artificials. Reduced costs of the
    // non-artificial columns are minus the column sums.
    RationalVector cost(cols);
    for (std::size_t j = 0; j < cols; ++j) {
        if (j >= m && j < m + rows)
            continue;
        for (std::size_t r = 0; r < rows; ++r)
            cost[j] -= t(r, j);
    }

    for (;;) {
        std::size_t enter = cols;
        for (std::size_t j = 0; j + 1 < cols; ++j)
            if (sgn(cost[j]) < 0) {
                enter = j;
                break;
            }
        if (enter == cols)
            break;
        std::size_t leave = rows;
        Rational best;
        for (std::size_t r = 0; r < rows; ++r) {
            if (sgn(t(r, enter)) <= 0)
                continue;
            Rational ratio = t(r, cols - 1) / t(r, enter);
            if (leave == rows || ratio < best ||
                (ratio == best && basis[r] < basis[leave])) {
                best = ratio;
                leave = r;
            }
        }
        if (leave == rows)
            break; // unbounded cannot happen in phase one
        const Rational inv = 1 / t(leave, enter);
        for (std::size_t j = 0; j < cols; ++j)
            t(leave, j) *= inv;
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == leave || sgn(t(r, enter)) == 0)
                continue;
            const Rational f = t(r, enter);
            for (std::size_t j = 0; j < cols; ++j)
                t(r, j) -= f * t(leave, j);
        }
        const Rational f = cost[enter];
        for (std::size_t j = 0; j < cols; ++j)
            cost[j] -= f * t(leave, j);
        basis[leave] = enter;
    }
    if (sgn(cost[cols - 1]) != 0)
        return std::nullopt;
    RationalVector w(m);
    for (std::size_t r = 0; r < rows; ++r)
        if (basis[r] < m)
            w[basis[r]] = t(r, cols - 1);
    return w;
}

} // namespace tsl
