#pragma once

// Exact rational linear algebra over boost::multiprecision::cpp_rational.
//
// When a Lie algebra's structure constants are given exactly (integers or
// "p/q" strings), derived-series and radical computations run here instead of
// through floating-point SVDs: ranks are then exact and the numerical-rank
// ambiguity band never triggers.  Only the handful of operations needed for
// span arithmetic is implemented; everything else stays in Eigen.

#include <boost/multiprecision/cpp_int.hpp>

#include "almell/common.hpp"

#include <vector>

namespace almell::exact {

using Rational = boost::multiprecision::cpp_rational;

struct RMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Rational> a;  // row-major

  RMatrix() = default;
  RMatrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, Rational(0)) {}

  Rational& at(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  const Rational& at(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

inline Matrix to_double(const RMatrix& m) {
  Matrix out(m.rows, m.cols);
  for (int r = 0; r < m.rows; ++r)
    for (int c = 0; c < m.cols; ++c) out(r, c) = m.at(r, c).convert_to<double>();
  return out;
}

// Reduce m to reduced row echelon form in place; returns the pivot columns.
inline std::vector<int> rref(RMatrix& m) {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < m.cols && row < m.rows; ++col) {
    int pivot = -1;
    for (int r = row; r < m.rows; ++r) {
      if (m.at(r, col) != 0) { pivot = r; break; }
    }
    if (pivot < 0) continue;
    if (pivot != row)
      for (int c = 0; c < m.cols; ++c) std::swap(m.at(pivot, c), m.at(row, c));
    const Rational inv = Rational(1) / m.at(row, col);
    for (int c = 0; c < m.cols; ++c) m.at(row, c) *= inv;
    for (int r = 0; r < m.rows; ++r) {
      if (r == row || m.at(r, col) == 0) continue;
      const Rational f = m.at(r, col);
      for (int c = 0; c < m.cols; ++c) m.at(r, c) -= f * m.at(row, c);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

inline int rank(RMatrix m) { return static_cast<int>(rref(m).size()); }

// Basis of the row space: the nonzero rows of the rref (copied out).
inline RMatrix row_space(RMatrix m) {
  const int r = static_cast<int>(rref(m).size());
  RMatrix out(r, m.cols);
  for (int i = 0; i < r; ++i)
    for (int c = 0; c < m.cols; ++c) out.at(i, c) = m.at(i, c);
  return out;
}

// Basis of the right kernel, one kernel vector per row of the result.
inline RMatrix kernel(RMatrix m) {
  const std::vector<int> pivots = rref(m);
  std::vector<bool> is_pivot(m.cols, false);
  for (int p : pivots) is_pivot[p] = true;
  std::vector<int> free_cols;
  for (int c = 0; c < m.cols; ++c)
    if (!is_pivot[c]) free_cols.push_back(c);
  RMatrix out(static_cast<int>(free_cols.size()), m.cols);
  for (std::size_t i = 0; i < free_cols.size(); ++i) {
    const int fc = free_cols[i];
    out.at(static_cast<int>(i), fc) = 1;
    for (std::size_t p = 0; p < pivots.size(); ++p)
      out.at(static_cast<int>(i), pivots[p]) = -m.at(static_cast<int>(p), fc);
  }
  return out;
}

// Solve span membership: is v a combination of the rows of basis (assumed
// rref)?  If so and coeffs != nullptr, the coefficients are reported.
inline bool in_row_span(const RMatrix& basis_rref, const std::vector<Rational>& v,
                        std::vector<Rational>* coeffs = nullptr) {
  std::vector<Rational> residual = v;
  std::vector<Rational> c(static_cast<std::size_t>(basis_rref.rows), Rational(0));
  for (int r = 0; r < basis_rref.rows; ++r) {
    int lead = -1;
    for (int col = 0; col < basis_rref.cols; ++col)
      if (basis_rref.at(r, col) != 0) { lead = col; break; }
    if (lead < 0) continue;
    const Rational f = residual[lead] / basis_rref.at(r, lead);
    if (f != 0)
      for (int col = 0; col < basis_rref.cols; ++col)
        residual[col] -= f * basis_rref.at(r, col);
    c[static_cast<std::size_t>(r)] = f;
  }
  for (const Rational& x : residual)
    if (x != 0) return false;
  if (coeffs) *coeffs = c;
  return true;
}

}  // namespace almell::exact
