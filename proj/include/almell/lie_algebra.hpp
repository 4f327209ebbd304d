#pragma once

// Finite-dimensional real Lie algebras given by structure constants.
//
// An algebra is the tensor c with [e_i, e_j] = sum_k c[i][j][k] e_k.  On top
// of that we provide the structure theory the decision procedures need:
// derived series, Killing form, radical (via the Cartan-criterion description
// rad = { x : K(x, [L, L]) = 0 }), compact-type test, and quotients.
//
// If every structure constant is an exact rational, span arithmetic runs over
// the rationals (see exact.hpp) and all dimensions are exact; otherwise
// floating-point SVDs with the checked_rank policy are used.

#include "almell/common.hpp"
#include "almell/exact.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace almell {

// A linear subspace of R^n, stored as a basis in the columns of `basis`.
struct Subspace {
  int ambient_dim = 0;
  Matrix basis;  // ambient_dim x dim, full column rank

  static Subspace zero(int n) { return Subspace{n, Matrix(n, 0)}; }
  static Subspace full(int n) { return Subspace{n, Matrix::Identity(n, n)}; }

  int dim() const { return static_cast<int>(basis.cols()); }

  // Distance from v to this subspace, relative to max(1, |v|).
  double distance(const Vector& v) const {
    return span_distance(basis, v) / std::max(1.0, v.norm());
  }
  bool contains(const Vector& v, double tolerance) const { return distance(v) <= tolerance; }

  // Does this subspace contain `other` (every basis vector within tolerance)?
  bool contains(const Subspace& other, double tolerance) const {
    for (int j = 0; j < other.dim(); ++j)
      if (!contains(Vector(other.basis.col(j)), tolerance)) return false;
    return true;
  }
};

struct SparseEntry {
  int i, j, k;
  double value;
  std::optional<exact::Rational> exact_value;
};

class LieAlgebra {
 public:
  LieAlgebra() = default;

  // Construct from the dense tensor c[i](j,k) = c[i][j][k].  Validation is
  // performed unless `trusted` (used internally for quotients whose
  // identities hold by construction).
  static LieAlgebra from_structure_constants(int n, std::vector<Matrix> c,
                                             std::vector<std::string> labels = {},
                                             bool trusted = false) {
    LieAlgebra L;
    L.m_dim = n;
    if (static_cast<int>(c.size()) != n)
      throw Error(ErrorCode::dimension_mismatch, "structure tensor has wrong extent");
    for (const Matrix& m : c)
      if (m.rows() != n || m.cols() != n)
        throw Error(ErrorCode::dimension_mismatch, "structure tensor slice has wrong shape");
    L.m_c = std::move(c);
    L.m_labels = std::move(labels);
    if (!L.m_labels.empty() && static_cast<int>(L.m_labels.size()) != n)
      throw Error(ErrorCode::dimension_mismatch, "label list length != dim");
    L.capture_exact_if_integral();
    if (!trusted) {
      ValidationReport report = L.validate();
      if (!report.accepted)
        throw Error(ErrorCode::malformed_input, "structure constants violate Lie identities",
                    report.to_json());
    }
    return L;
  }

  // Construct from sparse triples (i, j, k, value).  Missing antisymmetric
  // partners are filled in; explicitly conflicting pairs are rejected.
  static LieAlgebra from_sparse(int n, const std::vector<SparseEntry>& entries,
                                std::vector<std::string> labels = {}) {
    std::vector<Matrix> c(n, Matrix::Zero(n, n));
    std::vector<Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>> seen(
        n, Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n, n, false));
    bool all_exact = true;
    std::vector<exact::RMatrix> c_exact(n, exact::RMatrix(n, n));
    auto put = [&](int i, int j, int k, double v, const std::optional<exact::Rational>& ev) {
      if (i < 0 || i >= n || j < 0 || j >= n || k < 0 || k >= n)
        throw Error(ErrorCode::malformed_input, "structure constant index out of range",
                    json{{"i", i}, {"j", j}, {"k", k}, {"dim", n}});
      if (seen[i](j, k) && c[i](j, k) != v)
        throw Error(ErrorCode::malformed_input, "conflicting structure constants",
                    json{{"i", i}, {"j", j}, {"k", k}, {"values", {c[i](j, k), v}}});
      seen[i](j, k) = true;
      c[i](j, k) = v;
      if (ev)
        c_exact[i].at(j, k) = *ev;
      else
        all_exact = false;
    };
    for (const SparseEntry& e : entries) {
      put(e.i, e.j, e.k, e.value, e.exact_value);
      std::optional<exact::Rational> neg;
      if (e.exact_value) neg = -*e.exact_value;
      put(e.j, e.i, e.k, -e.value, neg);
    }
    LieAlgebra L = from_structure_constants(n, std::move(c), std::move(labels));
    if (all_exact) L.m_exact = std::move(c_exact);
    return L;
  }

  int dim() const { return m_dim; }
  double c(int i, int j, int k) const { return m_c[i](j, k); }
  const std::vector<std::string>& labels() const { return m_labels; }
  bool has_exact() const { return m_exact.has_value(); }

  // Matrix of ad(e_i): column j is [e_i, e_j].
  Matrix ad_basis(int i) const { return m_c[i].transpose(); }

  // Matrix of ad(x) = [x, .].
  Matrix ad(const Vector& x) const {
    Matrix a = Matrix::Zero(m_dim, m_dim);
    for (int i = 0; i < m_dim; ++i) a += x(i) * m_c[i].transpose();
    return a;
  }

  Vector bracket(const Vector& x, const Vector& y) const {
    if (x.size() != m_dim || y.size() != m_dim)
      throw Error(ErrorCode::dimension_mismatch, "bracket operands have wrong length");
    return ad(x) * y;
  }

  // Frobenius norm of the structure tensor; the natural magnitude scale for
  // brackets of unit vectors, used to anchor rank cutoffs.
  double tensor_scale() const {
    double s = 0.0;
    for (const Matrix& m : m_c) s += m.squaredNorm();
    return std::sqrt(s);
  }

  // Antisymmetry and Jacobi residuals.
  ValidationReport validate() const {
    ValidationReport report;
    double anti = 0.0;
    for (int i = 0; i < m_dim; ++i)
      for (int j = 0; j < m_dim; ++j)
        for (int k = 0; k < m_dim; ++k)
          anti = std::max(anti, std::abs(m_c[i](j, k) + m_c[j](i, k)));
    report.record("antisymmetry", anti, tol::structure);
    double jac = 0.0;
    for (int i = 0; i < m_dim; ++i)
      for (int j = i + 1; j < m_dim; ++j)
        for (int k = j + 1; k < m_dim; ++k) {
          Vector ei = Vector::Unit(m_dim, i), ej = Vector::Unit(m_dim, j),
                 ek = Vector::Unit(m_dim, k);
          Vector r = bracket(bracket(ei, ej), ek) + bracket(bracket(ej, ek), ei) +
                     bracket(bracket(ek, ei), ej);
          jac = std::max(jac, r.template lpNorm<Eigen::Infinity>());
        }
    report.record("jacobi", jac, tol::structure);
    return report;
  }

  const std::optional<std::vector<exact::RMatrix>>& exact_tensor() const { return m_exact; }

  // Exact bracket of rational coordinate vectors (requires has_exact()).
  std::vector<exact::Rational> bracket_exact(const std::vector<exact::Rational>& x,
                                             const std::vector<exact::Rational>& y) const {
    std::vector<exact::Rational> z(m_dim, exact::Rational(0));
    for (int i = 0; i < m_dim; ++i) {
      if (x[i] == 0) continue;
      for (int j = 0; j < m_dim; ++j) {
        if (y[j] == 0) continue;
        const exact::Rational f = x[i] * y[j];
        for (int k = 0; k < m_dim; ++k) {
          const exact::Rational& cv = (*m_exact)[i].at(j, k);
          if (cv != 0) z[k] += f * cv;
        }
      }
    }
    return z;
  }

 private:
  // If every structure constant is an integer-valued double, mirror the
  // tensor into exact rationals.  (Rational inputs arrive via from_sparse.)
  void capture_exact_if_integral() {
    if (m_exact) return;
    std::vector<exact::RMatrix> ce(m_dim, exact::RMatrix(m_dim, m_dim));
    for (int i = 0; i < m_dim; ++i)
      for (int j = 0; j < m_dim; ++j)
        for (int k = 0; k < m_dim; ++k) {
          const double v = m_c[i](j, k);
          if (v != std::floor(v) || std::abs(v) > 9.0e15) return;
          ce[i].at(j, k) = exact::Rational(static_cast<long long>(v));
        }
    m_exact = std::move(ce);
  }

  int m_dim = 0;
  std::vector<Matrix> m_c;  // m_c[i](j,k) = c[i][j][k]
  std::vector<std::string> m_labels;
  std::optional<std::vector<exact::RMatrix>> m_exact;
};

inline ValidationReport validate(const LieAlgebra& L) { return L.validate(); }

inline Vector bracket(const LieAlgebra& L, const Vector& x, const Vector& y) {
  return L.bracket(x, y);
}

inline Matrix killing_form(const LieAlgebra& L) {
  const int n = L.dim();
  std::vector<Matrix> ad(n);
  for (int i = 0; i < n; ++i) ad[i] = L.ad_basis(i);
  Matrix K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      K(i, j) = (ad[i] * ad[j]).trace();
      K(j, i) = K(i, j);
    }
  return K;
}

// ---------------------------------------------------------------------------
// Derived series
// ---------------------------------------------------------------------------

struct DerivedSeries {
  // terms[0] = L, terms[k+1] = [terms[k], terms[k]]; the list ends either
  // with the zero subspace (solvable) or at the first repeated dimension.
  std::vector<Subspace> terms;
  bool non_solvable = false;

  std::vector<int> dims() const {
    std::vector<int> d;
    d.reserve(terms.size());
    for (const Subspace& s : terms) d.push_back(s.dim());
    return d;
  }
};

namespace detail {

inline DerivedSeries derived_series_exact(const LieAlgebra& L) {
  const int n = L.dim();
  DerivedSeries out;
  exact::RMatrix basis(n, n);
  for (int i = 0; i < n; ++i) basis.at(i, i) = 1;
  basis = exact::row_space(std::move(basis));
  out.terms.push_back(Subspace::full(n));
  while (true) {
    const int d = basis.rows;
    if (d == 0) break;
    std::vector<std::vector<exact::Rational>> rows;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b) {
        std::vector<exact::Rational> x(n), y(n);
        for (int c = 0; c < n; ++c) { x[c] = basis.at(a, c); y[c] = basis.at(b, c); }
        rows.push_back(L.bracket_exact(x, y));
      }
    exact::RMatrix stacked(static_cast<int>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int c = 0; c < n; ++c) stacked.at(static_cast<int>(r), c) = rows[r][c];
    exact::RMatrix next = exact::row_space(std::move(stacked));
    if (next.rows == d) {
      out.non_solvable = true;
      out.terms.push_back(Subspace{n, exact::to_double(next).transpose()});
      break;
    }
    out.terms.push_back(Subspace{n, exact::to_double(next).transpose()});
    if (next.rows == 0) break;
    basis = std::move(next);
  }
  return out;
}

inline DerivedSeries derived_series_float(const LieAlgebra& L) {
  const int n = L.dim();
  const double scale = std::max(1.0, L.tensor_scale());
  DerivedSeries out;
  Matrix basis = Matrix::Identity(n, n);
  out.terms.push_back(Subspace::full(n));
  while (true) {
    const int d = static_cast<int>(basis.cols());
    if (d == 0) break;
    Matrix brackets(n, std::max(1, d * (d - 1) / 2));
    brackets.setZero();
    int col = 0;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        brackets.col(col++) = L.bracket(basis.col(a), basis.col(b));
    Matrix next = column_space(brackets.leftCols(std::max(col, 0)), "derived_series", scale);
    if (static_cast<int>(next.cols()) == d) {
      out.non_solvable = true;
      out.terms.push_back(Subspace{n, next});
      break;
    }
    out.terms.push_back(Subspace{n, next});
    if (next.cols() == 0) break;
    basis = next;
  }
  return out;
}

}  // namespace detail

inline DerivedSeries derived_series(const LieAlgebra& L) {
  if (L.has_exact()) return detail::derived_series_exact(L);
  return detail::derived_series_float(L);
}

inline bool is_solvable(const LieAlgebra& L) { return !derived_series(L).non_solvable; }

// ---------------------------------------------------------------------------
// Ideals, quotients, restrictions
// ---------------------------------------------------------------------------

// Largest residual |[e_i, b_j] - proj([e_i, b_j])| over basis pairs, i.e.
// how far S is from being an ideal of L.
inline double ideal_residual(const LieAlgebra& L, const Subspace& S) {
  double r = 0.0;
  for (int i = 0; i < L.dim(); ++i)
    for (int j = 0; j < S.dim(); ++j) {
      Vector w = L.bracket(Vector::Unit(L.dim(), i), S.basis.col(j));
      r = std::max(r, S.distance(w) * std::max(1.0, w.norm()));
    }
  return r;
}

inline bool is_ideal(const LieAlgebra& L, const Subspace& S, double tolerance = tol::ideal) {
  return ideal_residual(L, S) <= tolerance;
}

struct QuotientAlgebra {
  LieAlgebra algebra;
  // Orthonormal lift: columns map quotient coordinates to ambient vectors.
  Matrix lift;
};

inline QuotientAlgebra quotient_algebra(const LieAlgebra& L, const Subspace& I) {
  if (I.ambient_dim != L.dim())
    throw Error(ErrorCode::dimension_mismatch, "ideal lives in a different ambient space");
  const double resid = ideal_residual(L, I);
  if (resid > tol::ideal)
    throw Error(ErrorCode::not_an_ideal, "subspace is not an ideal",
                json{{"residual", resid}});
  const int n = L.dim();
  Matrix C = orthogonal_complement(I.basis, n);
  const int m = static_cast<int>(C.cols());
  std::vector<Matrix> cq(m, Matrix::Zero(m, m));
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vector w = C.transpose() * L.bracket(C.col(a), C.col(b));
      for (int k = 0; k < m; ++k) cq[a](b, k) = w(k);
    }
  QuotientAlgebra q;
  q.algebra = LieAlgebra::from_structure_constants(m, std::move(cq), {}, /*trusted=*/true);
  q.lift = C;
  return q;
}

struct SubAlgebra {
  LieAlgebra algebra;
  Matrix basis;  // ambient x dim; restricted coordinates refer to these columns
};

// Restrict L to a subspace that is closed under the bracket.  Coordinates of
// brackets are computed by least squares against the basis; a residual above
// tol::ideal means S was not actually a subalgebra.
inline SubAlgebra restrict_to_subalgebra(const LieAlgebra& L, const Subspace& S) {
  const int m = S.dim();
  std::vector<Matrix> cr(m, Matrix::Zero(m, m));
  const auto solver = S.basis.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      Vector w = L.bracket(S.basis.col(a), S.basis.col(b));
      Vector coords = solver.solve(w);
      const double resid = (S.basis * coords - w).norm() / std::max(1.0, w.norm());
      if (resid > tol::ideal)
        throw Error(ErrorCode::invalid_argument, "subspace is not closed under the bracket",
                    json{{"residual", resid}});
      for (int k = 0; k < m; ++k) cr[a](b, k) = coords(k);
    }
  SubAlgebra out;
  out.algebra = LieAlgebra::from_structure_constants(m, std::move(cr), {}, /*trusted=*/true);
  out.basis = S.basis;
  return out;
}

// ---------------------------------------------------------------------------
// Radical and compact type
// ---------------------------------------------------------------------------

// rad L = { x : K(x, y) = 0 for all y in [L, L] } (Cartan's criterion).
inline Subspace radical(const LieAlgebra& L) {
  const int n = L.dim();
  if (n == 0) return Subspace::zero(0);
  Subspace rad;
  if (L.has_exact()) {
    // Exact path: Killing form and derived subalgebra over the rationals.
    std::vector<exact::RMatrix> ad(n, exact::RMatrix(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) ad[i].at(k, j) = (*L.exact_tensor())[i].at(j, k);
    exact::RMatrix K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        exact::Rational t(0);
        for (int a = 0; a < n; ++a)
          for (int b = 0; b < n; ++b) t += ad[i].at(a, b) * ad[j].at(b, a);
        K.at(i, j) = t;
      }
    // Derived subalgebra basis, exact.
    exact::RMatrix basis(n, n);
    for (int i = 0; i < n; ++i) basis.at(i, i) = 1;
    std::vector<std::vector<exact::Rational>> rows;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) {
        std::vector<exact::Rational> x(n, exact::Rational(0)), y(n, exact::Rational(0));
        x[a] = 1; y[b] = 1;
        rows.push_back(L.bracket_exact(x, y));
      }
    exact::RMatrix stacked(static_cast<int>(rows.size()), n);
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int c = 0; c < n; ++c) stacked.at(static_cast<int>(r), c) = rows[r][c];
    exact::RMatrix derived = exact::row_space(std::move(stacked));
    // Constraints: (b^T K) x = 0 for each derived-basis vector b.
    exact::RMatrix constraints(derived.rows, n);
    for (int r = 0; r < derived.rows; ++r)
      for (int ccol = 0; ccol < n; ++ccol) {
        exact::Rational t(0);
        for (int i = 0; i < n; ++i) t += derived.at(r, i) * K.at(i, ccol);
        constraints.at(r, ccol) = t;
      }
    exact::RMatrix ker = exact::kernel(std::move(constraints));
    rad = Subspace{n, exact::to_double(ker).transpose()};
  } else {
    Matrix K = killing_form(L);
    DerivedSeries series = derived_series(L);
    const Matrix& d1 = series.terms.size() > 1 ? series.terms[1].basis : Matrix(n, 0);
    Matrix constraints = d1.transpose() * K;  // rows: b^T K
    rad = Subspace{n, kernel_space(constraints, "radical", std::max(1.0, K.norm()))};
  }
  // Postconditions: an ideal, and solvable as a subalgebra.
  const double ir = ideal_residual(L, rad);
  if (ir > tol::ideal)
    throw Error(ErrorCode::internal_disagreement, "computed radical is not an ideal",
                json{{"residual", ir}});
  if (rad.dim() > 0) {
    SubAlgebra restricted = restrict_to_subalgebra(L, rad);
    if (derived_series(restricted.algebra).non_solvable)
      throw Error(ErrorCode::internal_disagreement, "computed radical is not solvable");
  }
  return rad;
}

// True iff the Killing form is negative definite.  Requires a semisimple
// algebra; callers quotient by the radical first.
inline bool is_compact_type(const LieAlgebra& L) {
  if (L.dim() == 0) return true;
  Subspace rad = radical(L);
  if (rad.dim() > 0)
    throw Error(ErrorCode::not_semisimple, "algebra has nonzero radical",
                json{{"radical_dim", rad.dim()}});
  Eigen::SelfAdjointEigenSolver<Matrix> es(killing_form(L));
  return (es.eigenvalues().array() < -tol::compact_type).all();
}

// ---------------------------------------------------------------------------
// Constructions used by tests and the gallery
// ---------------------------------------------------------------------------

namespace algebras {

inline LieAlgebra abelian(int n) {
  return LieAlgebra::from_structure_constants(n, std::vector<Matrix>(n, Matrix::Zero(n, n)));
}

// Heisenberg algebra, basis (x, y, z) with [x, y] = z.
inline LieAlgebra heisenberg() {
  return LieAlgebra::from_sparse(3, {{0, 1, 2, 1.0, exact::Rational(1)}}, {"x", "y", "z"});
}

// su(2), basis with [e1, e2] = e3 cyclically.
inline LieAlgebra su2() {
  return LieAlgebra::from_sparse(3,
                                 {{0, 1, 2, 1.0, exact::Rational(1)},
                                  {1, 2, 0, 1.0, exact::Rational(1)},
                                  {2, 0, 1, 1.0, exact::Rational(1)}},
                                 {"e1", "e2", "e3"});
}

// sl(2, R), basis (h, e, f): [h,e] = 2e, [h,f] = -2f, [e,f] = h.
inline LieAlgebra sl2r() {
  return LieAlgebra::from_sparse(3,
                                 {{0, 1, 1, 2.0, exact::Rational(2)},
                                  {0, 2, 2, -2.0, exact::Rational(-2)},
                                  {1, 2, 0, 1.0, exact::Rational(1)}},
                                 {"h", "e", "f"});
}

// Euclidean-motion algebra, basis (t, x, y): [t,x] = y, [t,y] = -x.
inline LieAlgebra euclid2() {
  return LieAlgebra::from_sparse(3,
                                 {{0, 1, 2, 1.0, exact::Rational(1)},
                                  {0, 2, 1, -1.0, exact::Rational(-1)}},
                                 {"t", "x", "y"});
}

inline LieAlgebra direct_sum(const LieAlgebra& A, const LieAlgebra& B) {
  const int n = A.dim() + B.dim();
  std::vector<Matrix> c(n, Matrix::Zero(n, n));
  for (int i = 0; i < A.dim(); ++i)
    for (int j = 0; j < A.dim(); ++j)
      for (int k = 0; k < A.dim(); ++k) c[i](j, k) = A.c(i, j, k);
  for (int i = 0; i < B.dim(); ++i)
    for (int j = 0; j < B.dim(); ++j)
      for (int k = 0; k < B.dim(); ++k) c[A.dim() + i](A.dim() + j, A.dim() + k) = B.c(i, j, k);
  return LieAlgebra::from_structure_constants(n, std::move(c));
}

// Conjugate the structure constants by an invertible change of basis P
// (new basis vectors are the columns of P).
inline LieAlgebra change_basis(const LieAlgebra& L, const Matrix& P) {
  const int n = L.dim();
  Matrix Pinv = P.inverse();
  std::vector<Matrix> c(n, Matrix::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      Vector w = Pinv * L.bracket(P.col(a), P.col(b));
      for (int k = 0; k < n; ++k) c[a](b, k) = w(k);
    }
  return LieAlgebra::from_structure_constants(n, std::move(c));
}

}  // namespace algebras

}  // namespace almell
