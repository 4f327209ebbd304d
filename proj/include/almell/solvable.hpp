#pragma once

// Simply connected solvable groups in exponential coordinates of the second
// kind.
//
// A presentation is a solvable Lie algebra together with a faithful matrix
// realization M_1..M_n and a basis ordering adapted to the derived series
// (each derived term is spanned by a suffix).  A group element is the tuple
// x with matrix exp(x_1 M_{(1)}) * ... * exp(x_n M_{(n)}) in the adapted
// order.  Products, inverses and automorphism images are computed back into
// coordinates by Gauss-Newton on the Frobenius residual, with a continuation
// fallback along a path of targets when the direct solve stalls.
//
// The twisted coboundary delta(s) = s^{-1} Theta(s) (Theta the automorphism
// integrating phi) is inverted layer by layer: on each derived-series layer
// the equation linearizes to (phi_l - 1) alpha = Ad_s(residual), which is
// solvable whenever 1 - phi is invertible; a full Newton pass then polishes
// the assembled coordinates.

#include <unsupported/Eigen/MatrixFunctions>

#include "almell/lie_algebra.hpp"

#include <functional>
#include <numeric>
#include <vector>

namespace almell {

struct GroupElement {
  Vector coords;  // adapted-order second-kind coordinates
  Matrix matrix;  // cached realization image
};

// A linear map on the algebra (original basis order) preserving the bracket.
struct AlgebraAutomorphism {
  Matrix phi;
};

class SolvablePresentation {
 public:
  SolvablePresentation() = default;

  static SolvablePresentation create(LieAlgebra algebra, int mat_dim,
                                     std::vector<Matrix> realization,
                                     std::vector<int> adapted_order) {
    SolvablePresentation P;
    P.m_algebra = std::move(algebra);
    P.m_mat_dim = mat_dim;
    P.m_realization = std::move(realization);
    P.m_adapted = std::move(adapted_order);
    const int n = P.m_algebra.dim();
    if (static_cast<int>(P.m_realization.size()) != n)
      throw Error(ErrorCode::dimension_mismatch, "need one realization matrix per basis vector");
    for (const Matrix& M : P.m_realization)
      if (M.rows() != mat_dim || M.cols() != mat_dim)
        throw Error(ErrorCode::dimension_mismatch, "realization matrix has wrong shape");
    ValidationReport report = P.validate();
    if (!report.accepted)
      throw Error(ErrorCode::malformed_input, "solvable presentation fails validation",
                  report.to_json());
    P.finish_setup();
    return P;
  }

  // Residuals: homomorphism property, linear independence of the
  // realization, solvability, and adapted-order compatibility.
  ValidationReport validate() const {
    ValidationReport report;
    const int n = m_algebra.dim();
    double hom = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        Matrix lhs = m_realization[i] * m_realization[j] - m_realization[j] * m_realization[i];
        for (int k = 0; k < n; ++k) lhs -= m_algebra.c(i, j, k) * m_realization[k];
        hom = std::max(hom, lhs.norm());
      }
    report.record("realization_homomorphism", hom, tol::homomorphism);

    double indep = 1.0;
    if (n > 0) {
      Matrix stacked(m_mat_dim * m_mat_dim, n);
      for (int i = 0; i < n; ++i) {
        Vector col = Eigen::Map<const Vector>(m_realization[i].data(), m_mat_dim * m_mat_dim);
        const double norm = col.norm();
        if (norm == 0.0) { indep = 0.0; }
        stacked.col(i) = norm > 0.0 ? Vector(col / norm) : col;
      }
      indep = std::min(indep, smallest_singular_value(stacked));
    }
    report.residuals.emplace_back("realization_independence", indep);
    if (!(indep > 1e-10)) {
      report.accepted = false;
      report.failures.push_back("realization_independence");
    }

    DerivedSeries series = derived_series(m_algebra);
    if (series.non_solvable) {
      report.accepted = false;
      report.failures.push_back("solvability");
      return report;
    }
    if (static_cast<int>(m_adapted.size()) != n) {
      report.accepted = false;
      report.failures.push_back("adapted_order_length");
      return report;
    }
    std::vector<bool> used(n, false);
    for (int idx : m_adapted) {
      if (idx < 0 || idx >= n || used[idx]) {
        report.accepted = false;
        report.failures.push_back("adapted_order_permutation");
        return report;
      }
      used[idx] = true;
    }
    // Each derived term must be the span of a coordinate suffix.
    double adapt = 0.0;
    for (const Subspace& term : series.terms) {
      const int start = n - term.dim();
      for (int p = start; p < n; ++p)
        adapt = std::max(adapt, term.distance(Vector(Vector::Unit(n, m_adapted[p]))));
    }
    report.record("adapted_order", adapt, tol::ideal);
    return report;
  }

  const LieAlgebra& algebra() const { return m_algebra; }
  int dim() const { return m_algebra.dim(); }
  int mat_dim() const { return m_mat_dim; }
  const std::vector<Matrix>& realization() const { return m_realization; }
  const std::vector<int>& adapted_order() const { return m_adapted; }
  const Matrix& adapted_gen(int pos) const { return m_adapted_realization[pos]; }

  // Layer l occupies adapted positions [layer_start(l), layer_start(l+1)).
  int layer_count() const { return static_cast<int>(m_layer_start.size()) - 1; }
  int layer_start(int l) const { return m_layer_start[l]; }

  // Realize an algebra vector (original basis coordinates).
  Matrix realize(const Vector& algebra_coords) const {
    Matrix M = Matrix::Zero(m_mat_dim, m_mat_dim);
    for (int i = 0; i < dim(); ++i) M += algebra_coords(i) * m_realization[i];
    return M;
  }

  // Express a matrix in span{M_i}; throws if it does not lie there.
  Vector algebra_coords_of(const Matrix& W, const char* context) const {
    Vector x = m_span_solver.solve(Eigen::Map<const Vector>(W.data(), m_mat_dim * m_mat_dim));
    const double resid =
        (realize(x) - W).norm() / std::max(1.0, W.norm());
    if (resid > tol::automorphism)
      throw Error(ErrorCode::internal_disagreement,
                  std::string(context) + ": matrix does not lie in the realization span",
                  json{{"residual", resid}});
    return x;
  }

  // Permute original-basis coordinates into adapted positions and back.
  Vector to_adapted(const Vector& x) const {
    Vector y(dim());
    for (int p = 0; p < dim(); ++p) y(p) = x(m_adapted[p]);
    return y;
  }
  Vector from_adapted(const Vector& y) const {
    Vector x(dim());
    for (int p = 0; p < dim(); ++p) x(m_adapted[p]) = y(p);
    return x;
  }
  Matrix to_adapted(const Matrix& A) const {
    Matrix B(dim(), dim());
    for (int p = 0; p < dim(); ++p)
      for (int q = 0; q < dim(); ++q) B(p, q) = A(m_adapted[p], m_adapted[q]);
    return B;
  }

 private:
  void finish_setup() {
    const int n = dim();
    m_adapted_realization.resize(n);
    for (int p = 0; p < n; ++p) m_adapted_realization[p] = m_realization[m_adapted[p]];
    DerivedSeries series = derived_series(m_algebra);
    m_layer_start.clear();
    for (const Subspace& term : series.terms) m_layer_start.push_back(n - term.dim());
    if (m_layer_start.empty() || m_layer_start.back() != n) m_layer_start.push_back(n);
    if (n > 0) {
      Matrix stacked(m_mat_dim * m_mat_dim, n);
      for (int i = 0; i < n; ++i)
        stacked.col(i) = Eigen::Map<const Vector>(m_realization[i].data(), m_mat_dim * m_mat_dim);
      m_span_solver.compute(stacked, Eigen::ComputeThinU | Eigen::ComputeThinV);
    }
  }

  LieAlgebra m_algebra;
  int m_mat_dim = 0;
  std::vector<Matrix> m_realization;
  std::vector<int> m_adapted;
  std::vector<Matrix> m_adapted_realization;
  std::vector<int> m_layer_start;
  Eigen::BDCSVD<Matrix> m_span_solver;
};

inline ValidationReport validate(const SolvablePresentation& P) { return P.validate(); }

inline GroupElement element_from_coords(const SolvablePresentation& P, const Vector& coords) {
  if (coords.size() != P.dim())
    throw Error(ErrorCode::dimension_mismatch, "coordinate vector has wrong length");
  Matrix m = Matrix::Identity(P.mat_dim(), P.mat_dim());
  for (int p = 0; p < P.dim(); ++p) m *= Matrix((coords(p) * P.adapted_gen(p)).exp());
  return GroupElement{coords, m};
}

inline GroupElement identity_element(const SolvablePresentation& P) {
  return element_from_coords(P, Vector::Zero(P.dim()));
}

// ---------------------------------------------------------------------------
// Coordinate solving
// ---------------------------------------------------------------------------

namespace detail {

struct SolveOutcome {
  bool ok = false;
  Vector coords;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

// Gauss-Newton for Phi(z) = target, Phi(z) the ordered product of factor
// exponentials.  Jacobian columns are exact: d Phi / d z_p =
// prefix * M_p e^{z_p M_p} * suffix.
inline SolveOutcome solve_coords(const SolvablePresentation& P, const Matrix& target,
                                 Vector z) {
  const int n = P.dim();
  const int d = P.mat_dim();
  const double target_scale = 1.0 + target.norm();
  SolveOutcome out;
  if (n == 0) {
    out.ok = (target - Matrix::Identity(d, d)).norm() <= tol::group_residual * target_scale;
    out.coords = z;
    out.residual = (target - Matrix::Identity(d, d)).norm();
    return out;
  }
  std::vector<Matrix> factor(n), prefix(n + 1), suffix(n + 1);
  auto evaluate = [&](const Vector& zz) {
    for (int p = 0; p < n; ++p) factor[p] = (zz(p) * P.adapted_gen(p)).exp();
    prefix[0] = Matrix::Identity(d, d);
    for (int p = 0; p < n; ++p) prefix[p + 1] = prefix[p] * factor[p];
    suffix[n] = Matrix::Identity(d, d);
    for (int p = n - 1; p >= 0; --p) suffix[p] = factor[p] * suffix[p + 1];
    return Matrix(prefix[n] - target);
  };
  Matrix R = evaluate(z);
  double res = R.norm();
  for (int iter = 0; iter < 100; ++iter) {
    out.iterations = iter;
    if (res <= tol::newton * target_scale) break;
    Matrix J(d * d, n);
    for (int p = 0; p < n; ++p) {
      Matrix col = prefix[p] * P.adapted_gen(p) * factor[p] * suffix[p + 1];
      J.col(p) = Eigen::Map<const Vector>(col.data(), d * d);
    }
    Vector step = J.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                      .solve(Vector(-Eigen::Map<const Vector>(R.data(), d * d)));
    double alpha = 1.0;
    bool improved = false;
    while (alpha >= 1.0 / 1024.0) {
      Vector trial = z + alpha * step;
      Matrix Rt = evaluate(trial);
      const double rt = Rt.norm();
      if (rt < res) {
        z = trial;
        R = Rt;
        res = rt;
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;  // stalled
  }
  out.coords = z;
  out.residual = res;
  out.ok = res <= tol::group_residual * target_scale;
  return out;
}

// Continuation: follow targets target_at(s) from s=0 (solved by init0) to
// s=1, halving the step when the direct solve stalls.
inline SolveOutcome solve_coords_path(const SolvablePresentation& P,
                                      const std::function<Matrix(double)>& target_at,
                                      Vector init0) {
  double s = 0.0, step = 1.0;
  Vector z = std::move(init0);
  SolveOutcome out;
  while (s < 1.0) {
    const double s_try = std::min(1.0, s + step);
    out = solve_coords(P, target_at(s_try), z);
    if (out.ok) {
      s = s_try;
      z = out.coords;
      step = std::min(1.0, step * 2.0);
    } else {
      step *= 0.5;
      if (step < 1e-4) return out;
    }
  }
  return out;
}

}  // namespace detail

inline GroupElement multiply(const SolvablePresentation& P, const GroupElement& g,
                             const GroupElement& h) {
  const Matrix target = g.matrix * h.matrix;
  detail::SolveOutcome out = detail::solve_coords(P, target, Vector(g.coords + h.coords));
  if (!out.ok) {
    const Vector hc = h.coords;
    out = detail::solve_coords_path(
        P, [&](double s) { return Matrix(g.matrix * element_from_coords(P, s * hc).matrix); },
        g.coords);
  }
  if (!out.ok)
    throw Error(ErrorCode::recoordinatization_failure, "could not recoordinatize a product",
                json{{"residual", out.residual}});
  return GroupElement{out.coords, target};
}

inline GroupElement inverse(const SolvablePresentation& P, const GroupElement& g) {
  // Build the inverse matrix as the reversed product of negated factors
  // rather than by numerical inversion.
  auto inverse_matrix_at = [&](double s) {
    Matrix m = Matrix::Identity(P.mat_dim(), P.mat_dim());
    for (int p = P.dim() - 1; p >= 0; --p)
      m *= Matrix((-s * g.coords(p) * P.adapted_gen(p)).exp());
    return m;
  };
  const Matrix target = inverse_matrix_at(1.0);
  detail::SolveOutcome out = detail::solve_coords(P, target, Vector(-g.coords));
  if (!out.ok) out = detail::solve_coords_path(P, inverse_matrix_at, Vector::Zero(P.dim()));
  if (!out.ok)
    throw Error(ErrorCode::recoordinatization_failure, "could not recoordinatize an inverse",
                json{{"residual", out.residual}});
  return GroupElement{out.coords, target};
}

inline ValidationReport check_automorphism(const SolvablePresentation& P,
                                           const AlgebraAutomorphism& phi) {
  ValidationReport report;
  const int n = P.dim();
  if (phi.phi.rows() != n || phi.phi.cols() != n)
    throw Error(ErrorCode::dimension_mismatch, "automorphism matrix has wrong shape");
  double bracket_resid = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Vector lhs = phi.phi * P.algebra().bracket(Vector::Unit(n, i), Vector::Unit(n, j));
      Vector rhs = P.algebra().bracket(Vector(phi.phi.col(i)), Vector(phi.phi.col(j)));
      bracket_resid = std::max(bracket_resid, (lhs - rhs).norm());
    }
  report.record("bracket_preservation", bracket_resid, tol::automorphism);
  const double det = std::abs(phi.phi.determinant());
  report.residuals.emplace_back("abs_determinant", det);
  if (!(det > tol::determinant)) {
    report.accepted = false;
    report.failures.push_back("abs_determinant");
  }
  return report;
}

// Image of g under the group automorphism integrating phi: apply phi to each
// exponential factor, then recoordinatize.
inline GroupElement apply_automorphism(const SolvablePresentation& P,
                                       const AlgebraAutomorphism& phi, const GroupElement& g) {
  const int n = P.dim();
  std::vector<Matrix> N(n);
  for (int p = 0; p < n; ++p)
    N[p] = P.realize(Vector(phi.phi * Vector::Unit(n, P.adapted_order()[p])));
  auto image_at = [&](double s) {
    Matrix m = Matrix::Identity(P.mat_dim(), P.mat_dim());
    for (int p = 0; p < n; ++p) m *= Matrix((s * g.coords(p) * N[p]).exp());
    return m;
  };
  const Matrix target = image_at(1.0);
  // Linear init: the algebra-level image of the coordinates.
  Vector init = P.to_adapted(Vector(phi.phi * P.from_adapted(g.coords)));
  detail::SolveOutcome out = detail::solve_coords(P, target, init);
  if (!out.ok) out = detail::solve_coords_path(P, image_at, Vector::Zero(n));
  if (!out.ok)
    throw Error(ErrorCode::recoordinatization_failure,
                "could not recoordinatize an automorphism image",
                json{{"residual", out.residual}});
  return GroupElement{out.coords, target};
}

inline GroupElement delta(const SolvablePresentation& P, const AlgebraAutomorphism& phi,
                          const GroupElement& s) {
  return multiply(P, inverse(P, s), apply_automorphism(P, phi, s));
}

// Matrix of Ad(g) on the algebra, original basis order: column i holds the
// coordinates of g M_i g^{-1}.
inline Matrix adjoint_matrix(const SolvablePresentation& P, const GroupElement& g) {
  const int n = P.dim();
  Matrix ginv = g.matrix.inverse();
  Matrix Ad(n, n);
  for (int i = 0; i < n; ++i)
    Ad.col(i) = P.algebra_coords_of(Matrix(g.matrix * P.realization()[i] * ginv), "adjoint");
  return Ad;
}

// ---------------------------------------------------------------------------
// delta_solve
// ---------------------------------------------------------------------------

struct DeltaSolveInfo {
  double sigma_min = 0.0;        // smallest singular value of 1 - phi
  double condition = 0.0;        // condition number of 1 - phi
  double residual = 0.0;         // final |matrix(delta(x)) - matrix(v)|
  int newton_iterations = 0;
};

namespace detail {

// delta(z) = Inv(z) * Theta(z) with exact Jacobian, for the Newton polish.
struct DeltaEvaluator {
  const SolvablePresentation& P;
  std::vector<Matrix> N;  // realizations of phi(adapted basis)

  DeltaEvaluator(const SolvablePresentation& P_, const AlgebraAutomorphism& phi) : P(P_) {
    const int n = P.dim();
    N.resize(n);
    for (int p = 0; p < n; ++p)
      N[p] = P.realize(Vector(phi.phi * Vector::Unit(n, P.adapted_order()[p])));
  }

  Matrix value(const Vector& z) const {
    const int d = P.mat_dim();
    Matrix inv = Matrix::Identity(d, d), theta = Matrix::Identity(d, d);
    for (int p = P.dim() - 1; p >= 0; --p) inv *= Matrix((-z(p) * P.adapted_gen(p)).exp());
    for (int p = 0; p < P.dim(); ++p) theta *= Matrix((z(p) * N[p]).exp());
    return inv * theta;
  }

  // Returns delta(z) and fills the d^2 x n Jacobian.
  Matrix value_and_jacobian(const Vector& z, Matrix& J) const {
    const int n = P.dim();
    const int d = P.mat_dim();
    std::vector<Matrix> ei(n), fi(n);
    for (int p = 0; p < n; ++p) {
      ei[p] = (-z(p) * P.adapted_gen(p)).exp();
      fi[p] = (z(p) * N[p]).exp();
    }
    // Inv = ei[n-1] * ... * ei[0]; Theta = fi[0] * ... * fi[n-1].
    std::vector<Matrix> inv_pre(n + 1), inv_suf(n + 1), th_pre(n + 1), th_suf(n + 1);
    inv_suf[n] = Matrix::Identity(d, d);  // product of ei[n-1] .. ei[p]
    for (int p = n - 1; p >= 0; --p) inv_suf[p] = inv_suf[p + 1] * ei[p];
    inv_pre[0] = Matrix::Identity(d, d);  // product of ei[p-1] .. ei[0]
    for (int p = 0; p < n; ++p) inv_pre[p + 1] = ei[p] * inv_pre[p];
    th_pre[0] = Matrix::Identity(d, d);
    for (int p = 0; p < n; ++p) th_pre[p + 1] = th_pre[p] * fi[p];
    th_suf[n] = Matrix::Identity(d, d);
    for (int p = n - 1; p >= 0; --p) th_suf[p] = fi[p] * th_suf[p + 1];
    const Matrix inv = inv_suf[0];
    const Matrix theta = th_pre[n];
    J.resize(d * d, n);
    for (int p = 0; p < n; ++p) {
      Matrix dInv = inv_suf[p + 1] * (-P.adapted_gen(p)) * ei[p] * inv_pre[p];
      Matrix dTheta = th_pre[p] * N[p] * fi[p] * th_suf[p + 1];
      Matrix col = dInv * theta + inv * dTheta;
      J.col(p) = Eigen::Map<const Vector>(col.data(), d * d);
    }
    return inv * theta;
  }
};

}  // namespace detail

// Solve delta(x) = v for x.  Requires 1 - phi invertible
// (sigma_min > 1e-8); layered back-substitution provides the initial guess
// and damped Newton (step halving, at most 100 iterations) polishes it to
// the 1e-12 convergence target.
inline GroupElement delta_solve(const SolvablePresentation& P, const AlgebraAutomorphism& phi,
                                const GroupElement& v, DeltaSolveInfo* info = nullptr) {
  const int n = P.dim();
  const Matrix one_minus_phi = Matrix::Identity(n, n) - phi.phi;
  Vector sv = singular_values(one_minus_phi);
  const double sigma_min = n > 0 ? sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (info) {
    info->sigma_min = sigma_min;
    info->condition = n > 0 ? sv(0) / sv(sv.size() - 1) : 1.0;
  }
  if (!(sigma_min > tol::invertibility))
    throw Error(ErrorCode::not_invertible, "1 - phi is not invertible on the algebra",
                json{{"sigma_min", sigma_min}});

  const Matrix phi_adapted = P.to_adapted(phi.phi);
  GroupElement x = identity_element(P);
  // Layered sweep: after layer l the residual v * delta(x)^{-1} lies in the
  // next derived subgroup.
  for (int l = 0; l < P.layer_count(); ++l) {
    const int lo = P.layer_start(l), hi = P.layer_start(l + 1);
    if (hi == lo) continue;
    GroupElement dx = delta(P, phi, x);
    GroupElement a_star = multiply(P, v, inverse(P, dx));
    const Matrix Ad = P.to_adapted(adjoint_matrix(P, x));
    const int w = hi - lo;
    Vector rhs = Ad.block(lo, lo, w, w) * a_star.coords.segment(lo, w);
    Matrix block = phi_adapted.block(lo, lo, w, w) - Matrix::Identity(w, w);
    Vector alpha = block.colPivHouseholderQr().solve(rhs);
    Vector a_coords = Vector::Zero(n);
    a_coords.segment(lo, w) = alpha;
    x = multiply(P, element_from_coords(P, a_coords), x);
  }

  // Newton polish on the full coordinate vector.
  detail::DeltaEvaluator eval(P, phi);
  const double v_scale = 1.0 + v.matrix.norm();
  Vector z = x.coords;
  Matrix J;
  Matrix R = eval.value_and_jacobian(z, J) - v.matrix;
  double res = R.norm();
  int iterations = 0;
  for (int iter = 0; iter < 100 && res > tol::newton * v_scale; ++iter) {
    iterations = iter + 1;
    Vector step =
        J.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
            .solve(Vector(-Eigen::Map<const Vector>(R.data(), P.mat_dim() * P.mat_dim())));
    double alpha = 1.0;
    bool improved = false;
    while (alpha >= 1.0 / 1024.0) {
      Vector trial = z + alpha * step;
      Matrix Rt = eval.value(trial) - v.matrix;
      if (Rt.norm() < res) {
        z = trial;
        R = eval.value_and_jacobian(z, J) - v.matrix;
        res = R.norm();
        improved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!improved) break;
  }
  if (info) {
    info->residual = res;
    info->newton_iterations = iterations;
  }
  if (!(res <= tol::group_residual))
    throw Error(ErrorCode::no_convergence, "delta_solve did not reach the required residual",
                json{{"residual", res}, {"sigma_min", sigma_min}});
  return element_from_coords(P, z);
}

// ---------------------------------------------------------------------------
// Standard presentations used across tests and the gallery
// ---------------------------------------------------------------------------

namespace presentations {

// R^n as the unipotent translation block inside GL(n+1).
inline SolvablePresentation abelian(int n) {
  std::vector<Matrix> M(n, Matrix::Zero(n + 1, n + 1));
  for (int i = 0; i < n; ++i) M[i](i, n) = 1.0;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return SolvablePresentation::create(algebras::abelian(n), n + 1, std::move(M),
                                      std::move(order));
}

// Heisenberg group as upper unipotent 3x3 matrices; adapted order (x, y, z).
inline SolvablePresentation heisenberg() {
  Matrix X = Matrix::Zero(3, 3), Y = Matrix::Zero(3, 3), Z = Matrix::Zero(3, 3);
  X(0, 1) = 1.0;
  Y(1, 2) = 1.0;
  Z(0, 2) = 1.0;
  return SolvablePresentation::create(algebras::heisenberg(), 3, {X, Y, Z}, {0, 1, 2});
}

// Universal cover of the Euclidean motion group: the 3x3 affine block plus a
// unipotent 2x2 block whose corner entry unwinds the rotation angle (making
// the realization injective on the cover).
inline SolvablePresentation euclid2_cover() {
  Matrix T = Matrix::Zero(5, 5), X = Matrix::Zero(5, 5), Y = Matrix::Zero(5, 5);
  T(1, 0) = 1.0;
  T(0, 1) = -1.0;
  T(3, 4) = 1.0;
  X(0, 2) = 1.0;
  Y(1, 2) = 1.0;
  return SolvablePresentation::create(algebras::euclid2(), 5, {T, X, Y}, {0, 1, 2});
}

}  // namespace presentations

}  // namespace almell
