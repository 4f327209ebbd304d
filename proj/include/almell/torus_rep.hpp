#pragma once

// Representations of a torus T^r on R^n, given by commuting skew generators.
//
// rho(t) = exp(2*pi * sum_i t_i A_i) with t in [0,1)^r.  Periodicity forces
// every A_i to have spectrum in i*Z; the integer tuples appearing in a joint
// eigenbasis are the weights.  Weight extraction works by simultaneous
// diagonalization: recursively split eigenspaces of the Hermitian matrices
// -i*A_1, -i*A_2, ... and read the integer eigenvalues.
//
// Boolean questions that matter downstream (is there a trivial weight?  does
// rho(t)-1 have full rank?) are each answered by two independent routes that
// must agree; a mismatch raises InternalDisagreement instead of guessing.

#include <unsupported/Eigen/MatrixFunctions>

#include "almell/common.hpp"
#include "almell/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace almell {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct TorusRep {
  int rank = 0;
  int dim = 0;
  std::vector<Matrix> generators;  // skew, pairwise commuting, spectrum in i*Z

  // Validate invariants and construct; throws on violation.
  static TorusRep create(int rank, int dim, std::vector<Matrix> generators);
};

// Residuals only; does not throw.  Names: skewness, commutation, integrality.
inline ValidationReport validate_torus_rep(const TorusRep& R) {
  ValidationReport report;
  double skew = 0.0, comm = 0.0, integral = 0.0;
  for (int i = 0; i < R.rank; ++i) {
    const Matrix& A = R.generators[i];
    skew = std::max(skew, (A + A.transpose()).norm());
    for (int j = i + 1; j < R.rank; ++j)
      comm = std::max(comm, (A * R.generators[j] - R.generators[j] * A).norm());
    if (R.dim > 0) {
      Eigen::SelfAdjointEigenSolver<CMatrix> es(Complex(0, -1) * A.cast<Complex>(),
                                                Eigen::EigenvaluesOnly);
      for (int k = 0; k < R.dim; ++k) {
        const double lam = es.eigenvalues()(k);
        integral = std::max(integral, std::abs(lam - std::round(lam)));
      }
    }
  }
  report.record("skewness", skew, tol::torus_generator);
  report.record("commutation", comm, tol::torus_generator);
  report.record("integrality", integral, tol::weight_integral);
  return report;
}

inline TorusRep TorusRep::create(int rank, int dim, std::vector<Matrix> generators) {
  if (rank < 0 || dim < 0 || static_cast<int>(generators.size()) != rank)
    throw Error(ErrorCode::malformed_input, "torus rep needs one generator per circle");
  for (const Matrix& A : generators)
    if (A.rows() != dim || A.cols() != dim)
      throw Error(ErrorCode::dimension_mismatch, "generator has wrong shape");
  TorusRep R{rank, dim, std::move(generators)};
  ValidationReport report = validate_torus_rep(R);
  if (!report.accepted) {
    for (const std::string& f : report.failures)
      if (f == "integrality")
        throw Error(ErrorCode::non_integral_generator,
                    "generator spectrum is not within 1e-6 of i*Z", report.to_json());
    throw Error(ErrorCode::malformed_input, "generators are not commuting skew matrices",
                report.to_json());
  }
  return R;
}

inline Matrix rho_of(const TorusRep& R, const Vector& t) {
  if (t.size() != R.rank)
    throw Error(ErrorCode::dimension_mismatch, "torus parameter has wrong length");
  Matrix S = Matrix::Zero(R.dim, R.dim);
  for (int i = 0; i < R.rank; ++i) S += kTwoPi * t(i) * R.generators[i];
  return S.exp();
}

// ---------------------------------------------------------------------------
// Weights
// ---------------------------------------------------------------------------

struct WeightEntry {
  std::vector<long> weight;
  int multiplicity = 0;

  bool is_zero() const {
    for (long w : weight)
      if (w != 0) return false;
    return true;
  }
};

struct WeightMultiset {
  int rank = 0;
  int total_dim = 0;
  std::vector<WeightEntry> entries;  // sorted lexicographically, no duplicates

  bool has_zero() const {
    for (const WeightEntry& e : entries)
      if (e.is_zero()) return true;
    return false;
  }

  json to_json() const {
    json list = json::array();
    for (const WeightEntry& e : entries)
      list.push_back(json{{"weight", e.weight}, {"multiplicity", e.multiplicity}});
    return json{{"rank", rank}, {"dim", total_dim}, {"entries", list}};
  }
};

inline WeightMultiset weights(const TorusRep& R) {
  const int n = R.dim;
  // Invariant subspaces (columns of B) with the integer eigenvalues
  // accumulated so far along the processed circles.
  std::vector<std::pair<CMatrix, std::vector<long>>> spaces;
  if (n > 0) spaces.emplace_back(CMatrix::Identity(n, n), std::vector<long>{});
  for (int i = 0; i < R.rank; ++i) {
    std::vector<std::pair<CMatrix, std::vector<long>>> next;
    for (const auto& [B, partial] : spaces) {
      const CMatrix H =
          B.adjoint() * (Complex(0, -1) * R.generators[i].cast<Complex>()) * B;
      Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
      std::map<long, std::vector<int>> groups;
      for (int k = 0; k < H.rows(); ++k) {
        const double lam = es.eigenvalues()(k);
        const double rounded = std::round(lam);
        if (std::abs(lam - rounded) > tol::weight_integral)
          throw Error(ErrorCode::weight_rounding_ambiguity,
                      "eigenvalue is not within 1e-6 of an integer",
                      json{{"eigenvalue", lam}, {"circle", i}});
        groups[static_cast<long>(rounded)].push_back(k);
      }
      for (const auto& [w, cols] : groups) {
        CMatrix sub(n, cols.size());
        for (std::size_t c = 0; c < cols.size(); ++c)
          sub.col(c) = B * es.eigenvectors().col(cols[c]);
        std::vector<long> extended = partial;
        extended.push_back(w);
        next.emplace_back(std::move(sub), std::move(extended));
      }
    }
    spaces = std::move(next);
  }
  WeightMultiset out;
  out.rank = R.rank;
  out.total_dim = n;
  std::map<std::vector<long>, int> mult;
  for (const auto& [B, w] : spaces) mult[w] += static_cast<int>(B.cols());
  for (const auto& [w, m] : mult) out.entries.push_back(WeightEntry{w, m});
  // A real representation has conjugation-symmetric weights; a violation
  // means the numerics went wrong, not the input.
  for (const WeightEntry& e : out.entries) {
    std::vector<long> neg(e.weight);
    for (long& x : neg) x = -x;
    auto it = mult.find(neg);
    if (it == mult.end() || it->second != e.multiplicity)
      throw Error(ErrorCode::internal_disagreement,
                  "weight multiset is not closed under negation");
  }
  int total = 0;
  for (const WeightEntry& e : out.entries) total += e.multiplicity;
  if (total != n)
    throw Error(ErrorCode::internal_disagreement, "weight multiplicities do not sum to dim");
  return out;
}

// Does the representation contain the trivial weight?  Decided twice: once
// from the weight multiset and once from the joint kernel of the generators.
inline bool has_trivial_weight(const TorusRep& R) {
  if (R.dim == 0) return false;
  const bool via_weights = weights(R).has_zero();
  bool via_kernel;
  if (R.rank == 0) {
    via_kernel = true;  // every vector is fixed
  } else {
    Matrix stacked(R.rank * R.dim, R.dim);
    double scale = 0.0;
    for (int i = 0; i < R.rank; ++i) {
      stacked.middleRows(i * R.dim, R.dim) = R.generators[i];
      scale = std::max(scale, R.generators[i].norm());
    }
    via_kernel =
        kernel_space(stacked, "has_trivial_weight", std::max(1.0, scale)).cols() > 0;
  }
  if (via_weights != via_kernel)
    throw Error(ErrorCode::internal_disagreement,
                "weight route and kernel route disagree on the trivial weight",
                json{{"weights", via_weights}, {"kernel", via_kernel}});
  return via_weights;
}

// ---------------------------------------------------------------------------
// Free-rotation locus membership:  t such that rho(t) - 1 is invertible
// ---------------------------------------------------------------------------

inline bool fr_membership(const TorusRep& R, const Vector& t) {
  if (t.size() != R.rank)
    throw Error(ErrorCode::dimension_mismatch, "torus parameter has wrong length");
  // Route 1: smallest singular value of rho(t) - 1.
  const bool via_matrix =
      smallest_singular_value(rho_of(R, t) - Matrix::Identity(R.dim, R.dim)) >
      tol::invertibility;
  // Route 2: every weight pairing w . t must avoid the integers;
  // |e^{2 pi i w.t} - 1| = 2|sin(pi w.t)|.
  double min_gap = std::numeric_limits<double>::infinity();
  for (const WeightEntry& e : weights(R).entries) {
    double dot = 0.0;
    for (int i = 0; i < R.rank; ++i) dot += static_cast<double>(e.weight[i]) * t(i);
    min_gap = std::min(min_gap, 2.0 * std::abs(std::sin(M_PI * dot)));
  }
  const bool via_weights = min_gap > tol::invertibility;
  if (via_matrix != via_weights)
    throw Error(ErrorCode::internal_disagreement,
                "matrix route and weight route disagree on free-rotation membership",
                json{{"matrix", via_matrix}, {"weights", via_weights}, {"gap", min_gap}});
  return via_matrix;
}

// Monte Carlo estimate of the Haar measure of the free-rotation locus.
inline DensityReport fr_density_estimate(const TorusRep& R, long n_samples,
                                         std::uint64_t seed) {
  if (n_samples < 100)
    throw Error(ErrorCode::invalid_argument, "density estimate needs at least 100 samples");
  long hits = 0;
  for (long idx = 0; idx < n_samples; ++idx) {
    SampleRng rng(seed, static_cast<std::uint64_t>(idx));
    Vector t(R.rank);
    for (int i = 0; i < R.rank; ++i) t(i) = rng.uniform01();
    if (fr_membership(R, t)) ++hits;
  }
  DensityReport report;
  report.fraction = n_samples > 0 ? static_cast<double>(hits) / n_samples : 0.0;
  std::tie(report.ci_lo, report.ci_hi) = wilson_interval(hits, n_samples);
  report.n = n_samples;
  report.seed = seed;
  report.sampler = json{{"kind", "haar_torus"}, {"rank", R.rank}};
  return report;
}

// ---------------------------------------------------------------------------
// Compact part with finitely many components
// ---------------------------------------------------------------------------

struct CompactPart {
  TorusRep torus;
  // Representatives of the non-identity components; an element of the
  // compact part is rho(t) * components[j] (or rho(t) alone for j = -1).
  std::vector<Matrix> components;

  bool connected() const { return components.empty(); }

  static CompactPart create(TorusRep torus, std::vector<Matrix> components) {
    CompactPart P{std::move(torus), std::move(components)};
    ValidationReport report = validate_compact_part(P);
    if (!report.accepted)
      throw Error(ErrorCode::malformed_input, "component representatives fail validation",
                  report.to_json());
    return P;
  }

  static ValidationReport validate_compact_part(const CompactPart& P) {
    ValidationReport report;
    double orth = 0.0, norm_resid = 0.0;
    const int n = P.torus.dim;
    // Flatten the generator span once for the normalization check.
    Matrix span(n * n, P.torus.rank);
    for (int i = 0; i < P.torus.rank; ++i)
      span.col(i) = Eigen::Map<const Vector>(P.torus.generators[i].data(), n * n);
    for (const Matrix& g : P.components) {
      if (g.rows() != n || g.cols() != n)
        throw Error(ErrorCode::dimension_mismatch, "component has wrong shape");
      orth = std::max(orth, (g.transpose() * g - Matrix::Identity(n, n)).norm());
      for (int i = 0; i < P.torus.rank; ++i) {
        Matrix conj = g * P.torus.generators[i] * g.transpose();
        Vector v = Eigen::Map<const Vector>(conj.data(), n * n);
        norm_resid = std::max(norm_resid, span_distance(span, v));
      }
    }
    report.record("component_orthogonality", orth, tol::automorphism);
    report.record("torus_normalization", norm_resid, tol::automorphism);
    return report;
  }
};

// Element of the compact part: rho(t) for component = -1, rho(t) * g_j else.
inline Matrix rho_of(const CompactPart& P, const Vector& t, int component) {
  Matrix m = rho_of(P.torus, t);
  if (component < 0) return m;
  if (component >= static_cast<int>(P.components.size()))
    throw Error(ErrorCode::invalid_argument, "component index out of range");
  return m * P.components[component];
}

// ---------------------------------------------------------------------------
// Orthogonalization of commuting semisimple generators
// ---------------------------------------------------------------------------

struct OrthogonalizedRep {
  TorusRep rep;
  Matrix transform;  // S with A_skew = S A S^{-1}
};

// Commuting matrices with spectrum in i*Z generate a torus action that need
// not be orthogonal in the given coordinates.  Averaging x^T y over the torus
// gives an invariant inner product M; conjugating by S = M^{1/2} makes the
// action orthogonal and the generators skew.  The Haar average is computed on
// a 64-point grid per circle, which is exact as long as all weight
// differences are below 64 in absolute value.
inline OrthogonalizedRep orthogonalize_generators(int rank, int dim,
                                                  const std::vector<Matrix>& raw) {
  if (static_cast<int>(raw.size()) != rank)
    throw Error(ErrorCode::malformed_input, "need one generator per circle");
  for (const Matrix& B : raw) {
    if (B.rows() != dim || B.cols() != dim)
      throw Error(ErrorCode::dimension_mismatch, "generator has wrong shape");
    if (dim == 0) continue;
    Eigen::ComplexEigenSolver<CMatrix> es(B.cast<Complex>(), false);
    for (int k = 0; k < dim; ++k) {
      const Complex lam = es.eigenvalues()(k);
      if (std::abs(lam.real()) > tol::weight_integral ||
          std::abs(lam.imag() - std::round(lam.imag())) > tol::weight_integral)
        throw Error(ErrorCode::non_integral_generator,
                    "generator spectrum is not within 1e-6 of i*Z",
                    json{{"eigenvalue", {lam.real(), lam.imag()}}});
    }
  }
  if (dim == 0) {
    // A zero-dimensional action (e.g. a layer fully declared compact) has
    // nothing to average; Eigen's eigensolver rejects empty matrices.
    OrthogonalizedRep out;
    out.rep = TorusRep::create(rank, 0, std::vector<Matrix>(raw.size(), Matrix(0, 0)));
    out.transform = Matrix(0, 0);
    return out;
  }
  constexpr int kGrid = 64;
  Matrix M = Matrix::Identity(dim, dim);
  for (int i = 0; i < rank; ++i) {
    const Matrix E = (kTwoPi / kGrid * raw[i]).exp();
    Matrix avg = Matrix::Zero(dim, dim);
    Matrix P = Matrix::Identity(dim, dim);
    for (int k = 0; k < kGrid; ++k) {
      avg += P.transpose() * M * P;
      P = P * E;
    }
    M = avg / kGrid;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if (dim > 0 && es.eigenvalues().minCoeff() <= 0.0)
    throw Error(ErrorCode::internal_disagreement, "averaged Gram matrix is not positive");
  const Matrix S = es.operatorSqrt();
  const Matrix Sinv = es.operatorInverseSqrt();
  std::vector<Matrix> gens;
  gens.reserve(rank);
  for (const Matrix& B : raw) gens.push_back(S * B * Sinv);
  OrthogonalizedRep out;
  out.rep = TorusRep::create(rank, dim, std::move(gens));
  out.transform = S;
  return out;
}

}  // namespace almell
