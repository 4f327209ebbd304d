#pragma once

// Ellipticity of individual group elements, and Monte Carlo density
// estimates over semidirect products.
//
// A matrix is elliptic when its positive and negative powers stay bounded:
// equivalently, it is diagonalizable with unit-modulus spectrum.  In
// V x| K an element (v, s) is elliptic iff v lies in the image of
// rho(s) - 1; in L x| K (L solvable) iff v is a twisted coboundary
// delta(x) = x^{-1} Theta_s(x).  Both characterizations are constructive
// and produce an explicit conjugator into the compact factor.
//
// Density estimators draw each sample from a generator keyed on
// (seed, sample index), so results are bitwise independent of the number of
// worker threads.

#include "almell/rng.hpp"
#include "almell/solvable.hpp"
#include "almell/torus_rep.hpp"

#include <atomic>
#include <thread>

namespace almell {

// ---------------------------------------------------------------------------
// Spectral test for a single matrix
// ---------------------------------------------------------------------------

// True iff g is diagonalizable with every eigenvalue on the unit circle
// (within unit_tol).  Diagonalizability is decided per eigenvalue cluster
// (radius 1e-6): the rank of g - lambda I at cutoff 1e-8 * |g| must drop by
// exactly the cluster size.  Refuses (SpectralAmbiguity /
// NumericalRankAmbiguity) instead of answering within a factor 10 of either
// threshold.
inline bool is_elliptic_matrix(const CMatrix& g, double unit_tol = tol::spectral) {
  const int n = static_cast<int>(g.rows());
  if (n == 0) return true;
  if (g.cols() != n) throw Error(ErrorCode::dimension_mismatch, "matrix is not square");
  if (!(std::abs(g.determinant()) > tol::determinant))
    throw Error(ErrorCode::invalid_argument, "matrix is numerically singular");
  Eigen::ComplexEigenSolver<CMatrix> es(g, false);
  const CVector lambda = es.eigenvalues();
  bool off_circle = false;
  for (int i = 0; i < n; ++i) {
    const double m = std::abs(std::abs(lambda(i)) - 1.0);
    if (m > unit_tol / tol::rank_band && m < unit_tol * tol::rank_band)
      throw Error(ErrorCode::spectral_ambiguity,
                  "eigenvalue modulus is too close to the unit-circle tolerance",
                  json{{"modulus_gap", m}, {"tol", unit_tol}});
    if (m >= unit_tol * tol::rank_band) off_circle = true;
  }
  if (off_circle) return false;
  // Cluster the eigenvalues (union-find on the 1e-6 proximity graph).
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  std::function<int(int)> find = [&](int i) {
    return parent[i] == i ? i : parent[i] = find(parent[i]);
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(lambda(i) - lambda(j)) <= tol::eigen_cluster) parent[find(i)] = find(j);
  std::map<int, std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) clusters[find(i)].push_back(i);
  const double gnorm = operator_norm(g);
  const double cutoff = tol::rank_rel * gnorm;
  for (const auto& [root, members] : clusters) {
    Complex center(0.0, 0.0);
    for (int i : members) center += lambda(i);
    center /= static_cast<double>(members.size());
    CMatrix shifted = g - center * CMatrix::Identity(n, n);
    Vector sv = shifted.jacobiSvd().singularValues();
    int rank = 0;
    for (int i = 0; i < n; ++i) {
      const double s = sv(i);
      if (s > cutoff / tol::rank_band && s < cutoff * tol::rank_band)
        throw Error(ErrorCode::numerical_rank_ambiguity,
                    "singular value of g - lambda lies in the ambiguity band",
                    json{{"sigma", s}, {"cutoff", cutoff}});
      if (s >= cutoff) ++rank;
    }
    if (rank != n - static_cast<int>(members.size())) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Ellipticity in semidirect products
// ---------------------------------------------------------------------------

enum class EllipticState { elliptic, not_elliptic, undetermined };
enum class EllipticMethod { abelian_image, solvable_delta };

struct EllipticVerdict {
  EllipticState state = EllipticState::undetermined;
  EllipticMethod method = EllipticMethod::abelian_image;
  // Conjugator data: the translation part x of u = (x, 1).  For the abelian
  // case these are vector coordinates; for the solvable case, adapted
  // second-kind coordinates.
  std::optional<Vector> witness;
  double residual = 0.0;     // solve residual backing an elliptic verdict
  double obstruction = 0.0;  // layered obstruction backing a negative one
};

// (v, s) in V x| K with rho_s = rho(s):  elliptic iff (rho_s - 1) x = v is
// solvable; the minimum-norm least-squares solution is the witness.
inline EllipticVerdict is_elliptic_abelian(const Matrix& rho_s, const Vector& v) {
  const int n = static_cast<int>(v.size());
  if (rho_s.rows() != n || rho_s.cols() != n)
    throw Error(ErrorCode::dimension_mismatch, "rho(s) does not act on the vector part");
  EllipticVerdict verdict;
  verdict.method = EllipticMethod::abelian_image;
  if (n == 0 || v.norm() == 0.0) {
    verdict.state = EllipticState::elliptic;
    verdict.witness = Vector::Zero(n);
    return verdict;
  }
  const Matrix M = rho_s - Matrix::Identity(n, n);
  // Rank-truncated solve: the residual then measures the component of v
  // outside the numerically determined image of rho(s) - 1.
  Vector x = least_squares_solve(M, v, "rho(s) - 1");
  const double rel = (M * x - v).norm() / v.norm();
  verdict.residual = rel;
  if (rel <= tol::elliptic_solve) {
    verdict.state = EllipticState::elliptic;
    verdict.witness = x;
  } else {
    verdict.state = EllipticState::not_elliptic;
    verdict.obstruction = (M * x - v).norm();
  }
  return verdict;
}

// (v, s) in L x| K, phi the automorphism of the algebra of L induced by s.
// Solves delta(x) = v when 1 - phi is invertible.  Otherwise falls back to
// the layerwise linear obstructions: a clearly nonzero obstruction refutes
// ellipticity, one below ten times the invertibility tolerance is reported
// as undetermined rather than guessed.
inline EllipticVerdict is_elliptic_solvable(const SolvablePresentation& P,
                                            const AlgebraAutomorphism& phi,
                                            const GroupElement& v) {
  EllipticVerdict verdict;
  verdict.method = EllipticMethod::solvable_delta;
  if (v.coords.norm() == 0.0) {
    verdict.state = EllipticState::elliptic;
    verdict.witness = Vector::Zero(P.dim());
    return verdict;
  }
  try {
    DeltaSolveInfo info;
    GroupElement x = delta_solve(P, phi, v, &info);
    verdict.state = EllipticState::elliptic;
    verdict.witness = x.coords;
    verdict.residual = info.residual;
    return verdict;
  } catch (const Error& e) {
    // A failed solve is surfaced as undetermined, never guessed either way;
    // density estimators count these separately.
    if (e.code() == ErrorCode::no_convergence ||
        e.code() == ErrorCode::recoordinatization_failure) {
      verdict.state = EllipticState::undetermined;
      return verdict;
    }
    if (e.code() != ErrorCode::not_invertible) throw;
  }
  // Restricted sweep: solve each layer in the least-squares sense and track
  // how much of the right-hand side is unreachable.  Layer blocks whose true
  // value is zero (a determinant-one action on a derived layer, say) carry
  // epsilon-sized entries from the matrix exponential, so the per-block rank
  // cutoff is anchored at the size of 1 - phi as a whole.
  try {
    const int n = P.dim();
    const Matrix phi_adapted = P.to_adapted(phi.phi);
    const double phi_scale =
        operator_norm(Matrix(phi_adapted - Matrix::Identity(n, n)));
    GroupElement x = identity_element(P);
    double max_obstruction = 0.0;
    for (int l = 0; l < P.layer_count(); ++l) {
      const int lo = P.layer_start(l), hi = P.layer_start(l + 1);
      if (hi == lo) continue;
      GroupElement dx = delta(P, phi, x);
      GroupElement a_star = multiply(P, v, inverse(P, dx));
      const Matrix Ad = P.to_adapted(adjoint_matrix(P, x));
      const int w = hi - lo;
      Vector rhs = Ad.block(lo, lo, w, w) * a_star.coords.segment(lo, w);
      Matrix block = phi_adapted.block(lo, lo, w, w) - Matrix::Identity(w, w);
      Vector alpha = least_squares_solve(block, rhs, "automorphism layer block", phi_scale);
      max_obstruction = std::max(max_obstruction, (block * alpha - rhs).norm());
      Vector a_coords = Vector::Zero(n);
      a_coords.segment(lo, w) = alpha;
      x = multiply(P, element_from_coords(P, a_coords), x);
    }
    verdict.obstruction = max_obstruction;
    verdict.state = max_obstruction >= tol::rank_band * tol::invertibility
                        ? EllipticState::not_elliptic
                        : EllipticState::undetermined;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::no_convergence &&
        e.code() != ErrorCode::recoordinatization_failure)
      throw;
    verdict.state = EllipticState::undetermined;
  }
  return verdict;
}

struct ConjugationWitness {
  Vector translation;  // translation part of the conjugator u = (x, 1)
  double residual = 0.0;
};

// Verify the witness of an abelian verdict: u (v, s) u^{-1} must land in K,
// i.e. v - (rho(s) - 1) x = 0.
inline ConjugationWitness conjugate_into_compact_abelian(const Matrix& rho_s, const Vector& v,
                                                         const EllipticVerdict& verdict) {
  if (verdict.state != EllipticState::elliptic || !verdict.witness)
    throw Error(ErrorCode::no_witness, "element has no conjugation witness");
  const Vector& x = *verdict.witness;
  const double resid = (v - (rho_s - Matrix::Identity(rho_s.rows(), rho_s.cols())) * x).norm();
  if (resid > tol::witness)
    throw Error(ErrorCode::no_witness, "witness fails verification",
                json{{"residual", resid}});
  return ConjugationWitness{x, resid};
}

// Solvable analogue: x v Theta_s(x)^{-1} must be the identity of L.
inline ConjugationWitness conjugate_into_compact_solvable(const SolvablePresentation& P,
                                                          const AlgebraAutomorphism& phi,
                                                          const GroupElement& v,
                                                          const EllipticVerdict& verdict) {
  if (verdict.state != EllipticState::elliptic || !verdict.witness)
    throw Error(ErrorCode::no_witness, "element has no conjugation witness");
  GroupElement x = element_from_coords(P, *verdict.witness);
  GroupElement themx = apply_automorphism(P, phi, x);
  const Matrix prod = x.matrix * v.matrix * themx.matrix.inverse();
  const double resid = (prod - Matrix::Identity(P.mat_dim(), P.mat_dim())).norm();
  if (resid > tol::witness)
    throw Error(ErrorCode::no_witness, "witness fails verification",
                json{{"residual", resid}});
  return ConjugationWitness{*verdict.witness, resid};
}

// ---------------------------------------------------------------------------
// Density estimates
// ---------------------------------------------------------------------------

struct SamplerOptions {
  double scale = 1.0;  // standard deviation of the Gaussian translation draw
  int workers = 1;
};

namespace detail {

// Evaluate fn(idx) -> EllipticState over [0, N) on `workers` threads.
// Tallies are summed per worker and then reduced in worker order, and every
// sample owns its RNG stream, so the result is independent of `workers`.
template <typename Fn>
inline std::pair<long, long> tally_elliptic(long n_samples, int workers, const Fn& fn) {
  workers = std::max(1, workers);
  std::vector<long> hits(workers, 0), undet(workers, 0);
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](int w) {
    const long lo = n_samples * w / workers, hi = n_samples * (w + 1) / workers;
    try {
      for (long idx = lo; idx < hi; ++idx) {
        switch (fn(idx)) {
          case EllipticState::elliptic: ++hits[w]; break;
          case EllipticState::undetermined: ++undet[w]; break;
          case EllipticState::not_elliptic: break;
        }
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (std::thread& t : pool) t.join();
  }
  for (int w = 0; w < workers; ++w)
    if (errors[w]) std::rethrow_exception(errors[w]);
  long h = 0, u = 0;
  for (int w = 0; w < workers; ++w) { h += hits[w]; u += undet[w]; }
  return {h, u};
}

inline DensityReport make_density_report(long hits, long undetermined, long n,
                                         std::uint64_t seed, json sampler) {
  DensityReport r;
  r.fraction = static_cast<double>(hits) / static_cast<double>(n);
  std::tie(r.ci_lo, r.ci_hi) = wilson_interval(hits, n);
  r.n = n;
  r.undetermined = undetermined;
  r.seed = seed;
  r.sampler = std::move(sampler);
  return r;
}

}  // namespace detail

// Fraction of elliptic elements of V x| K under Gaussian translations,
// Haar torus angles, and a uniform component choice.
inline DensityReport elliptic_density_abelian(const CompactPart& K, long n_samples,
                                              std::uint64_t seed,
                                              const SamplerOptions& opts = {}) {
  if (n_samples < 100)
    throw Error(ErrorCode::invalid_argument, "density estimate needs at least 100 samples");
  const int n = K.torus.dim;
  const int r = K.torus.rank;
  const int comps = static_cast<int>(K.components.size());
  auto sample = [&](long idx) {
    SampleRng rng(seed, static_cast<std::uint64_t>(idx));
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = opts.scale * rng.normal();
    Vector t(r);
    for (int i = 0; i < r; ++i) t(i) = rng.uniform01();
    const int comp = comps > 0 ? rng.uniform_int(comps + 1) - 1 : -1;
    return is_elliptic_abelian(rho_of(K, t, comp), v).state;
  };
  auto [hits, undet] = detail::tally_elliptic(n_samples, opts.workers, sample);
  return detail::make_density_report(
      hits, undet, n_samples, seed,
      json{{"kind", "gaussian_by_haar"}, {"scale", opts.scale}, {"components", comps + 1}});
}

// Fraction of elliptic elements of L x| K, K acting through the derivation
// generators D_i: the automorphism at torus point t is exp(2 pi sum t_i D_i).
inline DensityReport elliptic_density_solvable(const SolvablePresentation& P,
                                               const std::vector<Matrix>& derivations,
                                               long n_samples, std::uint64_t seed,
                                               const SamplerOptions& opts = {}) {
  if (n_samples < 100)
    throw Error(ErrorCode::invalid_argument, "density estimate needs at least 100 samples");
  const int n = P.dim();
  const int r = static_cast<int>(derivations.size());
  auto sample = [&](long idx) {
    SampleRng rng(seed, static_cast<std::uint64_t>(idx));
    Vector coords(n);
    for (int i = 0; i < n; ++i) coords(i) = opts.scale * rng.normal();
    Vector t(r);
    for (int i = 0; i < r; ++i) t(i) = rng.uniform01();
    Matrix D = Matrix::Zero(n, n);
    for (int i = 0; i < r; ++i) D += kTwoPi * t(i) * derivations[i];
    AlgebraAutomorphism phi{D.exp()};
    return is_elliptic_solvable(P, phi, element_from_coords(P, coords)).state;
  };
  auto [hits, undet] = detail::tally_elliptic(n_samples, opts.workers, sample);
  return detail::make_density_report(
      hits, undet, n_samples, seed,
      json{{"kind", "gaussian_by_haar_solvable"}, {"scale", opts.scale}});
}

// Center of a local density probe in V x| K.
struct LocalCenter {
  Vector v;
  Vector t;
  int component = -1;
};

// Fraction of elliptic elements in a product neighborhood of `center`:
// a euclidean ball in the translation, an arc per torus coordinate, the
// component held fixed.
inline DensityReport local_elliptic_density_abelian(const CompactPart& K,
                                                    const LocalCenter& center, double radius,
                                                    long n_samples, std::uint64_t seed,
                                                    const SamplerOptions& opts = {}) {
  if (!(radius > 0.0))
    throw Error(ErrorCode::invalid_argument, "local density needs a positive radius");
  if (n_samples < 100)
    throw Error(ErrorCode::invalid_argument, "density estimate needs at least 100 samples");
  const int n = K.torus.dim;
  const int r = K.torus.rank;
  auto sample = [&](long idx) {
    SampleRng rng(seed, static_cast<std::uint64_t>(idx));
    // Uniform in the ball: normal direction, radius by the 1/n power law.
    Vector dir(n);
    for (int i = 0; i < n; ++i) dir(i) = rng.normal();
    const double len = dir.norm();
    Vector v = center.v;
    if (len > 0.0 && n > 0)
      v += dir * (radius * std::pow(rng.uniform01(), 1.0 / n) / len);
    Vector t(r);
    for (int i = 0; i < r; ++i) t(i) = center.t(i) + radius * rng.uniform(-1.0, 1.0);
    return is_elliptic_abelian(rho_of(K, t, center.component), v).state;
  };
  auto [hits, undet] = detail::tally_elliptic(n_samples, opts.workers, sample);
  return detail::make_density_report(
      hits, undet, n_samples, seed,
      json{{"kind", "local_ball_by_arc"}, {"radius", radius}, {"component", center.component}});
}

// Solvable analogue; the center is a coordinate tuple in L and a torus point.
inline DensityReport local_elliptic_density_solvable(const SolvablePresentation& P,
                                                     const std::vector<Matrix>& derivations,
                                                     const Vector& center_coords,
                                                     const Vector& center_t, double radius,
                                                     long n_samples, std::uint64_t seed,
                                                     const SamplerOptions& opts = {}) {
  if (!(radius > 0.0))
    throw Error(ErrorCode::invalid_argument, "local density needs a positive radius");
  if (n_samples < 100)
    throw Error(ErrorCode::invalid_argument, "density estimate needs at least 100 samples");
  const int n = P.dim();
  const int r = static_cast<int>(derivations.size());
  auto sample = [&](long idx) {
    SampleRng rng(seed, static_cast<std::uint64_t>(idx));
    Vector dir(n);
    for (int i = 0; i < n; ++i) dir(i) = rng.normal();
    const double len = dir.norm();
    Vector coords = center_coords;
    if (len > 0.0 && n > 0)
      coords += dir * (radius * std::pow(rng.uniform01(), 1.0 / n) / len);
    Vector t(r);
    for (int i = 0; i < r; ++i) t(i) = center_t(i) + radius * rng.uniform(-1.0, 1.0);
    Matrix D = Matrix::Zero(n, n);
    for (int i = 0; i < r; ++i) D += kTwoPi * t(i) * derivations[i];
    AlgebraAutomorphism phi{D.exp()};
    return is_elliptic_solvable(P, phi, element_from_coords(P, coords)).state;
  };
  auto [hits, undet] = detail::tally_elliptic(n_samples, opts.workers, sample);
  return detail::make_density_report(hits, undet, n_samples, seed,
                                     json{{"kind", "local_ball_by_arc_solvable"},
                                          {"radius", radius}});
}

// ---------------------------------------------------------------------------
// Power-norm divergence
// ---------------------------------------------------------------------------

// For each family member M: sup over 1 <= k <= k_max of the operator norm
// |M^k - 1|.  Bounded orbits stay small; a non-elliptic member's powers
// escape every bounded set, and the sup certifies a uniform gap.
inline std::vector<double> power_norm_divergence(const std::vector<CMatrix>& family,
                                                 long k_max) {
  if (k_max < 1)
    throw Error(ErrorCode::invalid_argument, "power-norm scan needs k_max >= 1");
  std::vector<double> sups;
  sups.reserve(family.size());
  for (const CMatrix& M : family) {
    const int n = static_cast<int>(M.rows());
    if (M.cols() != n) throw Error(ErrorCode::dimension_mismatch, "matrix is not square");
    CMatrix P = CMatrix::Identity(n, n);
    double sup = 0.0;
    for (long k = 1; k <= k_max; ++k) {
      P = P * M;
      sup = std::max(sup, operator_norm(CMatrix(P - CMatrix::Identity(n, n))));
    }
    sups.push_back(sup);
  }
  return sups;
}

}  // namespace almell
