#pragma once

// Top-level verdicts.  A group is presented either as a vector group extended
// by a compact connected group, a simply connected solvable group acted on by
// a torus through derivations, or a full Lie algebra with a declared torus
// action.  The decision procedures evaluate the equivalent characterizations
// of open almost-ellipticity independently -- free-rotation density, cluster
// probes at the identity, the weight multiset -- and refuse with
// InternalDisagreement if the routes ever disagree, rather than report a
// majority vote.
//
// The general pipeline: quotient by the radical must be of compact type, and
// each derived layer of the radical, after removing the *declared* compact
// directions, must carry a trivial-weight-free torus action.  Compact
// directions are never inferred: a simply connected cover can realize the
// same algebra with a non-compact direction (see the euclidean-cover gallery
// entry), so inference would change answers silently.  A heuristic flags
// integrally-acting candidates as warnings instead.

#include "almell/ellipticity.hpp"

namespace almell {

enum class GroupKind { vector_by_compact, solvable_by_compact, general };

inline const char* group_kind_name(GroupKind k) {
  switch (k) {
    case GroupKind::vector_by_compact: return "vector_by_compact";
    case GroupKind::solvable_by_compact: return "solvable_by_compact";
    case GroupKind::general: return "general";
  }
  return "?";
}

struct GroupPresentation {
  GroupKind kind = GroupKind::vector_by_compact;
  // vector_by_compact: the compact part acting on V = R^n.
  std::optional<CompactPart> compact;
  // solvable_by_compact: the algebra of L; general: the full algebra.
  std::optional<LieAlgebra> algebra;
  // Torus generators acting as derivations of `algebra`.
  std::vector<Matrix> adjoint_generators;
  // Optional matrix realization of the solvable part; enables sampling.
  std::optional<SolvablePresentation> realization;
  // general only: radical basis columns; computed when absent.
  std::optional<Matrix> declared_radical;
  // general only: declared compact directions per derived layer of the
  // radical (ambient coordinates).
  std::map<int, Matrix> layer_compact;
};

struct DecisionOptions {
  std::uint64_t seed = 0;
  long n_samples = 10000;
  int workers = 1;
  double scale = 1.0;   // Gaussian translation scale for elliptic sampling
  bool sample = true;   // run the Monte Carlo ellipticity cross-check
};

struct ConditionEntry {
  std::string label;
  bool holds = false;
  json evidence;
};

struct LayerReport {
  int index = 0;         // position in the derived series
  int dim = 0;           // dim of the layer D^k / D^(k+1)
  int nc_dim = 0;        // after removing declared compact directions
  WeightMultiset weights;  // torus weights on the nc part
  bool trivial_weight_free = false;

  json to_json() const {
    return json{{"index", index},
                {"dim", dim},
                {"nc_dim", nc_dim},
                {"weights", weights.to_json()},
                {"trivial_weight_free", trivial_weight_free}};
  }
};

struct DecisionReport {
  bool openly_almost_elliptic = false;
  std::vector<ConditionEntry> conditions;
  std::vector<LayerReport> layers;
  std::optional<DensityReport> sampling;
  std::optional<bool> semisimple_compact;
  std::vector<json> warnings;

  json to_json() const {
    json conds = json::object();
    for (const ConditionEntry& c : conditions)
      conds[c.label] = json{{"holds", c.holds}, {"evidence", c.evidence}};
    json out{{"verdict", openly_almost_elliptic ? "openly_almost_elliptic"
                                                : "not_almost_elliptic"},
             {"conditions", conds},
             {"layers", json::array()},
             {"sampling", nullptr},
             {"semisimple_compact", nullptr},
             {"warnings", warnings}};
    for (const LayerReport& l : layers) out["layers"].push_back(l.to_json());
    if (sampling) out["sampling"] = sampling->to_json();
    if (semisimple_compact) out["semisimple_compact"] = *semisimple_compact;
    return out;
  }
};

// ---------------------------------------------------------------------------
// Validation of presentation ingredients
// ---------------------------------------------------------------------------

// Worst violation of D[x,y] = [Dx,y] + [x,Dy] over basis pairs.
inline double derivation_residual(const LieAlgebra& L, const Matrix& D) {
  const int n = L.dim();
  if (D.rows() != n || D.cols() != n)
    throw Error(ErrorCode::dimension_mismatch, "derivation has wrong shape");
  double worst = 0.0;
  for (int j = 0; j < n; ++j)
    for (int k = j + 1; k < n; ++k) {
      Vector ej = Vector::Unit(n, j), ek = Vector::Unit(n, k);
      Vector lhs = D * L.bracket(ej, ek);
      Vector rhs = L.bracket(D.col(j), ek) + L.bracket(ej, D.col(k));
      worst = std::max(worst, (lhs - rhs).norm());
    }
  return worst;
}

inline void require_derivations(const LieAlgebra& L, const std::vector<Matrix>& gens) {
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const double resid = derivation_residual(L, gens[i]);
    if (resid > tol::automorphism)
      throw Error(ErrorCode::invalid_argument, "adjoint generator is not a derivation",
                  json{{"generator", i}, {"residual", resid}});
  }
}

inline ValidationReport validate_presentation(const GroupPresentation& G) {
  ValidationReport report;
  switch (G.kind) {
    case GroupKind::vector_by_compact: {
      if (!G.compact) {
        report.record("compact_part_present", 1.0, 0.0);
        break;
      }
      ValidationReport torus = validate_torus_rep(G.compact->torus);
      report.residuals.insert(report.residuals.end(), torus.residuals.begin(),
                              torus.residuals.end());
      for (const auto& f : torus.failures) report.failures.push_back(f);
      report.accepted = report.accepted && torus.accepted;
      break;
    }
    case GroupKind::solvable_by_compact:
    case GroupKind::general: {
      if (!G.algebra) {
        report.record("algebra_present", 1.0, 0.0);
        break;
      }
      ValidationReport alg = G.algebra->validate();
      report.residuals.insert(report.residuals.end(), alg.residuals.begin(),
                              alg.residuals.end());
      for (const auto& f : alg.failures) report.failures.push_back(f);
      report.accepted = report.accepted && alg.accepted;
      double worst = 0.0;
      for (const Matrix& D : G.adjoint_generators)
        worst = std::max(worst, derivation_residual(*G.algebra, D));
      report.record("derivation_property", worst, tol::automorphism);
      if (G.kind == GroupKind::solvable_by_compact)
        report.record("solvable", is_solvable(*G.algebra) ? 0.0 : 1.0, 0.5);
      break;
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// The five symbolic/sampled conditions for a connected torus action
// ---------------------------------------------------------------------------

namespace detail {

inline constexpr std::uint64_t kSaltBallProbe = 0x62616c6c70726f62ull;
inline constexpr std::uint64_t kSaltLocalProbe = 0x6c6f63616c646e73ull;

// Weight-route membership in the free-rotation locus: every pairing w.t must
// stay away from the integers, |e^{2 pi i w.t} - 1| = 2|sin(pi w.t)|.
inline bool fr_member_weights(const WeightMultiset& W, const Vector& t) {
  double min_gap = std::numeric_limits<double>::infinity();
  for (const WeightEntry& e : W.entries) {
    double dot = 0.0;
    for (int i = 0; i < W.rank; ++i) dot += static_cast<double>(e.weight[i]) * t(i);
    min_gap = std::min(min_gap, 2.0 * std::abs(std::sin(M_PI * dot)));
  }
  return min_gap > tol::invertibility;
}

// Matrix-route membership: smallest singular value of rho(t) - 1.
inline bool fr_member_matrix(const TorusRep& R, const Vector& t) {
  return smallest_singular_value(rho_of(R, t) - Matrix::Identity(R.dim, R.dim)) >
         tol::invertibility;
}

struct TorusConditions {
  std::vector<ConditionEntry> entries;  // labels a..e
  WeightMultiset multiset;
  DensityReport density;  // the condition (a) estimate
  bool agree = false;     // all five booleans equal
  bool value = false;     // their common value when agree
};

// Conditions (a)-(e) for a connected compact group presented by its torus:
//   (a) the free-rotation locus has full Haar density      [matrix route]
//   (b) it clusters at the identity (shrinking-ball probe) [matrix route]
//   (c) as (a) through the weight pairings                 [weight route]
//   (d) as (b) through the weight pairings                 [weight route]
//   (e) the weight multiset misses the zero weight
// The evaluator only records; callers decide whether disagreement is an
// internal error (decide_*) or an equivalence failure (battery).
inline TorusConditions evaluate_torus_conditions(const TorusRep& R,
                                                 const DecisionOptions& opts) {
  TorusConditions out;
  out.multiset = weights(R);

  out.density = fr_density_estimate(R, opts.n_samples, opts.seed);
  out.entries.push_back({"a", out.density.fraction >= tol::density_threshold,
                         out.density.to_json()});

  long weight_hits = 0;
  for (long idx = 0; idx < opts.n_samples; ++idx) {
    SampleRng rng(opts.seed, static_cast<std::uint64_t>(idx));
    Vector t(R.rank);
    for (int i = 0; i < R.rank; ++i) t(i) = rng.uniform01();
    if (fr_member_weights(out.multiset, t)) ++weight_hits;
  }
  const double weight_fraction =
      static_cast<double>(weight_hits) / static_cast<double>(opts.n_samples);

  // Shrinking balls around the identity, radii 2^-k; a ball counts as hit
  // once any draw lands in the free-rotation locus.
  constexpr int kBallCount = 20, kDrawsPerBall = 100;
  json balls_matrix = json::array(), balls_weights = json::array();
  bool cluster_matrix = true, cluster_weights = true;
  for (int k = 1; k <= kBallCount; ++k) {
    const double radius = std::ldexp(1.0, -k);
    int hit_m = -1, hit_w = -1;
    for (int j = 0; j < kDrawsPerBall && (hit_m < 0 || hit_w < 0); ++j) {
      SampleRng rng(opts.seed ^ kSaltBallProbe,
                    static_cast<std::uint64_t>(k) * 4096u + static_cast<std::uint64_t>(j));
      Vector t(R.rank);
      for (int i = 0; i < R.rank; ++i) t(i) = radius * rng.uniform(-1.0, 1.0);
      if (hit_m < 0 && fr_member_matrix(R, t)) hit_m = j;
      if (hit_w < 0 && fr_member_weights(out.multiset, t)) hit_w = j;
    }
    balls_matrix.push_back(json{{"radius", radius}, {"first_hit", hit_m}});
    balls_weights.push_back(json{{"radius", radius}, {"first_hit", hit_w}});
    cluster_matrix = cluster_matrix && hit_m >= 0;
    cluster_weights = cluster_weights && hit_w >= 0;
  }

  out.entries.push_back({"b", cluster_matrix, json{{"balls", balls_matrix}}});
  out.entries.push_back({"c", weight_fraction >= tol::density_threshold,
                         json{{"fraction", weight_fraction},
                              {"n", opts.n_samples},
                              {"route", "weights"}}});
  out.entries.push_back({"d", cluster_weights, json{{"balls", balls_weights}}});
  out.entries.push_back({"e", !has_trivial_weight(R), out.multiset.to_json()});

  out.agree = true;
  for (const ConditionEntry& c : out.entries)
    out.agree = out.agree && (c.holds == out.entries.front().holds);
  out.value = out.entries.front().holds;
  return out;
}

inline json conditions_evidence(const std::vector<ConditionEntry>& entries) {
  json out = json::object();
  for (const ConditionEntry& c : entries) out[c.label] = c.holds;
  return out;
}

// Orthonormalize subspace basis columns (which may come from exact rational
// computations and need not be orthonormal).
inline Matrix orthonormalized(const Matrix& basis, const char* context) {
  return column_space(basis, context, 1.0);
}

// Orthonormal basis of (span A) ∩ (span B)^perp, for span B ⊆ span A.
inline Matrix complement_within(const Matrix& A, const Matrix& B, const char* context) {
  if (A.cols() == 0) return Matrix(A.rows(), 0);
  Matrix Q = B.cols() > 0 ? orthonormalized(B, context) : Matrix(A.rows(), 0);
  Matrix residual = A;
  if (Q.cols() > 0) residual = A - Q * (Q.transpose() * A);
  return column_space(residual, context, 1.0);
}

// Induced action of derivations on a filtration layer with orthonormal basis
// C (the action must preserve the filtration; verified by the caller).
inline std::vector<Matrix> induced_generators(const std::vector<Matrix>& gens,
                                              const Matrix& C) {
  std::vector<Matrix> out;
  out.reserve(gens.size());
  for (const Matrix& D : gens) out.push_back(C.transpose() * D * C);
  return out;
}

inline void check_multiset_union(const WeightMultiset& full,
                                 const std::vector<LayerReport>& layers) {
  std::map<std::vector<long>, long> expected, got;
  for (const WeightEntry& e : full.entries) expected[e.weight] += e.multiplicity;
  for (const LayerReport& l : layers)
    for (const WeightEntry& e : l.weights.entries) got[e.weight] += e.multiplicity;
  if (expected != got) {
    json ev{{"full", full.to_json()}, {"layers", json::array()}};
    for (const LayerReport& l : layers) ev["layers"].push_back(l.weights.to_json());
    throw Error(ErrorCode::internal_disagreement,
                "layer weight multisets do not union to the full multiset", ev);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// decide: vector_by_compact
// ---------------------------------------------------------------------------

inline DecisionReport decide_vector_by_compact(const GroupPresentation& G,
                                               const DecisionOptions& opts = {}) {
  if (G.kind != GroupKind::vector_by_compact || !G.compact)
    throw Error(ErrorCode::invalid_argument, "presentation is not vector_by_compact");
  const CompactPart& K = *G.compact;
  if (!K.connected())
    throw Error(ErrorCode::disconnected_compact_part,
                "decision procedures require a connected compact part",
                json{{"components", K.components.size() + 1}});

  detail::TorusConditions cond = detail::evaluate_torus_conditions(K.torus, opts);
  if (!cond.agree)
    throw Error(ErrorCode::internal_disagreement,
                "the equivalent conditions disagree on a vector_by_compact input",
                detail::conditions_evidence(cond.entries));

  DecisionReport report;
  report.openly_almost_elliptic = cond.value;
  report.conditions = cond.entries;
  report.layers.push_back(LayerReport{0, K.torus.dim, K.torus.dim, cond.multiset,
                                      !cond.multiset.has_zero()});

  if (opts.sample) {
    DensityReport density = elliptic_density_abelian(
        K, opts.n_samples, opts.seed, SamplerOptions{opts.scale, opts.workers});
    const bool sampled_verdict = density.fraction >= tol::density_threshold;
    if (sampled_verdict != report.openly_almost_elliptic)
      throw Error(ErrorCode::equivalence_violation,
                  "elliptic-density sampling contradicts the symbolic verdict",
                  json{{"symbolic", report.openly_almost_elliptic},
                       {"sampling", density.to_json()}});
    report.sampling = density;
  }
  return report;
}

// ---------------------------------------------------------------------------
// decide: solvable_by_compact
// ---------------------------------------------------------------------------

namespace detail {

struct SolvableAnalysis {
  OrthogonalizedRep action;  // torus action on the whole algebra
  TorusConditions cond;
  std::vector<LayerReport> layers;
};

inline SolvableAnalysis analyze_solvable(const LieAlgebra& L,
                                         const std::vector<Matrix>& gens,
                                         const DecisionOptions& opts) {
  require_derivations(L, gens);
  if (!is_solvable(L))
    throw Error(ErrorCode::invalid_argument, "algebra of the solvable part is not solvable");
  const int n = L.dim();
  const int r = static_cast<int>(gens.size());

  SolvableAnalysis out;
  out.action = orthogonalize_generators(r, n, gens);
  out.cond = evaluate_torus_conditions(out.action.rep, opts);

  DerivedSeries series = derived_series(L);
  for (std::size_t k = 0; k + 1 < series.terms.size(); ++k) {
    const Matrix& Bk = series.terms[k].basis;
    const Matrix& Bk1 = series.terms[k + 1].basis;
    Matrix C = complement_within(Bk, Bk1, "derived layer");
    const int q = static_cast<int>(C.cols());
    if (q != series.terms[k].dim() - series.terms[k + 1].dim())
      throw Error(ErrorCode::internal_disagreement, "derived layer dimension mismatch");
    if (q == 0) continue;
    // Derivations preserve every derived ideal; verify before projecting.
    Subspace Dk{n, Bk};
    for (const Matrix& D : gens)
      for (int j = 0; j < q; ++j) {
        const double dist = Dk.distance(Vector(D * C.col(j)));
        if (dist > tol::rank_band * tol::automorphism)
          throw Error(ErrorCode::internal_disagreement,
                      "derivation fails to preserve a derived ideal",
                      json{{"layer", k}, {"distance", dist}});
      }
    OrthogonalizedRep layer_rep =
        orthogonalize_generators(r, q, induced_generators(gens, C));
    WeightMultiset W = weights(layer_rep.rep);
    out.layers.push_back(
        LayerReport{static_cast<int>(k), q, q, W, !W.has_zero()});
  }
  check_multiset_union(out.cond.multiset, out.layers);
  return out;
}

}  // namespace detail

inline DecisionReport decide_solvable_by_compact(const GroupPresentation& G,
                                                 const DecisionOptions& opts = {}) {
  if (G.kind != GroupKind::solvable_by_compact || !G.algebra)
    throw Error(ErrorCode::invalid_argument, "presentation is not solvable_by_compact");
  if (!G.layer_compact.empty())
    throw Error(ErrorCode::invalid_argument,
                "declared compact directions apply to kind=general only");
  if (G.realization && G.realization->dim() != G.algebra->dim())
    throw Error(ErrorCode::dimension_mismatch,
                "realization does not match the algebra dimension");

  detail::SolvableAnalysis analysis =
      detail::analyze_solvable(*G.algebra, G.adjoint_generators, opts);
  if (!analysis.cond.agree)
    throw Error(ErrorCode::internal_disagreement,
                "the equivalent conditions disagree on a solvable_by_compact input",
                detail::conditions_evidence(analysis.cond.entries));

  DecisionReport report;
  report.openly_almost_elliptic = analysis.cond.value;
  report.conditions = analysis.cond.entries;
  report.layers = analysis.layers;

  if (opts.sample && G.realization) {
    DensityReport density = elliptic_density_solvable(
        *G.realization, G.adjoint_generators, opts.n_samples, opts.seed,
        SamplerOptions{opts.scale, opts.workers});
    const bool sampled_verdict = density.fraction >= tol::density_threshold;
    if (sampled_verdict != report.openly_almost_elliptic)
      throw Error(ErrorCode::equivalence_violation,
                  "elliptic-density sampling contradicts the symbolic verdict",
                  json{{"symbolic", report.openly_almost_elliptic},
                       {"sampling", density.to_json()}});
    report.sampling = density;
  }
  return report;
}

// ---------------------------------------------------------------------------
// decide: general
// ---------------------------------------------------------------------------

namespace detail {

// Verify a declared radical: a solvable ideal with semisimple quotient.
inline Subspace verified_radical(const LieAlgebra& L, const Matrix& declared) {
  Subspace R{L.dim(), orthonormalized(declared, "declared radical")};
  if (!is_ideal(L, R))
    throw Error(ErrorCode::invalid_argument, "declared radical is not an ideal",
                json{{"residual", ideal_residual(L, R)}});
  if (!is_solvable(restrict_to_subalgebra(L, R).algebra))
    throw Error(ErrorCode::invalid_argument, "declared radical is not solvable");
  QuotientAlgebra q = quotient_algebra(L, R);
  if (radical(q.algebra).dim() != 0)
    throw Error(ErrorCode::invalid_argument,
                "declared radical is not maximal (quotient has a radical)");
  return R;
}

// Candidate-compact heuristic: a zero-weight direction z whose ad_z has
// purely imaginary integral spectrum with a nonzero part could integrate to
// a circle in some quotient -- or to a line in a cover, which is why it is
// flagged, not assumed.
inline bool integrally_acting(const LieAlgebra& L, const Vector& z) {
  Matrix ad = L.ad(z);
  if (ad.norm() == 0.0) return false;
  Eigen::ComplexEigenSolver<CMatrix> es(ad.cast<Complex>(), false);
  bool nonzero_imag = false;
  for (int i = 0; i < L.dim(); ++i) {
    const Complex lam = es.eigenvalues()(i);
    if (std::abs(lam.real()) > tol::weight_integral) return false;
    const double im = lam.imag();
    if (std::abs(im - std::round(im)) > tol::weight_integral) return false;
    if (std::abs(im) > tol::weight_integral) nonzero_imag = true;
  }
  return nonzero_imag;
}

// Zero-weight subspace of a torus action in its original (pre-orthogonalized)
// coordinates: the common kernel of the skew generators, mapped back.
inline Matrix zero_weight_space(const OrthogonalizedRep& rep) {
  const int n = rep.rep.dim;
  const int r = rep.rep.rank;
  if (r == 0) return Matrix::Identity(n, n);
  Matrix stacked(r * n, n);
  double scale = 0.0;
  for (int i = 0; i < r; ++i) {
    stacked.middleRows(i * n, n) = rep.rep.generators[i];
    scale = std::max(scale, rep.rep.generators[i].norm());
  }
  Matrix kernel_skew = kernel_space(stacked, "zero weight space", std::max(1.0, scale));
  // generators_skew = S A S^{-1}: kernels correspond under S.
  Eigen::PartialPivLU<Matrix> lu(rep.transform);
  Matrix back(n, kernel_skew.cols());
  for (int j = 0; j < kernel_skew.cols(); ++j) back.col(j) = lu.solve(kernel_skew.col(j));
  return back;
}

}  // namespace detail

inline DecisionReport decide_general(const GroupPresentation& G,
                                     const DecisionOptions& opts = {}) {
  if (G.kind != GroupKind::general || !G.algebra)
    throw Error(ErrorCode::invalid_argument, "presentation is not general");
  const LieAlgebra& L = *G.algebra;
  require_derivations(L, G.adjoint_generators);
  const int n = L.dim();
  const int r = static_cast<int>(G.adjoint_generators.size());

  DecisionReport report;

  // (a) the semisimple quotient must be of compact type.
  Subspace rad = G.declared_radical ? detail::verified_radical(L, *G.declared_radical)
                                    : radical(L);
  bool compact_quotient;
  if (rad.dim() == n) {
    compact_quotient = true;  // trivial quotient
  } else {
    QuotientAlgebra q = quotient_algebra(L, rad);
    compact_quotient = is_compact_type(q.algebra);
  }
  report.semisimple_compact = compact_quotient;
  report.conditions.push_back(
      {"a", compact_quotient,
       json{{"radical_dim", rad.dim()}, {"quotient_dim", n - rad.dim()}}});

  // (b) every derived layer of the radical, with declared compact directions
  // removed, must carry a trivial-weight-free action.
  bool layers_free = true;
  if (rad.dim() > 0) {
    rad.basis = detail::orthonormalized(rad.basis, "radical basis");
    SubAlgebra sub = restrict_to_subalgebra(L, rad);
    // Restrict the torus generators to the radical.
    std::vector<Matrix> rad_gens;
    for (const Matrix& D : G.adjoint_generators) {
      for (int j = 0; j < rad.dim(); ++j) {
        const double dist = rad.distance(Vector(D * rad.basis.col(j)));
        if (dist > tol::rank_band * tol::automorphism)
          throw Error(ErrorCode::invalid_argument,
                      "adjoint generator does not preserve the radical",
                      json{{"distance", dist}});
      }
      rad_gens.push_back(sub.basis.transpose() * D * sub.basis);
    }
    DerivedSeries series = derived_series(sub.algebra);
    std::optional<WeightMultiset> full_on_radical;
    if (G.layer_compact.empty())
      full_on_radical = weights(orthogonalize_generators(r, rad.dim(), rad_gens).rep);

    for (std::size_t k = 0; k + 1 < series.terms.size(); ++k) {
      Matrix C = detail::complement_within(series.terms[k].basis,
                                           series.terms[k + 1].basis, "derived layer");
      const int q = static_cast<int>(C.cols());
      if (q == 0) continue;
      std::vector<Matrix> layer_gens = detail::induced_generators(rad_gens, C);

      // Remove declared compact directions for this layer.
      LayerReport layer;
      layer.index = static_cast<int>(k);
      layer.dim = q;
      Matrix C_nc = Matrix::Identity(q, q);
      auto declared = G.layer_compact.find(static_cast<int>(k));
      if (declared != G.layer_compact.end() && declared->second.cols() > 0) {
        const Matrix& cols = declared->second;
        Subspace Dk{n, Matrix(sub.basis * series.terms[k].basis)};
        Matrix W(q, cols.cols());
        for (int j = 0; j < cols.cols(); ++j) {
          if (Dk.distance(Vector(cols.col(j))) > tol::rank_band * tol::automorphism)
            throw Error(ErrorCode::invalid_argument,
                        "declared compact direction lies outside its layer",
                        json{{"layer", k}});
          W.col(j) = C.transpose() * (sub.basis.transpose() * cols.col(j));
        }
        Matrix Wq = detail::orthonormalized(W, "declared compact directions");
        Subspace Wspan{q, Wq};
        for (const Matrix& M : layer_gens)
          for (int j = 0; j < Wq.cols(); ++j)
            if (Wspan.distance(Vector(M * Wq.col(j))) > tol::automorphism)
              throw Error(ErrorCode::invalid_argument,
                          "declared compact directions are not torus-invariant",
                          json{{"layer", k}});
        C_nc = orthogonal_complement(Wq, q);
      }
      layer.nc_dim = static_cast<int>(C_nc.cols());

      OrthogonalizedRep nc_rep = orthogonalize_generators(
          r, layer.nc_dim, detail::induced_generators(layer_gens, C_nc));
      layer.weights = weights(nc_rep.rep);
      layer.trivial_weight_free = !has_trivial_weight(nc_rep.rep);
      layers_free = layers_free && layer.trivial_weight_free;

      // Advisory only: flag integrally-acting zero-weight directions the
      // caller might have intended as compact.
      Matrix zero_dirs = detail::zero_weight_space(nc_rep);
      for (int j = 0; j < zero_dirs.cols(); ++j) {
        Vector ambient = sub.basis * (C * (C_nc * zero_dirs.col(j)));
        if (detail::integrally_acting(L, ambient)) {
          std::vector<double> coords(ambient.data(), ambient.data() + ambient.size());
          report.warnings.push_back(json{{"warning", "UndeclaredCompactDirections"},
                                         {"layer", k},
                                         {"direction", coords}});
        }
      }
      report.layers.push_back(std::move(layer));
    }
    if (full_on_radical) detail::check_multiset_union(*full_on_radical, report.layers);
  }
  report.conditions.push_back({"b", layers_free,
                               json{{"layer_count", report.layers.size()}}});
  report.openly_almost_elliptic = compact_quotient && layers_free;
  return report;
}

inline DecisionReport decide(const GroupPresentation& G, const DecisionOptions& opts = {}) {
  switch (G.kind) {
    case GroupKind::vector_by_compact: return decide_vector_by_compact(G, opts);
    case GroupKind::solvable_by_compact: return decide_solvable_by_compact(G, opts);
    case GroupKind::general: return decide_general(G, opts);
  }
  throw Error(ErrorCode::invalid_argument, "unknown presentation kind");
}

// ---------------------------------------------------------------------------
// Equivalence battery: all seven characterizations, asserted equal
// ---------------------------------------------------------------------------

struct BatteryReport {
  std::vector<ConditionEntry> entries;  // labels a..g
  bool value = false;

  json to_json() const {
    json conds = json::object();
    for (const ConditionEntry& c : entries)
      conds[c.label] = json{{"holds", c.holds}, {"evidence", c.evidence}};
    return json{{"value", value}, {"conditions", conds}};
  }
};

namespace detail {

// Distance of every weight pairing from the integers; local probes stay
// inside the free-rotation locus as long as the probe radius times the
// weights' l1 size stays below this margin.
inline double torus_margin(const WeightMultiset& W, const Vector& t) {
  double margin = std::numeric_limits<double>::infinity();
  for (const WeightEntry& e : W.entries) {
    double dot = 0.0;
    for (int i = 0; i < W.rank; ++i) dot += static_cast<double>(e.weight[i]) * t(i);
    margin = std::min(margin, std::abs(dot - std::round(dot)));
  }
  return margin;
}

inline long max_weight_l1(const WeightMultiset& W) {
  long max_l1 = 0;
  for (const WeightEntry& e : W.entries) {
    long l1 = 0;
    for (long w : e.weight) l1 += std::labs(w);
    max_l1 = std::max(max_l1, l1);
  }
  return max_l1;
}

inline void require_no_undetermined(const DensityReport& density, const char* what) {
  if (density.undetermined > 0)
    throw Error(ErrorCode::equivalence_violation,
                "undetermined verdicts corrupt a density estimate",
                json{{"stage", what}, {"report", density.to_json()}});
}

}  // namespace detail

inline BatteryReport equivalence_battery(const GroupPresentation& G,
                                         const DecisionOptions& opts = {}) {
  if (G.kind == GroupKind::general)
    throw Error(ErrorCode::invalid_argument,
                "the equivalence battery applies to semidirect presentations only");

  BatteryReport report;
  detail::TorusConditions cond;
  DensityReport density;
  json local_evidence = json::array();
  bool locals_ok = true;

  if (G.kind == GroupKind::vector_by_compact) {
    if (!G.compact) throw Error(ErrorCode::invalid_argument, "missing compact part");
    const CompactPart& K = *G.compact;
    if (!K.connected())
      throw Error(ErrorCode::disconnected_compact_part,
                  "the equivalence battery requires a connected compact part");
    cond = detail::evaluate_torus_conditions(K.torus, opts);
    density = elliptic_density_abelian(K, opts.n_samples, opts.seed,
                                       SamplerOptions{opts.scale, opts.workers});
    detail::require_no_undetermined(density, "global density");

    if (density.fraction >= tol::density_threshold) {
      // (g): full local density around elliptic points.  Centers are taken
      // from the sampler stream, restricted to comfortable torus margins so
      // the probe ball provably avoids the singular stratum.
      const int n = K.torus.dim, r = K.torus.rank;
      const long max_l1 = std::max(1l, detail::max_weight_l1(cond.multiset));
      int found = 0;
      for (long idx = 0; idx < 2000 && found < 3; ++idx) {
        SampleRng rng(opts.seed, static_cast<std::uint64_t>(idx));
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = opts.scale * rng.normal();
        Vector t(r);
        for (int i = 0; i < r; ++i) t(i) = rng.uniform01();
        const double margin = detail::torus_margin(cond.multiset, t);
        if (margin < 0.2) continue;
        if (is_elliptic_abelian(rho_of(K, t, -1), v).state != EllipticState::elliptic)
          continue;
        const double radius =
            std::min(0.005, margin / (4.0 * static_cast<double>(max_l1)));
        LocalCenter center{v, t, -1};
        DensityReport local = local_elliptic_density_abelian(
            K, center, radius, 200, opts.seed ^ detail::kSaltLocalProbe,
            SamplerOptions{opts.scale, opts.workers});
        detail::require_no_undetermined(local, "local density");
        locals_ok = locals_ok && local.fraction == 1.0;
        local_evidence.push_back(json{{"margin", margin},
                                      {"radius", radius},
                                      {"fraction", local.fraction}});
        ++found;
      }
      locals_ok = locals_ok && found == 3;
    }
  } else {
    if (!G.algebra || !G.realization)
      throw Error(ErrorCode::invalid_argument,
                  "the solvable battery needs an algebra and a realization");
    detail::SolvableAnalysis analysis =
        detail::analyze_solvable(*G.algebra, G.adjoint_generators, opts);
    cond = analysis.cond;
    density = elliptic_density_solvable(*G.realization, G.adjoint_generators,
                                        opts.n_samples, opts.seed,
                                        SamplerOptions{opts.scale, opts.workers});
    detail::require_no_undetermined(density, "global density");

    if (density.fraction >= tol::density_threshold) {
      const int n = G.algebra->dim();
      const int r = static_cast<int>(G.adjoint_generators.size());
      const long max_l1 = std::max(1l, detail::max_weight_l1(cond.multiset));
      int found = 0;
      for (long idx = 0; idx < 2000 && found < 3; ++idx) {
        SampleRng rng(opts.seed, static_cast<std::uint64_t>(idx));
        Vector coords(n);
        for (int i = 0; i < n; ++i) coords(i) = opts.scale * rng.normal();
        Vector t(r);
        for (int i = 0; i < r; ++i) t(i) = rng.uniform01();
        const double margin = detail::torus_margin(cond.multiset, t);
        if (margin < 0.2) continue;
        Matrix D = Matrix::Zero(n, n);
        for (int i = 0; i < r; ++i) D += kTwoPi * t(i) * G.adjoint_generators[i];
        AlgebraAutomorphism phi{D.exp()};
        if (is_elliptic_solvable(*G.realization, phi, element_from_coords(*G.realization, coords))
                .state != EllipticState::elliptic)
          continue;
        const double radius =
            std::min(0.005, margin / (4.0 * static_cast<double>(max_l1)));
        DensityReport local = local_elliptic_density_solvable(
            *G.realization, G.adjoint_generators, coords, t, radius, 200,
            opts.seed ^ detail::kSaltLocalProbe, SamplerOptions{opts.scale, opts.workers});
        detail::require_no_undetermined(local, "local density");
        locals_ok = locals_ok && local.fraction == 1.0;
        local_evidence.push_back(json{{"margin", margin},
                                      {"radius", radius},
                                      {"fraction", local.fraction}});
        ++found;
      }
      locals_ok = locals_ok && found == 3;
    }
  }

  report.entries = cond.entries;
  const bool f_holds = density.fraction >= tol::density_threshold;
  report.entries.push_back({"f", f_holds, density.to_json()});
  report.entries.push_back({"g", f_holds && locals_ok, json{{"locals", local_evidence}}});

  bool all_equal = true;
  for (const ConditionEntry& c : report.entries)
    all_equal = all_equal && (c.holds == report.entries.front().holds);
  if (!all_equal)
    throw Error(ErrorCode::equivalence_violation,
                "the seven equivalent conditions disagree", report.to_json());
  report.value = report.entries.front().holds;
  return report;
}

// ---------------------------------------------------------------------------
// Permanence: G almost-elliptic iff G/L and L x| K both are
// ---------------------------------------------------------------------------

struct PermanenceReport {
  DecisionReport full;
  DecisionReport quotient;
  DecisionReport vector_layer;
  bool consistent = false;

  json to_json() const {
    return json{{"full", full.to_json()},
                {"quotient", quotient.to_json()},
                {"vector_layer", vector_layer.to_json()},
                {"consistent", consistent}};
  }
};

// layer_index picks a term D^(j) of the derived series of the solvable part
// (the whole algebra for solvable_by_compact, the radical for general); the
// term must be abelian so it is a vector subgroup.  Decides all three groups
// and asserts the permanence equivalence.
inline PermanenceReport permanence_check(const GroupPresentation& G, int layer_index,
                                         const DecisionOptions& opts = {}) {
  if (G.kind == GroupKind::vector_by_compact)
    throw Error(ErrorCode::invalid_argument,
                "permanence applies to solvable_by_compact or general presentations");
  if (!G.algebra) throw Error(ErrorCode::invalid_argument, "missing algebra");
  if (!G.layer_compact.empty())
    throw Error(ErrorCode::invalid_argument,
                "permanence with declared compact directions is not supported");
  const LieAlgebra& L = *G.algebra;
  const int n = L.dim();
  require_derivations(L, G.adjoint_generators);

  // Ambient basis of the chosen derived term.
  Matrix term_basis;
  if (G.kind == GroupKind::solvable_by_compact) {
    DerivedSeries series = derived_series(L);
    if (layer_index < 0 || layer_index >= static_cast<int>(series.terms.size()))
      throw Error(ErrorCode::invalid_argument, "derived series has no such term");
    term_basis = series.terms[layer_index].basis;
  } else {
    Subspace rad = G.declared_radical ? detail::verified_radical(L, *G.declared_radical)
                                      : radical(L);
    rad.basis = detail::orthonormalized(rad.basis, "radical basis");
    SubAlgebra sub = restrict_to_subalgebra(L, rad);
    DerivedSeries series = derived_series(sub.algebra);
    if (layer_index < 0 || layer_index >= static_cast<int>(series.terms.size()))
      throw Error(ErrorCode::invalid_argument, "derived series has no such term");
    term_basis = sub.basis * series.terms[layer_index].basis;
  }
  Matrix B = term_basis.cols() > 0 ? detail::orthonormalized(term_basis, "vector layer")
                                   : Matrix(n, 0);
  const int d = static_cast<int>(B.cols());

  // The term must be an abelian ideal: a vector subgroup of the group.
  Subspace Lsub{n, B};
  if (!is_ideal(L, Lsub))
    throw Error(ErrorCode::invalid_argument, "chosen term is not an ideal",
                json{{"residual", ideal_residual(L, Lsub)}});
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      const double norm = L.bracket(B.col(a), B.col(b)).norm();
      if (norm > tol::rank_band * tol::structure * std::max(1.0, L.tensor_scale()))
        throw Error(ErrorCode::invalid_argument, "chosen term is not abelian",
                    json{{"bracket_norm", norm}});
    }

  // Both the induced quotient action and the restriction need the torus to
  // preserve the chosen term; check before using either.
  for (const Matrix& D : G.adjoint_generators)
    for (int j = 0; j < d; ++j) {
      const double dist = Lsub.distance(Vector(D * B.col(j)));
      if (dist > tol::rank_band * tol::automorphism)
        throw Error(ErrorCode::invalid_argument,
                    "adjoint generator does not preserve the chosen term",
                    json{{"distance", dist}});
    }

  PermanenceReport out;
  out.full = decide(G, opts);

  // G / L: quotient algebra with the induced torus action.
  QuotientAlgebra q = quotient_algebra(L, Lsub);
  GroupPresentation quotient_pres;
  quotient_pres.kind = G.kind;
  quotient_pres.algebra = q.algebra;
  for (const Matrix& D : G.adjoint_generators)
    quotient_pres.adjoint_generators.push_back(q.lift.transpose() * D * q.lift);
  out.quotient = decide(quotient_pres, opts);

  // L x| K: the torus action restricted to the vector layer.
  std::vector<Matrix> restricted;
  for (const Matrix& D : G.adjoint_generators)
    restricted.push_back(B.transpose() * D * B);
  OrthogonalizedRep layer_rep = orthogonalize_generators(
      static_cast<int>(restricted.size()), d, restricted);
  GroupPresentation vector_pres;
  vector_pres.kind = GroupKind::vector_by_compact;
  vector_pres.compact = CompactPart::create(layer_rep.rep, {});
  out.vector_layer = decide(vector_pres, opts);

  out.consistent = out.full.openly_almost_elliptic ==
                   (out.quotient.openly_almost_elliptic &&
                    out.vector_layer.openly_almost_elliptic);
  if (!out.consistent)
    throw Error(ErrorCode::equivalence_violation,
                "permanence equivalence fails across the three decisions",
                out.to_json());
  return out;
}

}  // namespace almell
