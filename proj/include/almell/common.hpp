#pragma once

// Shared numeric policies and error taxonomy for the almell library.
//
// Every tolerance used by the library is named here once; modules refer to
// these constants instead of scattering literals.  Rank decisions go through
// checked_rank(), which refuses to answer when the singular spectrum has no
// clear gap at the cutoff (a factor-10 ambiguity band), so downstream results
// never silently depend on a coin-flip rank.

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace almell {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using json = nlohmann::json;
using Complex = std::complex<double>;

namespace tol {
// Structure-constant identities (antisymmetry, Jacobi).
inline constexpr double structure = 1e-10;
// Relative cutoff for rank decisions: sigma < rank_rel * sigma_max is zero.
inline constexpr double rank_rel = 1e-8;
// Width of the forbidden band around a rank cutoff (factor each side).
inline constexpr double rank_band = 10.0;
// Residual for "this map is a Lie-algebra homomorphism" checks.
inline constexpr double homomorphism = 1e-9;
// Residual for automorphism / derivation property checks.
inline constexpr double automorphism = 1e-8;
// Ideal-membership residual in quotient construction.
inline constexpr double ideal = 1e-9;
// Commutation and skewness of torus generators.
inline constexpr double torus_generator = 1e-10;
// Distance of generator eigenvalues / weight candidates from integers.
inline constexpr double weight_integral = 1e-6;
// Invertibility margin: smallest singular value of rho(t)-1, 1-phi, ...
inline constexpr double invertibility = 1e-8;
// Group-level matrix residuals (cached element matrices, delta_solve).
inline constexpr double group_residual = 1e-9;
// Newton convergence target inside coordinate solvers.
inline constexpr double newton = 1e-12;
// Relative residual for solvability of (rho(s)-1)x = v in the abelian case.
inline constexpr double elliptic_solve = 1e-8;
// Default unit-modulus tolerance for spectral ellipticity.
inline constexpr double spectral = 1e-6;
// Eigenvalue clustering radius when testing diagonalizability.
inline constexpr double eigen_cluster = 1e-6;
// Witness-verification residual for conjugation into the compact factor.
inline constexpr double witness = 1e-8;
// Killing-form negativity margin for compact type.
inline constexpr double compact_type = 1e-8;
// Monte Carlo density threshold standing in for "full measure".
inline constexpr double density_threshold = 0.999;
// Determinant floor below which a matrix is treated as singular input.
inline constexpr double determinant = 1e-12;
}  // namespace tol

// Schema/tolerance identifiers embedded in every serialized report so a
// report is interpretable without the producing binary.
inline constexpr const char* kSchemaVersion = "almell-report/1";

enum class ErrorCode {
  malformed_input,
  dimension_mismatch,
  numerical_rank_ambiguity,
  not_an_ideal,
  not_semisimple,
  non_integral_generator,
  weight_rounding_ambiguity,
  internal_disagreement,
  recoordinatization_failure,
  not_invertible,
  no_convergence,
  spectral_ambiguity,
  no_witness,
  disconnected_compact_part,
  equivalence_violation,
  undeclared_compact_directions,
  invalid_argument,
  schema_error,
  io_error,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::malformed_input: return "MalformedInput";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::numerical_rank_ambiguity: return "NumericalRankAmbiguity";
    case ErrorCode::not_an_ideal: return "NotAnIdeal";
    case ErrorCode::not_semisimple: return "NotSemisimple";
    case ErrorCode::non_integral_generator: return "NonIntegralGenerator";
    case ErrorCode::weight_rounding_ambiguity: return "WeightRoundingAmbiguity";
    case ErrorCode::internal_disagreement: return "InternalDisagreement";
    case ErrorCode::recoordinatization_failure: return "RecoordinatizationFailure";
    case ErrorCode::not_invertible: return "NotInvertible";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::spectral_ambiguity: return "SpectralAmbiguity";
    case ErrorCode::no_witness: return "NoWitness";
    case ErrorCode::disconnected_compact_part: return "DisconnectedCompactPart";
    case ErrorCode::equivalence_violation: return "EquivalenceViolation";
    case ErrorCode::undeclared_compact_directions: return "UndeclaredCompactDirections";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::schema_error: return "SchemaError";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

// Library-wide exception.  `details` carries machine-readable context
// (residuals, offending indices) that the CLI forwards into error reports.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, json details = json::object())
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        m_code(code),
        m_details(std::move(details)) {}

  ErrorCode code() const { return m_code; }
  const json& details() const { return m_details; }

 private:
  ErrorCode m_code;
  json m_details;
};

// Outcome of validating an object against its invariants: named residuals
// plus the pass/fail verdict.  accepted == all residuals within tolerance.
struct ValidationReport {
  bool accepted = true;
  std::vector<std::pair<std::string, double>> residuals;
  std::vector<std::string> failures;

  void record(const std::string& name, double residual, double tolerance) {
    residuals.emplace_back(name, residual);
    if (!(residual <= tolerance)) {
      accepted = false;
      failures.push_back(name);
    }
  }

  json to_json() const {
    json r = json::object();
    for (const auto& [k, v] : residuals) r[k] = v;
    return json{{"accepted", accepted}, {"residuals", r}, {"failures", failures}};
  }
};

// ---------------------------------------------------------------------------
// Rank and subspace helpers
// ---------------------------------------------------------------------------

// Decide the numerical rank of a singular-value list with cutoff
// rank_rel * max(sigma_max, scale).  `scale` anchors the cutoff when the
// matrix may be legitimately zero (e.g. brackets of an abelian subalgebra):
// without it, a matrix of pure round-off noise would look full-rank.  If any
// singular value falls inside the ambiguity band
// (cutoff/rank_band, cutoff*rank_band), the decision is refused.
inline int checked_rank(const Vector& singular_values, const std::string& context,
                        double scale = 0.0) {
  if (singular_values.size() == 0) return 0;
  const double smax = std::max(singular_values.maxCoeff(), scale);
  if (smax <= 0.0) return 0;
  const double cutoff = tol::rank_rel * smax;
  int rank = 0;
  for (int i = 0; i < singular_values.size(); ++i) {
    const double s = singular_values(i);
    if (s > cutoff / tol::rank_band && s < cutoff * tol::rank_band) {
      throw Error(ErrorCode::numerical_rank_ambiguity,
                  context + ": singular value " + std::to_string(s) +
                      " lies in the ambiguity band around cutoff " + std::to_string(cutoff),
                  json{{"sigma", s}, {"cutoff", cutoff}, {"context", context}});
    }
    if (s >= cutoff) ++rank;
  }
  return rank;
}

inline Vector singular_values(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return Vector(0);
  return m.jacobiSvd().singularValues();
}

inline double smallest_singular_value(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return std::numeric_limits<double>::infinity();
  Vector sv = singular_values(m);
  return sv(sv.size() - 1);
}

inline double operator_norm(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

inline double operator_norm(const CMatrix& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

// Orthonormal basis of the column span of m, rank decided by checked_rank.
inline Matrix column_space(const Matrix& m, const std::string& context, double scale = 0.0) {
  if (m.cols() == 0 || m.rows() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  int rank = checked_rank(svd.singularValues(), context, scale);
  return svd.matrixU().leftCols(rank);
}

// Orthonormal basis of the (right) kernel of m.
inline Matrix kernel_space(const Matrix& m, const std::string& context, double scale = 0.0) {
  if (m.cols() == 0) return Matrix(0, 0);
  if (m.rows() == 0) return Matrix::Identity(m.cols(), m.cols());
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  int rank = checked_rank(svd.singularValues(), context, scale);
  return svd.matrixV().rightCols(m.cols() - rank);
}

// Minimum-norm least-squares solution of m x = b.  Singular directions below
// the checked_rank cutoff are discarded, never inverted: Eigen's default
// solve threshold keeps epsilon-level singular values of an exactly singular
// matrix, which would "reach" unreachable right-hand sides through roundoff.
inline Vector least_squares_solve(const Matrix& m, const Vector& b, const std::string& context,
                                  double scale = 0.0) {
  if (m.rows() != b.size())
    throw Error(ErrorCode::dimension_mismatch, "least-squares shapes disagree");
  Vector x = Vector::Zero(m.cols());
  if (m.rows() == 0 || m.cols() == 0) return x;
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  const int rank = checked_rank(sv, context, scale);
  if (rank > 0) {
    const Vector y = svd.matrixU().transpose() * b;
    x = svd.matrixV().leftCols(rank) *
        (y.head(rank).array() / sv.head(rank).array()).matrix();
  }
  return x;
}

// Orthonormal basis of the orthogonal complement of span(basis) in R^n.
// basis need not be orthonormal; it must have full column rank.
inline Matrix orthogonal_complement(const Matrix& basis, int ambient_dim) {
  if (basis.cols() == 0) return Matrix::Identity(ambient_dim, ambient_dim);
  Eigen::JacobiSVD<Matrix> svd(basis.transpose(), Eigen::ComputeFullV);
  int rank = checked_rank(svd.singularValues(), "orthogonal_complement");
  return svd.matrixV().rightCols(ambient_dim - rank);
}

// Distance from v to span(basis) -- the residual of the best projection.
inline double span_distance(const Matrix& basis, const Vector& v) {
  if (basis.cols() == 0) return v.norm();
  Vector coeffs = basis.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(v);
  return (basis * coeffs - v).norm();
}

// ---------------------------------------------------------------------------
// Binomial confidence interval
// ---------------------------------------------------------------------------

// Wilson score interval at 95% (z = 1.959964).
inline std::pair<double, double> wilson_interval(long successes, long n) {
  if (n <= 0) return {0.0, 1.0};
  const double z = 1.959963984540054;
  const double z2 = z * z;
  const double p = static_cast<double>(successes) / static_cast<double>(n);
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  double lo = center - half, hi = center + half;
  // The exact bounds at the extremes are 0 and 1; clamp round-off.
  if (lo < 0.0 || successes == 0) lo = 0.0;
  if (hi > 1.0 || successes == n) hi = 1.0;
  return {lo, hi};
}

// Common result type for Monte Carlo density estimates.
struct DensityReport {
  double fraction = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 1.0;
  long n = 0;
  long undetermined = 0;
  std::uint64_t seed = 0;
  json sampler = json::object();

  json to_json() const {
    return json{{"fraction", fraction}, {"ci95", {ci_lo, ci_hi}}, {"n", n},
                {"undetermined", undetermined}, {"seed", seed}, {"sampler", sampler}};
  }
};

// Report footer shared by all serialized reports: schema version plus the
// tolerance constants that were in force.
inline json report_header() {
  return json{{"schema", kSchemaVersion},
              {"tolerances",
               json{{"structure", tol::structure},
                    {"rank_rel", tol::rank_rel},
                    {"homomorphism", tol::homomorphism},
                    {"automorphism", tol::automorphism},
                    {"invertibility", tol::invertibility},
                    {"group_residual", tol::group_residual},
                    {"elliptic_solve", tol::elliptic_solve},
                    {"spectral", tol::spectral},
                    {"witness", tol::witness},
                    {"density_threshold", tol::density_threshold}}}};
}

}  // namespace almell
