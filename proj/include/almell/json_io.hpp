#pragma once

// On-disk schemas.  Every loader threads a field path through its checked
// accessors so a schema violation names the offending field ("group.compact.
// generators[1]") instead of failing somewhere inside Eigen.  Serializers
// write the same schemas back; loading a serialized object reproduces it.
//
// Matrices are nested row arrays (row-major).  Subspace bases (declared
// radicals, compact directions) are lists of basis vectors.  Structure
// constants are sparse [i, j, k, value] triples where value is a number or
// an exact "p/q" string; the antisymmetric partner is filled in on load.

#include <fstream>
#include <sstream>

#include "almell/decision.hpp"

namespace almell {

// ---------------------------------------------------------------------------
// Checked field access
// ---------------------------------------------------------------------------

namespace detail {

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::schema_error, what + " at " + path, json{{"field", path}});
}

inline const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) schema_fail(path + "." + key, "missing field");
  return *it;
}

inline const json* field_opt(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() || it->is_null() ? nullptr : &*it;
}

inline long take_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_fail(path, "expected an integer");
  return j.get<long>();
}

inline double take_number(const json& j, const std::string& path) {
  if (!j.is_number()) schema_fail(path, "expected a number");
  return j.get<double>();
}

inline std::string take_string(const json& j, const std::string& path) {
  if (!j.is_string()) schema_fail(path, "expected a string");
  return j.get<std::string>();
}

inline const json& take_array(const json& j, const std::string& path) {
  if (!j.is_array()) schema_fail(path, "expected an array");
  return j;
}

inline Vector take_vector(const json& j, long len, const std::string& path) {
  take_array(j, path);
  if (len >= 0 && static_cast<long>(j.size()) != len)
    schema_fail(path, "expected " + std::to_string(len) + " entries");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Eigen::Index>(i)) =
        take_number(j[i], path + "[" + std::to_string(i) + "]");
  return v;
}

// rows x cols nested arrays; either dimension may be -1 to accept any size.
inline Matrix take_matrix(const json& j, long rows, long cols, const std::string& path) {
  take_array(j, path);
  if (rows >= 0 && static_cast<long>(j.size()) != rows)
    schema_fail(path, "expected " + std::to_string(rows) + " rows");
  const long r = static_cast<long>(j.size());
  long c = cols;
  if (c < 0) c = r > 0 ? static_cast<long>(take_array(j[0], path + "[0]").size()) : 0;
  Matrix m(r, c);
  for (long i = 0; i < r; ++i)
    m.row(i) = take_vector(j[i], c, path + "[" + std::to_string(i) + "]").transpose();
  return m;
}

// List of basis vectors -> ambient x count matrix of columns.
inline Matrix take_basis(const json& j, long ambient, const std::string& path) {
  take_array(j, path);
  Matrix m(ambient, static_cast<long>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    m.col(static_cast<Eigen::Index>(i)) =
        take_vector(j[i], ambient, path + "[" + std::to_string(i) + "]");
  return m;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loaders
// ---------------------------------------------------------------------------

inline LieAlgebra load_lie_algebra(const json& j, const std::string& path = "algebra") {
  using detail::field;
  const int n = static_cast<int>(detail::take_int(field(j, "dim", path), path + ".dim"));
  if (n < 0) detail::schema_fail(path + ".dim", "dimension must be non-negative");
  std::vector<SparseEntry> entries;
  if (const json* c = detail::field_opt(j, "c")) {
    detail::take_array(*c, path + ".c");
    for (std::size_t idx = 0; idx < c->size(); ++idx) {
      const std::string epath = path + ".c[" + std::to_string(idx) + "]";
      const json& t = (*c)[idx];
      if (!t.is_array() || t.size() != 4)
        detail::schema_fail(epath, "expected an [i, j, k, value] quadruple");
      SparseEntry e;
      e.i = static_cast<int>(detail::take_int(t[0], epath + "[0]"));
      e.j = static_cast<int>(detail::take_int(t[1], epath + "[1]"));
      e.k = static_cast<int>(detail::take_int(t[2], epath + "[2]"));
      if (t[3].is_string()) {
        try {
          e.exact_value = exact::Rational(t[3].get<std::string>());
        } catch (const std::exception&) {
          detail::schema_fail(epath + "[3]", "expected a \"p/q\" rational string");
        }
        e.value = static_cast<double>(*e.exact_value);
      } else {
        e.value = detail::take_number(t[3], epath + "[3]");
        if (e.value == std::round(e.value))
          e.exact_value = exact::Rational(static_cast<long>(e.value));
      }
      entries.push_back(std::move(e));
    }
  }
  std::vector<std::string> labels;
  if (const json* l = detail::field_opt(j, "labels")) {
    detail::take_array(*l, path + ".labels");
    for (std::size_t i = 0; i < l->size(); ++i)
      labels.push_back(
          detail::take_string((*l)[i], path + ".labels[" + std::to_string(i) + "]"));
  }
  return LieAlgebra::from_sparse(n, entries, std::move(labels));
}

inline TorusRep load_torus_rep(const json& j, const std::string& path = "torus_rep") {
  using detail::field;
  const int rank =
      static_cast<int>(detail::take_int(field(j, "rank", path), path + ".rank"));
  const int dim = static_cast<int>(detail::take_int(field(j, "dim", path), path + ".dim"));
  const json& gens = detail::take_array(field(j, "generators", path), path + ".generators");
  if (static_cast<int>(gens.size()) != rank)
    detail::schema_fail(path + ".generators", "expected one generator per circle");
  std::vector<Matrix> generators;
  for (int i = 0; i < rank; ++i)
    generators.push_back(detail::take_matrix(
        gens[i], dim, dim, path + ".generators[" + std::to_string(i) + "]"));
  return TorusRep::create(rank, dim, std::move(generators));
}

inline CompactPart load_compact_part(const json& j, const std::string& path = "compact") {
  TorusRep torus = load_torus_rep(j, path);
  std::vector<Matrix> components;
  if (const json* c = detail::field_opt(j, "components")) {
    detail::take_array(*c, path + ".components");
    for (std::size_t i = 0; i < c->size(); ++i)
      components.push_back(detail::take_matrix(
          (*c)[i], torus.dim, torus.dim, path + ".components[" + std::to_string(i) + "]"));
  }
  return CompactPart::create(std::move(torus), std::move(components));
}

inline SolvablePresentation load_solvable(const json& j,
                                          const std::string& path = "solvable") {
  using detail::field;
  LieAlgebra algebra = load_lie_algebra(field(j, "algebra", path), path + ".algebra");
  const int n = algebra.dim();
  const int d = static_cast<int>(
      detail::take_int(field(j, "realization_dim", path), path + ".realization_dim"));
  const json& real = detail::take_array(field(j, "realization", path), path + ".realization");
  if (static_cast<int>(real.size()) != n)
    detail::schema_fail(path + ".realization", "expected one matrix per basis vector");
  std::vector<Matrix> realization;
  for (int i = 0; i < n; ++i)
    realization.push_back(detail::take_matrix(
        real[i], d, d, path + ".realization[" + std::to_string(i) + "]"));
  std::vector<int> adapted;
  const json& order = detail::take_array(field(j, "adapted_order", path),
                                         path + ".adapted_order");
  for (std::size_t i = 0; i < order.size(); ++i)
    adapted.push_back(static_cast<int>(detail::take_int(
        order[i], path + ".adapted_order[" + std::to_string(i) + "]")));
  return SolvablePresentation::create(std::move(algebra), d, std::move(realization),
                                      std::move(adapted));
}

inline GroupPresentation load_group(const json& j, const std::string& path = "group") {
  using detail::field;
  GroupPresentation G;
  const std::string kind = detail::take_string(field(j, "kind", path), path + ".kind");
  if (kind == "vector_by_compact")
    G.kind = GroupKind::vector_by_compact;
  else if (kind == "solvable_by_compact")
    G.kind = GroupKind::solvable_by_compact;
  else if (kind == "general")
    G.kind = GroupKind::general;
  else
    detail::schema_fail(path + ".kind", "unknown kind \"" + kind + "\"");

  if (G.kind == GroupKind::vector_by_compact) {
    G.compact = load_compact_part(field(j, "compact", path), path + ".compact");
    return G;
  }

  G.algebra = load_lie_algebra(field(j, "algebra", path), path + ".algebra");
  const int n = G.algebra->dim();
  if (const json* gens = detail::field_opt(j, "adjoint_generators")) {
    detail::take_array(*gens, path + ".adjoint_generators");
    for (std::size_t i = 0; i < gens->size(); ++i)
      G.adjoint_generators.push_back(detail::take_matrix(
          (*gens)[i], n, n, path + ".adjoint_generators[" + std::to_string(i) + "]"));
  }
  if (const json* real = detail::field_opt(j, "realization"))
    G.realization = load_solvable(*real, path + ".realization");
  if (const json* rad = detail::field_opt(j, "declared_radical"))
    G.declared_radical = detail::take_basis(*rad, n, path + ".declared_radical");
  if (const json* lc = detail::field_opt(j, "layer_compact")) {
    if (!lc->is_object()) detail::schema_fail(path + ".layer_compact", "expected an object");
    for (const auto& [key, value] : lc->items()) {
      int layer = 0;
      try {
        layer = std::stoi(key);
      } catch (const std::exception&) {
        detail::schema_fail(path + ".layer_compact." + key, "expected an integer key");
      }
      G.layer_compact[layer] =
          detail::take_basis(value, n, path + ".layer_compact." + key);
    }
  }
  return G;
}

struct DeltaProblem {
  SolvablePresentation solvable;
  AlgebraAutomorphism phi;
  Vector target;  // target element in adapted second-kind coordinates
};

inline DeltaProblem load_delta_problem(const json& j,
                                       const std::string& path = "delta_problem") {
  using detail::field;
  DeltaProblem problem;
  problem.solvable = load_solvable(field(j, "solvable", path), path + ".solvable");
  const int n = problem.solvable.dim();
  const json* phi = detail::field_opt(j, "phi");
  const json* derivations = detail::field_opt(j, "derivations");
  if (phi && derivations)
    detail::schema_fail(path, "give either phi or derivations, not both");
  if (phi) {
    problem.phi.phi = detail::take_matrix(*phi, n, n, path + ".phi");
  } else if (derivations) {
    detail::take_array(*derivations, path + ".derivations");
    Vector t = detail::take_vector(field(j, "t", path),
                                   static_cast<long>(derivations->size()), path + ".t");
    Matrix D = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < derivations->size(); ++i)
      D += kTwoPi * t(static_cast<Eigen::Index>(i)) *
           detail::take_matrix((*derivations)[i], n, n,
                               path + ".derivations[" + std::to_string(i) + "]");
    problem.phi.phi = D.exp();
  } else {
    detail::schema_fail(path, "missing automorphism: give phi or derivations");
  }
  problem.target = detail::take_vector(field(j, "target", path), n, path + ".target");
  return problem;
}

struct PowerFamily {
  std::vector<CMatrix> members;
  std::vector<std::string> names;  // optional, parallel to members
};

inline PowerFamily load_power_family(const json& j,
                                     const std::string& path = "power_family") {
  using detail::field;
  PowerFamily family;
  const json& members = detail::take_array(field(j, "members", path), path + ".members");
  for (std::size_t i = 0; i < members.size(); ++i) {
    const std::string mpath = path + ".members[" + std::to_string(i) + "]";
    const json& m = members[i];
    Matrix re, im;
    std::string name;
    if (m.is_object()) {
      re = detail::take_matrix(field(m, "re", mpath), -1, -1, mpath + ".re");
      if (const json* imj = detail::field_opt(m, "im"))
        im = detail::take_matrix(*imj, re.rows(), re.cols(), mpath + ".im");
      else
        im = Matrix::Zero(re.rows(), re.cols());
      if (const json* namej = detail::field_opt(m, "name"))
        name = detail::take_string(*namej, mpath + ".name");
    } else {
      re = detail::take_matrix(m, -1, -1, mpath);
      im = Matrix::Zero(re.rows(), re.cols());
    }
    if (re.rows() != re.cols()) detail::schema_fail(mpath, "expected a square matrix");
    family.members.push_back(re.cast<Complex>() + Complex(0, 1) * im.cast<Complex>());
    family.names.push_back(name.empty() ? "member_" + std::to_string(i) : name);
  }
  return family;
}

// Top-level dispatcher keyed by the "type" field.
struct InputDocument {
  std::string type;
  std::optional<LieAlgebra> algebra;
  std::optional<CompactPart> compact;  // torus_rep documents land here too
  std::optional<SolvablePresentation> solvable;
  std::optional<GroupPresentation> group;
  std::optional<DeltaProblem> delta;
  std::optional<PowerFamily> powers;
};

inline InputDocument load_input(const json& j) {
  InputDocument doc;
  doc.type = detail::take_string(detail::field(j, "type", "input"), "input.type");
  if (doc.type == "lie_algebra")
    doc.algebra = load_lie_algebra(j, "lie_algebra");
  else if (doc.type == "torus_rep")
    doc.compact = load_compact_part(j, "torus_rep");
  else if (doc.type == "solvable")
    doc.solvable = load_solvable(j, "solvable");
  else if (doc.type == "group")
    doc.group = load_group(j, "group");
  else if (doc.type == "delta_problem")
    doc.delta = load_delta_problem(j, "delta_problem");
  else if (doc.type == "power_family")
    doc.powers = load_power_family(j, "power_family");
  else
    detail::schema_fail("input.type", "unknown document type \"" + doc.type + "\"");
  return doc;
}

inline json read_json_file(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in)
    throw Error(ErrorCode::io_error, "cannot open " + file_path,
                json{{"path", file_path}});
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::schema_error, std::string("JSON parse error: ") + e.what(),
                json{{"path", file_path}, {"byte", e.byte}});
  }
}

inline InputDocument load_input_file(const std::string& file_path) {
  return load_input(read_json_file(file_path));
}

// ---------------------------------------------------------------------------
// Serializers (inverse of the loaders)
// ---------------------------------------------------------------------------

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json basis_to_json(const Matrix& m) {
  json cols = json::array();
  for (Eigen::Index j = 0; j < m.cols(); ++j) cols.push_back(vector_to_json(m.col(j)));
  return cols;
}

inline json lie_algebra_to_json(const LieAlgebra& L) {
  const int n = L.dim();
  json triples = json::array();
  // Store i < j only; antisymmetric completion restores the rest on load.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        if (L.c(i, j, k) == 0.0) continue;
        json value;
        if (L.has_exact()) {
          std::ostringstream os;
          os << (*L.exact_tensor())[i].at(j, k);
          value = os.str();
        } else {
          value = L.c(i, j, k);
        }
        triples.push_back(json::array({i, j, k, std::move(value)}));
      }
  json out{{"type", "lie_algebra"}, {"dim", n}, {"c", std::move(triples)}};
  if (!L.labels().empty()) out["labels"] = L.labels();
  return out;
}

inline json torus_rep_to_json(const TorusRep& R) {
  json gens = json::array();
  for (const Matrix& A : R.generators) gens.push_back(matrix_to_json(A));
  return json{{"type", "torus_rep"},
              {"rank", R.rank},
              {"dim", R.dim},
              {"generators", std::move(gens)}};
}

inline json compact_part_to_json(const CompactPart& K) {
  json out = torus_rep_to_json(K.torus);
  if (!K.components.empty()) {
    json comps = json::array();
    for (const Matrix& g : K.components) comps.push_back(matrix_to_json(g));
    out["components"] = std::move(comps);
  }
  return out;
}

inline json solvable_to_json(const SolvablePresentation& P) {
  json real = json::array();
  for (const Matrix& M : P.realization()) real.push_back(matrix_to_json(M));
  json alg = lie_algebra_to_json(P.algebra());
  alg.erase("type");
  return json{{"type", "solvable"},
              {"algebra", std::move(alg)},
              {"realization_dim", P.mat_dim()},
              {"realization", std::move(real)},
              {"adapted_order", P.adapted_order()}};
}

inline json group_to_json(const GroupPresentation& G) {
  json out{{"type", "group"}, {"kind", group_kind_name(G.kind)}};
  if (G.kind == GroupKind::vector_by_compact) {
    json compact = compact_part_to_json(*G.compact);
    compact.erase("type");
    out["compact"] = std::move(compact);
    return out;
  }
  json alg = lie_algebra_to_json(*G.algebra);
  alg.erase("type");
  out["algebra"] = std::move(alg);
  if (!G.adjoint_generators.empty()) {
    json gens = json::array();
    for (const Matrix& D : G.adjoint_generators) gens.push_back(matrix_to_json(D));
    out["adjoint_generators"] = std::move(gens);
  }
  if (G.realization) {
    json real = solvable_to_json(*G.realization);
    real.erase("type");
    out["realization"] = std::move(real);
  }
  if (G.declared_radical) out["declared_radical"] = basis_to_json(*G.declared_radical);
  if (!G.layer_compact.empty()) {
    json lc = json::object();
    for (const auto& [layer, cols] : G.layer_compact)
      lc[std::to_string(layer)] = basis_to_json(cols);
    out["layer_compact"] = std::move(lc);
  }
  return out;
}

}  // namespace almell
