// Decision procedures: the independent characterizations must agree with
// each other and with hand-derived verdicts.  Verdicts for the fixed
// examples are frozen from the weight multisets worked out on paper:
// a rotation plane carries weights {+1, -1}; a fixed line carries 0; the
// Heisenberg center is fixed by any rotation of the plane, whereas the
// complexified Heisenberg algebra with speeds (1, 1, 2) has no fixed
// direction at all.

#include <catch2/catch_amalgamated.hpp>

#include "almell/decision.hpp"

using namespace almell;

namespace {

Matrix embed_top_left(const Matrix& A, int n) {
  Matrix m = Matrix::Zero(n, n);
  m.topLeftCorner(A.rows(), A.cols()) = A;
  return m;
}

TorusRep speed_rep(const std::vector<double>& speeds, int extra_fixed = 0) {
  const int n = 2 * static_cast<int>(speeds.size()) + extra_fixed;
  Matrix A = Matrix::Zero(n, n);
  for (std::size_t b = 0; b < speeds.size(); ++b) {
    A(2 * b, 2 * b + 1) = -speeds[b];
    A(2 * b + 1, 2 * b) = speeds[b];
  }
  return TorusRep::create(1, n, {A});
}

GroupPresentation vector_presentation(TorusRep rep) {
  GroupPresentation G;
  G.kind = GroupKind::vector_by_compact;
  G.compact = CompactPart::create(std::move(rep), {});
  return G;
}

// Rotation of the x-y plane fixing the center: a derivation of the
// Heisenberg algebra with a zero weight on the center.
Matrix heis_rot_derivation() {
  Matrix D = Matrix::Zero(3, 3);
  D(1, 0) = 1.0;
  D(0, 1) = -1.0;
  return D;
}

// 2x2 real block standing for the complex scalar re + i*im, placed at block
// position (bi, bj) of a 3x3 complex matrix realized over R^6.
Matrix cstep(int bi, int bj, double re, double im) {
  Matrix m = Matrix::Zero(6, 6);
  m(2 * bi, 2 * bj) = re;
  m(2 * bi, 2 * bj + 1) = -im;
  m(2 * bi + 1, 2 * bj) = im;
  m(2 * bi + 1, 2 * bj + 1) = re;
  return m;
}

// Complex Heisenberg algebra with real basis (X, iX, Y, iY, Z, iZ) and
// [X, Y] = Z over C.
LieAlgebra complex_heisenberg() {
  return LieAlgebra::from_sparse(6,
                                 {{0, 2, 4, 1.0, exact::Rational(1)},
                                  {0, 3, 5, 1.0, exact::Rational(1)},
                                  {1, 2, 5, 1.0, exact::Rational(1)},
                                  {1, 3, 4, -1.0, exact::Rational(-1)}},
                                 {"x1", "x2", "y1", "y2", "z1", "z2"});
}

SolvablePresentation complex_heisenberg_presentation() {
  std::vector<Matrix> gens = {cstep(0, 1, 1, 0), cstep(0, 1, 0, 1),
                              cstep(1, 2, 1, 0), cstep(1, 2, 0, 1),
                              cstep(0, 2, 1, 0), cstep(0, 2, 0, 1)};
  return SolvablePresentation::create(complex_heisenberg(), 6, std::move(gens),
                                      {0, 1, 2, 3, 4, 5});
}

// Multiplication by i with speeds (1, 1, 2): every weight is nonzero.
Matrix complex_heis_derivation() {
  Matrix D = Matrix::Zero(6, 6);
  auto rot = [&](int block, double speed) {
    D(2 * block, 2 * block + 1) = -speed;
    D(2 * block + 1, 2 * block) = speed;
  };
  rot(0, 1.0);
  rot(1, 1.0);
  rot(2, 2.0);
  return D;
}

GroupPresentation heis_rot_presentation() {
  GroupPresentation G;
  G.kind = GroupKind::solvable_by_compact;
  G.algebra = algebras::heisenberg();
  G.adjoint_generators = {heis_rot_derivation()};
  G.realization = presentations::heisenberg();
  return G;
}

GroupPresentation complex_heis_presentation() {
  GroupPresentation G;
  G.kind = GroupKind::solvable_by_compact;
  G.algebra = complex_heisenberg();
  G.adjoint_generators = {complex_heis_derivation()};
  G.realization = complex_heisenberg_presentation();
  return G;
}

// su(2) + R^2 with the torus rotating the abelian ideal: compact semisimple
// quotient, trivial-weight-free radical.
GroupPresentation mixed_general_presentation() {
  GroupPresentation G;
  G.kind = GroupKind::general;
  G.algebra = algebras::direct_sum(algebras::su2(), algebras::abelian(2));
  Matrix D = Matrix::Zero(5, 5);
  D(4, 3) = 1.0;
  D(3, 4) = -1.0;
  G.adjoint_generators = {D};
  return G;
}

DecisionOptions test_options(long n_samples = 1000) {
  DecisionOptions opts;
  opts.seed = 0;
  opts.n_samples = n_samples;
  return opts;
}

bool condition(const DecisionReport& r, const std::string& label) {
  for (const ConditionEntry& c : r.conditions)
    if (c.label == label) return c.holds;
  throw std::runtime_error("no such condition: " + label);
}

}  // namespace

TEST_CASE("vector-by-compact decisions", "[decision]") {
  SECTION("rotation plane is openly almost elliptic") {
    DecisionReport r = decide(vector_presentation(speed_rep({1.0})), test_options());
    CHECK(r.openly_almost_elliptic);
    for (const std::string label : {"a", "b", "c", "d", "e"}) CHECK(condition(r, label));
    REQUIRE(r.layers.size() == 1);
    CHECK(r.layers[0].dim == 2);
    CHECK(r.layers[0].nc_dim == 2);
    CHECK(r.layers[0].trivial_weight_free);
    REQUIRE(r.sampling.has_value());
    CHECK(r.sampling->fraction == 1.0);
    CHECK(r.sampling->undetermined == 0);
  }

  SECTION("fixed line forces every condition to fail") {
    DecisionReport r = decide(vector_presentation(speed_rep({1.0}, 1)), test_options());
    CHECK_FALSE(r.openly_almost_elliptic);
    for (const std::string label : {"a", "b", "c", "d", "e"})
      CHECK_FALSE(condition(r, label));
    REQUIRE(r.sampling.has_value());
    CHECK(r.sampling->fraction == 0.0);
  }

  SECTION("sampling can be disabled") {
    DecisionOptions opts = test_options();
    opts.sample = false;
    DecisionReport r = decide(vector_presentation(speed_rep({2.0, 3.0})), opts);
    CHECK(r.openly_almost_elliptic);
    CHECK_FALSE(r.sampling.has_value());
  }

  SECTION("trivial group is vacuously openly almost elliptic") {
    DecisionReport r = decide(vector_presentation(TorusRep::create(0, 0, {})),
                              test_options());
    CHECK(r.openly_almost_elliptic);
  }

  SECTION("disconnected compact parts are refused") {
    Matrix flip = Matrix::Identity(2, 2);
    flip(1, 1) = -1.0;
    GroupPresentation G;
    G.kind = GroupKind::vector_by_compact;
    G.compact = CompactPart::create(speed_rep({1.0}), {flip});
    try {
      decide(G, test_options());
      FAIL("expected a refusal");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::disconnected_compact_part);
    }
  }

  SECTION("reports serialize with a stable shape") {
    DecisionReport r = decide(vector_presentation(speed_rep({1.0})), test_options());
    json j = r.to_json();
    CHECK(j["verdict"] == "openly_almost_elliptic");
    CHECK(j["conditions"].size() == 5);
    CHECK(j["conditions"]["e"]["holds"] == true);
    CHECK(j["layers"].size() == 1);
    CHECK_FALSE(j["sampling"].is_null());
    CHECK(j["semisimple_compact"].is_null());
  }
}

TEST_CASE("decision determinism", "[decision]") {
  // Identical inputs and seeds give byte-identical reports, independent of
  // the worker count.
  GroupPresentation G = vector_presentation(speed_rep({1.0, 2.0}));
  DecisionOptions opts = test_options();
  std::string first = decide(G, opts).to_json().dump();
  std::string second = decide(G, opts).to_json().dump();
  CHECK(first == second);
  opts.workers = 4;
  CHECK(decide(G, opts).to_json().dump() == first);
}

TEST_CASE("solvable-by-compact decisions", "[decision]") {
  SECTION("Heisenberg with a plane rotation fails on the center") {
    DecisionReport r = decide(heis_rot_presentation(), test_options(300));
    CHECK_FALSE(r.openly_almost_elliptic);
    for (const std::string label : {"a", "b", "c", "d", "e"})
      CHECK_FALSE(condition(r, label));
    REQUIRE(r.layers.size() == 2);
    CHECK(r.layers[0].dim == 2);
    CHECK(r.layers[0].trivial_weight_free);  // the x-y plane spins freely
    CHECK(r.layers[1].dim == 1);
    CHECK_FALSE(r.layers[1].trivial_weight_free);  // the center is fixed
    REQUIRE(r.sampling.has_value());
    CHECK(r.sampling->fraction < tol::density_threshold);
    CHECK(r.sampling->undetermined == 0);
  }

  SECTION("complex Heisenberg with speeds (1,1,2) is openly almost elliptic") {
    DecisionReport r = decide(complex_heis_presentation(), test_options(300));
    CHECK(r.openly_almost_elliptic);
    REQUIRE(r.layers.size() == 2);
    CHECK(r.layers[0].dim == 4);
    CHECK(r.layers[1].dim == 2);
    CHECK(r.layers[0].trivial_weight_free);
    CHECK(r.layers[1].trivial_weight_free);
    REQUIRE(r.layers[1].weights.entries.size() == 2);
    CHECK(r.layers[1].weights.entries.front().weight == std::vector<long>{-2});
    REQUIRE(r.sampling.has_value());
    CHECK(r.sampling->fraction == 1.0);
    CHECK(r.sampling->undetermined == 0);
  }

  SECTION("a non-solvable algebra is rejected") {
    GroupPresentation G;
    G.kind = GroupKind::solvable_by_compact;
    G.algebra = algebras::su2();
    G.adjoint_generators = {};
    try {
      decide(G, test_options());
      FAIL("expected a rejection");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_argument);
    }
  }

  SECTION("a generator violating the derivation identity is rejected") {
    GroupPresentation G = heis_rot_presentation();
    // z -> x moves the bracket output while [Dx,y] + [x,Dy] stays zero.
    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 2) = 1.0;
    G.adjoint_generators = {bad};
    try {
      decide(G, test_options());
      FAIL("expected a rejection");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_argument);
    }
  }
}

TEST_CASE("general decisions", "[decision]") {
  SECTION("compact semisimple algebras pass vacuously") {
    GroupPresentation G;
    G.kind = GroupKind::general;
    G.algebra = algebras::su2();
    DecisionReport r = decide(G, test_options());
    CHECK(r.openly_almost_elliptic);
    REQUIRE(r.semisimple_compact.has_value());
    CHECK(*r.semisimple_compact);
    CHECK(r.layers.empty());
    CHECK(r.warnings.empty());
  }

  SECTION("split semisimple algebras fail the compactness condition") {
    GroupPresentation G;
    G.kind = GroupKind::general;
    G.algebra = algebras::sl2r();
    DecisionReport r = decide(G, test_options());
    CHECK_FALSE(r.openly_almost_elliptic);
    CHECK_FALSE(*r.semisimple_compact);
    CHECK_FALSE(condition(r, "a"));
    CHECK(condition(r, "b"));  // no layers to object
  }

  SECTION("euclidean motion algebra as a simply connected cover") {
    // Nothing is declared compact, so the rotation direction counts as a
    // fixed line and the verdict is negative -- with a warning pointing at
    // the direction a quotient could have made compact.
    GroupPresentation G;
    G.kind = GroupKind::general;
    G.algebra = algebras::euclid2();
    DecisionReport r = decide(G, test_options());
    CHECK_FALSE(r.openly_almost_elliptic);
    CHECK(*r.semisimple_compact);  // the whole algebra is the radical
    REQUIRE(r.layers.size() == 2);
    CHECK_FALSE(r.layers[0].trivial_weight_free);
    CHECK_FALSE(r.layers[1].trivial_weight_free);
    REQUIRE_FALSE(r.warnings.empty());
    bool flagged = false;
    for (const json& w : r.warnings)
      flagged = flagged || w["warning"] == "UndeclaredCompactDirections";
    CHECK(flagged);
  }

  SECTION("declared compact directions remove a layer line") {
    // Declaring the rotation direction compact empties the top layer; the
    // translation plane still carries the zero weight, so the verdict stays
    // negative -- declaring compactness never silently rescues a group.
    GroupPresentation G;
    G.kind = GroupKind::general;
    G.algebra = algebras::euclid2();
    Matrix dir = Matrix::Zero(3, 1);
    dir(0, 0) = 1.0;
    G.layer_compact[0] = dir;
    DecisionReport r = decide(G, test_options());
    CHECK_FALSE(r.openly_almost_elliptic);
    REQUIRE(r.layers.size() == 2);
    CHECK(r.layers[0].nc_dim == 0);
    CHECK(r.layers[0].trivial_weight_free);  // vacuous after the quotient
    CHECK_FALSE(r.layers[1].trivial_weight_free);
  }

  SECTION("compact quotient with a freely rotated radical passes") {
    DecisionReport r = decide(mixed_general_presentation(), test_options());
    CHECK(r.openly_almost_elliptic);
    CHECK(*r.semisimple_compact);
    REQUIRE(r.layers.size() == 1);
    CHECK(r.layers[0].dim == 2);
    CHECK(r.layers[0].trivial_weight_free);
    CHECK(r.warnings.empty());
  }

  SECTION("declared radicals are verified, not trusted") {
    GroupPresentation G = mixed_general_presentation();

    Matrix correct = Matrix::Zero(5, 2);
    correct(3, 0) = 1.0;
    correct(4, 1) = 1.0;
    G.declared_radical = correct;
    CHECK(decide(G, test_options()).openly_almost_elliptic);

    Matrix too_small = Matrix::Zero(5, 1);
    too_small(3, 0) = 1.0;
    G.declared_radical = too_small;
    try {
      decide(G, test_options());
      FAIL("expected a rejection of the non-maximal radical");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_argument);
      CHECK(std::string(e.what()).find("maximal") != std::string::npos);
    }

    G.declared_radical = Matrix::Identity(5, 5);
    try {
      decide(G, test_options());
      FAIL("expected a rejection of the non-solvable radical");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::invalid_argument);
    }
  }

  SECTION("solvable route and general route agree when the radical is everything") {
    DecisionOptions opts = test_options(300);
    GroupPresentation neg = heis_rot_presentation();
    GroupPresentation neg_general = neg;
    neg_general.kind = GroupKind::general;
    neg_general.realization.reset();
    CHECK(decide(neg, opts).openly_almost_elliptic ==
          decide(neg_general, opts).openly_almost_elliptic);

    GroupPresentation pos = complex_heis_presentation();
    GroupPresentation pos_general = pos;
    pos_general.kind = GroupKind::general;
    pos_general.realization.reset();
    CHECK(decide(pos, opts).openly_almost_elliptic);
    CHECK(decide(pos_general, opts).openly_almost_elliptic);
  }
}

TEST_CASE("decision invariance", "[decision]") {
  SECTION("verdicts survive a change of basis") {
    // Mix all three Heisenberg directions with an invertible map and
    // transport the derivation; the decision must not change.
    Matrix P(3, 3);
    P << 1.0, 0.4, -0.2, 0.3, 1.1, 0.5, -0.1, 0.2, 0.9;
    Matrix Pinv = P.inverse();
    GroupPresentation G;
    G.kind = GroupKind::solvable_by_compact;
    G.algebra = algebras::change_basis(algebras::heisenberg(), P);
    G.adjoint_generators = {Pinv * heis_rot_derivation() * P};
    DecisionOptions opts = test_options();
    DecisionReport r = decide(G, opts);
    CHECK_FALSE(r.openly_almost_elliptic);
    REQUIRE(r.layers.size() == 2);
    CHECK(r.layers[0].trivial_weight_free);
    CHECK_FALSE(r.layers[1].trivial_weight_free);
  }

  SECTION("verdicts survive a unimodular torus reparameterization") {
    Matrix A1 = Matrix::Zero(4, 4), A2 = Matrix::Zero(4, 4);
    A1(0, 1) = -1.0;
    A1(1, 0) = 1.0;
    A2(2, 3) = -1.0;
    A2(3, 2) = 1.0;
    TorusRep original = TorusRep::create(2, 4, {A1, A2});
    // New circles (t1, t1 + t2): an integral change of coordinates.
    TorusRep repar = TorusRep::create(2, 4, {A1 + A2, A2});
    DecisionOptions opts = test_options();
    CHECK(decide(vector_presentation(original), opts).openly_almost_elliptic);
    CHECK(decide(vector_presentation(repar), opts).openly_almost_elliptic);

    TorusRep original0 = TorusRep::create(2, 5, {embed_top_left(A1, 5), embed_top_left(A2, 5)});
    TorusRep repar0 = TorusRep::create(2, 5, {embed_top_left(Matrix(A1 + A2), 5),
                                              embed_top_left(A2, 5)});
    CHECK_FALSE(decide(vector_presentation(original0), opts).openly_almost_elliptic);
    CHECK_FALSE(decide(vector_presentation(repar0), opts).openly_almost_elliptic);
  }
}

TEST_CASE("equivalence battery", "[decision]") {
  SECTION("rotation plane: all seven conditions hold") {
    BatteryReport r = equivalence_battery(vector_presentation(speed_rep({1.0})),
                                          test_options());
    CHECK(r.value);
    REQUIRE(r.entries.size() == 7);
    std::vector<std::string> labels;
    for (const ConditionEntry& c : r.entries) {
      labels.push_back(c.label);
      CHECK(c.holds);
    }
    CHECK(labels == std::vector<std::string>{"a", "b", "c", "d", "e", "f", "g"});
  }

  SECTION("fixed line: all seven conditions fail") {
    BatteryReport r = equivalence_battery(vector_presentation(speed_rep({1.0}, 1)),
                                          test_options());
    CHECK_FALSE(r.value);
    for (const ConditionEntry& c : r.entries) CHECK_FALSE(c.holds);
  }

  SECTION("randomized representations never split the battery") {
    for (int trial = 0; trial < 8; ++trial) {
      SampleRng rng(2026, static_cast<std::uint64_t>(trial));
      std::vector<double> speeds;
      const int blocks = 1 + rng.uniform_int(3);
      for (int b = 0; b < blocks; ++b)
        speeds.push_back((rng.uniform01() < 0.5 ? -1.0 : 1.0) * (1 + rng.uniform_int(3)));
      const int fixed = rng.uniform01() < 0.5 ? rng.uniform_int(2) + 1 : 0;
      BatteryReport r = equivalence_battery(
          vector_presentation(speed_rep(speeds, fixed)), test_options(400));
      CHECK(r.value == (fixed == 0));
    }
  }

  SECTION("solvable batteries run through the realization") {
    BatteryReport pos =
        equivalence_battery(complex_heis_presentation(), test_options(300));
    CHECK(pos.value);
    REQUIRE(pos.entries.size() == 7);
    for (const ConditionEntry& c : pos.entries) CHECK(c.holds);

    BatteryReport neg = equivalence_battery(heis_rot_presentation(), test_options(300));
    CHECK_FALSE(neg.value);
    for (const ConditionEntry& c : neg.entries) CHECK_FALSE(c.holds);
  }

  SECTION("the solvable battery requires a realization") {
    GroupPresentation G = heis_rot_presentation();
    G.realization.reset();
    CHECK_THROWS_AS(equivalence_battery(G, test_options()), Error);
  }
}

TEST_CASE("permanence under vector quotients", "[decision]") {
  SECTION("Heisenberg: failure localizes to the center") {
    PermanenceReport r = permanence_check(heis_rot_presentation(), 1, test_options(300));
    CHECK(r.consistent);
    CHECK_FALSE(r.full.openly_almost_elliptic);
    CHECK(r.quotient.openly_almost_elliptic);        // the plane spins freely
    CHECK_FALSE(r.vector_layer.openly_almost_elliptic);  // the center is fixed
  }

  SECTION("complex Heisenberg: all three decisions are positive") {
    PermanenceReport r =
        permanence_check(complex_heis_presentation(), 1, test_options(300));
    CHECK(r.consistent);
    CHECK(r.full.openly_almost_elliptic);
    CHECK(r.quotient.openly_almost_elliptic);
    CHECK(r.vector_layer.openly_almost_elliptic);
  }

  SECTION("the zero term gives the tautological split") {
    PermanenceReport r =
        permanence_check(complex_heis_presentation(), 2, test_options(300));
    CHECK(r.consistent);
    CHECK(r.vector_layer.openly_almost_elliptic);  // trivial group
    CHECK(r.full.openly_almost_elliptic == r.quotient.openly_almost_elliptic);
  }

  SECTION("non-abelian terms are rejected") {
    CHECK_THROWS_AS(permanence_check(heis_rot_presentation(), 0, test_options(300)),
                    Error);
  }

  SECTION("general presentations split along the radical series") {
    PermanenceReport r = permanence_check(mixed_general_presentation(), 0, test_options());
    CHECK(r.consistent);
    CHECK(r.full.openly_almost_elliptic);
    CHECK(r.quotient.openly_almost_elliptic);  // su(2) alone
    CHECK(r.vector_layer.openly_almost_elliptic);
  }

  SECTION("vector presentations have nothing to split") {
    CHECK_THROWS_AS(permanence_check(vector_presentation(speed_rep({1.0})), 0,
                                     test_options()),
                    Error);
  }
}

TEST_CASE("presentation validation", "[decision]") {
  SECTION("well-formed inputs are accepted") {
    CHECK(validate_presentation(vector_presentation(speed_rep({1.0}))).accepted);
    CHECK(validate_presentation(heis_rot_presentation()).accepted);
    CHECK(validate_presentation(mixed_general_presentation()).accepted);
  }

  SECTION("derivation violations are reported with their residual") {
    GroupPresentation G = heis_rot_presentation();
    Matrix bad = Matrix::Zero(3, 3);
    bad(0, 2) = 1.0;
    G.adjoint_generators = {bad};
    ValidationReport r = validate_presentation(G);
    CHECK_FALSE(r.accepted);
    bool found = false;
    for (const std::string& f : r.failures) found = found || f == "derivation_property";
    CHECK(found);
  }

  SECTION("a non-solvable algebra fails the solvable kind") {
    GroupPresentation G;
    G.kind = GroupKind::solvable_by_compact;
    G.algebra = algebras::su2();
    CHECK_FALSE(validate_presentation(G).accepted);
  }
}
