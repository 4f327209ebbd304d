// Group-calculus tests.  The Heisenberg group in upper unipotent form has
// closed-form products in second-kind coordinates, which pins the solver to
// hand-computed values; the Euclidean-cover presentation exercises a group
// where coordinates wind past a full turn.

#include <catch2/catch_amalgamated.hpp>

#include "almell/rng.hpp"
#include "almell/solvable.hpp"

using namespace almell;

namespace {

Vector coords3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

// Automorphisms of the heisenberg algebra in the (x, y, z) basis:
// (x, y) |-> A (x, y) + (arbitrary z-components), z |-> det(A) z.
AlgebraAutomorphism heis_automorphism(const Matrix& A, double c1, double c2) {
  Matrix phi = Matrix::Zero(3, 3);
  phi.block(0, 0, 2, 2) = A;
  phi(2, 0) = c1;
  phi(2, 1) = c2;
  phi(2, 2) = A.determinant();
  return AlgebraAutomorphism{phi};
}

// Automorphisms of the euclidean algebra with 1 - phi invertible:
// t |-> -t, (x, y) |-> lambda * diag(1, -1).
AlgebraAutomorphism euclid_flip(double lambda) {
  Matrix phi = Matrix::Zero(3, 3);
  phi(0, 0) = -1.0;
  phi(1, 1) = lambda;
  phi(2, 2) = -lambda;
  return AlgebraAutomorphism{phi};
}

GroupElement random_element(const SolvablePresentation& P, SampleRng& rng, double scale = 1.0) {
  Vector x(P.dim());
  for (int i = 0; i < P.dim(); ++i) x(i) = scale * rng.normal();
  return element_from_coords(P, x);
}

}  // namespace

TEST_CASE("presentation validation") {
  SECTION("standard presentations construct") {
    CHECK_NOTHROW(presentations::heisenberg());
    CHECK_NOTHROW(presentations::abelian(3));
    CHECK_NOTHROW(presentations::euclid2_cover());
  }
  SECTION("homomorphism violations are rejected") {
    Matrix X = Matrix::Zero(3, 3), Y = Matrix::Zero(3, 3), Z = Matrix::Zero(3, 3);
    X(0, 1) = 1.0;
    Y(1, 2) = 1.0;
    Z(0, 2) = 2.0;  // [X, Y] = E13 != 2 E13
    CHECK_THROWS_AS(
        SolvablePresentation::create(algebras::heisenberg(), 3, {X, Y, Z}, {0, 1, 2}), Error);
  }
  SECTION("a non-adapted order is rejected") {
    Matrix X = Matrix::Zero(3, 3), Y = Matrix::Zero(3, 3), Z = Matrix::Zero(3, 3);
    X(0, 1) = 1.0;
    Y(1, 2) = 1.0;
    Z(0, 2) = 1.0;
    // Putting z first leaves the derived line spanned by the *last* slot x.
    CHECK_THROWS_AS(
        SolvablePresentation::create(algebras::heisenberg(), 3, {X, Y, Z}, {2, 1, 0}), Error);
  }
  SECTION("non-solvable algebras are rejected") {
    // The adjoint realization of su2 satisfies the homomorphism property,
    // so the failure must come from the solvability check.
    LieAlgebra su = algebras::su2();
    std::vector<Matrix> ad(3);
    for (int i = 0; i < 3; ++i) ad[i] = su.ad_basis(i);
    CHECK_THROWS_AS(SolvablePresentation::create(su, 3, ad, {0, 1, 2}), Error);
  }
  SECTION("a repeated adapted index is rejected") {
    Matrix X = Matrix::Zero(3, 3), Y = Matrix::Zero(3, 3), Z = Matrix::Zero(3, 3);
    X(0, 1) = 1.0;
    Y(1, 2) = 1.0;
    Z(0, 2) = 1.0;
    CHECK_THROWS_AS(
        SolvablePresentation::create(algebras::heisenberg(), 3, {X, Y, Z}, {0, 0, 2}), Error);
  }
}

TEST_CASE("heisenberg element matrices") {
  SolvablePresentation H = presentations::heisenberg();
  GroupElement g = element_from_coords(H, coords3(2.0, 3.0, 5.0));
  // exp(2X) exp(3Y) exp(5Z) = [[1, 2, 5 + 6], [0, 1, 3], [0, 0, 1]].
  Matrix expected(3, 3);
  expected << 1.0, 2.0, 11.0, 0.0, 1.0, 3.0, 0.0, 0.0, 1.0;
  CHECK((g.matrix - expected).norm() < 1e-12);
}

TEST_CASE("multiplication") {
  SolvablePresentation H = presentations::heisenberg();
  SECTION("hand-computed products") {
    GroupElement a = element_from_coords(H, coords3(1.0, 0.0, 0.0));
    GroupElement b = element_from_coords(H, coords3(0.0, 1.0, 0.0));
    GroupElement ab = multiply(H, a, b);
    GroupElement ba = multiply(H, b, a);
    CHECK((ab.coords - coords3(1.0, 1.0, 0.0)).norm() < 1e-12);
    CHECK((ba.coords - coords3(1.0, 1.0, -1.0)).norm() < 1e-12);
  }
  SECTION("the cached matrix is the matrix product") {
    SampleRng rng(100, 0);
    for (int trial = 0; trial < 10; ++trial) {
      GroupElement g = random_element(H, rng), h = random_element(H, rng);
      GroupElement gh = multiply(H, g, h);
      CHECK((gh.matrix - g.matrix * h.matrix).norm() < 1e-12);
      // Cached-coordinate consistency: rebuilding from coords reproduces it.
      CHECK((element_from_coords(H, gh.coords).matrix - gh.matrix).norm() < 1e-9);
    }
  }
  SECTION("associativity") {
    SampleRng rng(101, 0);
    for (const SolvablePresentation& P :
         {presentations::heisenberg(), presentations::euclid2_cover()}) {
      for (int trial = 0; trial < 10; ++trial) {
        GroupElement g = random_element(P, rng), h = random_element(P, rng),
                     k = random_element(P, rng);
        GroupElement left = multiply(P, multiply(P, g, h), k);
        GroupElement right = multiply(P, g, multiply(P, h, k));
        CHECK((left.coords - right.coords).norm() < 1e-9);
      }
    }
  }
  SECTION("identity is neutral") {
    SampleRng rng(102, 0);
    GroupElement g = random_element(H, rng);
    CHECK((multiply(H, g, identity_element(H)).coords - g.coords).norm() < 1e-12);
    CHECK((multiply(H, identity_element(H), g).coords - g.coords).norm() < 1e-12);
  }
}

TEST_CASE("inverse") {
  SolvablePresentation H = presentations::heisenberg();
  SECTION("hand-computed inverse") {
    // M(1,1,0) = [[1,1,1],[0,1,1],[0,0,1]]; its inverse [[1,-1,0],[0,1,-1],[0,0,1]]
    // has coordinates a = b = -1 and c = -ab = -1.
    GroupElement g = element_from_coords(H, coords3(1.0, 1.0, 0.0));
    GroupElement gi = inverse(H, g);
    CHECK((gi.coords - coords3(-1.0, -1.0, -1.0)).norm() < 1e-12);
  }
  SECTION("g g^{-1} = 1") {
    SampleRng rng(103, 0);
    for (const SolvablePresentation& P :
         {presentations::heisenberg(), presentations::euclid2_cover()}) {
      for (int trial = 0; trial < 10; ++trial) {
        GroupElement g = random_element(P, rng);
        GroupElement gi = inverse(P, g);
        CHECK((multiply(P, g, gi).coords).norm() < 1e-9);
        CHECK((gi.matrix * g.matrix - Matrix::Identity(P.mat_dim(), P.mat_dim())).norm() <
              1e-12);
      }
    }
  }
}

TEST_CASE("euclidean cover winds past a full turn") {
  SolvablePresentation E = presentations::euclid2_cover();
  SECTION("angles add beyond 2 pi") {
    GroupElement a = element_from_coords(E, coords3(4.0, 0.0, 0.0));
    GroupElement b = element_from_coords(E, coords3(4.0, 0.5, 0.0));
    GroupElement ab = multiply(E, a, b);
    // exp(4T) exp(4T) exp(.5X) = exp(8T) exp(.5X): 8 radians, not 8 - 2 pi.
    CHECK(ab.coords(0) == Catch::Approx(8.0).margin(1e-9));
    CHECK(ab.coords(1) == Catch::Approx(0.5).margin(1e-9));
    CHECK(ab.coords(2) == Catch::Approx(0.0).margin(1e-9));
  }
  SECTION("pulling a translation across a large rotation") {
    // exp(.5X) exp(4T) = exp(4T) exp(.5 e^{-4 ad_T} X), and e^{theta ad_T}
    // rotates the translation plane: coordinates (4, .5 cos 4, -.5 sin 4).
    GroupElement x = element_from_coords(E, coords3(0.0, 0.5, 0.0));
    GroupElement t = element_from_coords(E, coords3(4.0, 0.0, 0.0));
    GroupElement xt = multiply(E, x, t);
    CHECK(xt.coords(0) == Catch::Approx(4.0).margin(1e-9));
    CHECK(xt.coords(1) == Catch::Approx(0.5 * std::cos(4.0)).margin(1e-9));
    CHECK(xt.coords(2) == Catch::Approx(-0.5 * std::sin(4.0)).margin(1e-9));
  }
}

TEST_CASE("automorphism checking") {
  SolvablePresentation H = presentations::heisenberg();
  SECTION("the block family is accepted") {
    Matrix A(2, 2);
    A << 1.5, 0.25, -0.5, 2.0;
    CHECK(check_automorphism(H, heis_automorphism(A, 0.7, -0.3)).accepted);
  }
  SECTION("a scaling that breaks the bracket is rejected") {
    Matrix phi = Matrix::Identity(3, 3);
    phi(0, 0) = 2.0;  // [2x, y] = 2z but phi(z) = z
    CHECK_FALSE(check_automorphism(H, AlgebraAutomorphism{phi}).accepted);
  }
  SECTION("the euclidean flip family is accepted") {
    CHECK(check_automorphism(presentations::euclid2_cover(), euclid_flip(0.8)).accepted);
  }
  SECTION("singular maps are rejected") {
    CHECK_FALSE(check_automorphism(H, AlgebraAutomorphism{Matrix::Zero(3, 3)}).accepted);
  }
}

TEST_CASE("automorphism application") {
  SolvablePresentation H = presentations::heisenberg();
  Matrix A(2, 2);
  A << 0.8, 0.3, -0.2, 1.1;
  AlgebraAutomorphism phi = heis_automorphism(A, 0.4, -0.6);
  SECTION("it is a group homomorphism") {
    SampleRng rng(104, 0);
    for (int trial = 0; trial < 10; ++trial) {
      GroupElement g = random_element(H, rng), h = random_element(H, rng);
      GroupElement lhs = apply_automorphism(H, phi, multiply(H, g, h));
      GroupElement rhs =
          multiply(H, apply_automorphism(H, phi, g), apply_automorphism(H, phi, h));
      CHECK((lhs.coords - rhs.coords).norm() < 1e-8);
    }
  }
  SECTION("abelian groups transform linearly") {
    SolvablePresentation V = presentations::abelian(3);
    Matrix m(3, 3);
    m << 2.0, 1.0, 0.0, -1.0, 0.5, 0.3, 0.0, 0.7, 1.2;
    AlgebraAutomorphism lin{m};
    SampleRng rng(105, 0);
    for (int trial = 0; trial < 10; ++trial) {
      GroupElement g = random_element(V, rng);
      GroupElement img = apply_automorphism(V, lin, g);
      CHECK((img.coords - m * g.coords).norm() < 1e-10);
    }
  }
}

TEST_CASE("twisted coboundary") {
  SolvablePresentation H = presentations::heisenberg();
  Matrix A(2, 2);
  A << 0.3, 0.4, -0.4, 0.5;
  AlgebraAutomorphism phi = heis_automorphism(A, 0.2, 0.1);
  SECTION("cocycle identity delta(a s) = Ad_{s^-1}(delta a) delta s") {
    SampleRng rng(106, 0);
    for (int trial = 0; trial < 20; ++trial) {
      GroupElement a = random_element(H, rng), s = random_element(H, rng);
      GroupElement lhs = delta(H, phi, multiply(H, a, s));
      Matrix rhs = s.matrix.inverse() * delta(H, phi, a).matrix * s.matrix *
                   delta(H, phi, s).matrix;
      CHECK((lhs.matrix - rhs).norm() < 1e-8);
    }
  }
  SECTION("abelian groups give delta = phi - 1 in coordinates") {
    SolvablePresentation V = presentations::abelian(3);
    Matrix m(3, 3);
    m << 0.2, 0.1, 0.0, -0.3, 0.4, 0.2, 0.1, 0.0, 0.5;
    AlgebraAutomorphism lin{m};
    SampleRng rng(107, 0);
    for (int trial = 0; trial < 10; ++trial) {
      GroupElement g = random_element(V, rng);
      GroupElement d = delta(V, lin, g);
      CHECK((d.coords - (m - Matrix::Identity(3, 3)) * g.coords).norm() < 1e-10);
    }
  }
}

TEST_CASE("delta_solve") {
  SolvablePresentation H = presentations::heisenberg();
  Matrix A(2, 2);
  A << 0.3, 0.4, -0.4, 0.5;  // 1 - phi comfortably invertible
  AlgebraAutomorphism phi = heis_automorphism(A, 0.2, 0.1);
  SECTION("round trip on random targets") {
    SampleRng rng(108, 0);
    for (int trial = 0; trial < 25; ++trial) {
      GroupElement v = random_element(H, rng);
      DeltaSolveInfo info;
      GroupElement x = delta_solve(H, phi, v, &info);
      CHECK(info.residual <= 1e-9);
      GroupElement check = delta(H, phi, x);
      CHECK((check.matrix - v.matrix).norm() < 1e-8);
      CHECK((check.coords - v.coords).norm() < 1e-8);
    }
  }
  SECTION("abelian closed form") {
    SolvablePresentation V = presentations::abelian(3);
    Matrix m(3, 3);
    m << 0.2, 0.1, 0.0, -0.3, 0.4, 0.2, 0.1, 0.0, 0.5;
    AlgebraAutomorphism lin{m};
    SampleRng rng(109, 0);
    for (int trial = 0; trial < 10; ++trial) {
      GroupElement v = random_element(V, rng);
      GroupElement x = delta_solve(V, lin, v);
      Vector expected = (m - Matrix::Identity(3, 3)).colPivHouseholderQr().solve(v.coords);
      CHECK((x.coords - expected).norm() < 1e-10);
    }
  }
  SECTION("the euclidean flip is solvable") {
    SolvablePresentation E = presentations::euclid2_cover();
    AlgebraAutomorphism phi_e = euclid_flip(0.8);
    SampleRng rng(110, 0);
    for (int trial = 0; trial < 10; ++trial) {
      GroupElement v = random_element(E, rng);
      GroupElement x = delta_solve(E, phi_e, v);
      CHECK((delta(E, phi_e, x).matrix - v.matrix).norm() < 1e-8);
    }
  }
  SECTION("a unipotent direction refuses") {
    // An orientation-preserving block has det A = 1, so phi fixes the
    // center and 1 - phi is singular.
    Matrix R(2, 2);
    const double c = std::cos(1.0), s = std::sin(1.0);
    R << c, -s, s, c;
    AlgebraAutomorphism rot = heis_automorphism(R, 0.0, 0.0);
    GroupElement v = element_from_coords(H, coords3(0.0, 0.0, 1.0));
    DeltaSolveInfo info;
    CHECK_THROWS_MATCHES(delta_solve(H, rot, v, &info), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::not_invertible;
                         }));
  }
  SECTION("the condition number is reported") {
    GroupElement v = element_from_coords(H, coords3(0.1, 0.2, 0.3));
    DeltaSolveInfo info;
    delta_solve(H, phi, v, &info);
    CHECK(info.sigma_min > tol::invertibility);
    CHECK(info.condition >= 1.0);
  }
}

TEST_CASE("adjoint matrix") {
  SolvablePresentation H = presentations::heisenberg();
  // For g = (a, b, c): Ad(g) x = x - b z, Ad(g) y = y + a z, Ad(g) z = z.
  GroupElement g = element_from_coords(H, coords3(2.0, 3.0, 1.0));
  Matrix Ad = adjoint_matrix(H, g);
  Matrix expected = Matrix::Identity(3, 3);
  expected(2, 0) = -3.0;
  expected(2, 1) = 2.0;
  CHECK((Ad - expected).norm() < 1e-10);
}

TEST_CASE("continuation fallback tracks a target path") {
  SolvablePresentation E = presentations::euclid2_cover();
  Vector big(3);
  big << 9.0, 2.0, -1.5;
  const GroupElement target = element_from_coords(E, big);
  detail::SolveOutcome out = detail::solve_coords_path(
      E, [&](double s) { return element_from_coords(E, Vector(s * big)).matrix; },
      Vector::Zero(3));
  REQUIRE(out.ok);
  CHECK((out.coords - big).norm() < 1e-8);
  CHECK(out.residual <= 1e-9 * (1.0 + target.matrix.norm()));
}
