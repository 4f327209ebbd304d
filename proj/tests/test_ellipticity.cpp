// Elementwise ellipticity and density estimates.  Matrix-level cases are
// frozen by hand (rotations, Jordan blocks, hyperbolic diagonals); the
// semidirect cases check the constructive witnesses against the defining
// conjugation identity rather than against the solver's own output.

#include <catch2/catch_amalgamated.hpp>

#include "almell/ellipticity.hpp"

using namespace almell;

namespace {

Matrix rotation2(double theta) {
  Matrix m(2, 2);
  m << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return m;
}

TorusRep rot2_rep() {
  Matrix J(2, 2);
  J << 0.0, -1.0, 1.0, 0.0;
  return TorusRep::create(1, 2, {J});
}

TorusRep triv_line_rep() {
  Matrix A = Matrix::Zero(3, 3);
  A(0, 1) = -1.0;
  A(1, 0) = 1.0;
  return TorusRep::create(1, 3, {A});
}

AlgebraAutomorphism heis_rotation(double theta) {
  Matrix phi = Matrix::Identity(3, 3);
  phi.block(0, 0, 2, 2) = rotation2(theta);
  return AlgebraAutomorphism{phi};
}

AlgebraAutomorphism heis_contraction() {
  Matrix A(2, 2);
  A << 0.3, 0.4, -0.4, 0.5;
  Matrix phi = Matrix::Zero(3, 3);
  phi.block(0, 0, 2, 2) = A;
  phi(2, 2) = A.determinant();
  return AlgebraAutomorphism{phi};
}

}  // namespace

TEST_CASE("matrix ellipticity") {
  SECTION("rotations are elliptic") {
    CHECK(is_elliptic_matrix(rotation2(0.73).cast<Complex>()));
    CHECK(is_elliptic_matrix(CMatrix::Identity(3, 3)));
  }
  SECTION("unitary diagonals are elliptic") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = std::exp(Complex(0.0, 1.1));
    d(1, 1) = std::exp(Complex(0.0, -2.2));
    CHECK(is_elliptic_matrix(d));
  }
  SECTION("hyperbolic matrices are not") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 0.5;
    CHECK_FALSE(is_elliptic_matrix(d.cast<Complex>()));
  }
  SECTION("unipotent matrices are not") {
    Matrix u = Matrix::Identity(2, 2);
    u(0, 1) = 1.0;
    CHECK_FALSE(is_elliptic_matrix(u.cast<Complex>()));
  }
  SECTION("a jordan block on the circle is not") {
    CMatrix j = std::exp(Complex(0.0, 0.9)) * CMatrix::Identity(2, 2);
    j(0, 1) += 1.0;
    CHECK_FALSE(is_elliptic_matrix(j));
  }
  SECTION("a rotation next to an expansion is not") {
    Matrix m = Matrix::Zero(3, 3);
    m.block(0, 0, 2, 2) = rotation2(0.5);
    m(2, 2) = 2.0;
    CHECK_FALSE(is_elliptic_matrix(m.cast<Complex>()));
  }
  SECTION("singular input is refused") {
    CHECK_THROWS_MATCHES(is_elliptic_matrix(CMatrix::Zero(2, 2)), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::invalid_argument;
                         }));
  }
  SECTION("a modulus inside the tolerance band is refused") {
    CMatrix d = CMatrix::Identity(2, 2);
    d(0, 0) = 1.0 + 3e-6;  // within a factor 10 of the 1e-6 tolerance
    CHECK_THROWS_MATCHES(is_elliptic_matrix(d), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::spectral_ambiguity;
                         }));
  }
  SECTION("a modulus clearly off the circle just answers no") {
    CMatrix d = CMatrix::Identity(2, 2);
    d(0, 0) = 1.0 + 1e-4;
    CHECK_FALSE(is_elliptic_matrix(d));
  }
}

TEST_CASE("abelian semidirect ellipticity") {
  SECTION("free rotation absorbs every translation") {
    Matrix rho = rotation2(1.3);
    Vector v(2);
    v << 0.7, -2.1;
    EllipticVerdict verdict = is_elliptic_abelian(rho, v);
    REQUIRE(verdict.state == EllipticState::elliptic);
    ConjugationWitness w = conjugate_into_compact_abelian(rho, v, verdict);
    CHECK(w.residual <= 1e-8);
  }
  SECTION("identity rotation leaves translations stuck") {
    Vector v(2);
    v << 1.0, 0.0;
    EllipticVerdict verdict = is_elliptic_abelian(Matrix::Identity(2, 2), v);
    CHECK(verdict.state == EllipticState::not_elliptic);
    CHECK_THROWS_MATCHES(
        conjugate_into_compact_abelian(Matrix::Identity(2, 2), v, verdict), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == ErrorCode::no_witness; }));
  }
  SECTION("the half turn conjugates by -v/2") {
    Vector v(2);
    v << 2.0, -4.0;
    EllipticVerdict verdict = is_elliptic_abelian(-Matrix::Identity(2, 2), v);
    REQUIRE(verdict.state == EllipticState::elliptic);
    REQUIRE(verdict.witness.has_value());
    CHECK((*verdict.witness + 0.5 * v).norm() < 1e-12);
  }
  SECTION("a fixed line blocks generic translations") {
    Matrix rho = Matrix::Identity(3, 3);
    rho.block(0, 0, 2, 2) = rotation2(0.9);
    Vector v(3);
    v << 0.1, 0.2, 1.0;  // nonzero component along the fixed axis
    EllipticVerdict verdict = is_elliptic_abelian(rho, v);
    CHECK(verdict.state == EllipticState::not_elliptic);
    CHECK(verdict.obstruction == Catch::Approx(1.0).margin(1e-9));
  }
  SECTION("reflections fix an axis") {
    Matrix refl = Matrix::Identity(2, 2);
    refl(1, 1) = -1.0;
    Vector along(2), across(2);
    along << 1.0, 0.0;
    across << 0.0, 1.0;
    CHECK(is_elliptic_abelian(refl, along).state == EllipticState::not_elliptic);
    EllipticVerdict verdict = is_elliptic_abelian(refl, across);
    REQUIRE(verdict.state == EllipticState::elliptic);
    CHECK(conjugate_into_compact_abelian(refl, across, verdict).residual <= 1e-8);
  }
  SECTION("the zero translation is trivially elliptic") {
    CHECK(is_elliptic_abelian(Matrix::Identity(2, 2), Vector::Zero(2)).state ==
          EllipticState::elliptic);
  }
}

TEST_CASE("solvable semidirect ellipticity") {
  SolvablePresentation H = presentations::heisenberg();
  SECTION("a contracting automorphism makes everything elliptic") {
    AlgebraAutomorphism phi = heis_contraction();
    SampleRng rng(200, 0);
    for (int trial = 0; trial < 10; ++trial) {
      Vector coords(3);
      for (int i = 0; i < 3; ++i) coords(i) = rng.normal();
      GroupElement v = element_from_coords(H, coords);
      EllipticVerdict verdict = is_elliptic_solvable(H, phi, v);
      REQUIRE(verdict.state == EllipticState::elliptic);
      ConjugationWitness w = conjugate_into_compact_solvable(H, phi, v, verdict);
      CHECK(w.residual <= 1e-8);
    }
  }
  SECTION("a rotation cannot absorb the center") {
    AlgebraAutomorphism phi = heis_rotation(1.0);
    Vector coords(3);
    coords << 0.0, 0.0, 1.0;
    EllipticVerdict verdict = is_elliptic_solvable(H, phi, element_from_coords(H, coords));
    CHECK(verdict.state == EllipticState::not_elliptic);
    CHECK(verdict.obstruction > 0.5);
  }
  SECTION("on the singular stratum a reachable target stays undetermined") {
    // v = delta(x0) is elliptic, but with 1 - phi singular the restricted
    // sweep must not promote a near-zero obstruction to a positive verdict.
    AlgebraAutomorphism phi = heis_rotation(1.0);
    Vector x0(3);
    x0 << 0.4, -0.2, 0.3;
    GroupElement v = delta(H, phi, element_from_coords(H, x0));
    EllipticVerdict verdict = is_elliptic_solvable(H, phi, v);
    CHECK(verdict.state == EllipticState::undetermined);
    CHECK(verdict.obstruction < 1e-7);
  }
  SECTION("the identity is elliptic under any automorphism") {
    CHECK(is_elliptic_solvable(H, heis_rotation(0.3), identity_element(H)).state ==
          EllipticState::elliptic);
  }
}

TEST_CASE("elliptic density, abelian") {
  CompactPart rot2 = CompactPart::create(rot2_rep(), {});
  CompactPart triv = CompactPart::create(triv_line_rep(), {});
  SECTION("weight-free action: full density") {
    DensityReport r = elliptic_density_abelian(rot2, 500, 0);
    CHECK(r.fraction == 1.0);
    CHECK(r.undetermined == 0);
  }
  SECTION("trivial weight: zero density") {
    DensityReport r = elliptic_density_abelian(triv, 500, 0);
    CHECK(r.fraction == 0.0);
  }
  SECTION("scale invariance of the verdict fractions") {
    SamplerOptions small{0.1, 1}, large{10.0, 1};
    CHECK(elliptic_density_abelian(rot2, 300, 1, small).fraction == 1.0);
    CHECK(elliptic_density_abelian(rot2, 300, 1, large).fraction == 1.0);
    CHECK(elliptic_density_abelian(triv, 300, 1, small).fraction == 0.0);
    CHECK(elliptic_density_abelian(triv, 300, 1, large).fraction == 0.0);
  }
  SECTION("worker count does not change the result") {
    SamplerOptions serial{1.0, 1}, parallel{1.0, 4};
    DensityReport a = elliptic_density_abelian(rot2, 1000, 3, serial);
    DensityReport b = elliptic_density_abelian(rot2, 1000, 3, parallel);
    CHECK(a.fraction == b.fraction);
    CHECK(a.ci_lo == b.ci_lo);
    CHECK(a.ci_hi == b.ci_hi);
    CHECK(a.undetermined == b.undetermined);
  }
  SECTION("a disconnected compact part splits the density") {
    // Identity-component samples conjugate away; reflection-component
    // samples almost surely cannot, so the fraction sits near 1/2.
    Matrix flip = Matrix::Identity(2, 2);
    flip(1, 1) = -1.0;
    CompactPart z2 = CompactPart::create(rot2_rep(), {flip});
    DensityReport r = elliptic_density_abelian(z2, 2000, 0);
    CHECK(r.fraction > 0.42);
    CHECK(r.fraction < 0.58);
  }
  SECTION("sample floor") {
    CHECK_THROWS_AS(elliptic_density_abelian(rot2, 99, 0), Error);
  }
}

TEST_CASE("local elliptic density") {
  Matrix flip = Matrix::Identity(2, 2);
  flip(1, 1) = -1.0;
  CompactPart z2 = CompactPart::create(rot2_rep(), {flip});
  SECTION("around a stuck reflection pair the density vanishes") {
    LocalCenter center;
    center.v = Vector::Zero(2);
    center.v(0) = 1.0;  // fixed by the reflection
    center.t = Vector::Zero(1);
    center.component = 0;
    DensityReport r = local_elliptic_density_abelian(z2, center, 0.01, 500, 0);
    CHECK(r.fraction == 0.0);
  }
  SECTION("around a free rotation the density is one") {
    LocalCenter center;
    center.v = Vector::Zero(2);
    center.v(0) = 1.0;
    center.t = Vector::Zero(1);
    center.t(0) = 0.25;
    center.component = -1;
    DensityReport r = local_elliptic_density_abelian(z2, center, 0.01, 500, 0);
    CHECK(r.fraction == 1.0);
  }
  SECTION("radius must be positive") {
    LocalCenter center;
    center.v = Vector::Zero(2);
    center.t = Vector::Zero(1);
    CHECK_THROWS_AS(local_elliptic_density_abelian(z2, center, 0.0, 500, 0), Error);
  }
}

TEST_CASE("elliptic density, solvable") {
  SECTION("heisenberg under rotations has zero density") {
    SolvablePresentation H = presentations::heisenberg();
    Matrix D = Matrix::Zero(3, 3);
    D(0, 1) = -1.0;
    D(1, 0) = 1.0;
    DensityReport r = elliptic_density_solvable(H, {D}, 300, 0);
    CHECK(r.fraction == 0.0);
    CHECK(r.undetermined == 0);
  }
  SECTION("the plane under rotations has full density, matching the abelian route") {
    SolvablePresentation V = presentations::abelian(2);
    Matrix D(2, 2);
    D << 0.0, -1.0, 1.0, 0.0;
    DensityReport solvable_route = elliptic_density_solvable(V, {D}, 300, 5);
    DensityReport abelian_route =
        elliptic_density_abelian(CompactPart::create(rot2_rep(), {}), 300, 5);
    CHECK(solvable_route.fraction == 1.0);
    CHECK(abelian_route.fraction == 1.0);
    CHECK(solvable_route.undetermined == 0);
  }
  SECTION("worker independence") {
    SolvablePresentation H = presentations::heisenberg();
    Matrix D = Matrix::Zero(3, 3);
    D(0, 1) = -1.0;
    D(1, 0) = 1.0;
    DensityReport a = elliptic_density_solvable(H, {D}, 300, 9, SamplerOptions{1.0, 1});
    DensityReport b = elliptic_density_solvable(H, {D}, 300, 9, SamplerOptions{1.0, 3});
    CHECK(a.fraction == b.fraction);
    CHECK(a.undetermined == b.undetermined);
  }
}

TEST_CASE("power norm divergence") {
  SECTION("a rational rotation reaches the antipode") {
    CMatrix m = CMatrix::Identity(1, 1);
    m(0, 0) = std::exp(Complex(0.0, kTwoPi * 0.1));
    std::vector<double> sup = power_norm_divergence({m}, 10);
    // At k = 5 the power is exactly -1: |(-1) - 1| = 2.
    CHECK(sup[0] == Catch::Approx(2.0).margin(1e-9));
  }
  SECTION("the identity never diverges") {
    std::vector<double> sup = power_norm_divergence({CMatrix::Identity(3, 3)}, 100);
    CHECK(sup[0] == 0.0);
  }
  SECTION("every nontrivial circle element clears sqrt(3) eventually") {
    for (double theta : {0.1, 0.01}) {
      CMatrix m = CMatrix::Identity(1, 1);
      m(0, 0) = std::exp(Complex(0.0, kTwoPi * theta));
      std::vector<double> sup = power_norm_divergence({m}, 1000);
      CHECK(sup[0] >= std::sqrt(3.0) - 1e-9);
    }
  }
  SECTION("shrinking the tilt grows the divergence") {
    const Complex lambda = std::exp(Complex(0.0, kTwoPi * 0.05));
    std::vector<CMatrix> family;
    for (double eps : {1.0, 0.5, 0.25, 0.125, 0.0625}) {
      CMatrix m = CMatrix::Identity(2, 2);
      m(0, 0) = 1.0;
      m(1, 1) = lambda;
      m(0, 1) = (lambda - 1.0) / eps;
      family.push_back(m);
    }
    std::vector<double> sup = power_norm_divergence(family, 200);
    for (std::size_t i = 1; i < sup.size(); ++i) CHECK(sup[i] > sup[i - 1]);
  }
  SECTION("k_max must be at least one") {
    CHECK_THROWS_AS(power_norm_divergence({CMatrix::Identity(1, 1)}, 0), Error);
  }
}
