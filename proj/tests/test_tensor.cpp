#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "test_helpers.hpp"

#include "blvm/io.hpp"
#include "blvm/reference.hpp"

#include <cstdio>

using namespace blvm;
using blvm::testing::diagonal_tensor;
using blvm::testing::odeco_tensor;
using blvm::testing::random_sym_tensor;

TEST_CASE("symmetrization is idempotent on symmetric data") {
  SymTensor3 t = random_sym_tensor(4, 1);
  Tensor3 copy(4, 4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      for (Index k = 0; k < 4; ++k) copy(i, j, k) = t(i, j, k);
  SymTensor3 again = SymTensor3::symmetrized(copy);
  for (std::size_t i = 0; i < t.raw().size(); ++i) CHECK(again.raw()[i] == t.raw()[i]);
}

TEST_CASE("entries are symmetric under all index permutations") {
  SymTensor3 t = random_sym_tensor(5, 2);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 5; ++j)
      for (Index k = 0; k < 5; ++k) {
        CHECK(t(i, j, k) == t(i, k, j));
        CHECK(t(i, j, k) == t(j, i, k));
        CHECK(t(i, j, k) == t(k, j, i));
      }
}

TEST_CASE("mode_apply on a diagonal tensor picks the cubed coordinate") {
  Vector a(3);
  a << 2.0, 1.0, 0.5;
  SymTensor3 t = diagonal_tensor(a);
  Vector w = t.apply(Vector::Unit(3, 0));
  CHECK(w[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(0.0));
  CHECK(w[2] == doctest::Approx(0.0));
}

TEST_CASE("mode_apply on a rank-one tensor is (v.u)^2 v") {
  Rng rng(3);
  Vector v = rng.normal_vector(4);
  Vector u = rng.unit_sphere(4);
  SymTensor3 t = add_rank_one(SymTensor3(4), 1.0, v);
  Vector w = t.apply(u);
  double c = v.dot(u) * v.dot(u);
  for (Index i = 0; i < 4; ++i) CHECK(w[i] == doctest::Approx(c * v[i]).epsilon(1e-12));
}

TEST_CASE("mode_apply matches the brute-force triple loop") {
  SymTensor3 t = random_sym_tensor(3, 4);
  Rng rng(5);
  Vector u = rng.unit_sphere(3);
  Vector fast = t.apply(u);
  Vector slow = reference::mode_apply(t, u);
  CHECK((fast - slow).norm() <= 1e-13);
}

TEST_CASE("mode_apply rejects dimension mismatch") {
  SymTensor3 t = random_sym_tensor(3, 6);
  CHECK_THROWS_AS((void)t.apply(Vector::Zero(4)), Error);
}

TEST_CASE("multilinear with identities is the identity") {
  SymTensor3 t = random_sym_tensor(4, 7);
  Matrix id = Matrix::Identity(4, 4);
  Tensor3 out = t.multilinear(id, id, id);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      for (Index k = 0; k < 4; ++k) CHECK(out(i, j, k) == doctest::Approx(t(i, j, k)).epsilon(1e-14));
}

TEST_CASE("multilinear with a single column gives T(u,u,u)") {
  SymTensor3 t = random_sym_tensor(4, 8);
  Rng rng(9);
  Vector u = rng.unit_sphere(4);
  Tensor3 out = t.multilinear(u, u, u);
  CHECK(out(0, 0, 0) == doctest::Approx(t.cubic(u)).epsilon(1e-12));
  CHECK(out(0, 0, 0) == doctest::Approx(reference::cubic(t, u)).epsilon(1e-12));
}

TEST_CASE("multilinear matches the six-loop brute force") {
  SymTensor3 t = random_sym_tensor(3, 10);
  Rng rng(11);
  Matrix A(3, 2);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 2; ++j) A(i, j) = rng.normal();
  Tensor3 fast = t.multilinear(A, A, A);
  Tensor3 slow = reference::multilinear(t, A, A, A);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j)
      for (Index k = 0; k < 2; ++k) CHECK(fast(i, j, k) == doctest::Approx(slow(i, j, k)).epsilon(1e-12));
}

TEST_CASE("residual g vanishes at an eigenvector of a diagonal tensor") {
  Vector a(3);
  a << 2.0, 1.0, 0.5;
  SymTensor3 t = diagonal_tensor(a);
  CHECK(residual_g(t, Vector::Unit(3, 0)).norm() <= 1e-15);
}

TEST_CASE("g(u) is orthogonal to u for any unit u") {
  SymTensor3 t = random_sym_tensor(5, 12);
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(100 + s);
    Vector u = rng.unit_sphere(5);
    Vector g = residual_g(t, u);
    CHECK(std::abs(g.dot(u)) <= 1e-12 * std::max(1.0, g.norm()));
  }
}

TEST_CASE("residual g matches the direct two-term evaluation") {
  SymTensor3 t = random_sym_tensor(4, 13);
  Rng rng(14);
  Vector u = rng.unit_sphere(4);
  CHECK((residual_g(t, u) - reference::residual_g(t, u)).norm() <= 1e-12);
}

TEST_CASE("residual g rejects non-unit input") {
  SymTensor3 t = random_sym_tensor(3, 15);
  CHECK_THROWS_AS((void)residual_g(t, Vector::Constant(3, 1.0)), Error);
}

TEST_CASE("tangent basis is orthonormal and orthogonal to u") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(200 + s);
    Index d = 2 + static_cast<Index>(s % 5);
    Vector u = rng.unit_sphere(d);
    Matrix p = tangent_basis(u);
    CHECK((p.transpose() * p - Matrix::Identity(d - 1, d - 1)).norm() <= 1e-12);
    CHECK((p.transpose() * u).norm() <= 1e-12);
  }
}

TEST_CASE("projected Jacobian of a d=2 diagonal tensor at e1 is [-a1]") {
  Vector a(2);
  a << 1.7, 0.4;
  SymTensor3 t = diagonal_tensor(a);
  Matrix jp = projected_jacobian(t, Vector::Unit(2, 0));
  REQUIRE(jp.rows() == 1);
  CHECK(jp(0, 0) == doctest::Approx(-1.7).epsilon(1e-12));
}

TEST_CASE("projected Jacobian matches central finite differences") {
  for (std::uint64_t s = 0; s < 12; ++s) {
    Index d = 2 + static_cast<Index>(s % 5);
    SymTensor3 t = random_sym_tensor(d, 300 + s);
    Rng rng(400 + s);
    Vector u = rng.unit_sphere(d);
    Matrix basis = tangent_basis(u);
    Matrix exact = projected_jacobian(t, u);
    Matrix fd = reference::projected_jacobian_fd(t, u, basis);
    CHECK((exact - fd).norm() <= 1e-5 * std::max(1.0, exact.norm()));
  }
}

TEST_CASE("odeco tensor with positive weights has negative-definite Jacobians at components") {
  Vector w(4);
  w << 2.0, 1.5, 1.0, 0.7;
  Matrix q;
  SymTensor3 t = odeco_tensor(w, 16, &q);
  for (Index c = 0; c < 4; ++c) {
    Matrix jp = projected_jacobian(t, q.col(c));
    Matrix sym = 0.5 * (jp + jp.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
    CHECK(es.eigenvalues().maxCoeff() < 0.0);
  }
}

TEST_CASE("classification: diagonal d=2 positive weight is power stable negative") {
  Vector a(2);
  a << 1.3, 0.8;
  SymTensor3 t = diagonal_tensor(a);
  Eigenpair p;
  p.u = Vector::Unit(2, 0);
  p.lambda = 1.3;
  CHECK(classify(t, p) == Stability::power_stable_negative);
}

TEST_CASE("classification: engineered zero Jacobian eigenvalue is unstable") {
  // diagonal a plus T_{122} = a1/2 makes J_p(e1) = diag(0, -a1)
  Vector a(3);
  a << 1.0, 0.0, 0.0;
  SymTensor3 t = diagonal_tensor(a);
  t.set_sym(0, 1, 1, 0.5);
  Eigenpair p;
  p.u = Vector::Unit(3, 0);
  p.lambda = 1.0;
  CHECK(residual_g(t, p.u).norm() <= 1e-15);
  CHECK(classify(t, p) == Stability::unstable);
}

TEST_CASE("classification is invariant to the tangent basis choice") {
  SymTensor3 t = random_sym_tensor(4, 17);
  Rng rng(18);
  Vector u = rng.unit_sphere(4);
  Matrix p1 = tangent_basis(u);

  // random rotation of the basis spans the same subspace
  Matrix rot(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j) rot(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(rot);
  Matrix p2 = p1 * Matrix(qr.householderQ());

  Matrix j1 = p1.transpose() * grad_g(t, u) * p1;
  Matrix j2 = p2.transpose() * grad_g(t, u) * p2;
  Eigen::JacobiSVD<Matrix > s1(j1), s2(j2);
  CHECK((s1.singularValues() - s2.singularValues()).norm() <= 1e-10);
  Eigen::SelfAdjointEigenSolver<Matrix> e1(0.5 * (j1 + j1.transpose())), e2(0.5 * (j2 + j2.transpose()));
  CHECK((e1.eigenvalues() - e2.eigenvalues()).norm() <= 1e-10);
}

TEST_CASE("sign canonicalization flips negative eigenvalues and orients zero pairs") {
  Vector u(3);
  u << -0.6, 0.8, 0.0;
  double lambda = -2.0;
  canonicalize_sign(u, lambda);
  CHECK(lambda == 2.0);
  CHECK(u[0] == doctest::Approx(0.6));

  Vector z(2);
  z << -1.0, 0.0;
  double zero = 0.0;
  canonicalize_sign(z, zero);
  CHECK(z[0] == 1.0);
}

TEST_CASE("tensor file round trip, text and binary") {
  SymTensor3 t = random_sym_tensor(3, 19);
  for (const char* name : {"roundtrip_tensor.txt", "roundtrip_tensor.bin"}) {
    std::string path = std::string("/tmp/blvm_") + name;
    write_tensor(path, t);
    SymTensor3 back = read_tensor(path);
    REQUIRE(back.dim() == t.dim());
    for (std::size_t i = 0; i < t.raw().size(); ++i) CHECK(back.raw()[i] == t.raw()[i]);
    std::remove(path.c_str());
  }
}
