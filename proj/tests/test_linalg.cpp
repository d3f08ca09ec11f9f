#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_util.hpp"
#include "unext/linalg.hpp"

using namespace unext::linalg;
using testutil::frob_dist;

namespace {
Mat diag2(double a, double b) {
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

// Density operator of the maximally entangled pair of qudits.
HermitianMatrix phi_state(int d) {
  Mat v = Mat::Zero(d * d, 1);
  for (int i = 0; i < d; ++i) v(i * d + i, 0) = 1.0 / std::sqrt(double(d));
  return HermitianMatrix(v * v.adjoint());
}
}  // namespace

TEST_CASE("construction symmetrizes and rejects non-Hermitian input") {
  Mat m(2, 2);
  m << 1.0, cplx(0.5, 1e-12), cplx(0.5, -1e-12), 2.0;
  HermitianMatrix h(m);
  CHECK(frob_dist(h.mat(), h.mat().adjoint()) == 0.0);

  Mat bad(2, 2);
  bad << 1.0, 1.0, -1.0, 1.0;
  CHECK_THROWS_AS(HermitianMatrix{bad}, NonHermitian);
}

TEST_CASE("herm_eig basics") {
  HermitianMatrix id = HermitianMatrix::Identity(2);
  EigResult e = herm_eig(id);
  CHECK(e.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(e.eigenvalues(1) == doctest::Approx(1.0));
  CHECK(frob_dist(e.eigenvectors * e.eigenvectors.adjoint(),
                  Mat::Identity(2, 2)) < 1e-12);

  EigResult d = herm_eig(HermitianMatrix(diag2(3, -1)));
  CHECK(d.eigenvalues(0) == doctest::Approx(3.0));
  CHECK(d.eigenvalues(1) == doctest::Approx(-1.0));

  Mat px(2, 2);
  px << 0, 1, 1, 0;
  EigResult x = herm_eig(HermitianMatrix(px));
  CHECK(x.eigenvalues(0) == doctest::Approx(1.0));
  CHECK(x.eigenvalues(1) == doctest::Approx(-1.0));
}

TEST_CASE("herm_eig round-trip on random 64x64 input") {
  std::mt19937_64 rng(7);
  HermitianMatrix m = testutil::random_hermitian(64, rng);
  EigResult e = herm_eig(m);
  Mat rec = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.adjoint();
  CHECK(frob_dist(rec, m.mat()) <= 1e-8 * std::max(1.0, m.frob_norm()));
  for (int i = 0; i + 1 < 64; ++i)
    CHECK(e.eigenvalues(i) >= e.eigenvalues(i + 1));
}

TEST_CASE("support projector") {
  HermitianMatrix p = support_projector(HermitianMatrix(diag2(1, 0)));
  CHECK(frob_dist(p.mat(), diag2(1, 0)) < 1e-12);

  std::mt19937_64 rng(11);
  HermitianMatrix full = testutil::random_state(5, rng, 1e-2);
  HermitianMatrix pf = support_projector(full);
  CHECK(frob_dist(pf.mat(), Mat::Identity(5, 5)) < 1e-10);

  HermitianMatrix thin = support_projector(HermitianMatrix(diag2(1e-16, 1)), 1e-9);
  CHECK(frob_dist(thin.mat(), diag2(0, 1)) < 1e-12);

  CHECK_THROWS_AS(support_projector(HermitianMatrix(diag2(-1, 1))),
                  NegativeOperator);

  // Idempotence and commutation with the input.
  HermitianMatrix m = testutil::random_psd(6, rng);
  HermitianMatrix pm = support_projector(m);
  CHECK(frob_dist(pm.mat() * pm.mat(), pm.mat()) <= 1e-8);
  CHECK(frob_dist(pm.mat() * m.mat(), m.mat() * pm.mat()) <= 1e-8);
}

TEST_CASE("support projector is basis-stable") {
  std::mt19937_64 rng(13);
  Mat low = Mat::Zero(5, 5);
  low(0, 0) = 2.0;
  low(1, 1) = 0.5;
  low(2, 2) = 1e-14;
  HermitianMatrix m(low);
  Mat u = testutil::random_unitary(5, rng);
  HermitianMatrix mu(u * m.mat() * u.adjoint(), 1e-8);
  Mat lhs = support_projector(mu).mat();
  Mat rhs = u * support_projector(m).mat() * u.adjoint();
  CHECK(frob_dist(lhs, rhs) <= 1e-7);
}

TEST_CASE("matrix powers on support") {
  CHECK(frob_dist(mat_power_on_support(HermitianMatrix(diag2(4, 0)), 0.5).mat(),
                  diag2(2, 0)) < 1e-12);
  CHECK(frob_dist(mat_power_on_support(HermitianMatrix(diag2(2, 0)), -1).mat(),
                  diag2(0.5, 0)) < 1e-12);
  CHECK(frob_dist(
            mat_power_on_support(HermitianMatrix::Identity(3), -0.5).mat(),
            Mat::Identity(3, 3)) < 1e-12);
  // p = 1 restricts to the support.
  CHECK(frob_dist(mat_power_on_support(HermitianMatrix(diag2(3, 0)), 1).mat(),
                  diag2(3, 0)) < 1e-12);
}

TEST_CASE("weighted geometric mean") {
  HermitianMatrix id = HermitianMatrix::Identity(3);
  CHECK(frob_dist(weighted_geometric_mean(id, id, 0.37).mat(),
                  Mat::Identity(3, 3)) < 1e-12);

  HermitianMatrix x(diag2(4, 1)), y(diag2(1, 4));
  CHECK(frob_dist(weighted_geometric_mean(x, y, 0.5).mat(), diag2(2, 2)) <
        1e-10);

  std::mt19937_64 rng(17);
  HermitianMatrix r = testutil::random_psd(4, rng);
  CHECK(frob_dist(weighted_geometric_mean(r, r, 0.73).mat(), r.mat()) < 1e-8);
}

TEST_CASE("geometric mean symmetry and continuity in alpha") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    HermitianMatrix x = testutil::random_state(4, rng, 1e-2);
    HermitianMatrix y = testutil::random_state(4, rng, 1e-2);
    for (double alpha : {0.25, 0.5, 0.9}) {
      Mat a = weighted_geometric_mean(x, y, alpha).mat();
      Mat b = weighted_geometric_mean(y, x, 1.0 - alpha).mat();
      CHECK(frob_dist(a, b) <= 1e-8);
    }
    for (double a0 : {0.5, 1.0}) {
      Mat at = weighted_geometric_mean(x, y, a0).mat();
      Mat near = weighted_geometric_mean(x, y, a0 - 1e-7).mat();
      CHECK(frob_dist(at, near) <= 1e-5);
    }
    CHECK(frob_dist(weighted_geometric_mean(x, y, 1.0).mat(), y.mat()) < 1e-8);
  }
}

TEST_CASE("geometric mean support precondition for alpha > 1") {
  HermitianMatrix x(diag2(1, 0));
  HermitianMatrix y(diag2(0.5, 0.5));
  CHECK_THROWS_AS(weighted_geometric_mean(x, y, 1.5), SupportViolation);
  CHECK_NOTHROW(weighted_geometric_mean(y, x, 1.5));
}

TEST_CASE("partial trace") {
  std::mt19937_64 rng(23);
  HermitianMatrix rho = testutil::random_state(2, rng);
  HermitianMatrix sig = testutil::random_psd(3, rng);
  HermitianMatrix prod(kron(rho.mat(), sig.mat()), 1e-8);
  SubsystemShape sh{{2, 3}, {"A", "B"}};
  Mat red = partial_trace(prod, sh, {"A"}).mat();
  CHECK(frob_dist(red, sig.trace() * rho.mat()) < 1e-10);

  Mat redB = partial_trace(prod, sh, {"B"}).mat();
  CHECK(frob_dist(redB, rho.trace() * sig.mat()) < 1e-10);

  HermitianMatrix phi = phi_state(2);
  SubsystemShape qq{{2, 2}, {"A", "B"}};
  CHECK(frob_dist(partial_trace(phi, qq, {"A"}).mat(),
                  0.5 * Mat::Identity(2, 2)) < 1e-12);

  // Unnormalized maximally entangled operator of the identity channel:
  // tracing the output leaves the identity on the input copy.
  Mat gamma = 2.0 * phi_state(2).mat();
  CHECK(frob_dist(
            partial_trace(HermitianMatrix(gamma), qq, {"A"}).mat(),
            Mat::Identity(2, 2)) < 1e-12);

  CHECK(partial_trace(prod, sh, {}).mat()(0, 0).real() ==
        doctest::Approx(prod.trace()));
  CHECK_THROWS_AS(partial_trace(prod, sh, {"C"}), ShapeMismatch);
}

TEST_CASE("partial trace preserves trace and is linear") {
  std::mt19937_64 rng(29);
  SubsystemShape sh{{2, 2, 3}, {"A", "B", "C"}};
  HermitianMatrix m = testutil::random_hermitian(12, rng);
  HermitianMatrix n = testutil::random_hermitian(12, rng);
  Mat lhs = partial_trace(HermitianMatrix(m.mat() + 2.0 * n.mat(), 1e-8), sh,
                          {"A", "C"})
                .mat();
  Mat rhs = partial_trace(m, sh, {"A", "C"}).mat() +
            2.0 * partial_trace(n, sh, {"A", "C"}).mat();
  CHECK(frob_dist(lhs, rhs) < 1e-10);
  CHECK(partial_trace(m, sh, {"B"}).trace() == doctest::Approx(m.trace()));
}

TEST_CASE("partial transpose") {
  std::mt19937_64 rng(31);
  SubsystemShape qq{{2, 2}, {"A", "B"}};

  HermitianMatrix rho = testutil::random_state(2, rng);
  HermitianMatrix sig = testutil::random_state(2, rng);
  HermitianMatrix prod(kron(rho.mat(), sig.mat()), 1e-8);
  EigResult before = herm_eig(prod);
  EigResult after = herm_eig(partial_transpose(prod, qq, {"B"}));
  CHECK((before.eigenvalues - after.eigenvalues).norm() < 1e-10);

  EigResult pt = herm_eig(partial_transpose(phi_state(2), qq, {"B"}));
  CHECK(pt.eigenvalues(0) == doctest::Approx(0.5));
  CHECK(pt.eigenvalues(3) == doctest::Approx(-0.5));

  Mat d = Mat::Zero(4, 4);
  d.diagonal() << 1, 2, 3, 4;
  CHECK(frob_dist(partial_transpose(HermitianMatrix(d), qq, {"A"}).mat(), d) <
        1e-12);

  // Involution.
  HermitianMatrix m = testutil::random_hermitian(4, rng);
  CHECK(frob_dist(
            partial_transpose(partial_transpose(m, qq, {"B"}), qq, {"B"}).mat(),
            m.mat()) < 1e-12);
}

TEST_CASE("partial trace after partial transpose on traced labels") {
  std::mt19937_64 rng(37);
  SubsystemShape sh{{2, 3, 2}, {"A", "B", "C"}};
  HermitianMatrix m = testutil::random_hermitian(12, rng);
  Mat a = partial_trace(partial_transpose(m, sh, {"B"}), sh, {"A", "C"}).mat();
  Mat b = partial_trace(m, sh, {"A", "C"}).mat();
  CHECK(frob_dist(a, b) < 1e-10);
}

TEST_CASE("permutation unitaries") {
  Mat id = permutation_unitary(3, 2, {0, 1, 2});
  CHECK(frob_dist(id, Mat::Identity(8, 8)) == 0.0);

  Mat swap = permutation_unitary(2, 2, {1, 0});
  Mat expected = Mat::Zero(4, 4);
  expected(0, 0) = expected(3, 3) = 1;
  expected(1, 2) = expected(2, 1) = 1;
  CHECK(frob_dist(swap, expected) == 0.0);

  // 3-cycle 0->1->2->0 moves component i to slot pi[i].
  std::vector<int> cyc{1, 2, 0};
  Mat w = permutation_unitary(3, 2, cyc);
  Mat v = kron(kron(ket(2, 1), ket(2, 0)), ket(2, 1));  // |1 0 1>
  Mat wv = w * v;
  Mat target = kron(kron(ket(2, 1), ket(2, 1)), ket(2, 0));  // |1 1 0>
  CHECK(frob_dist(wv, target) == 0.0);

  // Composition W^pi W^rho = W^{pi o rho}.
  std::vector<int> rho{2, 0, 1};
  std::vector<int> comp(3);
  for (int i = 0; i < 3; ++i) comp[i] = cyc[rho[i]];
  CHECK(frob_dist(permutation_unitary(3, 2, cyc) * permutation_unitary(3, 2, rho),
                  permutation_unitary(3, 2, comp)) == 0.0);

  CHECK_THROWS_AS(permutation_unitary(3, 2, {0, 0, 1}), InvalidPermutation);
  CHECK_THROWS_AS(permutation_unitary(3, 2, {0, 1}), InvalidPermutation);
}

TEST_CASE("subsystem reordering") {
  std::mt19937_64 rng(41);
  HermitianMatrix a = testutil::random_hermitian(2, rng);
  HermitianMatrix b = testutil::random_hermitian(3, rng);
  HermitianMatrix c = testutil::random_hermitian(2, rng);
  Mat abc = kron(kron(a.mat(), b.mat()), c.mat());
  SubsystemShape sh{{2, 3, 2}, {"A", "B", "C"}};
  Mat cab = permute_subsystems(HermitianMatrix(abc, 1e-8), sh, {"C", "A", "B"}).mat();
  Mat expected = kron(kron(c.mat(), a.mat()), b.mat());
  CHECK(frob_dist(cab, expected) < 1e-12);
}

TEST_CASE("embedding with identity") {
  std::mt19937_64 rng(43);
  HermitianMatrix op = testutil::random_hermitian(6, rng);
  SubsystemShape sh{{2, 2, 3}, {"X", "Y", "Z"}};
  // op lives on (Z, X); embedding inserts I on Y and reorders to (X, Y, Z).
  HermitianMatrix e = embed_with_identity(op, {"Z", "X"}, sh);
  CHECK(e.dim() == 12);
  Mat back = partial_trace(e, sh, {"Z", "X"}).mat();
  SubsystemShape zx{{3, 2}, {"Z", "X"}};
  Mat opzx = permute_subsystems(op, SubsystemShape{{3, 2}, {"Z", "X"}},
                                {"Z", "X"})
                 .mat();
  // partial_trace keeps shape order (X before Z), so compare after reorder.
  Mat expected = 2.0 * permute_subsystems(op, zx, {"X", "Z"}).mat();
  CHECK(frob_dist(back, expected) < 1e-10);
  CHECK(frob_dist(opzx, op.mat()) == 0.0);
}

TEST_CASE("min eigenvalue helper") {
  CHECK(min_eigenvalue(HermitianMatrix(diag2(3, -2))) == doctest::Approx(-2.0));
}
