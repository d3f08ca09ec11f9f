#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "test_channels.hpp"
#include "test_util.hpp"
#include "unext/quantum.hpp"

using namespace unext;
using namespace unext::quantum;
using linalg::HermitianMatrix;
using linalg::Mat;
using linalg::SubsystemShape;
using nlohmann::json;
using testutil::instrument_from;
using testutil::kraus_apply;
using testutil::KrausChannel;
using testutil::random_channel;

namespace {

SubsystemShape mkshape(std::vector<int> dims, std::vector<std::string> labels) {
  SubsystemShape s;
  s.dims = std::move(dims);
  s.labels = std::move(labels);
  return s;
}

double fidelity_with_max_entangled(const HermitianMatrix& state, int d) {
  Mat phi = unnormalized_max_entangled(d) / d;
  return (phi * state.mat()).trace().real();
}

}  // namespace

TEST_CASE("maximally entangled operator") {
  Mat g = unnormalized_max_entangled(3);
  CHECK(g.trace().real() == doctest::Approx(3.0));
  HermitianMatrix h(g);
  auto eig = linalg::herm_eig(h);
  CHECK(eig.eigenvalues(0) == doctest::Approx(3.0));
  CHECK(eig.eigenvalues(1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("choi from kraus") {
  SUBCASE("identity kraus gives rank-one choi of trace 2") {
    ChoiChannel ch = choi_from_kraus({Mat::Identity(2, 2)}, 2, 2);
    CHECK(ch.choi.trace() == doctest::Approx(2.0));
    auto eig = linalg::herm_eig(ch.choi);
    CHECK(eig.eigenvalues(0) == doctest::Approx(2.0));
    CHECK(eig.eigenvalues(1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(ch.cp_only);
  }
  SUBCASE("constant-to-|0> kraus set") {
    Mat k0 = linalg::ket(2, 0) * linalg::ket(2, 0).adjoint();
    Mat k1 = linalg::ket(2, 0) * linalg::ket(2, 1).adjoint();
    ChoiChannel ch = choi_from_kraus({k0, k1}, 2, 2);
    Mat expect = linalg::kron(Mat::Identity(2, 2),
                              linalg::ket(2, 0) * linalg::ket(2, 0).adjoint());
    CHECK(testutil::frob_dist(ch.choi.mat(), expect) < 1e-12);
  }
  SUBCASE("pauli kraus set matches fully depolarizing choi") {
    Mat x(2, 2), y(2, 2), z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, linalg::cplx(0, -1), linalg::cplx(0, 1), 0;
    z << 1, 0, 0, -1;
    std::vector<Mat> kraus = {0.5 * Mat::Identity(2, 2), 0.5 * x, 0.5 * y,
                              0.5 * z};
    ChoiChannel ch = choi_from_kraus(kraus, 2, 2);
    CHECK(testutil::frob_dist(ch.choi.mat(), 0.5 * Mat::Identity(4, 4)) <
          1e-12);
    CHECK(testutil::frob_dist(ch.choi.mat(),
                              make_depolarizing(2, 1.0).choi.mat()) < 1e-12);
  }
  SUBCASE("incomplete kraus set is flagged cp_only") {
    Mat k0 = linalg::ket(2, 0) * linalg::ket(2, 0).adjoint();
    ChoiChannel ch = choi_from_kraus({k0}, 2, 2);
    CHECK(ch.cp_only);
    CHECK(ch.tp_residual() > 0.5);
  }
  SUBCASE("wrong dimensions rejected") {
    CHECK_THROWS_AS(choi_from_kraus({Mat::Identity(3, 3)}, 2, 2),
                    DimensionMismatch);
  }
}

TEST_CASE("identity channel acts as identity") {
  std::mt19937_64 rng(7);
  ChoiChannel id = make_identity(3);
  CHECK(id.tp_residual() < 1e-12);
  SubsystemShape shape = mkshape({3}, {"X"});
  for (int t = 0; t < 20; ++t) {
    HermitianMatrix rho = testutil::random_state(3, rng);
    HermitianMatrix out = apply_channel(id, rho, shape, {"X"});
    CHECK(testutil::frob_dist(out.mat(), rho.mat()) < 1e-9);
  }
}

TEST_CASE("erasure channel") {
  SUBCASE("p=0.5 qubit spectrum") {
    ChoiChannel ch = make_erasure(2, 0.5);
    auto eig = linalg::herm_eig(ch.choi);
    CHECK(eig.eigenvalues(0) == doctest::Approx(1.0));
    CHECK(eig.eigenvalues(1) == doctest::Approx(0.5));
    CHECK(eig.eigenvalues(2) == doctest::Approx(0.5));
    CHECK(eig.eigenvalues(3) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(ch.out_dim() == 3);
  }
  SUBCASE("p=1 erases to the flag") {
    std::mt19937_64 rng(11);
    ChoiChannel ch = make_erasure(2, 1.0);
    HermitianMatrix rho = testutil::random_state(2, rng);
    HermitianMatrix out = apply_channel(ch, rho, mkshape({2}, {"A"}), {"A"});
    Mat flag = linalg::ket(3, 2) * linalg::ket(3, 2).adjoint();
    CHECK(testutil::frob_dist(out.mat(), flag) < 1e-12);
  }
  SUBCASE("matches the state-level formula") {
    std::mt19937_64 rng(13);
    ChoiChannel ch = make_erasure(3, 0.35);
    SubsystemShape shape = mkshape({3}, {"A"});
    for (int t = 0; t < 20; ++t) {
      HermitianMatrix rho = testutil::random_state(3, rng);
      Mat expect = Mat::Zero(4, 4);
      expect.topLeftCorner(3, 3) = 0.65 * rho.mat();
      expect(3, 3) = 0.35;
      HermitianMatrix out = apply_channel(ch, rho, shape, {"A"});
      CHECK(testutil::frob_dist(out.mat(), expect) < 1e-9);
    }
  }
  SUBCASE("probability range enforced") {
    CHECK_THROWS_AS(make_erasure(2, -0.1), InvalidProbability);
    CHECK_THROWS_AS(make_erasure(2, 1.1), InvalidProbability);
  }
}

TEST_CASE("depolarizing channel") {
  SUBCASE("endpoints") {
    CHECK(testutil::frob_dist(make_depolarizing(2, 0.0).choi.mat(),
                              unnormalized_max_entangled(2)) < 1e-12);
    CHECK(testutil::frob_dist(make_depolarizing(2, 1.0).choi.mat(),
                              0.5 * Mat::Identity(4, 4)) < 1e-12);
    CHECK_THROWS_AS(make_depolarizing(2, 4.0 / 3.0 + 1e-6),
                    InvalidProbability);
  }
  SUBCASE("acting on half a maximally entangled state is isotropic") {
    SubsystemShape shape = mkshape({2, 2}, {"R", "A"});
    for (double p : {0.2, 1.0 / 3.0, 0.4}) {
      ChoiChannel ch = make_depolarizing(2, p);
      HermitianMatrix phi(unnormalized_max_entangled(2) / 2.0);
      HermitianMatrix out = apply_channel(ch, phi, shape, {"A"});
      double f = fidelity_with_max_entangled(out, 2);
      CHECK(f == doctest::Approx(1.0 - p + p / 4.0).epsilon(1e-10));
      CHECK(out.trace() == doctest::Approx(1.0));
    }
  }
  SUBCASE("matches the state-level formula") {
    std::mt19937_64 rng(17);
    ChoiChannel ch = make_depolarizing(3, 0.45);
    SubsystemShape shape = mkshape({3}, {"A"});
    for (int t = 0; t < 20; ++t) {
      HermitianMatrix rho = testutil::random_state(3, rng);
      Mat expect = 0.55 * rho.mat() + 0.45 * Mat::Identity(3, 3) / 3.0;
      HermitianMatrix out = apply_channel(ch, rho, shape, {"A"});
      CHECK(testutil::frob_dist(out.mat(), expect) < 1e-9);
    }
  }
}

TEST_CASE("replacer channel") {
  std::mt19937_64 rng(19);
  HermitianMatrix sigma = testutil::random_state(3, rng);
  ChoiChannel ch = make_replacer(2, sigma);
  Mat expect = linalg::kron(Mat::Identity(2, 2), sigma.mat());
  CHECK(testutil::frob_dist(ch.choi.mat(), expect) < 1e-12);
  HermitianMatrix rho = testutil::random_state(2, rng);
  HermitianMatrix out = apply_channel(ch, rho, mkshape({2}, {"A"}), {"A"});
  CHECK(testutil::frob_dist(out.mat(), sigma.mat()) < 1e-9);
  CHECK_THROWS_AS(make_replacer(2, HermitianMatrix(2.0 * sigma.mat())),
                  InvalidChannel);
}

TEST_CASE("tensor product of channels") {
  SUBCASE("identity (x) identity equals identity on the product") {
    ChoiChannel t = tensor_channel(make_identity(2), make_identity(3));
    CHECK(t.in_dim() == 6);
    CHECK(testutil::frob_dist(t.choi.mat(), unnormalized_max_entangled(6)) <
          1e-12);
  }
  SUBCASE("acts factor-wise on product states") {
    std::mt19937_64 rng(23);
    KrausChannel n1 = random_channel(rng, 2, 2, 2);
    KrausChannel n2 = random_channel(rng, 2, 3, 2);
    ChoiChannel t = tensor_channel(n1.ch, n2.ch);
    HermitianMatrix r1 = testutil::random_state(2, rng);
    HermitianMatrix r2 = testutil::random_state(2, rng);
    HermitianMatrix joint(linalg::kron(r1.mat(), r2.mat()));
    SubsystemShape shape = mkshape({2, 2}, {"X", "Y"});
    HermitianMatrix out = apply_channel(t, joint, shape, {"X", "Y"});
    Mat expect = linalg::kron(kraus_apply(n1.kraus, r1.mat()),
                              kraus_apply(n2.kraus, r2.mat()));
    CHECK(testutil::frob_dist(out.mat(), expect) < 1e-9);
  }
}

TEST_CASE("apply_channel bookkeeping") {
  std::mt19937_64 rng(29);
  ChoiChannel ch = random_channel(rng, 2, 3, 2).ch;
  SubsystemShape shape = mkshape({4, 2}, {"R", "A"});
  HermitianMatrix rho = testutil::random_state(8, rng);

  auto labeled = apply_channel_labeled(ch, rho, shape, {"A"});
  CHECK(labeled.shape.labels == std::vector<std::string>{"R", "B"});
  CHECK(labeled.shape.dims == std::vector<int>{4, 3});
  CHECK(labeled.op.trace() == doctest::Approx(1.0));

  SUBCASE("input dimension mismatch") {
    CHECK_THROWS_AS(apply_channel(ch, rho, shape, {"R"}), DimensionMismatch);
  }
  SUBCASE("output label collision") {
    SubsystemShape bad = mkshape({4, 2}, {"B", "A"});
    CHECK_THROWS_AS(apply_channel(ch, rho, bad, {"A"}), DimensionMismatch);
  }
  SUBCASE("untouched factor is preserved") {
    HermitianMatrix r1 = testutil::random_state(4, rng);
    HermitianMatrix r2 = testutil::random_state(2, rng);
    HermitianMatrix joint(linalg::kron(r1.mat(), r2.mat()));
    HermitianMatrix out = apply_channel(ch, joint, shape, {"A"});
    SubsystemShape out_shape = mkshape({4, 3}, {"R", "B"});
    HermitianMatrix marg = linalg::partial_trace(out, out_shape, {"R"});
    CHECK(testutil::frob_dist(marg.mat(), r1.mat()) < 1e-9);
  }
}

TEST_CASE("semicausal erasure channel") {
  SUBCASE("choi trace and trace preservation") {
    BipartiteChannel bc = make_semicausal_erasure(2, 0.25);
    CHECK(bc.ch.choi.trace() == doctest::Approx(2.0));
    CHECK(bc.ch.tp_residual() < 1e-12);
    CHECK(bc.semicausal_checked);
    CHECK(bc.semicausal_residual() < 1e-12);
    CHECK(bc.dAp() == 3);
    CHECK(bc.dBp() == 3);
    CHECK(bc.dB() == 1);
  }
  SUBCASE("action matches the two-branch formula") {
    std::mt19937_64 rng(31);
    double p = 0.3;
    BipartiteChannel bc = make_semicausal_erasure(2, p);
    HermitianMatrix rho = testutil::random_state(2, rng);
    SubsystemShape shape = mkshape({2, 1}, {"X", "Y"});
    HermitianMatrix out = apply_channel(bc.ch, rho, shape, {"X", "Y"});
    Mat emb = Mat::Zero(3, 3);
    emb.topLeftCorner(2, 2) = rho.mat();
    Mat flag = linalg::ket(3, 2) * linalg::ket(3, 2).adjoint();
    Mat expect = p * linalg::kron(emb, flag) + (1 - p) * linalg::kron(flag, emb);
    CHECK(testutil::frob_dist(out.mat(), expect) < 1e-9);
  }
  SUBCASE("swap channel signals and is rejected") {
    Mat swap = Mat::Zero(4, 4);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) swap(j * 2 + i, i * 2 + j) = 1.0;
    ChoiChannel sw = choi_from_kraus({swap}, 4, 4);
    BipartiteChannel bc = bipartite_from_choi(sw.choi.mat(), 2, 2, 2, 2);
    CHECK(bc.semicausal_residual() > 0.4);
    CHECK_THROWS_AS(check_semicausal(bc), InvalidChannel);
  }
}

TEST_CASE("flagged erasure channel") {
  SUBCASE("trace preservation across the parameter grid") {
    for (double p : {0.0, 0.3, 1.0})
      for (double q : {0.0, 0.2, 1.0}) {
        BipartiteChannel bc = make_flagged_erasure(2, p, q);
        CHECK(bc.ch.tp_residual() < 1e-12);
        CHECK(bc.ch.psd_residual() < 1e-12);
      }
  }
  SUBCASE("q=0, p=0 transmits with flag |1>") {
    std::mt19937_64 rng(37);
    BipartiteChannel bc = make_flagged_erasure(2, 0.0, 0.0);
    HermitianMatrix rho = testutil::random_state(2, rng);
    SubsystemShape shape = mkshape({2, 1}, {"X", "Y"});
    HermitianMatrix out = apply_channel(bc.ch, rho, shape, {"X", "Y"});
    Mat emb = Mat::Zero(3, 3);
    emb.topLeftCorner(2, 2) = rho.mat();
    Mat one = linalg::ket(2, 1) * linalg::ket(2, 1).adjoint();
    CHECK(testutil::frob_dist(out.mat(), linalg::kron(one, emb)) < 1e-9);
  }
  SUBCASE("q=1 makes the flag marginal maximally mixed") {
    std::mt19937_64 rng(41);
    BipartiteChannel bc = make_flagged_erasure(2, 0.6, 1.0);
    HermitianMatrix rho = testutil::random_state(2, rng);
    SubsystemShape shape = mkshape({2, 1}, {"X", "Y"});
    auto out = apply_channel_labeled(bc.ch, rho, shape, {"X", "Y"});
    HermitianMatrix flag = linalg::partial_trace(out.op, out.shape, {"Ap"});
    CHECK(testutil::frob_dist(flag.mat(), 0.5 * Mat::Identity(2, 2)) < 1e-9);
  }
  SUBCASE("general action matches the two-branch formula") {
    std::mt19937_64 rng(43);
    double p = 0.3, q = 0.2;
    BipartiteChannel bc = make_flagged_erasure(2, p, q);
    HermitianMatrix rho = testutil::random_state(2, rng);
    SubsystemShape shape = mkshape({2, 1}, {"X", "Y"});
    HermitianMatrix out = apply_channel(bc.ch, rho, shape, {"X", "Y"});
    Mat emb = Mat::Zero(3, 3);
    emb.topLeftCorner(2, 2) = rho.mat();
    Mat e = linalg::ket(3, 2) * linalg::ket(3, 2).adjoint();
    auto dq = [q](int bit) {
      Mat pure = linalg::ket(2, bit) * linalg::ket(2, bit).adjoint();
      return Mat((1 - q) * pure + q * 0.5 * Mat::Identity(2, 2));
    };
    Mat expect = (1 - p) * linalg::kron(dq(1), emb) + p * linalg::kron(dq(0), e);
    CHECK(testutil::frob_dist(out.mat(), expect) < 1e-9);
  }
}

TEST_CASE("identity superchannel") {
  SuperchannelChoi s = identity_superchannel(2, 3);
  SuperchannelReport rep = validate_superchannel(s);
  CHECK(rep.psd_residual <= 1e-10);
  CHECK(rep.tp_residual <= 1e-10);
  CHECK(rep.nonsignaling_residual <= 1e-10);

  std::mt19937_64 rng(47);
  for (int t = 0; t < 5; ++t) {
    ChoiChannel n = random_channel(rng, 2, 3, 2).ch;
    ChoiChannel out = superchannel_apply(s, n);
    CHECK(testutil::frob_dist(out.choi.mat(), n.choi.mat()) < 1e-8);
  }
}

TEST_CASE("pre/post superchannel equals direct composition") {
  std::mt19937_64 rng(53);
  KrausChannel pre = random_channel(rng, 2, 3, 2);
  KrausChannel mid = random_channel(rng, 3, 2, 2);
  KrausChannel post = random_channel(rng, 2, 2, 2);
  SuperchannelChoi s = superchannel_pre_post(pre.ch, post.ch);
  ChoiChannel out = superchannel_apply(s, mid.ch);

  std::vector<Mat> composed;
  for (const Mat& kd : post.kraus)
    for (const Mat& kn : mid.kraus)
      for (const Mat& ke : pre.kraus) composed.push_back(kd * kn * ke);
  ChoiChannel direct = choi_from_kraus(composed, 2, 2);
  CHECK(testutil::frob_dist(out.choi.mat(), direct.choi.mat()) < 1e-10);
}

TEST_CASE("trace-and-replace superchannel is constant") {
  std::mt19937_64 rng(59);
  HermitianMatrix tau = testutil::random_state(2, rng);
  SuperchannelChoi s =
      superchannel_pre_post(make_identity(2), make_replacer(3, tau));
  ChoiChannel n1 = random_channel(rng, 2, 3, 2).ch;
  ChoiChannel n2 = random_channel(rng, 2, 3, 3).ch;
  ChoiChannel o1 = superchannel_apply(s, n1);
  ChoiChannel o2 = superchannel_apply(s, n2);
  CHECK(testutil::frob_dist(o1.choi.mat(), o2.choi.mat()) < 1e-10);
  Mat expect = linalg::kron(Mat::Identity(2, 2), tau.mat());
  CHECK(testutil::frob_dist(o1.choi.mat(), expect) < 1e-10);
}

TEST_CASE("one-way LOCC superchannel") {
  std::mt19937_64 rng(61);
  std::vector<ChoiChannel> instrument;
  for (int x = 0; x < 2; ++x) {
    Mat k = linalg::ket(2, x) * linalg::ket(2, x).adjoint();
    instrument.push_back(choi_from_kraus({k}, 2, 2));
    CHECK(instrument.back().cp_only);
  }
  std::vector<ChoiChannel> posts = {random_channel(rng, 3, 3, 2).ch,
                                    random_channel(rng, 3, 3, 2).ch};
  SuperchannelChoi s = superchannel_1w_locc(instrument, posts);
  SuperchannelReport rep = validate_superchannel(s);
  CHECK(rep.ok(1e-7));

  SUBCASE("applying gives the measure-then-process composition") {
    KrausChannel mid = random_channel(rng, 2, 3, 2);
    ChoiChannel out = superchannel_apply(s, mid.ch);
    CHECK(out.tp_residual() < 1e-9);
    std::mt19937_64 rng2(67);
    HermitianMatrix rho = testutil::random_state(2, rng2);
    HermitianMatrix got =
        apply_channel(out, rho, mkshape({2}, {"C"}), {"C"});
    Mat expect = Mat::Zero(3, 3);
    for (int x = 0; x < 2; ++x) {
      Mat proj = linalg::ket(2, x) * linalg::ket(2, x).adjoint();
      Mat branch = kraus_apply(mid.kraus, proj * rho.mat() * proj);
      HermitianMatrix b(branch, 1e-6);
      expect += apply_channel(posts[x], b, mkshape({3}, {"B"}), {"B"}).mat();
    }
    CHECK(testutil::frob_dist(got.mat(), expect) < 1e-8);
  }

  SUBCASE("perturbed choi fails validation") {
    SuperchannelChoi bad = s;
    Mat noise = Mat::Zero(bad.choi.dim(), bad.choi.dim());
    noise(0, 0) = 0.05;
    bad.choi = HermitianMatrix(bad.choi.mat() + noise);
    SuperchannelReport r2 = validate_superchannel(bad);
    CHECK_FALSE(r2.ok(1e-7));
    CHECK(r2.tp_residual > 1e-3);
  }
  SUBCASE("instrument branches must sum to a channel") {
    std::vector<ChoiChannel> short_instr = {instrument[0]};
    std::vector<ChoiChannel> one_post = {posts[0]};
    CHECK_THROWS_AS(superchannel_1w_locc(short_instr, one_post),
                    InvalidChannel);
  }
}

TEST_CASE("superchannel application preserves channel validity") {
  std::mt19937_64 rng(71);
  for (int t = 0; t < 20; ++t) {
    KrausChannel pre = random_channel(rng, 2, 2, 2);
    std::vector<ChoiChannel> instrument = instrument_from(pre);
    std::vector<ChoiChannel> posts;
    for (size_t x = 0; x < instrument.size(); ++x)
      posts.push_back(random_channel(rng, 2, 2, 2).ch);
    SuperchannelChoi s = superchannel_1w_locc(instrument, posts);
    ChoiChannel n = random_channel(rng, 2, 2, 2).ch;
    ChoiChannel out = superchannel_apply(s, n);
    CHECK(out.psd_residual() <= 1e-8);
    CHECK(out.tp_residual() <= 1e-7);
  }
}

TEST_CASE("random psd with wrong marginals is flagged") {
  std::mt19937_64 rng(73);
  SuperchannelChoi s = identity_superchannel(2, 2);
  HermitianMatrix noise = testutil::random_psd(s.choi.dim(), rng);
  s.choi = HermitianMatrix(noise.mat() / noise.trace() * 4.0);
  SuperchannelReport rep = validate_superchannel(s);
  CHECK(rep.tp_residual > 1e-3);
}

TEST_CASE("channel descriptors round trip through json") {
  SUBCASE("named kinds") {
    json j = {{"kind", "erasure"}, {"d", 2}, {"p", 0.5}};
    ChannelDescriptor desc = parse_channel(j);
    CHECK_FALSE(desc.bipartite);
    CHECK(testutil::frob_dist(desc.p2p.choi.mat(),
                              make_erasure(2, 0.5).choi.mat()) < 1e-12);

    json js = {{"kind", "semicausal_erasure"}, {"d", 2}, {"p", 0.25}};
    ChannelDescriptor ds = parse_channel(js);
    CHECK(ds.bipartite);
    CHECK(testutil::frob_dist(ds.bip.ch.choi.mat(),
                              make_semicausal_erasure(2, 0.25).ch.choi.mat()) <
          1e-12);

    json jf = {{"kind", "flagged_erasure"}, {"d", 2}, {"p", 0.3}, {"q", 0.2}};
    ChannelDescriptor df = parse_channel(jf);
    CHECK(df.bipartite);
    CHECK(df.params["q"] == 0.2);
  }
  SUBCASE("custom point-to-point with outputs listed first") {
    ChoiChannel dep = make_depolarizing(2, 0.3);
    json j = channel_to_json(dep);
    // Scramble the stored order: present the same operator as (B, A).
    HermitianMatrix permuted =
        linalg::permute_subsystems(dep.choi, dep.shape, {"B", "A"});
    json scrambled = {{"kind", "custom"},
                      {"choi",
                       {{"dims", {2, 2}},
                        {"labels", {"B", "A"}},
                        {"inputs", {"A"}},
                        {"re", mat_to_json_re(permuted.mat())},
                        {"im", mat_to_json_im(permuted.mat())}}}};
    for (const json& doc : {j, scrambled}) {
      ChannelDescriptor desc = parse_channel(doc);
      CHECK_FALSE(desc.bipartite);
      CHECK(testutil::frob_dist(desc.p2p.choi.mat(), dep.choi.mat()) < 1e-12);
    }
  }
  SUBCASE("custom bipartite") {
    BipartiteChannel bc = make_flagged_erasure(2, 0.3, 0.2);
    json j = channel_to_json(bc);
    ChannelDescriptor desc = parse_channel(j);
    CHECK(desc.bipartite);
    CHECK(testutil::frob_dist(desc.bip.ch.choi.mat(), bc.ch.choi.mat()) <
          1e-12);
    CHECK(desc.bip.dB() == 1);
  }
  SUBCASE("malformed descriptors throw") {
    CHECK_THROWS(parse_channel(json{{"kind", "erasure"}, {"d", 2}}));
    CHECK_THROWS(parse_channel(json{{"kind", "unknown"}, {"d", 2}}));
    CHECK_THROWS_AS(parse_channel(json{{"kind", "erasure"}, {"d", 2},
                                       {"p", 1.5}}),
                    InvalidProbability);
  }
}

TEST_CASE("superchannel json round trip") {
  SuperchannelChoi s = identity_superchannel(2, 3);
  json j = superchannel_to_json(s);
  SuperchannelChoi back = superchannel_from_json(j);
  CHECK(testutil::frob_dist(back.choi.mat(), s.choi.mat()) < 1e-12);
  CHECK(back.b_labels == s.b_labels);
  CHECK(back.shape.dims == s.shape.dims);
  SuperchannelReport rep = validate_superchannel(back);
  CHECK(rep.ok(1e-9));
}
