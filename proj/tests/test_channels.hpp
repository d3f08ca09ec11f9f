#pragma once

// Random-channel helpers shared by the channel-level test suites.

#include <random>
#include <vector>

#include "test_util.hpp"
#include "unext/quantum.hpp"

namespace testutil {

struct KrausChannel {
  unext::quantum::ChoiChannel ch;
  std::vector<unext::linalg::Mat> kraus;
};

// Random channel from a Haar-ish isometry sliced into `nk` Kraus blocks.
inline KrausChannel random_channel(std::mt19937_64& rng, int d_in, int d_out,
                                   int nk) {
  using unext::linalg::Mat;
  Mat g = random_complex(nk * d_out, d_in, rng);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  Mat v = q.leftCols(d_in);
  KrausChannel out;
  for (int x = 0; x < nk; ++x)
    out.kraus.push_back(v.middleRows(x * d_out, d_out));
  out.ch = unext::quantum::choi_from_kraus(out.kraus, d_in, d_out);
  return out;
}

inline unext::linalg::Mat kraus_apply(const std::vector<unext::linalg::Mat>& kraus,
                                      const unext::linalg::Mat& rho) {
  unext::linalg::Mat out =
      unext::linalg::Mat::Zero(kraus[0].rows(), kraus[0].rows());
  for (const auto& k : kraus) out += k * rho * k.adjoint();
  return out;
}

inline std::vector<unext::quantum::ChoiChannel> instrument_from(
    const KrausChannel& kc) {
  std::vector<unext::quantum::ChoiChannel> branches;
  int d_in = kc.ch.in_dim();
  int d_out = kc.ch.out_dim();
  for (const auto& k : kc.kraus)
    branches.push_back(unext::quantum::choi_from_kraus({k}, d_in, d_out));
  return branches;
}

}  // namespace testutil
