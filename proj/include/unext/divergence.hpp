#pragma once

#include <unext/linalg.hpp>
#include <unext/quantum.hpp>

// Geometric Renyi and Belavkin-Staszewski divergences for states and channels.
// All logarithms are base 2; divergences are reported in bits.  A violated
// support condition yields value = +infinity (a tagged value, not an error),
// so callers can propagate "infinitely distinguishable" through optimizations.

namespace unext::divergence {

using linalg::HermitianMatrix;
using linalg::Mat;

// Result of a divergence evaluation.  `value` is in bits and is +infinity
// exactly when `support_condition_met` is false or the supports are disjoint.
struct DivergenceValue {
    double value = 0.0;
    double alpha = 1.0;
    bool support_condition_met = true;

    bool finite() const;
};

// Schur complement of omega with respect to the support projector of tau:
// with blocks taken against Pi = supp(tau), returns
//   omega_00 - omega_01 * pinv(omega_11) * omega_10.
// Equals omega whenever supp(omega) is contained in supp(tau).  This is the
// operator that enters every alpha < 1 evaluation below.
HermitianMatrix support_projected_operator(const HermitianMatrix& omega,
                                           const HermitianMatrix& tau,
                                           double rank_tol = linalg::kDefaultRankTol);

// Quasi-entropy Tr[tau (tau^{-1/2} omega~ tau^{-1/2})^alpha] for
// alpha in (0,1) u (1,2].  Returns +infinity when alpha > 1 and
// supp(omega) is not contained in supp(tau).
double geo_quasi_entropy_state(const HermitianMatrix& omega,
                               const HermitianMatrix& tau,
                               double alpha,
                               double rank_tol = linalg::kDefaultRankTol);

// Geometric Renyi divergence of order alpha in (0,2]:
//   (1/(alpha-1)) log2 of the quasi-entropy.
// alpha = 1 dispatches to the Belavkin-Staszewski closed form.
DivergenceValue geo_entropy_state(const HermitianMatrix& omega,
                                  const HermitianMatrix& tau,
                                  double alpha,
                                  double rank_tol = linalg::kDefaultRankTol);

// Belavkin-Staszewski relative entropy
//   Tr[omega log2(omega^{1/2} pinv(tau) omega^{1/2})],
// +infinity unless supp(omega) is contained in supp(tau).
DivergenceValue bs_entropy_state(const HermitianMatrix& omega,
                                 const HermitianMatrix& tau,
                                 double rank_tol = linalg::kDefaultRankTol);

// alpha -> 0 limit: -log2 Tr[tau Pi], with Pi the support projector of
// tau^{-1/2} omega~ tau^{-1/2}.
DivergenceValue min_geo_entropy_state(const HermitianMatrix& omega,
                                      const HermitianMatrix& tau,
                                      double rank_tol = linalg::kDefaultRankTol);

// Channel divergences, evaluated in closed form on the (unnormalized) Choi
// operators.  Both channels must share input/output dimensions.

// alpha in (0,1) only (larger orders require the SDP lane):
//   (1/(alpha-1)) log2 lambda_min( Tr_out[ G_alpha(Choi_m, Choi_n~) ] )
// where Choi_n~ is the support projection of Choi_n against Choi_m.
DivergenceValue geo_entropy_channel_sub1(const quantum::ChoiChannel& n,
                                         const quantum::ChoiChannel& m,
                                         double alpha,
                                         double rank_tol = linalg::kDefaultRankTol);

// Belavkin-Staszewski channel divergence:
//   || Tr_out[ Choi_n^{1/2} log2(Q) Choi_n^{1/2} ] ||_inf,
//   Q = Choi_n^{1/2} pinv(Choi_m) Choi_n^{1/2};
// +infinity unless supp(Choi_n) is contained in supp(Choi_m).
DivergenceValue bs_entropy_channel(const quantum::ChoiChannel& n,
                                   const quantum::ChoiChannel& m,
                                   double rank_tol = linalg::kDefaultRankTol);

// alpha -> 0 limit for channels:
//   -log2 lambda_min( Tr_out[ Choi_m^{1/2} Pi Choi_m^{1/2} ] ),
// with Pi the support projector of Choi_m^{-1/2} Choi_n~ Choi_m^{-1/2}.
DivergenceValue min_geo_entropy_channel(const quantum::ChoiChannel& n,
                                        const quantum::ChoiChannel& m,
                                        double rank_tol = linalg::kDefaultRankTol);

}  // namespace unext::divergence
