#pragma once

#include <stdexcept>
#include <string>

#include <unext/linalg.hpp>
#include <unext/quantum.hpp>

// Closed-form values and bounds for the unextendible entanglement of named
// channel families.  These are the ground truths the numerical pipeline is
// validated against, and they are also exposed directly on the CLI.

namespace unext::oracle {

struct InvalidDimension : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A closed form only covers a restricted family; everything else must go
// through the numerical pipeline.
struct NotApplicable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OracleValue {
    double value_bits = 0.0;
    std::string regime;   // which branch of the closed form applied
    bool is_exact = true; // exact value vs upper bound
};

// Identity channel on d dimensions: exactly log2(d).
OracleValue identity_unext(int d);

// Upper bound for the erasure channel with erasure probability p, from the
// order-one (Belavkin-Staszewski) extension construction.  Exact at p = 0 and
// in the antidegradable region p >= 1/2 where the value is zero.
OracleValue erasure_bs_bound(int d, double p);

// Order-alpha upper bound for the erasure channel, alpha in (0,1) u (1,2].
// The interior branch applies for p <= 1/(d^{1/alpha}+1); branch selection is
// done in log space so small alpha never overflows.
OracleValue erasure_alpha_bound(int d, double p, double alpha);

// Exact value for the depolarizing channel with noise parameter p (Choi is
// CPTP for p up to d^2/(d^2-1)).  Zero from the two-extendibility threshold
// p >= d/(2(d+1)) onward.  `printed_max_variant` selects the alternative
// fidelity pairing kept for audit; see README for why the default differs.
OracleValue depolarizing_bs(int d, double p, bool printed_max_variant = false);

// Exact value (1-p) log2(d) for the one-sided erasure on the signaling half
// of a bipartite channel.
OracleValue semicausal_erasure_bs(int d, double p);

// Order-zero unextendible entanglement vanishes whenever the Choi operator
// is full rank; NotApplicable for rank-deficient Choi operators.
OracleValue full_rank_min_geo(const quantum::ChoiChannel& n,
                              double rank_tol = linalg::kDefaultRankTol);

}  // namespace unext::oracle
