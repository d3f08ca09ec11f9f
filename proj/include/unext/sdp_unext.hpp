#pragma once

#include <stdexcept>
#include <vector>

#include <unext/quantum.hpp>
#include <unext/sdp_solver.hpp>

// Unextendibility programs.  For a channel N with Choi operator G, the level-l
// program searches over two-copy extensions P of N (recovering N on the first
// output copy) and bounds the geometric Renyi divergence of order
// alpha = 1 + 2^-l between N and the marginal channel on the second copy,
// using a ladder of l matrix-geometric-mean LMIs.  The reported quantity is
// half that divergence, in bits.
//
// The program is assembled on the support of the Choi operator: the chain
// LMIs force every ladder operator into that subspace, and every feasible
// extension is supported inside it tensored with the ancilla copy, so the
// compression is exact while restoring a genuine cone interior for
// rank-deficient channels.

namespace unext::sdp {

// Solver ended in an unbounded/failed state, or returned unusable numbers.
struct SolverFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// The extension program itself is infeasible (malformed channel data).
struct InfeasibleModel : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// A candidate extension passed to min_geo_upper_bound is not an extension.
struct InvalidExtension : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GeoSdpResult {
    double value_bits = 0.0;  // 2^ell * log2(y_star)
    double y_star = 1.0;      // sqrt of the optimal objective
    int ell = 0;
    double alpha = 2.0;  // 1 + 2^-ell
    SolveReport report;
    Mat witness_extension;  // Choi of the optimal extension, inputs first
};

inline constexpr int kMaxLevel = 12;

// Reads UNEXT_SOLVER_TOL (when set and parseable) into the tolerance.
SolverOptions default_solver_options();

// Point-to-point channel A -> B; extensions are channels A -> B1 B2.
GeoSdpResult unext_alpha_p2p(const quantum::ChoiChannel& n, int ell,
                             const SolverOptions& opts = default_solver_options());

// Bipartite channel AB -> A'B'; extensions are channels A B1 B2 -> A' B'1 B'2
// recovering N on (B1, B'1) and ignoring the B2 input when B'2 is discarded.
// The channel must be semicausal (no signaling from B to A'), and unless
// `nonsignaling` is cleared the extension is also required not to signal from
// B1 to the rest once B'1 is discarded (vacuous when dB == 1).
GeoSdpResult unext_alpha_bipartite(const quantum::BipartiteChannel& n, int ell,
                                   bool nonsignaling = true,
                                   const SolverOptions& opts = default_solver_options());

// Bipartite state on (A, B); extensions are states on (A, B1, B2).  `shape`
// must name exactly two subsystems, the second of which gets duplicated.
GeoSdpResult unext_alpha_state(const linalg::HermitianMatrix& rho,
                               const linalg::SubsystemShape& shape, int ell,
                               const SolverOptions& opts = default_solver_options());

// Upper bound from explicit extension candidates: each candidate must be a
// channel A -> B1 B2 whose first-copy marginal reproduces n (Frobenius
// residual <= 1e-6 relative to the Choi scale; InvalidExtension otherwise).
// Returns min over candidates of half the order-0 geometric divergence
// between n and the candidate's second-copy marginal; +infinity when every
// candidate violates the support condition.
double min_geo_upper_bound(const quantum::ChoiChannel& n,
                           const std::vector<quantum::ChoiChannel>& candidates,
                           double rank_tol = linalg::kDefaultRankTol);

// Candidate builders for min_geo_upper_bound.
// N tensored with a fixed state sigma on the second output copy.
quantum::ChoiChannel product_extension(const quantum::ChoiChannel& n,
                                       const linalg::HermitianMatrix& sigma);
// rho -> (1-p) rho (x) |e><e| + p |e><e| (x) rho, an extension of the
// erasure channel with the surviving input split between the two copies.
quantum::ChoiChannel erasure_symmetric_split(int d, double p);

}  // namespace unext::sdp
