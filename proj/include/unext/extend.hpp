#pragma once

#include <map>
#include <string>
#include <vector>

#include "unext/linalg.hpp"
#include "unext/quantum.hpp"
#include "unext/sdp_problem.hpp"
#include "unext/sdp_solver.hpp"
#include "unext/sdp_unext.hpp"

// Constraint builders, feasibility programs, and certificate validators for
// the k-extendibility hierarchy over states, channels, bipartite channels,
// and superchannels.  Feasibility questions are decided through a phase-I
// interior-point program (minimize the smallest eigenvalue shift that makes
// a constrained extension operator positive), so boundary cases report the
// achieved margin rather than a bare yes/no.
namespace unext::ext {

using linalg::HermitianMatrix;
using linalg::Mat;
using linalg::RVec;
using linalg::SubsystemShape;

enum class ExtendKind {
    state,
    p2p_channel,
    superchannel,
    bipartite_channel,
    bipartite_superchannel,
};

// Describes which object is extended and how its subsystems replicate.  The
// extension shape carries every base factor plus k copies of each replicated
// factor; `replica_labels[i]` lists the labels belonging to copy i+1, one
// entry per replicated family, always in the same family order.
struct ExtendibilitySpec {
    ExtendKind kind = ExtendKind::state;
    int k = 2;
    SubsystemShape base_shape;
    SubsystemShape extension_shape;
    std::vector<std::vector<std::string>> replica_labels;

    void check() const;  // replica count/dims consistent; ShapeMismatch
};

struct FeasibilityReport {
    bool feasible = false;
    std::map<std::string, double> certificate_residuals;
    // Phase-I solve report.  Pure residual validators run no solver; they
    // leave iterations at zero and mirror the verdict in the status field.
    sdp::SolveReport solver;

    double worst_residual() const;
};

// One linear equality block over the Hermitian extension variable:
// map(X) = rhs, with `map` acting between hvec coordinate spaces.
struct ConstraintRow {
    std::string name;
    sdp::LinMap map;
    Mat rhs;
};

struct ExtensionConstraints {
    ExtendibilitySpec spec;
    SubsystemShape var_shape;  // tensor layout of the PSD variable
    std::vector<ConstraintRow> rows;
};

// Residual of every row at the candidate (max entry norm of map(X) - rhs)
// plus "psd" for the negative-eigenvalue part of the candidate itself.
std::map<std::string, double> check_extension(const ExtensionConstraints& c,
                                              const HermitianMatrix& candidate);

// Phase-I feasibility: minimize t subject to X + t I >= 0 and the rows.
// The program is strictly feasible and bounded, so the solver must land on
// {optimal, inaccurate}; anything else raises SolverFailure with the status
// in the message.  feasible <=> the optimal shift t* stays below margin_tol.
FeasibilityReport extension_feasible(
    const ExtensionConstraints& c,
    const sdp::SolverOptions& opts = sdp::default_solver_options(),
    double margin_tol = 1e-6);

// omega on (A, B1..Bk) with Tr_{B2..Bk}[omega] = rho.  Symmetry rows are not
// included; add_symmetry_rows supplies them when full exchange symmetry of
// the copies is wanted (as in kext_state_feasible).
ExtensionConstraints build_state_extension_constraints(
    const HermitianMatrix& rho, const SubsystemShape& shape, int k);

// Choi variable on (A, B1..Bk) with the first-copy marginal pinned to the
// channel and the redundant stabilizing row Tr_{B1..Bk}[X] = I_A.
ExtensionConstraints build_p2p_extension_constraints(
    const quantum::ChoiChannel& n, int k = 2);

// Choi variable on (A, B1..Bk, Ap, Bp1..Bpk).  Rows: trace preservation,
// the first-copy marginal Tr_{Bp2..Bpk}[X] = Choi(n) (x) I_{B2..Bk}, and the
// no-signaling row Tr_{Bp1}[X] = (1/d_B) Tr_{B1 Bp1}[X] (x) I_{B1} stating
// that once the first copy's output is discarded its input is irrelevant.
// `relax_nonsignaling` drops that last row for comparison runs.
ExtensionConstraints build_bipartite_extension_constraints(
    const quantum::BipartiteChannel& n, int k = 2,
    bool relax_nonsignaling = false);

// Appends invariance rows X = W X W^dag for every adjacent transposition of
// the replicated copies (transpositions generate the full symmetric group).
void add_symmetry_rows(ExtensionConstraints& c);

// Symmetric-extension feasibility of a bipartite state: exists omega >= 0 on
// (A, B1..Bk), invariant under B-copy permutations, with marginal rho.
FeasibilityReport kext_state_feasible(
    const HermitianMatrix& rho, const SubsystemShape& shape, int k,
    const sdp::SolverOptions& opts = sdp::default_solver_options());

// F * phi + (1 - F) (I - phi) / (d^2 - 1) with phi the maximally entangled
// projector; the one-parameter twirling-invariant family on C^d (x) C^d.
HermitianMatrix isotropic_state(int d, double fidelity);

// Largest fidelity whose isotropic state still admits a symmetric k-copy
// extension, located by bisection to within tol.
double kext_isotropic_threshold(
    int d, int k = 2, double tol = 1e-4,
    const sdp::SolverOptions& opts = sdp::default_solver_options());

// Residual validator for a claimed k-copy extension upsilon of a
// point-to-point superchannel theta (argument channels A -> B become
// A -> B1..Bk, transformed channels C -> D become C -> D1..Dk).  Checks both
// objects' superchannel constraints, the first-copy marginal
// Tr_{D2..Dk}[Choi(upsilon)] = Choi(theta) (x) I_{B2..Bk}, and invariance
// under simultaneous permutations of the (B_i, D_i) copies.
FeasibilityReport validate_kext_superchannel(
    const quantum::SuperchannelChoi& theta,
    const quantum::SuperchannelChoi& upsilon, int k, double tol = 1e-7);

// Bipartite analogue.  Group convention on upsilon: each role group lists
// the non-replicated sender factor first and then the k receiver copies,
// i.e. a = (A, B1..Bk), d = (Cp, Dp1..Dpk), c = (C, D1..Dk),
// b = (Ap, Bp1..Bpk).  Checks superchannel validity of both, the marginal
// Tr_{B2..Bk, Dp2..Dpk}[Choi(upsilon)] = Choi(theta) (x) I_{D2..Dk Bp2..Bpk},
// the no-signaling row
// Tr_{Dp2..Dpk}[Choi(upsilon)]
//   = Tr_{Dp2..Dpk, Bp2..Bpk}[Choi(upsilon)] (x) I_{Bp2..Bpk} / d_Bp^{k-1},
// and invariance under simultaneous copy permutations of all four groups.
FeasibilityReport validate_bipartite_kext_superchannel(
    const quantum::SuperchannelChoi& theta,
    const quantum::SuperchannelChoi& upsilon, int k, double tol = 1e-7);

// k-copy extension of the one-way-LOCC superchannel
// theta[n] = sum_x post_x o n o pre_x: the classical outcome x is copied, so
// upsilon = sum_x Choi(pre_x)_{CA} (x) Choi(post_x)^{(x) k on (Bi, Di)}.
// k = 1 reproduces quantum::superchannel_1w_locc.
quantum::SuperchannelChoi kext_superchannel_1w_locc(
    const std::vector<quantum::ChoiChannel>& pre_instrument,
    const std::vector<quantum::ChoiChannel>& post, int k);

// One-way-LOCC bipartite superchannel with quantum side memories: the
// pre-processing applies instrument branches C -> A (x) Ma on the sender
// side and conditioned channels D -> B (x) Mb on the receiver side; the
// post-processing applies instrument branches Ap (x) Ma -> Cp and
// conditioned channels Bp (x) Mb -> Dp.  Branch lists are index-matched
// (pre pairs share x, post pairs share y).  Choi input ordering of the
// pieces is (system, memory); output ordering likewise.
struct OneWayLoccSuperchannelParts {
    std::vector<quantum::ChoiChannel> pre_a;   // CP branches C -> A (x) Ma
    std::vector<quantum::ChoiChannel> pre_b;   // channels D -> B (x) Mb
    std::vector<quantum::ChoiChannel> post_a;  // CP branches Ap (x) Ma -> Cp
    std::vector<quantum::ChoiChannel> post_b;  // channels Bp (x) Mb -> Dp
    int dim_a = 0;   // system part of the pre_a output split
    int dim_ma = 1;  // sender-side memory dimension
    int dim_b = 0;   // system part of the pre_b output split
    int dim_mb = 1;  // receiver-side memory dimension
};

// Replicates the receiver-side factors (with their memories) k times and
// contracts the memories, yielding the canonical k-copy extension of the
// k = 1 superchannel built from the same parts.
quantum::SuperchannelChoi bipartite_kext_superchannel_1w_locc(
    const OneWayLoccSuperchannelParts& parts, int k);

}  // namespace unext::ext
