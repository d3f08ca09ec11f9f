#include "unext/sdp_unext.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include <unext/divergence.hpp>
#include <unext/linalg.hpp>

namespace unext::sdp {

namespace {

using linalg::HermitianMatrix;
using linalg::SubsystemShape;
using linalg::cplx;

constexpr double kStartMargin = 0.1;   // slack of the analytic starting point
constexpr double kMarginalTol = 1e-6;  // extension / semicausality residual
constexpr double kPsdTol = 1e-8;       // relative negativity rejected as input
constexpr double kLeakTol = 1e-6;      // channel support outside the marginal

// Spectral helpers for strictly positive definite matrices; support
// compression happens before they are called, so no thresholding here.
Eigen::SelfAdjointEigenSolver<Mat> eig_of(const Mat& h) {
    Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (h + h.adjoint())));
    if (es.info() != Eigen::Success)
        throw SolverFailure("eigendecomposition failed while building the program");
    return es;
}

Mat pd_power(const Mat& h, double p) {
    auto es = eig_of(h);
    Eigen::VectorXd f = es.eigenvalues();
    for (int i = 0; i < f.size(); ++i) f[i] = std::pow(f[i], p);
    return es.eigenvectors() * f.cast<cplx>().asDiagonal() *
           es.eigenvectors().adjoint();
}

// G_a(x, y) = x^{1/2} (x^{-1/2} y x^{-1/2})^a x^{1/2}; x, y positive definite,
// any real a.
Mat pd_geomean(const Mat& x, const Mat& y, double a) {
    Mat xh = pd_power(x, 0.5);
    Mat xi = pd_power(x, -0.5);
    Mat mid = pd_power(Mat(xi * y * xi), a);
    Mat g = xh * mid * xh;
    return 0.5 * (g + g.adjoint());
}

double max_eig(const Mat& h) { return eig_of(h).eigenvalues().maxCoeff(); }

// Isometry onto the support of a positive semidefinite operator together with
// the compressed (positive definite) restriction.  Eigenvalues below the rank
// cut are treated as exact zeros; anything meaningfully negative is rejected.
struct Support {
    Mat v;     // dim x rank isometry
    Mat comp;  // v^dag h v, positive definite
    int rank = 0;
};

Support support_of(const Mat& h) {
    auto es = eig_of(h);
    const int n = static_cast<int>(h.rows());
    const double lmax = es.eigenvalues().maxCoeff();
    if (!(lmax > 0))
        throw InfeasibleModel("choi operator is not positive semidefinite");
    if (es.eigenvalues().minCoeff() < -kPsdTol * lmax)
        throw InfeasibleModel("choi operator has a negative eigenvalue");
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
        if (es.eigenvalues()[i] > linalg::kDefaultRankTol * lmax) keep.push_back(i);
    Support sup;
    sup.rank = static_cast<int>(keep.size());
    if (sup.rank == n) {
        sup.v = Mat::Identity(n, n);
        sup.comp = 0.5 * (h + h.adjoint());
        return sup;
    }
    sup.v = Mat(n, sup.rank);
    for (int j = 0; j < sup.rank; ++j) sup.v.col(j) = es.eigenvectors().col(keep[j]);
    Mat comp = sup.v.adjoint() * h * sup.v;
    sup.comp = 0.5 * (comp + comp.adjoint());
    return sup;
}

// Extra equality row constraining the (full-space) extension operator.
struct ExtensionRow {
    LinMap on_p;
    Mat constant;
};

// Ladder program data in the support-reduced frame.  The channel operator G
// on the chain space has support isometry v with compression gr = v^dag G v;
// the extension variable is modeled as Q on qshape with P = u Q u^dag, which
// is lossless because any feasible extension is supported inside
// ran(v) (x) ancilla.  The ladder operators N_ell..N_1 and M are forced into
// the support frame by the chain LMIs, while N_0 lives on the support of the
// center extension's marginal.
struct LadderSpec {
    Mat gr;
    Mat v;
    SubsystemShape chain;
    std::vector<std::string> y_keep;
    SubsystemShape pshape;
    SubsystemShape qshape;
    Mat u;
    std::vector<std::string> e0_keep;  // reduced marginal of Q pinned to e0_rhs
    Mat e0_rhs;
    std::vector<std::string> n0_keep;  // marginal of u Q u^dag defining N_0
    double n0_coeff = 1.0;
    std::vector<ExtensionRow> extra_rows;
    Mat q_start;
};

// Assembles and solves the level-ell ladder program
//   minimize y
//   s.t. y * I(y_keep) >= Tr_{chain \ y_keep}[v M v^dag]
//        [[M, gr], [gr, N_ell]] >= 0
//        [[gr, N_i], [N_i, N_{i-1}]] >= 0    (i = ell..1)
//        Tr_{qshape \ e0_keep}[Q] == e0_rhs
//        N_0 == compress(n0_coeff * Tr_{pshape \ n0_keep}[u Q u^dag])
//        extra rows,  Q >= 0
// The starting point is exactly cone-interior: Q0 = gr (x) maximally mixed
// ancilla, the N_i on the matrix-geometric-mean path from the marginal toward
// gr shrunk by (1 - margin), M inflated above the top-block Schur complement.
GeoSdpResult solve_ladder(const LadderSpec& spec, int ell,
                          const SolverOptions& opts) {
    const Mat& gr = spec.gr;
    const int r = static_cast<int>(gr.rows());
    const int n = spec.chain.total_dim();
    const int qdim = spec.qshape.total_dim();
    const int ydim = linalg::reduced_shape(spec.chain, spec.y_keep).total_dim();

    LinMap conjp = conjugate_map(spec.u);
    LinMap n0_of_q = compose(compose(scale_map(n, spec.n0_coeff),
                                     partial_trace_map(spec.pshape, spec.n0_keep)),
                             conjp);

    // Support frame of the N_0 pin, sampled at the cone-interior start; every
    // feasible extension marginal is dominated by a multiple of it.
    Mat n0c = hvec_to_mat(RVec(n0_of_q.m * hvec(spec.q_start)), n);
    Support marg = support_of(n0c);
    const Mat& w = marg.v;
    const int s = marg.rank;
    // The chain forces the channel support inside the marginal support; if it
    // leaks outside, no extension keeps the objective finite.
    if ((spec.v - w * (w.adjoint() * spec.v)).norm() >
        kLeakTol * std::sqrt(static_cast<double>(r)))
        throw InfeasibleModel("no extension marginal can dominate the channel");
    Mat k = w.adjoint() * spec.v;  // isometry: support frame -> marginal frame

    ConicProblem prob;
    const int vy = prob.add_var("y", 1);
    const int vm = prob.add_var("M", r);
    std::vector<int> vn(ell + 1);
    for (int i = ell; i >= 1; --i)
        vn[i] = prob.add_var("N" + std::to_string(i), r);
    vn[0] = prob.add_var("N0", s);
    const int vq = prob.add_var("Q", qdim);

    MatExpr yblk{ydim, Mat::Zero(ydim, ydim), {}};
    yblk.terms.push_back({vy, scalar_times_map(Mat::Identity(ydim, ydim))});
    yblk.terms.push_back(
        {vm, compose(scale_map(ydim, -1.0),
                     compose(partial_trace_map(spec.chain, spec.y_keep),
                             conjugate_map(spec.v)))});
    prob.psd_blocks.push_back(std::move(yblk));

    if (ell >= 1) {
        MatExpr top{2 * r, Mat::Zero(2 * r, 2 * r), {}};
        top.constant.block(0, r, r, r) = gr;
        top.constant.block(r, 0, r, r) = gr;
        top.terms.push_back({vm, place_upper_left_map(r)});
        top.terms.push_back({vn[ell], place_lower_right_map(r)});
        prob.psd_blocks.push_back(std::move(top));

        for (int i = ell; i >= 2; --i) {
            MatExpr chain{2 * r, Mat::Zero(2 * r, 2 * r), {}};
            chain.constant.block(0, 0, r, r) = gr;
            chain.terms.push_back({vn[i], place_off_diagonal_map(r)});
            chain.terms.push_back({vn[i - 1], place_lower_right_map(r)});
            prob.psd_blocks.push_back(std::move(chain));
        }

        MatExpr low{r + s, Mat::Zero(r + s, r + s), {}};
        low.constant.block(0, 0, r, r) = gr;
        low.terms.push_back({vn[1], place_off_diagonal_map(r, k)});
        low.terms.push_back({vn[0], place_diagonal_at_map(r + s, r, s)});
        prob.psd_blocks.push_back(std::move(low));
    } else {
        MatExpr top{r + s, Mat::Zero(r + s, r + s), {}};
        top.constant.block(0, r, r, s) = gr * k.adjoint();
        top.constant.block(r, 0, s, r) = k * gr;
        top.terms.push_back({vm, place_diagonal_at_map(r + s, 0, r)});
        top.terms.push_back({vn[0], place_diagonal_at_map(r + s, r, s)});
        prob.psd_blocks.push_back(std::move(top));
    }

    prob.psd_blocks.push_back(
        {qdim, Mat::Zero(qdim, qdim), {{vq, identity_map(qdim)}}});

    const int e0dim = linalg::reduced_shape(spec.qshape, spec.e0_keep).total_dim();
    MatExpr recover{e0dim, Mat(-spec.e0_rhs), {}};
    recover.terms.push_back({vq, partial_trace_map(spec.qshape, spec.e0_keep)});
    prob.equalities.push_back(std::move(recover));

    MatExpr pin{s, Mat::Zero(s, s), {}};
    pin.terms.push_back({vq, compose(conjugate_map(Mat(w.adjoint())), n0_of_q)});
    pin.terms.push_back({vn[0], scale_map(s, -1.0)});
    prob.equalities.push_back(std::move(pin));

    for (const auto& row : spec.extra_rows) {
        LinMap on_q = compose(row.on_p, conjp);
        prob.equalities.push_back({on_q.out_dim, row.constant, {{vq, on_q}}});
    }

    prob.objective = RVec::Zero(prob.total_dofs());
    prob.objective[prob.var_offset(vy)] = 1.0;
    prob.validate();

    // Analytic interior start.
    const double eta = kStartMargin;
    Mat n0r = w.adjoint() * n0c * w;
    n0r = 0.5 * (n0r + n0r.adjoint());
    // Harmonic compression: the largest operator on the support frame whose
    // lift stays below the starting marginal.
    Mat h = pd_power(Mat(k.adjoint() * pd_power(n0r, -1.0) * k), -1.0);
    const double t_top = std::ldexp(1.0, -ell);  // 2^-ell
    Mat m0 = ((1.0 + eta) / (1.0 - eta)) * pd_geomean(gr, h, -t_top);
    // Enlarging M only loosens the top-block Schur complement; the floor
    // bounds the condition number of the start.
    m0 += 1e-6 * max_eig(m0) * Mat::Identity(r, r);
    Mat m0_full = spec.v * m0 * spec.v.adjoint();
    double y0 = (1.0 + eta) * max_eig(linalg::partial_trace_raw(
                                  m0_full, spec.chain, spec.y_keep));

    RVec z0 = RVec::Zero(prob.total_dofs());
    z0[prob.var_offset(vy)] = y0;
    z0.segment(prob.var_offset(vm), hvec_dim(r)) = hvec(m0);
    z0.segment(prob.var_offset(vn[0]), hvec_dim(s)) = hvec(n0r);
    for (int i = 1; i <= ell; ++i) {
        Mat ni = (1.0 - eta) * pd_geomean(gr, h, std::ldexp(1.0, -i));
        z0.segment(prob.var_offset(vn[i]), hvec_dim(r)) = hvec(ni);
    }
    z0.segment(prob.var_offset(vq), hvec_dim(qdim)) = hvec(spec.q_start);

    Solution sol;
    SolveReport report = solve_conic(prob, z0, opts, &sol);
    switch (report.status) {
        case SolveStatus::optimal:
        case SolveStatus::inaccurate:
            break;
        case SolveStatus::infeasible:
            throw InfeasibleModel("extension program reported infeasible");
        case SolveStatus::unbounded:
            throw SolverFailure("extension program reported unbounded");
        case SolveStatus::failed:
            throw SolverFailure("interior-point solve failed to converge");
    }

    const double y_raw = report.objective_value;
    if (!(y_raw > 0) || !std::isfinite(y_raw))
        throw SolverFailure("solver returned a nonpositive objective");

    GeoSdpResult res;
    res.ell = ell;
    res.alpha = 1.0 + t_top;
    res.y_star = std::sqrt(y_raw);
    res.value_bits = std::ldexp(std::log2(y_raw), ell - 1);
    res.report = report;
    Mat pstar = spec.u * sol.var_values[vq] * spec.u.adjoint();
    res.witness_extension = 0.5 * (pstar + pstar.adjoint());
    return res;
}

void check_level(int ell) {
    if (ell < 0 || ell > kMaxLevel)
        throw std::invalid_argument("ladder level must lie in [0, " +
                                    std::to_string(kMaxLevel) + "]");
}

// Exact projection onto the semicausal subspace: subtracting
// (defect (x) maximally mixed B') cancels the no-signaling defect and leaves
// every marginal used by the program intact.
Mat semicausal_project(const Mat& gamma, int dA, int dB, int dAp, int dBp) {
    SubsystemShape full{{dA, dB, dAp, dBp}, {"A", "B", "Ap", "Bp"}};
    SubsystemShape part{{dA, dB, dAp}, {"A", "B", "Ap"}};
    Mat t1 = linalg::partial_trace_raw(gamma, full, {"A", "B", "Ap"});
    Mat t2 = linalg::partial_trace_raw(gamma, full, {"A", "Ap"});
    Mat t2emb = linalg::embed_with_identity(HermitianMatrix(Mat(0.5 * (t2 + t2.adjoint()))),
                                            {"A", "Ap"}, part)
                    .mat();
    Mat defect = t1 - (1.0 / dB) * t2emb;
    Mat pi = Mat::Identity(dBp, dBp) / dBp;
    Mat out = gamma - linalg::kron(defect, pi);
    return 0.5 * (out + out.adjoint());
}

}  // namespace

SolverOptions default_solver_options() {
    SolverOptions opts;
    if (const char* env = std::getenv("UNEXT_SOLVER_TOL")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0) opts.tol = v;
    }
    return opts;
}

GeoSdpResult unext_alpha_p2p(const quantum::ChoiChannel& n, int ell,
                             const SolverOptions& opts) {
    check_level(ell);
    const int dA = n.in_dim();
    const int dB = n.out_dim();
    Support sup = support_of(n.choi.mat());

    LadderSpec spec;
    spec.gr = sup.comp;
    spec.v = sup.v;
    spec.chain = SubsystemShape{{dA, dB}, {"A", "B1"}};
    spec.y_keep = {"A"};
    spec.pshape = SubsystemShape{{dA, dB, dB}, {"A", "B1", "B2"}};
    spec.qshape = SubsystemShape{{sup.rank, dB}, {"R", "B2"}};
    spec.u = linalg::kron(sup.v, Mat::Identity(dB, dB));
    spec.e0_keep = {"R"};
    spec.e0_rhs = sup.comp;
    spec.n0_keep = {"A", "B2"};
    spec.n0_coeff = 1.0;
    spec.q_start = linalg::kron(sup.comp, Mat::Identity(dB, dB) / dB);
    return solve_ladder(spec, ell, opts);
}

GeoSdpResult unext_alpha_state(const linalg::HermitianMatrix& rho,
                               const linalg::SubsystemShape& shape, int ell,
                               const SolverOptions& opts) {
    check_level(ell);
    if (shape.labels.size() != 2)
        throw std::invalid_argument("state extension needs a two-subsystem shape");
    shape.check_against(rho);
    const int dA = shape.dims[0];
    const int dB = shape.dims[1];
    Support sup = support_of(rho.mat());

    LadderSpec spec;
    spec.gr = sup.comp;
    spec.v = sup.v;
    spec.chain = SubsystemShape{{dA, dB}, {"A", "B1"}};
    spec.y_keep = {};
    spec.pshape = SubsystemShape{{dA, dB, dB}, {"A", "B1", "B2"}};
    spec.qshape = SubsystemShape{{sup.rank, dB}, {"R", "B2"}};
    spec.u = linalg::kron(sup.v, Mat::Identity(dB, dB));
    spec.e0_keep = {"R"};
    spec.e0_rhs = sup.comp;
    spec.n0_keep = {"A", "B2"};
    spec.n0_coeff = 1.0;
    spec.q_start = linalg::kron(sup.comp, Mat::Identity(dB, dB) / dB);
    return solve_ladder(spec, ell, opts);
}

GeoSdpResult unext_alpha_bipartite(const quantum::BipartiteChannel& n, int ell,
                                   bool nonsignaling, const SolverOptions& opts) {
    check_level(ell);
    const int dA = n.dA(), dB = n.dB(), dAp = n.dAp(), dBp = n.dBp();
    if (n.semicausal_residual() > kMarginalTol)
        throw std::invalid_argument(
            "bipartite extension requires a channel with no B -> A' signaling");

    const bool ns_rows = nonsignaling && dB > 1;
    Mat g = n.ch.choi.mat();
    // The equality rows of the nonsignaling variant are mutually consistent
    // only for exactly semicausal data, so project onto that subspace first.
    if (ns_rows) g = semicausal_project(g, dA, dB, dAp, dBp);
    Support sup = support_of(g);
    const int r = sup.rank;

    LadderSpec spec;
    spec.gr = sup.comp;
    spec.v = sup.v;
    spec.chain = SubsystemShape{{dA, dB, dAp, dBp}, {"A", "B1", "Ap", "Bp1"}};
    spec.y_keep = {"A", "B1"};
    spec.pshape = SubsystemShape{{dA, dB, dB, dAp, dBp, dBp},
                                 {"A", "B1", "B2", "Ap", "Bp1", "Bp2"}};
    spec.qshape = SubsystemShape{{r, dB, dBp}, {"R", "B2", "Bp2"}};

    // u places the support factor back on (A, B1, A', B'1) and reorders the
    // ancilla copies into the extension layout.
    SubsystemShape u_pre{{dA, dB, dAp, dBp, dB, dBp},
                         {"A", "B1", "Ap", "Bp1", "B2", "Bp2"}};
    std::vector<int> pm =
        linalg::subsystem_index_permutation(u_pre, spec.pshape.labels);
    Mat k0 = linalg::kron(sup.v, Mat::Identity(dB * dBp, dB * dBp));
    spec.u = Mat::Zero(spec.pshape.total_dim(), r * dB * dBp);
    for (int row = 0; row < k0.rows(); ++row) spec.u.row(pm[row]) = k0.row(row);

    spec.e0_keep = {"R", "B2"};
    spec.e0_rhs = linalg::kron(sup.comp, Mat::Identity(dB, dB));
    spec.n0_keep = {"A", "B2", "Ap", "Bp2"};
    spec.n0_coeff = 1.0 / dB;
    spec.q_start = linalg::kron(
        sup.comp, linalg::kron(Mat::Identity(dB, dB),
                               Mat::Identity(dBp, dBp) / dBp));

    if (ns_rows) {
        // Tr_{B'1}[P] == (1/dB) I_{B1} (x) Tr_{B1 B'1}[P]: discarding the
        // first copy's output must erase its input.
        LinMap pt1 = partial_trace_map(spec.pshape, {"A", "B1", "B2", "Ap", "Bp2"});
        LinMap pt2 = partial_trace_map(spec.pshape, {"A", "B2", "Ap", "Bp2"});
        LinMap ins = insert_identity_map(
            linalg::reduced_shape(spec.pshape, {"A", "B2", "Ap", "Bp2"}), "B1",
            dB, {"A", "B1", "B2", "Ap", "Bp2"});
        LinMap corr = compose(ins, pt2);
        LinMap ns{pt1.out_dim, pt1.in_dim, false,
                  RMat(pt1.m - (1.0 / dB) * corr.m)};
        const int nd = ns.out_dim;
        spec.extra_rows.push_back({std::move(ns), Mat::Zero(nd, nd)});
    }

    return solve_ladder(spec, ell, opts);
}

double min_geo_upper_bound(const quantum::ChoiChannel& n,
                           const std::vector<quantum::ChoiChannel>& candidates,
                           double rank_tol) {
    if (candidates.empty())
        throw std::invalid_argument("need at least one extension candidate");
    const int dA = n.in_dim();
    const int dB = n.out_dim();
    const Mat& gamma = n.choi.mat();
    SubsystemShape ext_shape{{dA, dB, dB}, {"A", "B1", "B2"}};

    double best = std::numeric_limits<double>::infinity();
    for (const auto& cand : candidates) {
        if (cand.in_dim() != dA || cand.out_dim() != dB * dB)
            throw InvalidExtension("candidate dimensions do not extend the channel");
        const Mat& pc = cand.choi.mat();
        Mat first = linalg::partial_trace_raw(pc, ext_shape, {"A", "B1"});
        double residual = (first - gamma).norm();
        if (residual > kMarginalTol * std::max(1.0, gamma.norm()))
            throw InvalidExtension("candidate marginal does not reproduce the channel");

        Mat second = linalg::partial_trace_raw(pc, ext_shape, {"A", "B2"});
        quantum::ChoiChannel marginal =
            quantum::channel_from_choi(Mat(0.5 * (second + second.adjoint())), dA, dB);
        auto div = divergence::min_geo_entropy_channel(n, marginal, rank_tol);
        if (div.finite()) best = std::min(best, 0.5 * div.value);
    }
    return best;
}

quantum::ChoiChannel product_extension(const quantum::ChoiChannel& n,
                                       const linalg::HermitianMatrix& sigma) {
    const int dB = n.out_dim();
    if (sigma.dim() != dB)
        throw std::invalid_argument("product factor must live on the output space");
    if (std::abs(sigma.trace() - 1.0) > 1e-8 ||
        linalg::min_eigenvalue(sigma) < -1e-10)
        throw std::invalid_argument("product factor must be a state");
    return quantum::channel_from_choi(linalg::kron(n.choi.mat(), sigma.mat()),
                                      n.in_dim(), dB * dB);
}

quantum::ChoiChannel erasure_symmetric_split(int d, double p) {
    if (d < 1) throw std::invalid_argument("erasure input dimension must be >= 1");
    if (p < 0.0 || p > 1.0)
        throw quantum::InvalidProbability("erasure probability must lie in [0, 1]");
    const int de = d + 1;
    Mat embed = quantum::make_erasure(d, 0.0).choi.mat();  // lossless branch
    Mat flag = linalg::ket(de, d) * linalg::ket(de, d).adjoint();
    Mat keep_first = linalg::kron(embed, flag);  // (A, B1, B2) directly
    SubsystemShape swapped{{d, de, de}, {"A", "B2", "B1"}};
    Mat keep_second = linalg::permute_subsystems(
                          HermitianMatrix(linalg::kron(embed, flag)), swapped,
                          {"A", "B1", "B2"})
                          .mat();
    return quantum::channel_from_choi((1.0 - p) * keep_first + p * keep_second,
                                      d, de * de);
}

}  // namespace unext::sdp
