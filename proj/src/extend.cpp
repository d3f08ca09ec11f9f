#include "unext/extend.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace unext::ext {

namespace {

using linalg::RMat;
using linalg::SubsystemShape;

std::string copy_label(const std::string& stem, int copy) {
    return stem + std::to_string(copy);
}

RMat dense(const sdp::LinMap& m) {
    if (m.identity) return RMat::Identity(sdp::hvec_dim(m.in_dim), sdp::hvec_dim(m.in_dim));
    return m.m;
}

// Labels of `shape` minus `drop`, preserving shape order.
std::vector<std::string> labels_without(const SubsystemShape& shape,
                                        const std::vector<std::string>& drop) {
    std::vector<std::string> keep;
    for (const auto& l : shape.labels) {
        if (std::find(drop.begin(), drop.end(), l) == drop.end()) keep.push_back(l);
    }
    return keep;
}

// Shape with the factors of `shape` rearranged into `order`.
SubsystemShape shape_in_order(const SubsystemShape& shape,
                              const std::vector<std::string>& order) {
    SubsystemShape out;
    for (const auto& l : order) {
        out.labels.push_back(l);
        out.dims.push_back(shape.dim_of(l));
    }
    return out;
}

int ipow(int base, int exp) {
    int r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

// Permutation unitary realizing the subsystem relabeling shape -> new_order.
Mat reorder_unitary(const SubsystemShape& shape,
                    const std::vector<std::string>& new_order) {
    const std::vector<int> p = linalg::subsystem_index_permutation(shape, new_order);
    const int n = shape.total_dim();
    Mat u = Mat::Zero(n, n);
    for (int f = 0; f < n; ++f) u(p[f], f) = 1.0;
    return u;
}

// X = W X W^dag invariance row for the copy transposition swapping the
// replica families of copies `i` and `i + 1` (1-based).
ConstraintRow transposition_row(const ExtendibilitySpec& spec,
                                const SubsystemShape& var_shape, int i) {
    std::vector<std::string> order = var_shape.labels;
    const auto& a = spec.replica_labels[static_cast<size_t>(i - 1)];
    const auto& b = spec.replica_labels[static_cast<size_t>(i)];
    for (size_t f = 0; f < a.size(); ++f) {
        const int ia = var_shape.index_of(a[f]);
        const int ib = var_shape.index_of(b[f]);
        std::swap(order[static_cast<size_t>(ia)], order[static_cast<size_t>(ib)]);
    }
    const int n = var_shape.total_dim();
    const sdp::LinMap conj = sdp::conjugate_map(reorder_unitary(var_shape, order));
    ConstraintRow row;
    row.name = "permutation_" + std::to_string(i) + std::to_string(i + 1);
    row.map.out_dim = n;
    row.map.in_dim = n;
    row.map.m = RMat::Identity(sdp::hvec_dim(n), sdp::hvec_dim(n)) - conj.m;
    row.rhs = Mat::Zero(n, n);
    return row;
}

double row_residual(const ConstraintRow& row, const RVec& xh) {
    const Mat img = sdp::hvec_to_mat(row.map.apply(xh), row.map.out_dim);
    return (img - row.rhs).cwiseAbs().maxCoeff();
}

// Sum over ij of |ii><jj| on a d x d pair (unnormalized maximally entangled).
Mat entangled_pair(int d) {
    Mat phi = Mat::Zero(d * d, d * d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) phi(i * d + i, j * d + j) = 1.0;
    }
    return phi;
}

double rel_scale(const linalg::HermitianMatrix& m) {
    return std::max(1.0, m.mat().cwiseAbs().maxCoeff());
}

void require_group_sizes(const quantum::SuperchannelChoi& s, size_t a, size_t d,
                         size_t c, size_t b, const std::string& who) {
    if (s.a_labels.size() != a || s.d_labels.size() != d ||
        s.c_labels.size() != c || s.b_labels.size() != b) {
        throw linalg::ShapeMismatch(who + " has the wrong role-group sizes");
    }
}

void require_dim(int got, int want, const std::string& what) {
    if (got != want) throw linalg::ShapeMismatch(what + " dimension mismatch");
}

// Relabels theta's factors to the names used inside the reduced upsilon
// shape and embeds with identity on the remaining factors.
linalg::HermitianMatrix embed_theta(const quantum::SuperchannelChoi& theta,
                                    const std::vector<std::string>& as_labels,
                                    const SubsystemShape& target) {
    return linalg::embed_with_identity(theta.choi, as_labels, target);
}

FeasibilityReport residual_report(std::map<std::string, double> residuals,
                                  double tol) {
    FeasibilityReport rep;
    rep.certificate_residuals = std::move(residuals);
    rep.feasible = rep.worst_residual() <= tol;
    rep.solver.status =
        rep.feasible ? sdp::SolveStatus::optimal : sdp::SolveStatus::infeasible;
    rep.solver.primal_residual = rep.worst_residual();
    return rep;
}

// Shared layout/consistency checks for the two superchannel validators;
// `family` is the number of factors each role group carries per copy.
void check_extension_layout(const quantum::SuperchannelChoi& theta,
                            const quantum::SuperchannelChoi& upsilon, int k,
                            size_t family) {
    theta.check_layout();
    upsilon.check_layout();
    if (k < 1) throw std::invalid_argument("extension order k must be >= 1");
    const size_t kk = static_cast<size_t>(k);
    require_group_sizes(theta, family, family, family, family,
                        "base superchannel");
    require_group_sizes(upsilon, family - 1 + kk, family - 1 + kk,
                        family - 1 + kk, family - 1 + kk, "extension");
    auto check_group = [&](const std::vector<std::string>& tg,
                           const std::vector<std::string>& ug,
                           const SubsystemShape& ts, const SubsystemShape& us,
                           const std::string& role) {
        size_t fixed = family - 1;  // leading non-replicated factors
        for (size_t f = 0; f < fixed; ++f) {
            require_dim(us.dim_of(ug[f]), ts.dim_of(tg[f]),
                        role + " non-replicated factor");
        }
        const int base = ts.dim_of(tg[fixed]);
        for (size_t i = fixed; i < ug.size(); ++i) {
            require_dim(us.dim_of(ug[i]), base, role + " replica");
        }
    };
    check_group(theta.a_labels, upsilon.a_labels, theta.shape, upsilon.shape, "argument-input");
    check_group(theta.d_labels, upsilon.d_labels, theta.shape, upsilon.shape, "transformed-output");
    check_group(theta.c_labels, upsilon.c_labels, theta.shape, upsilon.shape, "transformed-input");
    check_group(theta.b_labels, upsilon.b_labels, theta.shape, upsilon.shape, "argument-output");
}

// Max residual of Choi invariance under adjacent copy transpositions acting
// simultaneously on the listed label groups (`fixed` leading labels of each
// group are never permuted).
double permutation_residual(const quantum::SuperchannelChoi& upsilon,
                            const std::vector<const std::vector<std::string>*>& groups,
                            size_t fixed, int k) {
    double worst = 0.0;
    const double scale = rel_scale(upsilon.choi);
    for (int i = 0; i + 1 < k; ++i) {
        std::vector<std::string> order = upsilon.shape.labels;
        for (const auto* g : groups) {
            const int ia = upsilon.shape.index_of((*g)[fixed + static_cast<size_t>(i)]);
            const int ib = upsilon.shape.index_of((*g)[fixed + static_cast<size_t>(i) + 1]);
            std::swap(order[static_cast<size_t>(ia)], order[static_cast<size_t>(ib)]);
        }
        const linalg::HermitianMatrix moved =
            linalg::permute_subsystems(upsilon.choi, upsilon.shape, order);
        worst = std::max(
            worst, (moved.mat() - upsilon.choi.mat()).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

void check_instrument(const std::vector<quantum::ChoiChannel>& branches,
                      const std::string& who) {
    if (branches.empty()) throw std::invalid_argument(who + " must have at least one branch");
    const int din = branches[0].in_dim();
    const int dout = branches[0].out_dim();
    Mat sum = Mat::Zero(din, din);
    for (const auto& br : branches) {
        if (br.in_dim() != din || br.out_dim() != dout) {
            throw linalg::ShapeMismatch(who + " branches must share their dimensions");
        }
        if (br.choi.mat().rows() != din * dout) {
            throw linalg::ShapeMismatch(who + " branch Choi has the wrong size");
        }
        if (linalg::min_eigenvalue(br.choi) < -1e-8) {
            throw quantum::InvalidChannel(who + " branch is not completely positive");
        }
        SubsystemShape s{{din, dout}, {"in", "out"}};
        sum += linalg::partial_trace(br.choi, s, {"in"}).mat();
    }
    if ((sum - Mat::Identity(din, din)).cwiseAbs().maxCoeff() > 1e-8) {
        throw quantum::InvalidChannel(who + " branches do not sum to a channel");
    }
}

void check_channel_list(const std::vector<quantum::ChoiChannel>& chans,
                        const std::string& who) {
    if (chans.empty()) throw std::invalid_argument(who + " must have at least one entry");
    for (const auto& ch : chans) {
        if (ch.in_dim() != chans[0].in_dim() || ch.out_dim() != chans[0].out_dim()) {
            throw linalg::ShapeMismatch(who + " entries must share their dimensions");
        }
        if (ch.cp_only) {
            throw quantum::InvalidChannel(who + " entries must be trace preserving");
        }
        ch.validate();
    }
}

// Comb Choi of one branch pair: feed the pre branch's Choi an entangled
// probe on the post stage's fresh input, then contract the memory by
// applying the post branch.  Output labels: (pre_in, sys, post_in, post_out).
linalg::HermitianMatrix branch_comb(const quantum::ChoiChannel& pre, int d_sys,
                                    int d_mem, const quantum::ChoiChannel& post,
                                    const std::array<std::string, 4>& names) {
    const int d_in = pre.in_dim();
    if (pre.out_dim() != d_sys * d_mem) {
        throw linalg::ShapeMismatch("pre-processing output does not split into system and memory");
    }
    if (post.in_dim() % d_mem != 0) {
        throw linalg::ShapeMismatch("post-processing input does not contain the memory factor");
    }
    const int d_post = post.in_dim() / d_mem;
    const int d_out = post.out_dim();

    SubsystemShape st_shape{{d_in, d_sys, d_mem, d_post, d_post},
                            {names[0], names[1], "#mem", names[2], "#probe"}};
    const Mat st = linalg::kron(pre.choi.mat(), entangled_pair(d_post));

    quantum::ChoiChannel g;
    g.choi = post.choi;
    g.shape = SubsystemShape{{d_post, d_mem, d_out}, {"#probe", "#mem", names[3]}};
    g.inputs = {"#probe", "#mem"};
    g.cp_only = true;
    const quantum::LabeledOperator out = quantum::apply_channel_labeled(
        g, linalg::HermitianMatrix(st, 1e-8), st_shape, {"#probe", "#mem"});
    return out.op;  // labels (names[0], names[1], names[2], names[3])
}

}  // namespace

void ExtendibilitySpec::check() const {
    base_shape.check_unique();
    extension_shape.check_unique();
    if (k < 1) throw std::invalid_argument("extension order k must be >= 1");
    if (replica_labels.size() != static_cast<size_t>(k)) {
        throw linalg::ShapeMismatch("replica list does not match the extension order");
    }
    const size_t families = replica_labels.front().size();
    for (const auto& copy : replica_labels) {
        if (copy.size() != families) {
            throw linalg::ShapeMismatch("replica copies carry different factor counts");
        }
        for (size_t f = 0; f < families; ++f) {
            if (extension_shape.dim_of(copy[f]) !=
                extension_shape.dim_of(replica_labels.front()[f])) {
                throw linalg::ShapeMismatch("replica dimensions differ between copies");
            }
        }
    }
}

double FeasibilityReport::worst_residual() const {
    double worst = 0.0;
    for (const auto& [name, value] : certificate_residuals) {
        worst = std::max(worst, value);
    }
    return worst;
}

std::map<std::string, double> check_extension(const ExtensionConstraints& c,
                                              const HermitianMatrix& candidate) {
    c.var_shape.check_against(candidate);
    const RVec xh = sdp::hvec(candidate.mat());
    std::map<std::string, double> res;
    for (const auto& row : c.rows) res[row.name] = row_residual(row, xh);
    res["psd"] = std::max(0.0, -linalg::min_eigenvalue(candidate));
    return res;
}

FeasibilityReport extension_feasible(const ExtensionConstraints& c,
                                     const sdp::SolverOptions& opts,
                                     double margin_tol) {
    c.spec.check();
    const int n = c.var_shape.total_dim();
    sdp::ConicProblem p;
    const int vw = p.add_var("extension", n);
    const int vt = p.add_var("shift", 1);

    sdp::MatExpr block;
    block.dim = n;
    block.constant = Mat::Zero(n, n);
    block.terms.push_back({vw, sdp::identity_map(n)});
    block.terms.push_back({vt, sdp::scalar_times_map(Mat::Identity(n, n))});
    p.psd_blocks.push_back(std::move(block));

    for (const auto& row : c.rows) {
        sdp::MatExpr eq;
        eq.dim = row.map.out_dim;
        eq.constant = -row.rhs;
        eq.terms.push_back({vw, row.map});
        p.equalities.push_back(std::move(eq));
    }

    p.objective = RVec::Zero(p.total_dofs());
    p.objective(p.var_offset(vt)) = 1.0;

    RVec z0 = RVec::Zero(p.total_dofs());
    z0(p.var_offset(vt)) = 1.0;  // extension = 0, shift = 1: block I > 0

    sdp::Solution sol;
    FeasibilityReport rep;
    rep.solver = sdp::solve_conic(p, z0, opts, &sol);
    if (rep.solver.status != sdp::SolveStatus::optimal &&
        rep.solver.status != sdp::SolveStatus::inaccurate) {
        throw sdp::SolverFailure("extension feasibility phase ended with status " +
                                 sdp::to_string(rep.solver.status));
    }
    const double shift = rep.solver.objective_value;
    rep.feasible = shift <= margin_tol;
    const HermitianMatrix omega(sol.var_values[static_cast<size_t>(vw)], 1e-6);
    rep.certificate_residuals = check_extension(c, omega);
    rep.certificate_residuals["phase1_shift"] = shift;
    return rep;
}

ExtensionConstraints build_state_extension_constraints(const HermitianMatrix& rho,
                                                       const SubsystemShape& shape,
                                                       int k) {
    shape.check_unique();
    if (shape.labels.size() != 2) {
        throw linalg::ShapeMismatch("state extension expects a two-factor shape");
    }
    shape.check_against(rho);
    if (k < 2) throw std::invalid_argument("extension order k must be >= 2");

    const std::string a = shape.labels[0];
    const std::string b = shape.labels[1];
    const int da = shape.dims[0];
    const int db = shape.dims[1];

    ExtensionConstraints c;
    c.spec.kind = ExtendKind::state;
    c.spec.k = k;
    c.spec.base_shape = shape;
    c.var_shape.labels = {a};
    c.var_shape.dims = {da};
    for (int i = 1; i <= k; ++i) {
        c.var_shape.labels.push_back(copy_label(b, i));
        c.var_shape.dims.push_back(db);
        c.spec.replica_labels.push_back({copy_label(b, i)});
    }
    c.spec.extension_shape = c.var_shape;
    c.spec.check();

    ConstraintRow marg;
    marg.name = "marginal";
    marg.map = sdp::partial_trace_map(c.var_shape, {a, copy_label(b, 1)});
    marg.rhs = rho.mat();
    c.rows.push_back(std::move(marg));
    return c;
}

ExtensionConstraints build_p2p_extension_constraints(const quantum::ChoiChannel& n,
                                                     int k) {
    n.validate();
    if (k < 2) throw std::invalid_argument("extension order k must be >= 2");
    const int da = n.in_dim();
    const int db = n.out_dim();

    ExtensionConstraints c;
    c.spec.kind = ExtendKind::p2p_channel;
    c.spec.k = k;
    c.spec.base_shape = SubsystemShape{{da, db}, {"A", "B"}};
    c.var_shape.labels = {"A"};
    c.var_shape.dims = {da};
    for (int i = 1; i <= k; ++i) {
        c.var_shape.labels.push_back(copy_label("B", i));
        c.var_shape.dims.push_back(db);
        c.spec.replica_labels.push_back({copy_label("B", i)});
    }
    c.spec.extension_shape = c.var_shape;
    c.spec.check();

    ConstraintRow marg;
    marg.name = "marginal";
    marg.map = sdp::partial_trace_map(c.var_shape, {"A", "B1"});
    marg.rhs = n.choi.mat();
    c.rows.push_back(std::move(marg));

    // Implied by the marginal row and trace preservation of the channel, but
    // kept as an independent row to stabilize degenerate boundary solves.
    ConstraintRow tp;
    tp.name = "trace_preserving";
    tp.map = sdp::partial_trace_map(c.var_shape, {"A"});
    tp.rhs = Mat::Identity(da, da);
    c.rows.push_back(std::move(tp));
    return c;
}

ExtensionConstraints build_bipartite_extension_constraints(
    const quantum::BipartiteChannel& n, int k, bool relax_nonsignaling) {
    n.ch.validate();
    if (k < 2) throw std::invalid_argument("extension order k must be >= 2");
    const int da = n.dA();
    const int db = n.dB();
    const int dap = n.dAp();
    const int dbp = n.dBp();

    ExtensionConstraints c;
    c.spec.kind = ExtendKind::bipartite_channel;
    c.spec.k = k;
    c.spec.base_shape = SubsystemShape{{da, db, dap, dbp}, {"A", "B", "Ap", "Bp"}};

    c.var_shape.labels = {"A"};
    c.var_shape.dims = {da};
    for (int i = 1; i <= k; ++i) {
        c.var_shape.labels.push_back(copy_label("B", i));
        c.var_shape.dims.push_back(db);
    }
    c.var_shape.labels.push_back("Ap");
    c.var_shape.dims.push_back(dap);
    for (int i = 1; i <= k; ++i) {
        c.var_shape.labels.push_back(copy_label("Bp", i));
        c.var_shape.dims.push_back(dbp);
    }
    for (int i = 1; i <= k; ++i) {
        c.spec.replica_labels.push_back({copy_label("B", i), copy_label("Bp", i)});
    }
    c.spec.extension_shape = c.var_shape;
    c.spec.check();

    ConstraintRow tp;
    tp.name = "trace_preserving";
    std::vector<std::string> ins = {"A"};
    for (int i = 1; i <= k; ++i) ins.push_back(copy_label("B", i));
    tp.map = sdp::partial_trace_map(c.var_shape, ins);
    const int din = da * ipow(db, k);
    tp.rhs = Mat::Identity(din, din);
    c.rows.push_back(std::move(tp));

    ConstraintRow marg;
    marg.name = "marginal";
    std::vector<std::string> keep = labels_without(c.var_shape, [&] {
        std::vector<std::string> drop;
        for (int i = 2; i <= k; ++i) drop.push_back(copy_label("Bp", i));
        return drop;
    }());
    marg.map = sdp::partial_trace_map(c.var_shape, keep);
    const SubsystemShape red = linalg::reduced_shape(c.var_shape, keep);
    marg.rhs = linalg::embed_with_identity(n.ch.choi, {"A", "B1", "Ap", "Bp1"}, red)
                   .mat();
    c.rows.push_back(std::move(marg));

    if (!relax_nonsignaling) {
        // Discarding the first copy's output must erase all dependence on
        // its input: Tr_{Bp1}[X] = (1/d_B) Tr_{B1 Bp1}[X] (x) I_{B1}.
        ConstraintRow ns;
        ns.name = "nonsignaling";
        const std::vector<std::string> keep1 = labels_without(c.var_shape, {"Bp1"});
        const std::vector<std::string> keep2 =
            labels_without(c.var_shape, {"B1", "Bp1"});
        const sdp::LinMap lhs = sdp::partial_trace_map(c.var_shape, keep1);
        const SubsystemShape red2 = linalg::reduced_shape(c.var_shape, keep2);
        const sdp::LinMap rhs = sdp::compose(
            sdp::insert_identity_map(red2, "B1", db, keep1),
            sdp::partial_trace_map(c.var_shape, keep2));
        ns.map.out_dim = lhs.out_dim;
        ns.map.in_dim = lhs.in_dim;
        ns.map.m = dense(lhs) - dense(rhs) / static_cast<double>(db);
        ns.rhs = Mat::Zero(lhs.out_dim, lhs.out_dim);
        c.rows.push_back(std::move(ns));
    }
    return c;
}

void add_symmetry_rows(ExtensionConstraints& c) {
    c.spec.check();
    for (int i = 1; i < c.spec.k; ++i) {
        c.rows.push_back(transposition_row(c.spec, c.var_shape, i));
    }
}

FeasibilityReport kext_state_feasible(const HermitianMatrix& rho,
                                      const SubsystemShape& shape, int k,
                                      const sdp::SolverOptions& opts) {
    if (std::abs(rho.mat().trace().real() - 1.0) > 1e-6 ||
        std::abs(rho.mat().trace().imag()) > 1e-6) {
        throw std::invalid_argument("state must have unit trace");
    }
    if (linalg::min_eigenvalue(rho) < -1e-9) {
        throw std::invalid_argument("state must be positive semidefinite");
    }
    ExtensionConstraints c = build_state_extension_constraints(rho, shape, k);
    add_symmetry_rows(c);
    return extension_feasible(c, opts);
}

HermitianMatrix isotropic_state(int d, double fidelity) {
    if (d < 2) throw std::invalid_argument("isotropic dimension must be >= 2");
    if (fidelity < 0.0 || fidelity > 1.0) {
        throw std::invalid_argument("fidelity must lie in [0, 1]");
    }
    const int n = d * d;
    const Mat phi = entangled_pair(d) / static_cast<double>(d);
    const Mat rest = (Mat::Identity(n, n) - phi) / static_cast<double>(n - 1);
    return HermitianMatrix(fidelity * phi + (1.0 - fidelity) * rest);
}

double kext_isotropic_threshold(int d, int k, double tol,
                                const sdp::SolverOptions& opts) {
    if (d < 2) throw std::invalid_argument("isotropic dimension must be >= 2");
    if (k < 2) throw std::invalid_argument("extension order k must be >= 2");
    if (tol <= 0.0) throw std::invalid_argument("bisection tolerance must be positive");
    const SubsystemShape shape{{d, d}, {"A", "B"}};
    double lo = 1.0 / static_cast<double>(d * d);  // product state: extendible
    double hi = 1.0;  // maximally entangled: monogamy forbids extension
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (kext_state_feasible(isotropic_state(d, mid), shape, k, opts).feasible) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

FeasibilityReport validate_kext_superchannel(const quantum::SuperchannelChoi& theta,
                                             const quantum::SuperchannelChoi& upsilon,
                                             int k, double tol) {
    check_extension_layout(theta, upsilon, k, 1);

    std::map<std::string, double> res;
    res["superchannel_theta"] = quantum::validate_superchannel(theta).worst();
    res["superchannel_upsilon"] = quantum::validate_superchannel(upsilon).worst();

    const double scale = rel_scale(upsilon.choi);
    std::vector<std::string> drop(upsilon.d_labels.begin() + 1,
                                  upsilon.d_labels.end());
    const std::vector<std::string> keep = labels_without(upsilon.shape, drop);
    const linalg::HermitianMatrix lhs =
        linalg::partial_trace(upsilon.choi, upsilon.shape, keep);
    const SubsystemShape red = linalg::reduced_shape(upsilon.shape, keep);
    const linalg::HermitianMatrix rhs = embed_theta(
        theta,
        {upsilon.a_labels[0], upsilon.d_labels[0], upsilon.c_labels[0],
         upsilon.b_labels[0]},
        red);
    res["marginal"] = (lhs.mat() - rhs.mat()).cwiseAbs().maxCoeff() / scale;

    res["permutation"] = permutation_residual(
        upsilon, {&upsilon.d_labels, &upsilon.b_labels}, 0, k);

    return residual_report(std::move(res), tol);
}

FeasibilityReport validate_bipartite_kext_superchannel(
    const quantum::SuperchannelChoi& theta,
    const quantum::SuperchannelChoi& upsilon, int k, double tol) {
    check_extension_layout(theta, upsilon, k, 2);

    std::map<std::string, double> res;
    res["superchannel_theta"] = quantum::validate_superchannel(theta).worst();
    res["superchannel_upsilon"] = quantum::validate_superchannel(upsilon).worst();

    const double scale = rel_scale(upsilon.choi);

    // First-copy marginal: trace the receiver replicas of the argument-input
    // and transformed-output groups.
    std::vector<std::string> drop;
    drop.insert(drop.end(), upsilon.a_labels.begin() + 2, upsilon.a_labels.end());
    drop.insert(drop.end(), upsilon.d_labels.begin() + 2, upsilon.d_labels.end());
    const std::vector<std::string> keep = labels_without(upsilon.shape, drop);
    const linalg::HermitianMatrix lhs =
        linalg::partial_trace(upsilon.choi, upsilon.shape, keep);
    const SubsystemShape red = linalg::reduced_shape(upsilon.shape, keep);
    const linalg::HermitianMatrix rhs = embed_theta(
        theta,
        {upsilon.a_labels[0], upsilon.a_labels[1], upsilon.d_labels[0],
         upsilon.d_labels[1], upsilon.c_labels[0], upsilon.c_labels[1],
         upsilon.b_labels[0], upsilon.b_labels[1]},
        red);
    res["marginal"] = (lhs.mat() - rhs.mat()).cwiseAbs().maxCoeff() / scale;

    // Discarding the replica outputs must render the replica argument-output
    // inputs irrelevant (maximally mixed insertion).
    std::vector<std::string> drop_dp(upsilon.d_labels.begin() + 2,
                                     upsilon.d_labels.end());
    const std::vector<std::string> keep_ns = labels_without(upsilon.shape, drop_dp);
    const linalg::HermitianMatrix ns_lhs =
        linalg::partial_trace(upsilon.choi, upsilon.shape, keep_ns);
    const SubsystemShape red_ns = linalg::reduced_shape(upsilon.shape, keep_ns);
    std::vector<std::string> drop_bp(upsilon.b_labels.begin() + 2,
                                     upsilon.b_labels.end());
    std::vector<std::string> keep_inner = labels_without(red_ns, drop_bp);
    const linalg::HermitianMatrix inner =
        linalg::partial_trace(upsilon.choi, upsilon.shape,
                              labels_without(upsilon.shape, [&] {
                                  std::vector<std::string> d2 = drop_dp;
                                  d2.insert(d2.end(), drop_bp.begin(), drop_bp.end());
                                  return d2;
                              }()));
    double denom = 1.0;
    for (const auto& l : drop_bp) denom *= upsilon.shape.dim_of(l);
    const linalg::HermitianMatrix ns_rhs =
        linalg::embed_with_identity(inner, keep_inner, red_ns);
    res["nonsignaling"] =
        (ns_lhs.mat() - ns_rhs.mat() / denom).cwiseAbs().maxCoeff() / scale;

    res["permutation"] = permutation_residual(
        upsilon,
        {&upsilon.a_labels, &upsilon.d_labels, &upsilon.c_labels,
         &upsilon.b_labels},
        1, k);

    return residual_report(std::move(res), tol);
}

quantum::SuperchannelChoi kext_superchannel_1w_locc(
    const std::vector<quantum::ChoiChannel>& pre_instrument,
    const std::vector<quantum::ChoiChannel>& post, int k) {
    if (k < 1) throw std::invalid_argument("extension order k must be >= 1");
    check_instrument(pre_instrument, "pre-processing instrument");
    check_channel_list(post, "post-processing list");
    if (pre_instrument.size() != post.size()) {
        throw linalg::ShapeMismatch("pre and post branch counts must match");
    }
    const int dc = pre_instrument[0].in_dim();
    const int da = pre_instrument[0].out_dim();
    const int db = post[0].in_dim();
    const int dd = post[0].out_dim();

    SubsystemShape built;
    built.labels = {"C", "A"};
    built.dims = {dc, da};
    for (int i = 1; i <= k; ++i) {
        built.labels.push_back(copy_label("B", i));
        built.dims.push_back(db);
        built.labels.push_back(copy_label("D", i));
        built.dims.push_back(dd);
    }
    std::vector<std::string> order = {"A"};
    for (int i = 1; i <= k; ++i) order.push_back(copy_label("D", i));
    order.push_back("C");
    for (int i = 1; i <= k; ++i) order.push_back(copy_label("B", i));

    Mat g = Mat::Zero(built.total_dim(), built.total_dim());
    for (size_t x = 0; x < pre_instrument.size(); ++x) {
        Mat f = pre_instrument[x].choi.mat();
        for (int i = 1; i <= k; ++i) f = linalg::kron(f, post[x].choi.mat());
        g += linalg::permute_subsystems(linalg::HermitianMatrix(f, 1e-8), built,
                                        order)
                 .mat();
    }

    quantum::SuperchannelChoi s;
    s.choi = linalg::HermitianMatrix(g, 1e-8);
    s.a_labels = {"A"};
    for (int i = 1; i <= k; ++i) s.d_labels.push_back(copy_label("D", i));
    s.c_labels = {"C"};
    for (int i = 1; i <= k; ++i) s.b_labels.push_back(copy_label("B", i));
    s.shape = shape_in_order(built, order);
    s.check_layout();
    return s;
}

quantum::SuperchannelChoi bipartite_kext_superchannel_1w_locc(
    const OneWayLoccSuperchannelParts& parts, int k) {
    if (k < 1) throw std::invalid_argument("extension order k must be >= 1");
    check_instrument(parts.pre_a, "sender pre-processing instrument");
    check_instrument(parts.post_a, "sender post-processing instrument");
    check_channel_list(parts.pre_b, "receiver pre-processing list");
    check_channel_list(parts.post_b, "receiver post-processing list");
    if (parts.pre_a.size() != parts.pre_b.size()) {
        throw linalg::ShapeMismatch("pre-processing branch counts must match");
    }
    if (parts.post_a.size() != parts.post_b.size()) {
        throw linalg::ShapeMismatch("post-processing branch counts must match");
    }
    if (parts.dim_a < 1 || parts.dim_ma < 1 || parts.dim_b < 1 || parts.dim_mb < 1) {
        throw std::invalid_argument("system and memory dimensions must be positive");
    }

    const int dc = parts.pre_a[0].in_dim();
    const int dd = parts.pre_b[0].in_dim();
    const int dap = parts.post_a[0].in_dim() / parts.dim_ma;
    const int dbp = parts.post_b[0].in_dim() / parts.dim_mb;
    const int dcp = parts.post_a[0].out_dim();
    const int ddp = parts.post_b[0].out_dim();

    SubsystemShape built;
    built.labels = {"C", "A", "Ap", "Cp"};
    built.dims = {dc, parts.dim_a, dap, dcp};
    for (int i = 1; i <= k; ++i) {
        built.labels.push_back(copy_label("D", i));
        built.dims.push_back(dd);
        built.labels.push_back(copy_label("B", i));
        built.dims.push_back(parts.dim_b);
        built.labels.push_back(copy_label("Bp", i));
        built.dims.push_back(dbp);
        built.labels.push_back(copy_label("Dp", i));
        built.dims.push_back(ddp);
    }
    std::vector<std::string> order = {"A"};
    for (int i = 1; i <= k; ++i) order.push_back(copy_label("B", i));
    order.push_back("Cp");
    for (int i = 1; i <= k; ++i) order.push_back(copy_label("Dp", i));
    order.push_back("C");
    for (int i = 1; i <= k; ++i) order.push_back(copy_label("D", i));
    order.push_back("Ap");
    for (int i = 1; i <= k; ++i) order.push_back(copy_label("Bp", i));

    Mat g = Mat::Zero(built.total_dim(), built.total_dim());
    for (size_t x = 0; x < parts.pre_a.size(); ++x) {
        for (size_t y = 0; y < parts.post_a.size(); ++y) {
            const linalg::HermitianMatrix side_a =
                branch_comb(parts.pre_a[x], parts.dim_a, parts.dim_ma,
                            parts.post_a[y], {"C", "A", "Ap", "Cp"});
            const linalg::HermitianMatrix side_b =
                branch_comb(parts.pre_b[x], parts.dim_b, parts.dim_mb,
                            parts.post_b[y], {"D", "B", "Bp", "Dp"});
            Mat f = side_a.mat();
            for (int i = 1; i <= k; ++i) f = linalg::kron(f, side_b.mat());
            // built order interleaves the copies exactly as the krons do
            g += linalg::permute_subsystems(linalg::HermitianMatrix(f, 1e-7),
                                            built, order)
                     .mat();
        }
    }

    quantum::SuperchannelChoi s;
    s.choi = linalg::HermitianMatrix(g, 1e-7);
    s.a_labels = {"A"};
    for (int i = 1; i <= k; ++i) s.a_labels.push_back(copy_label("B", i));
    s.d_labels = {"Cp"};
    for (int i = 1; i <= k; ++i) s.d_labels.push_back(copy_label("Dp", i));
    s.c_labels = {"C"};
    for (int i = 1; i <= k; ++i) s.c_labels.push_back(copy_label("D", i));
    s.b_labels = {"Ap"};
    for (int i = 1; i <= k; ++i) s.b_labels.push_back(copy_label("Bp", i));
    s.shape = shape_in_order(built, order);
    s.check_layout();
    return s;
}

}  // namespace unext::ext
