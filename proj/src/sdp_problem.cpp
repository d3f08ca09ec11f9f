#include <unext/sdp_problem.hpp>

#include <cmath>
#include <stdexcept>

namespace unext::sdp {

namespace {

constexpr double kRoot2 = 1.4142135623730950488;

// Upper-triangle scan order shared by hvec and svec: (0,1),(0,2),(1,2),...
int upper_index(int i, int j, int n) {
    // number of pairs preceding column j plus row offset
    (void)n;
    return j * (j - 1) / 2 + i;
}

void check_dim(int got, int want, const char* what) {
    if (got != want) {
        throw linalg::ShapeMismatch(std::string(what) + ": dimension " +
                                    std::to_string(got) + " != " +
                                    std::to_string(want));
    }
}

}  // namespace

int hvec_dim(int n) { return n * n; }

RVec hvec(const Mat& herm) {
    const int n = static_cast<int>(herm.rows());
    check_dim(static_cast<int>(herm.cols()), n, "hvec");
    RVec v(hvec_dim(n));
    for (int i = 0; i < n; ++i) v[i] = herm(i, i).real();
    const int off = n;
    const int pairs = n * (n - 1) / 2;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            const int k = upper_index(i, j, n);
            v[off + k] = kRoot2 * herm(i, j).real();
            v[off + pairs + k] = kRoot2 * herm(i, j).imag();
        }
    }
    return v;
}

Mat hvec_to_mat(const RVec& v, int n) {
    check_dim(static_cast<int>(v.size()), hvec_dim(n), "hvec_to_mat");
    Mat m = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = v[i];
    const int off = n;
    const int pairs = n * (n - 1) / 2;
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            const int k = upper_index(i, j, n);
            const linalg::cplx z(v[off + k] / kRoot2, v[off + pairs + k] / kRoot2);
            m(i, j) = z;
            m(j, i) = std::conj(z);
        }
    }
    return m;
}

int svec_dim(int n) { return n * (n + 1) / 2; }

RVec svec(const RMat& sym) {
    const int n = static_cast<int>(sym.rows());
    check_dim(static_cast<int>(sym.cols()), n, "svec");
    RVec v(svec_dim(n));
    for (int i = 0; i < n; ++i) v[i] = sym(i, i);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < j; ++i) v[n + upper_index(i, j, n)] = kRoot2 * sym(i, j);
    return v;
}

RMat svec_to_sym(const RVec& v, int n) {
    check_dim(static_cast<int>(v.size()), svec_dim(n), "svec_to_sym");
    RMat m = RMat::Zero(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = v[i];
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < j; ++i) {
            const double x = v[n + upper_index(i, j, n)] / kRoot2;
            m(i, j) = x;
            m(j, i) = x;
        }
    }
    return m;
}

RMat real_embed_matrix(const Mat& m) {
    const int n = static_cast<int>(m.rows());
    check_dim(static_cast<int>(m.cols()), n, "real_embed_matrix");
    RMat r(2 * n, 2 * n);
    r.topLeftCorner(n, n) = m.real();
    r.bottomRightCorner(n, n) = m.real();
    r.topRightCorner(n, n) = -m.imag();
    r.bottomLeftCorner(n, n) = m.imag();
    return r;
}

Mat complex_from_embedded(const RMat& r) {
    const int n2 = static_cast<int>(r.rows());
    if (n2 % 2 != 0 || r.cols() != n2) {
        throw linalg::ShapeMismatch("complex_from_embedded: need even square");
    }
    const int n = n2 / 2;
    // average the two copies so rounding noise in either is halved
    RMat re = 0.5 * (r.topLeftCorner(n, n) + r.bottomRightCorner(n, n));
    RMat im = 0.5 * (r.bottomLeftCorner(n, n) - r.topRightCorner(n, n));
    Mat out(n, n);
    out.real() = re;
    out.imag() = im;
    return out;
}

RVec LinMap::apply(const RVec& x) const {
    if (identity) return x;
    return m * x;
}

LinMap identity_map(int n) {
    LinMap l;
    l.out_dim = n;
    l.in_dim = n;
    l.identity = true;
    return l;
}

LinMap scale_map(int n, double c) {
    LinMap l;
    l.out_dim = n;
    l.in_dim = n;
    l.m = c * RMat::Identity(hvec_dim(n), hvec_dim(n));
    return l;
}

namespace {

// Generic column-wise construction from a Hermitian-matrix action.
template <typename F>
LinMap map_from_action(int out_dim, int in_dim, F&& act) {
    LinMap l;
    l.out_dim = out_dim;
    l.in_dim = in_dim;
    l.m = RMat::Zero(hvec_dim(out_dim), hvec_dim(in_dim));
    RVec basis = RVec::Zero(hvec_dim(in_dim));
    for (int j = 0; j < hvec_dim(in_dim); ++j) {
        basis[j] = 1.0;
        const Mat x = hvec_to_mat(basis, in_dim);
        l.m.col(j) = hvec(act(x));
        basis[j] = 0.0;
    }
    return l;
}

}  // namespace

LinMap partial_trace_map(const linalg::SubsystemShape& shape,
                         const std::vector<std::string>& keep) {
    const auto out_shape = linalg::reduced_shape(shape, keep);
    return map_from_action(out_shape.total_dim(), shape.total_dim(),
                           [&](const Mat& x) -> Mat {
                               return linalg::partial_trace_raw(x, shape, keep);
                           });
}

LinMap insert_identity_map(const linalg::SubsystemShape& in_shape,
                           const std::string& label, int dim,
                           const std::vector<std::string>& out_labels) {
    std::vector<int> out_dims;
    out_dims.reserve(out_labels.size());
    for (const auto& l : out_labels) {
        out_dims.push_back(l == label ? dim : in_shape.dim_of(l));
    }
    linalg::SubsystemShape out_shape{out_dims, out_labels};
    // build as: kron(X, I) on labels (in..., label), then permute into place
    std::vector<std::string> pre_labels = in_shape.labels;
    pre_labels.push_back(label);
    std::vector<int> pre_dims = in_shape.dims;
    pre_dims.push_back(dim);
    linalg::SubsystemShape pre_shape{pre_dims, pre_labels};
    return map_from_action(
        out_shape.total_dim(), in_shape.total_dim(), [&](const Mat& x) -> Mat {
            Mat lifted = linalg::kron(x, Mat::Identity(dim, dim));
            return linalg::permute_subsystems(linalg::HermitianMatrix(lifted),
                                              pre_shape, out_labels)
                .mat();
        });
}

LinMap place_upper_left_map(int n) {
    return map_from_action(2 * n, n, [&](const Mat& x) -> Mat {
        Mat out = Mat::Zero(2 * n, 2 * n);
        out.topLeftCorner(n, n) = x;
        return out;
    });
}

LinMap place_lower_right_map(int n) {
    return map_from_action(2 * n, n, [&](const Mat& x) -> Mat {
        Mat out = Mat::Zero(2 * n, 2 * n);
        out.bottomRightCorner(n, n) = x;
        return out;
    });
}

LinMap place_off_diagonal_map(int n) {
    return map_from_action(2 * n, n, [&](const Mat& x) -> Mat {
        Mat out = Mat::Zero(2 * n, 2 * n);
        out.topRightCorner(n, n) = x;
        out.bottomLeftCorner(n, n) = x.adjoint();
        return out;
    });
}

LinMap conjugate_map(const Mat& u) {
    const int out = static_cast<int>(u.rows());
    const int in = static_cast<int>(u.cols());
    return map_from_action(out, in, [&](const Mat& x) -> Mat {
        return u * x * u.adjoint();
    });
}

LinMap place_diagonal_at_map(int total, int off, int d) {
    if (off < 0 || d < 1 || off + d > total) {
        throw std::invalid_argument("diagonal placement out of range");
    }
    return map_from_action(total, d, [&](const Mat& x) -> Mat {
        Mat out = Mat::Zero(total, total);
        out.block(off, off, d, d) = x;
        return out;
    });
}

LinMap place_off_diagonal_map(int r, const Mat& k) {
    if (static_cast<int>(k.cols()) != r) {
        throw std::invalid_argument("corner factor has wrong column count");
    }
    const int s = static_cast<int>(k.rows());
    const int total = r + s;
    return map_from_action(total, r, [&](const Mat& x) -> Mat {
        Mat out = Mat::Zero(total, total);
        out.block(0, r, r, s) = x * k.adjoint();
        out.block(r, 0, s, r) = k * x;
        return out;
    });
}

LinMap scalar_times_map(const Mat& coeff) {
    const int n = static_cast<int>(coeff.rows());
    LinMap l;
    l.out_dim = n;
    l.in_dim = 1;
    l.m = hvec(coeff);
    return l;
}

LinMap compose(const LinMap& a, const LinMap& b) {
    check_dim(b.out_dim, a.in_dim, "compose");
    if (a.identity) return b;
    if (b.identity) return a;
    LinMap l;
    l.out_dim = a.out_dim;
    l.in_dim = b.in_dim;
    l.m = a.m * b.m;
    return l;
}

int ConicProblem::var_offset(int v) const {
    int off = 0;
    for (int i = 0; i < v; ++i) off += hvec_dim(vars[i].dim);
    return off;
}

int ConicProblem::total_dofs() const { return var_offset(static_cast<int>(vars.size())); }

int ConicProblem::add_var(const std::string& name, int dim) {
    vars.push_back({name, dim});
    return static_cast<int>(vars.size()) - 1;
}

void ConicProblem::validate() const {
    auto check_expr = [&](const MatExpr& e, const char* what) {
        if (e.constant.rows() != e.dim || e.constant.cols() != e.dim) {
            throw linalg::ShapeMismatch(std::string(what) + ": constant shape");
        }
        if ((e.constant - e.constant.adjoint()).cwiseAbs().maxCoeff() > 1e-8) {
            throw linalg::NonHermitian(std::string(what) + ": constant not Hermitian");
        }
        for (const auto& t : e.terms) {
            if (t.var < 0 || t.var >= static_cast<int>(vars.size())) {
                throw std::invalid_argument(std::string(what) + ": bad variable index");
            }
            check_dim(t.map.in_dim, vars[t.var].dim, what);
            check_dim(t.map.out_dim, e.dim, what);
            if (!t.map.identity) {
                check_dim(static_cast<int>(t.map.m.rows()), hvec_dim(t.map.out_dim), what);
                check_dim(static_cast<int>(t.map.m.cols()), hvec_dim(t.map.in_dim), what);
            }
        }
    };
    for (const auto& b : psd_blocks) check_expr(b, "psd block");
    for (const auto& e : equalities) check_expr(e, "equality");
    if (objective.size() != total_dofs()) {
        throw linalg::ShapeMismatch("objective length != total dofs");
    }
}

nlohmann::json problem_to_json(const ConicProblem& p) {
    nlohmann::json j;
    j["vars"] = nlohmann::json::array();
    for (const auto& v : p.vars) j["vars"].push_back({{"name", v.name}, {"dim", v.dim}});
    auto expr_json = [&](const MatExpr& e) {
        nlohmann::json je;
        je["dim"] = e.dim;
        nlohmann::json c = nlohmann::json::array();
        for (int r = 0; r < e.dim; ++r) {
            for (int s = 0; s < e.dim; ++s) {
                const auto z = e.constant(r, s);
                if (std::abs(z) > 0.0) c.push_back({r, s, z.real(), z.imag()});
            }
        }
        je["constant"] = std::move(c);
        je["terms"] = nlohmann::json::array();
        for (const auto& t : e.terms) {
            nlohmann::json jt;
            jt["var"] = p.vars[t.var].name;
            if (t.map.identity) {
                jt["map"] = "identity";
            } else {
                nlohmann::json triplets = nlohmann::json::array();
                for (int r = 0; r < t.map.m.rows(); ++r) {
                    for (int s = 0; s < t.map.m.cols(); ++s) {
                        if (t.map.m(r, s) != 0.0) triplets.push_back({r, s, t.map.m(r, s)});
                    }
                }
                jt["map"] = std::move(triplets);
            }
            je["terms"].push_back(std::move(jt));
        }
        return je;
    };
    j["psd_blocks"] = nlohmann::json::array();
    for (const auto& b : p.psd_blocks) j["psd_blocks"].push_back(expr_json(b));
    j["equalities"] = nlohmann::json::array();
    for (const auto& e : p.equalities) j["equalities"].push_back(expr_json(e));
    j["objective"] = nlohmann::json::array();
    for (int i = 0; i < p.objective.size(); ++i) {
        if (p.objective[i] != 0.0) j["objective"].push_back({i, p.objective[i]});
    }
    j["objective_constant"] = p.objective_constant;
    return j;
}

int RealConicProblem::var_offset(int v) const {
    int off = 0;
    for (int i = 0; i < v; ++i) off += hvec_dim(vars[i].dim);
    return off;
}

int RealConicProblem::total_dofs() const {
    return var_offset(static_cast<int>(vars.size()));
}

namespace {

std::vector<SparseEntry> embedded_entries(const Mat& x) {
    const int n = static_cast<int>(x.rows());
    std::vector<SparseEntry> out;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const double re = x(r, c).real();
            const double im = x(r, c).imag();
            if (re != 0.0) {
                out.push_back({r, c, re});
                out.push_back({n + r, n + c, re});
            }
            if (im != 0.0) {
                out.push_back({r, n + c, -im});
                out.push_back({n + r, c, im});
            }
        }
    }
    return out;
}

}  // namespace

RealConicProblem real_embed(const ConicProblem& p) {
    p.validate();
    RealConicProblem rp;
    rp.vars = p.vars;
    rp.objective = p.objective;
    rp.objective_constant = p.objective_constant;

    for (const auto& b : p.psd_blocks) {
        EmbeddedBlock eb;
        eb.n = 2 * b.dim;
        eb.constant = real_embed_matrix(b.constant);
        const bool pure = b.terms.size() == 1 && b.terms[0].map.identity &&
                          b.constant.cwiseAbs().maxCoeff() == 0.0;
        if (pure) eb.pure_var = b.terms[0].var;
        for (const auto& t : b.terms) {
            BlockVarCols vc;
            vc.var = t.var;
            const int in_h = hvec_dim(p.vars[t.var].dim);
            vc.cols.resize(in_h);
            RVec basis = RVec::Zero(in_h);
            for (int j = 0; j < in_h; ++j) {
                basis[j] = 1.0;
                const Mat img = hvec_to_mat(t.map.apply(basis), b.dim);
                vc.cols[j] = embedded_entries(img);
                basis[j] = 0.0;
            }
            eb.vars.push_back(std::move(vc));
        }
        rp.blocks.push_back(std::move(eb));
    }

    int m = 0;
    for (const auto& e : p.equalities) m += hvec_dim(e.dim);
    rp.eq_rhs = RVec::Zero(m);
    rp.eq_rows.resize(m);
    int row0 = 0;
    for (const auto& e : p.equalities) {
        const int rows = hvec_dim(e.dim);
        const RVec c = hvec(e.constant);
        for (int r = 0; r < rows; ++r) rp.eq_rhs[row0 + r] = -c[r];
        for (const auto& t : e.terms) {
            const int off = p.var_offset(t.var);
            const int in_h = hvec_dim(p.vars[t.var].dim);
            if (t.map.identity) {
                for (int r = 0; r < rows; ++r) {
                    rp.eq_rows[row0 + r].idx.push_back(off + r);
                    rp.eq_rows[row0 + r].val.push_back(1.0);
                }
            } else {
                for (int r = 0; r < rows; ++r) {
                    for (int j = 0; j < in_h; ++j) {
                        const double v = t.map.m(r, j);
                        if (v != 0.0) {
                            rp.eq_rows[row0 + r].idx.push_back(off + j);
                            rp.eq_rows[row0 + r].val.push_back(v);
                        }
                    }
                }
            }
        }
        row0 += rows;
    }
    return rp;
}

}  // namespace unext::sdp
