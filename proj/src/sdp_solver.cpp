#include <unext/sdp_solver.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <utility>

namespace unext::sdp {

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::optimal: return "optimal";
        case SolveStatus::infeasible: return "infeasible";
        case SolveStatus::unbounded: return "unbounded";
        case SolveStatus::inaccurate: return "inaccurate";
        case SolveStatus::failed: return "failed";
    }
    return "failed";
}

namespace {

constexpr double kReg = 1e-11;          // quasidefinite regularization
constexpr int kMaxEmbeddedRows = 4096;  // total cone size guard

struct SymEig {
    RMat u;
    RVec d;
};

SymEig sym_eig(const RMat& m) {
    Eigen::SelfAdjointEigenSolver<RMat> es(m);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigensolver failed");
    }
    return {es.eigenvectors(), es.eigenvalues()};
}

RMat eig_pow(const SymEig& e, double p) {
    RVec d(e.d.size());
    for (int i = 0; i < d.size(); ++i) d[i] = std::pow(e.d[i], p);
    return e.u * d.asDiagonal() * e.u.transpose();
}

double col_dot(const std::vector<SparseEntry>& col, const RMat& m) {
    double s = 0.0;
    for (const auto& e : col) s += e.v * m(e.r, e.c);
    return s;
}

void col_add(RMat& m, const std::vector<SparseEntry>& col, double w) {
    for (const auto& e : col) m(e.r, e.c) += w * e.v;
}

// Extended-precision lane.  The W^-1 (.) W^-1 conjugations amplify rounding
// error by the squared inverse scaling norm, which grows like 1/mu along the
// central path; evaluating the dual-side products in long double keeps the
// accumulated dual residual near machine precision instead of stalling at
// that amplification floor.
using RMatX = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using RVecX = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

long double col_dot_x(const std::vector<SparseEntry>& col, const RMatX& m) {
    long double s = 0.0L;
    for (const auto& e : col) s += static_cast<long double>(e.v) * m(e.r, e.c);
    return s;
}

// Orthogonal projection onto the embedded-Hermitian subspace
// [[Re, -Im], [Im, Re]].
RMatX embed_project_x(const RMatX& m) {
    const int n = static_cast<int>(m.rows()) / 2;
    RMatX re = m.topLeftCorner(n, n) + m.bottomRightCorner(n, n);
    RMatX im = m.bottomLeftCorner(n, n) - m.topRightCorner(n, n);
    RMatX reh = 0.25L * (re + re.transpose());
    RMatX imh = 0.25L * (im - im.transpose());
    RMatX out(2 * n, 2 * n);
    out.topLeftCorner(n, n) = reh;
    out.bottomRightCorner(n, n) = reh;
    out.topRightCorner(n, n) = -imh;
    out.bottomLeftCorner(n, n) = imh;
    return out;
}

// Per-block scaling data refreshed every iteration.
struct BlockWork {
    int n = 0;
    RMat S, Z;
    RMat Whalf, Winvhalf, Winv, Zinv;
    RMatX WinvX;  // Winv in the extended-precision lane
    RMat qv;      // eigenvectors of V = Winvhalf S Winvhalf
    RVec dv;      // eigenvalues of V
    double smin = 0.0;
};

struct GroupFactor {
    bool analytic = false;
    bool negate = false;
    Eigen::LLT<RMat> llt;
    // analytic: complex scaling eigensystem, H = 2 * Wc^{-1} (.) Wc^{-1}
    int nc = 0;
    Mat vc;
    RVec dc;
    double delta = kReg;

    RVec solve_vec(const RVec& r) const {
        if (!analytic) {
            RVec x = llt.solve(r);
            return negate ? RVec(-x) : x;
        }
        Mat x = hvec_to_mat(r, nc);
        Mat xp = vc.adjoint() * x * vc;
        for (int i = 0; i < nc; ++i) {
            for (int j = 0; j < nc; ++j) {
                xp(i, j) /= 2.0 / (dc[i] * dc[j]) + delta;
            }
        }
        x = vc * xp * vc.adjoint();
        return hvec(x);
    }

    RMat solve_cols(const RMat& cols) const {
        if (!analytic) {
            RMat x = llt.solve(cols);
            return negate ? RMat(-x) : x;
        }
        RMat out(cols.rows(), cols.cols());
        for (int j = 0; j < cols.cols(); ++j) out.col(j) = solve_vec(cols.col(j));
        return out;
    }
};

struct Elimination {
    int g = -1;
    GroupFactor factor;
    std::vector<std::pair<int, RMat>> coupling;  // (later group, K_ng)
};

class Ipm {
  public:
    Ipm(const RealConicProblem& p, const SolverOptions& opts)
        : p_(p), opts_(opts), nz_(p.total_dofs()), m_(static_cast<int>(p.eq_rows.size())) {
        int rows = 0;
        for (const auto& b : p_.blocks) rows += b.n;
        if (rows > kMaxEmbeddedRows) {
            throw std::invalid_argument(
                "total embedded PSD dimension " + std::to_string(rows) +
                " exceeds cap " + std::to_string(kMaxEmbeddedRows));
        }
        cone_dim_ = rows;
        setup_groups();
    }

    SolveReport run(const RVec& z0, Solution* out);

  private:
    void setup_groups();
    void compute_block_state(std::vector<BlockWork>& bw) const;
    RVecX dual_residual_x() const;
    RVec primal_residual() const;
    RVecX apply_at_x(const RVec& lam) const;
    RVec apply_a(const RVec& dz) const;      // A dz
    void factorize(const std::vector<BlockWork>& bw);
    RVec kkt_solve(const RVec& rhs) const;
    RVecX kkt_apply_x(const std::vector<BlockWork>& bw, const RVec& u) const;
    RVec solve_refined(const std::vector<BlockWork>& bw, const RVecX& rhs,
                       double& rel_resid) const;
    RVecX direction_rhs_x(const std::vector<BlockWork>& bw,
                          const std::vector<RMat>& rblocks, const RVecX& rd) const;

    RMat block_delta_s(int bi, const RVec& dz) const;
    RMatX block_delta_s_x(int bi, const RVec& dz) const;
    void project_block_x(int bi, const RMatX& t, RVecX& acc) const;

    const RealConicProblem& p_;
    SolverOptions opts_;
    int nz_ = 0;
    int m_ = 0;
    int cone_dim_ = 0;

    // group layout: one group per variable, optional lambda group last
    int ngroups_ = 0;
    int lambda_group_ = -1;
    std::vector<int> gdim_, goff_;
    std::vector<int> order_, pos_;
    std::vector<int> analytic_block_;       // per var, -1 if generic
    std::vector<RMat> acols_;               // per var: dense m x dof slice of A

    RVec z_, lambda_;
    std::vector<RMatX> zx_;    // dual cone variables per block (master copy)
    std::vector<RMat> zmats_;  // double mirror of zx_

    std::vector<Elimination> elim_;
};

void Ipm::setup_groups() {
    const int nv = static_cast<int>(p_.vars.size());
    ngroups_ = nv + (m_ > 0 ? 1 : 0);
    gdim_.resize(ngroups_);
    goff_.resize(ngroups_);
    for (int v = 0; v < nv; ++v) {
        gdim_[v] = hvec_dim(p_.vars[v].dim);
        goff_[v] = p_.var_offset(v);
    }
    if (m_ > 0) {
        lambda_group_ = nv;
        gdim_[nv] = m_;
        goff_[nv] = nz_;
    }

    std::vector<int> appearances(nv, 0);
    for (const auto& b : p_.blocks) {
        for (const auto& vc : b.vars) appearances[vc.var]++;
    }
    analytic_block_.assign(nv, -1);
    for (int bi = 0; bi < static_cast<int>(p_.blocks.size()); ++bi) {
        const int pv = p_.blocks[bi].pure_var;
        if (pv >= 0 && appearances[pv] == 1) analytic_block_[pv] = bi;
    }

    order_.clear();
    for (int v = 0; v < nv; ++v) {
        if (analytic_block_[v] >= 0) order_.push_back(v);
    }
    for (int v = 0; v < nv; ++v) {
        if (analytic_block_[v] < 0) order_.push_back(v);
    }
    if (m_ > 0) order_.push_back(lambda_group_);
    pos_.resize(ngroups_);
    for (int i = 0; i < ngroups_; ++i) pos_[order_[i]] = i;

    acols_.assign(nv, RMat());
    if (m_ > 0) {
        for (int v = 0; v < nv; ++v) acols_[v] = RMat::Zero(m_, gdim_[v]);
        for (int r = 0; r < m_; ++r) {
            const auto& row = p_.eq_rows[r];
            for (size_t k = 0; k < row.idx.size(); ++k) {
                const int gidx = row.idx[k];
                // locate variable by offset
                int v = 0;
                while (v + 1 < nv && p_.var_offset(v + 1) <= gidx) ++v;
                acols_[v](r, gidx - goff_[v]) += row.val[k];
            }
        }
    }
}

void Ipm::compute_block_state(std::vector<BlockWork>& bw) const {
    const int nb = static_cast<int>(p_.blocks.size());
    bw.resize(nb);
    for (int bi = 0; bi < nb; ++bi) {
        const auto& b = p_.blocks[bi];
        BlockWork& w = bw[bi];
        w.n = b.n;
        w.S = b.constant;
        for (const auto& vc : b.vars) {
            const int off = goff_[vc.var];
            for (int j = 0; j < static_cast<int>(vc.cols.size()); ++j) {
                const double zj = z_[off + j];
                if (zj != 0.0) col_add(w.S, vc.cols[j], zj);
            }
        }
        w.S = 0.5 * (w.S + w.S.transpose());
        w.Z = zmats_[bi];

        const SymEig es = sym_eig(w.S);
        w.smin = es.d.minCoeff();
        if (w.smin <= 0.0) {
            throw std::runtime_error("cone iterate lost positive definiteness");
        }
        const RMat shalf = eig_pow(es, 0.5);
        const RMat sinvhalf = eig_pow(es, -0.5);
        const SymEig ex = sym_eig(RMat(shalf * w.Z * shalf));
        const RMat xinvhalf = eig_pow(ex, -0.5);
        const RMat wmat = shalf * xinvhalf * shalf;
        const SymEig ew = sym_eig(RMat(0.5 * (wmat + wmat.transpose())));
        w.Whalf = eig_pow(ew, 0.5);
        w.Winvhalf = eig_pow(ew, -0.5);
        w.Winv = eig_pow(ew, -1.0);
        w.WinvX = w.Winv.cast<long double>();
        w.Zinv = eig_pow(sym_eig(w.Z), -1.0);
        const RMat v = w.Winvhalf * w.S * w.Winvhalf;
        const SymEig ev = sym_eig(RMat(0.5 * (v + v.transpose())));
        w.qv = ev.u;
        w.dv = ev.d;
    }
}

RVecX Ipm::dual_residual_x() const {
    // stationarity residual g - sum_b B_b^T Z_b - A^T lambda
    RVecX r = p_.objective.cast<long double>();
    for (size_t bi = 0; bi < p_.blocks.size(); ++bi) {
        project_block_x(static_cast<int>(bi), zx_[bi], r);
    }
    if (m_ > 0) r -= apply_at_x(lambda_);
    return r;
}

void Ipm::project_block_x(int bi, const RMatX& t, RVecX& acc) const {
    const auto& b = p_.blocks[bi];
    for (const auto& vc : b.vars) {
        const int off = goff_[vc.var];
        for (int j = 0; j < static_cast<int>(vc.cols.size()); ++j) {
            acc[off + j] -= col_dot_x(vc.cols[j], t);
        }
    }
}

RVec Ipm::primal_residual() const {
    if (m_ == 0) return RVec();
    return p_.eq_rhs - apply_a(z_);
}

RVecX Ipm::apply_at_x(const RVec& lam) const {
    RVecX out = RVecX::Zero(nz_);
    for (int r = 0; r < m_; ++r) {
        const auto& row = p_.eq_rows[r];
        const long double lr = lam[r];
        if (lr == 0.0L) continue;
        for (size_t k = 0; k < row.idx.size(); ++k)
            out[row.idx[k]] += static_cast<long double>(row.val[k]) * lr;
    }
    return out;
}

RVec Ipm::apply_a(const RVec& dz) const {
    RVec out = RVec::Zero(m_);
    for (int r = 0; r < m_; ++r) {
        const auto& row = p_.eq_rows[r];
        double s = 0.0;
        for (size_t k = 0; k < row.idx.size(); ++k) s += row.val[k] * dz[row.idx[k]];
        out[r] = s;
    }
    return out;
}

RMat Ipm::block_delta_s(int bi, const RVec& dz) const {
    const auto& b = p_.blocks[bi];
    RMat ds = RMat::Zero(b.n, b.n);
    for (const auto& vc : b.vars) {
        const int off = goff_[vc.var];
        for (int j = 0; j < static_cast<int>(vc.cols.size()); ++j) {
            const double w = dz[off + j];
            if (w != 0.0) col_add(ds, vc.cols[j], w);
        }
    }
    return RMat(0.5 * (ds + ds.transpose()));
}

RMatX Ipm::block_delta_s_x(int bi, const RVec& dz) const {
    const auto& b = p_.blocks[bi];
    RMatX ds = RMatX::Zero(b.n, b.n);
    for (const auto& vc : b.vars) {
        const int off = goff_[vc.var];
        for (int j = 0; j < static_cast<int>(vc.cols.size()); ++j) {
            const long double w = dz[off + j];
            if (w == 0.0L) continue;
            for (const auto& e : vc.cols[j])
                ds(e.r, e.c) += w * static_cast<long double>(e.v);
        }
    }
    return RMatX(0.5L * (ds + ds.transpose()));
}

void Ipm::factorize(const std::vector<BlockWork>& bw) {
    // assemble dense coupling blocks H_{ab}; analytic groups keep an operator
    std::map<std::pair<int, int>, RMat> edges;
    auto edge = [&](int a, int b) -> RMat& {
        if (pos_[a] > pos_[b]) std::swap(a, b);
        auto key = std::make_pair(a, b);
        auto it = edges.find(key);
        if (it == edges.end()) {
            it = edges.emplace(key, RMat::Zero(gdim_[a], gdim_[b])).first;
        }
        return it->second;
    };
    auto edge_set = [&](int a, int ia, int b, int ib, double v) {
        if (pos_[a] <= pos_[b]) {
            edge(a, b)(ia, ib) += v;
        } else {
            edge(b, a)(ib, ia) += v;
        }
    };

    for (size_t bi = 0; bi < p_.blocks.size(); ++bi) {
        const auto& b = p_.blocks[bi];
        if (b.pure_var >= 0 && analytic_block_[b.pure_var] == static_cast<int>(bi)) {
            continue;  // handled by the analytic group factor
        }
        const RMat& winv = bw[bi].Winv;
        RMat c(b.n, b.n);
        for (const auto& vj : b.vars) {
            for (int j = 0; j < static_cast<int>(vj.cols.size()); ++j) {
                c.setZero();
                for (const auto& e : vj.cols[j]) {
                    c.noalias() += e.v * (winv.col(e.r) * winv.col(e.c).transpose());
                }
                for (const auto& vi : b.vars) {
                    const bool same = vi.var == vj.var;
                    if (!same && pos_[vi.var] >= pos_[vj.var]) continue;
                    for (int i = 0; i < static_cast<int>(vi.cols.size()); ++i) {
                        const double h = col_dot(vi.cols[i], c);
                        if (h != 0.0) edge_set(vi.var, i, vj.var, j, h);
                    }
                }
            }
        }
    }

    if (m_ > 0) {
        for (int v = 0; v < static_cast<int>(p_.vars.size()); ++v) {
            if (acols_[v].cwiseAbs().maxCoeff() == 0.0) continue;
            edge(v, lambda_group_) = -acols_[v].transpose();
        }
    }

    elim_.clear();
    std::vector<bool> done(ngroups_, false);
    for (int oi = 0; oi < ngroups_; ++oi) {
        const int g = order_[oi];
        Elimination el;
        el.g = g;

        GroupFactor f;
        if (g != lambda_group_ && analytic_block_.size() > static_cast<size_t>(g) &&
            analytic_block_[g] >= 0) {
            const int bi = analytic_block_[g];
            f.analytic = true;
            f.nc = p_.vars[g].dim;
            const Mat wc = complex_from_embedded(bw[bi].Winv);
            // eigen-decompose Wc^{-1}; store as eigenvalues of Wc
            linalg::HermitianMatrix hw(0.5 * (wc + wc.adjoint()), 1e-6);
            const auto ew = linalg::herm_eig(hw);
            f.vc = ew.eigenvectors;
            f.dc = RVec(f.nc);
            for (int i = 0; i < f.nc; ++i) f.dc[i] = 1.0 / ew.eigenvalues[i];
            f.delta = kReg;
        } else {
            RMat d = RMat::Zero(gdim_[g], gdim_[g]);
            auto it = edges.find(std::make_pair(g, g));
            if (it != edges.end()) d = it->second;
            d = 0.5 * (d + d.transpose());
            const bool neg = g == lambda_group_;
            double delta = kReg;
            for (int attempt = 0; attempt < 6; ++attempt) {
                RMat dd = neg ? RMat(-d) : d;
                dd.diagonal().array() += delta;
                f.llt.compute(dd);
                if (f.llt.info() == Eigen::Success) break;
                delta *= 100.0;
            }
            if (f.llt.info() != Eigen::Success) {
                throw std::runtime_error("KKT pivot factorization failed");
            }
            f.negate = neg;
        }

        // collect couplings to later groups
        std::vector<std::pair<int, RMat>> coup;
        for (auto& kv : edges) {
            const auto& key = kv.first;
            int other = -1;
            if (key.first == g && key.second != g) other = key.second;
            if (key.second == g && key.first != g) other = key.first;
            if (other < 0 || done[other]) continue;
            // K_ng with n the later group
            RMat k_ng = key.first == g ? RMat(kv.second.transpose()) : kv.second;
            coup.emplace_back(other, std::move(k_ng));
        }
        // Schur updates among later groups
        for (size_t a = 0; a < coup.size(); ++a) {
            const RMat ya = f.solve_cols(RMat(coup[a].second.transpose()));
            for (size_t b = a; b < coup.size(); ++b) {
                RMat upd = coup[b].second * ya;  // (dof_b x dof_a)
                RMat& eab = edge(coup[b].first, coup[a].first);
                if (pos_[coup[b].first] <= pos_[coup[a].first]) {
                    eab -= upd;
                } else {
                    eab -= upd.transpose();
                }
            }
        }
        el.factor = std::move(f);
        el.coupling = std::move(coup);
        elim_.push_back(std::move(el));
        done[g] = true;
        edges.erase(std::make_pair(g, g));
    }
}

RVec Ipm::kkt_solve(const RVec& rhs) const {
    const int total = nz_ + m_;
    if (rhs.size() != total) throw std::logic_error("kkt rhs size");
    std::vector<RVec> seg(ngroups_);
    for (int g = 0; g < ngroups_; ++g) seg[g] = rhs.segment(goff_[g], gdim_[g]);

    std::vector<RVec> w(ngroups_);
    for (const auto& el : elim_) {
        w[el.g] = el.factor.solve_vec(seg[el.g]);
        for (const auto& cp : el.coupling) {
            seg[cp.first] -= cp.second * w[el.g];
        }
    }
    std::vector<RVec> u(ngroups_);
    for (auto it = elim_.rbegin(); it != elim_.rend(); ++it) {
        RVec acc = RVec::Zero(gdim_[it->g]);
        for (const auto& cp : it->coupling) {
            acc += cp.second.transpose() * u[cp.first];
        }
        u[it->g] = w[it->g] - it->factor.solve_vec(acc);
    }
    RVec out(total);
    for (int g = 0; g < ngroups_; ++g) out.segment(goff_[g], gdim_[g]) = u[g];
    return out;
}

RVecX Ipm::kkt_apply_x(const std::vector<BlockWork>& bw, const RVec& u) const {
    const RVec dz = u.head(nz_);
    RVecX out = RVecX::Zero(nz_ + m_);
    // H dz = sum_b B_b^T (W^-1 (B_b dz) W^-1); project_block_x subtracts, so
    // feed it the negated conjugation
    RVecX hdz = RVecX::Zero(nz_);
    for (size_t bi = 0; bi < p_.blocks.size(); ++bi) {
        const RMatX ds = block_delta_s_x(static_cast<int>(bi), dz);
        const RMatX t = bw[bi].WinvX * ds * bw[bi].WinvX;
        project_block_x(static_cast<int>(bi), RMatX(-t), hdz);
    }
    out.head(nz_) = hdz;
    if (m_ > 0) {
        const RVec dlam = u.tail(m_);
        out.head(nz_) -= apply_at_x(dlam);
        for (int r = 0; r < m_; ++r) {
            const auto& row = p_.eq_rows[r];
            long double s = 0.0L;
            for (size_t k = 0; k < row.idx.size(); ++k)
                s += static_cast<long double>(row.val[k]) * dz[row.idx[k]];
            out[nz_ + r] = -s;
        }
    }
    return out;
}

RVec Ipm::solve_refined(const std::vector<BlockWork>& bw, const RVecX& rhs,
                        double& rel_resid) const {
    const RVec rhs_d = rhs.cast<double>();
    const double scale = 1.0 + rhs_d.cwiseAbs().maxCoeff();
    RVec u = kkt_solve(rhs_d);
    RVec best = u;
    double best_rn = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass <= 5; ++pass) {
        const RVecX resid = rhs - kkt_apply_x(bw, u);
        const double rn = static_cast<double>(resid.cwiseAbs().maxCoeff());
        if (rn < best_rn) {
            best_rn = rn;
            best = u;
        }
        if (opts_.verbose) {
            std::fprintf(stderr, "    refine pass %d  rel resid %.3e\n", pass, rn / scale);
        }
        if (rn <= 1e-12 * scale || pass == 5) break;
        u += kkt_solve(resid.cast<double>());
    }
    rel_resid = best_rn / scale;
    return best;
}

RVecX Ipm::direction_rhs_x(const std::vector<BlockWork>& bw,
                           const std::vector<RMat>& rblocks, const RVecX& rd) const {
    // r1 = sum_b B_b^T (W^-1 R_b W^-1) - r_d
    RVecX r1 = RVecX::Zero(nz_);
    for (size_t bi = 0; bi < p_.blocks.size(); ++bi) {
        const RMatX t =
            bw[bi].WinvX * rblocks[bi].cast<long double>() * bw[bi].WinvX;
        project_block_x(static_cast<int>(bi), RMatX(-t), r1);
    }
    r1 -= rd;
    return r1;
}

SolveReport Ipm::run(const RVec& z0, Solution* out) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;

    if (z0.size() != nz_) throw std::invalid_argument("initial point has wrong size");
    z_ = z0;
    lambda_ = RVec::Zero(m_);
    zx_.clear();
    zmats_.clear();
    for (const auto& b : p_.blocks) {
        zx_.push_back(RMatX::Identity(b.n, b.n));
        zmats_.push_back(RMat::Identity(b.n, b.n));
    }

    for (size_t bi = 0; bi < p_.blocks.size(); ++bi) {
        RMat s = p_.blocks[bi].constant;
        for (const auto& vc : p_.blocks[bi].vars) {
            const int off = goff_[vc.var];
            for (int j = 0; j < static_cast<int>(vc.cols.size()); ++j) {
                if (z_[off + j] != 0.0) col_add(s, vc.cols[j], z_[off + j]);
            }
        }
        Eigen::LLT<RMat> llt(RMat(0.5 * (s + s.transpose())));
        if (llt.info() != Eigen::Success) {
            throw std::invalid_argument("initial point is not strictly cone-feasible");
        }
    }

    const double gscale = 1.0 + p_.objective.cwiseAbs().maxCoeff();
    const double bscale = 1.0 + (m_ > 0 ? p_.eq_rhs.cwiseAbs().maxCoeff() : 0.0);
    const int nb = static_cast<int>(p_.blocks.size());

    std::vector<BlockWork> bw;
    double best_rp = 1e300;
    int stall = 0;

    // best iterate seen so far, by worst normalized residual; restored when
    // the double-precision factorization reaches its numerical floor
    double best_score = std::numeric_limits<double>::infinity();
    RVec z_best, lambda_best;
    std::vector<RMatX> zx_best;
    bool have_best = false;

    auto finish = [&](SolveStatus st, double rp, double rdn, double gap, int it) {
        rep.status = st;
        rep.objective_value = p_.objective.dot(z_) + p_.objective_constant;
        rep.primal_residual = rp;
        rep.dual_residual = rdn;
        rep.duality_gap = gap;
        rep.iterations = it;
        rep.wall_time_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        if (out) {
            out->z = z_;
            out->lambda = lambda_;
            out->var_values.clear();
            for (size_t v = 0; v < p_.vars.size(); ++v) {
                out->var_values.push_back(hvec_to_mat(
                    z_.segment(p_.var_offset(static_cast<int>(v)), hvec_dim(p_.vars[v].dim)),
                    p_.vars[v].dim));
            }
        }
        return rep;
    };

    int iter = 0;
    for (; iter < opts_.max_iter; ++iter) {
        try {
            compute_block_state(bw);
        } catch (const std::runtime_error&) {
            break;  // scaling broke down; classify the best iterate instead
        }

        double gap = 0.0;
        for (int bi = 0; bi < nb; ++bi) gap += (bw[bi].S.array() * bw[bi].Z.array()).sum();
        const double mu = gap / cone_dim_;
        const RVecX rd_x = dual_residual_x();
        const RVec rd = rd_x.cast<double>();
        const RVec rp = primal_residual();
        const double rpn = m_ > 0 ? rp.cwiseAbs().maxCoeff() : 0.0;
        const double rdn = rd.cwiseAbs().maxCoeff();
        const double obj = p_.objective.dot(z_);
        const double rp_rel = rpn / bscale;
        const double rd_rel = rdn / gscale;
        const double gap_rel = std::abs(gap) / (1.0 + std::abs(obj));

        if (opts_.verbose) {
            double zmax = 0.0;
            for (const auto& zb : zmats_) zmax = std::max(zmax, zb.cwiseAbs().maxCoeff());
            const double lmax = m_ > 0 ? lambda_.cwiseAbs().maxCoeff() : 0.0;
            std::fprintf(stderr,
                         "iter %3d  mu %9.3e  rp %9.3e  rd %9.3e  obj %+.9e  |Z| %9.3e  "
                         "|lam| %9.3e\n",
                         iter, mu, rp_rel, rd_rel, obj, zmax, lmax);
        }
        if (rp_rel <= opts_.tol && rd_rel <= opts_.tol && gap_rel <= opts_.tol) {
            return finish(SolveStatus::optimal, rpn, rdn, gap, iter);
        }
        const double score = std::max({rp_rel, rd_rel, gap_rel});
        if (score < best_score) {
            best_score = score;
            z_best = z_;
            lambda_best = lambda_;
            zx_best = zx_;
            have_best = true;
        }
        const double lam_norm = m_ > 0 ? lambda_.cwiseAbs().maxCoeff() : 0.0;
        double znorm = 0.0;
        for (const auto& zm : zmats_) znorm = std::max(znorm, zm.cwiseAbs().maxCoeff());
        if (iter >= 10 && rp_rel > 1e3 * opts_.tol &&
            (lam_norm > 1e8 * bscale || znorm > 1e10) && rp_rel > 0.99 * best_rp) {
            return finish(SolveStatus::infeasible, rpn, rdn, gap, iter);
        }
        if (z_.cwiseAbs().maxCoeff() > 1e11 && rp_rel <= 1e-6 &&
            obj < -1e9 * gscale) {
            return finish(SolveStatus::unbounded, rpn, rdn, gap, iter);
        }
        best_rp = std::min(best_rp, rp_rel);

        try {
            factorize(bw);
        } catch (const std::runtime_error&) {
            break;  // pivots collapsed; classify the best iterate instead
        }

        auto solve_direction = [&](const std::vector<RMat>& rblocks, RVec& dz, RVec& dlam,
                                   std::vector<RMat>& dsb, std::vector<RMat>& dzb,
                                   std::vector<RMatX>& dzxb) -> double {
            RVecX rhs(nz_ + m_);
            rhs.head(nz_) = direction_rhs_x(bw, rblocks, rd_x);
            if (m_ > 0) rhs.tail(m_) = -rp.cast<long double>();
            double rel_resid = 0.0;
            const RVec u = solve_refined(bw, rhs, rel_resid);
            dz = u.head(nz_);
            dlam = m_ > 0 ? RVec(u.tail(m_)) : RVec();
            dsb.resize(nb);
            dzb.resize(nb);
            dzxb.resize(nb);
            for (int bi = 0; bi < nb; ++bi) {
                dsb[bi] = block_delta_s(bi, dz);
                RMatX t = bw[bi].WinvX *
                          (rblocks[bi].cast<long double>() - block_delta_s_x(bi, dz)) *
                          bw[bi].WinvX;
                dzxb[bi] = RMatX(0.5L * (t + t.transpose()));
                dzb[bi] = dzxb[bi].cast<double>();
            }
            return rel_resid;
        };

        // once iterative refinement stops converging, the KKT system has
        // outrun the double-precision factorization; stepping further would
        // only corrupt the iterate
        constexpr double kRefineFloor = 1e-7;

        auto max_step = [&](const std::vector<RMat>& dirs, bool primal) {
            double alpha = 1.0;
            for (int bi = 0; bi < nb; ++bi) {
                const BlockWork& w = bw[bi];
                RMat vinvhalf =
                    w.qv * w.dv.array().pow(-0.5).matrix().asDiagonal() * w.qv.transpose();
                RMat scaled = primal ? RMat(w.Winvhalf * dirs[bi] * w.Winvhalf)
                                     : RMat(w.Whalf * dirs[bi] * w.Whalf);
                RMat g = vinvhalf * scaled * vinvhalf;
                Eigen::SelfAdjointEigenSolver<RMat> es(RMat(0.5 * (g + g.transpose())),
                                                       Eigen::EigenvaluesOnly);
                const double lmin = es.eigenvalues().minCoeff();
                if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
            }
            return alpha;
        };

        // predictor
        std::vector<RMat> rblocks(nb);
        for (int bi = 0; bi < nb; ++bi) rblocks[bi] = -bw[bi].S;
        RVec dz_aff, dlam_aff;
        std::vector<RMat> ds_aff, dz_aff_b;
        std::vector<RMatX> dz_aff_bx;
        if (solve_direction(rblocks, dz_aff, dlam_aff, ds_aff, dz_aff_b, dz_aff_bx) >
            kRefineFloor) {
            break;
        }
        const double ap_aff = max_step(ds_aff, true);
        const double ad_aff = max_step(dz_aff_b, false);
        double gap_aff = 0.0;
        for (int bi = 0; bi < nb; ++bi) {
            gap_aff += ((bw[bi].S + ap_aff * ds_aff[bi]).array() *
                        (bw[bi].Z + ad_aff * dz_aff_b[bi]).array())
                           .sum();
        }
        const double mu_aff = std::max(gap_aff / cone_dim_, 0.0);
        double sigma = std::pow(mu_aff / mu, 3.0);
        sigma = std::min(std::max(sigma, 1e-6), 0.999);

        // corrector with second-order term, via a Lyapunov solve in the
        // scaled eigenbasis
        for (int bi = 0; bi < nb; ++bi) {
            const BlockWork& w = bw[bi];
            const RMat dst = w.Winvhalf * ds_aff[bi] * w.Winvhalf;
            const RMat dzt = w.Whalf * dz_aff_b[bi] * w.Whalf;
            RMat cross = dst * dzt;
            cross = 0.5 * (cross + cross.transpose());
            RMat rhs_mat = -cross;
            rhs_mat.diagonal().array() += sigma * mu;
            // subtract V^2
            RMat m = w.qv.transpose() * rhs_mat * w.qv;
            for (int i = 0; i < w.n; ++i) {
                for (int j = 0; j < w.n; ++j) {
                    const double denom = w.dv[i] + w.dv[j];
                    m(i, j) = 2.0 * (m(i, j) - (i == j ? w.dv[i] * w.dv[i] : 0.0)) / denom;
                }
            }
            RMat rt = w.qv * m * w.qv.transpose();
            RMat r = w.Whalf * rt * w.Whalf;
            rblocks[bi] = 0.5 * (r + r.transpose());
        }

        RVec dz, dlam;
        std::vector<RMat> dsb, dzb;
        std::vector<RMatX> dzxb;
        if (solve_direction(rblocks, dz, dlam, dsb, dzb, dzxb) > kRefineFloor) {
            break;
        }

        const double tau = 0.99;
        double ap = std::min(1.0, tau * max_step(dsb, true));
        double ad = std::min(1.0, tau * max_step(dzb, false));

        // numerical backstops: the affine update must stay in the cone
        for (int guard = 0; guard < 40; ++guard) {
            bool ok = true;
            for (int bi = 0; bi < nb && ok; ++bi) {
                RMat cand = bw[bi].S + ap * dsb[bi];
                Eigen::LLT<RMat> llt(RMat(0.5 * (cand + cand.transpose())));
                if (llt.info() != Eigen::Success) ok = false;
            }
            if (ok) break;
            ap *= 0.9;
        }
        for (int guard = 0; guard < 40; ++guard) {
            bool ok = true;
            for (int bi = 0; bi < nb && ok; ++bi) {
                RMat cand = bw[bi].Z + ad * dzb[bi];
                Eigen::LLT<RMat> llt(RMat(0.5 * (cand + cand.transpose())));
                if (llt.info() != Eigen::Success) ok = false;
            }
            if (ok) break;
            ad *= 0.9;
        }

        if (ap < 1e-9 && ad < 1e-9) {
            ++stall;
        } else {
            stall = 0;
        }
        if (stall >= 3) break;

        z_ += ap * dz;
        if (m_ > 0) lambda_ += ad * dlam;
        for (int bi = 0; bi < nb; ++bi) {
            // keep the complex-embedding structure exact; the dual iterate is
            // accumulated in extended precision so the (1/mu)-amplified
            // scaling products do not pollute the dual residual
            zx_[bi] = embed_project_x(RMatX(zx_[bi] + static_cast<long double>(ad) * dzxb[bi]));
            zmats_[bi] = zx_[bi].cast<double>();
        }
    }

    // classify the non-converged exit on whichever iterate is cleaner: the
    // final one, or the best-scored one saved before the numerical floor
    auto eval_state = [&](double& rpn, double& rdn, double& gap) {
        compute_block_state(bw);
        gap = 0.0;
        for (int bi = 0; bi < nb; ++bi) gap += (bw[bi].S.array() * bw[bi].Z.array()).sum();
        const RVec rd = dual_residual_x().cast<double>();
        const RVec rp = primal_residual();
        rpn = m_ > 0 ? rp.cwiseAbs().maxCoeff() : 0.0;
        rdn = rd.cwiseAbs().maxCoeff();
    };
    auto restore_best = [&] {
        z_ = z_best;
        lambda_ = lambda_best;
        zx_ = zx_best;
        for (size_t bi = 0; bi < zx_.size(); ++bi) zmats_[bi] = zx_[bi].cast<double>();
    };
    double rpn = 0.0, rdn = 0.0, gap = 0.0;
    bool cur_ok = true;
    try {
        eval_state(rpn, rdn, gap);
    } catch (const std::runtime_error&) {
        cur_ok = false;
    }
    double score = std::numeric_limits<double>::infinity();
    if (cur_ok) {
        score = std::max({rpn / bscale, rdn / gscale,
                          std::abs(gap) / (1.0 + std::abs(p_.objective.dot(z_)))});
    }
    if (have_best && best_score < score) {
        restore_best();
        eval_state(rpn, rdn, gap);
    } else if (!cur_ok) {
        return finish(SolveStatus::failed, rpn, rdn, gap, iter);
    }
    const double rp_rel = rpn / bscale;
    const double rd_rel = rdn / gscale;
    const double gap_rel = std::abs(gap) / (1.0 + std::abs(p_.objective.dot(z_)));
    if (rp_rel <= opts_.tol && rd_rel <= opts_.tol && gap_rel <= opts_.tol) {
        return finish(SolveStatus::optimal, rpn, rdn, gap, iter);
    }
    if (rp_rel <= 1e-6 && rd_rel <= 1e-6 && gap_rel <= 1e-6) {
        return finish(SolveStatus::inaccurate, rpn, rdn, gap, iter);
    }
    const double lam_norm = m_ > 0 ? lambda_.cwiseAbs().maxCoeff() : 0.0;
    if (rp_rel > 1e-6 && lam_norm > 1e6 * bscale) {
        return finish(SolveStatus::infeasible, rpn, rdn, gap, iter);
    }
    return finish(SolveStatus::failed, rpn, rdn, gap, iter);
}

}  // namespace

SolveReport InteriorPointBackend::solve(const RealConicProblem& p, const RVec& z0,
                                        const SolverOptions& opts, Solution* out) const {
    Ipm ipm(p, opts);
    return ipm.run(z0, out);
}

SolveReport solve_conic(const ConicProblem& p, const RVec& z0, const SolverOptions& opts,
                        Solution* out) {
    const RealConicProblem rp = real_embed(p);
    InteriorPointBackend backend;
    return backend.solve(rp, z0, opts, out);
}

}  // namespace unext::sdp
