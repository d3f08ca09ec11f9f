#pragma once

#include <string>
#include <vector>

#include <json.hpp>
#include <unext/linalg.hpp>

// Solver-agnostic conic-program representation.
//
// A problem is stated over named complex Hermitian matrix variables (a 1x1
// variable is a real scalar).  Each variable is parameterized by its "hvec"
// coordinates: [diagonal; sqrt(2)*Re upper; sqrt(2)*Im upper], an isometry
// for the Frobenius inner product.  Affine Hermitian expressions built from
// hvec-linear maps describe both the PSD blocks and the equality rows, and a
// separate embedding step turns the complex problem into the real symmetric
// form solver backends consume.

namespace unext::sdp {

using linalg::Mat;
using linalg::RMat;
using linalg::RVec;

int hvec_dim(int n);
RVec hvec(const Mat& herm);
Mat hvec_to_mat(const RVec& v, int n);

// svec parameterization of real symmetric matrices: [diag; sqrt(2)*upper].
int svec_dim(int n);
RVec svec(const RMat& sym);
RMat svec_to_sym(const RVec& v, int n);

// [[Re, -Im], [Im, Re]]: Hermitian maps to symmetric, PSD iff PSD, every
// eigenvalue duplicated.
RMat real_embed_matrix(const Mat& m);
Mat complex_from_embedded(const RMat& r);

// Linear map between Hermitian spaces in hvec coordinates.
struct LinMap {
    int out_dim = 0;  // output Hermitian dimension (matrix side, not hvec)
    int in_dim = 0;
    bool identity = false;  // identity map, matrix not stored
    RMat m;                 // hvec(out) = m * hvec(in) when !identity

    RVec apply(const RVec& x) const;
};

LinMap identity_map(int n);
LinMap scale_map(int n, double c);

// Partial trace as an hvec-level map (result ordered as in `shape`).
LinMap partial_trace_map(const linalg::SubsystemShape& shape,
                         const std::vector<std::string>& keep);

// X -> permute(X kron I_d) with the identity factor placed so the output
// subsystem order is `out_labels` (which must be in_labels plus `label`).
LinMap insert_identity_map(const linalg::SubsystemShape& in_shape,
                           const std::string& label, int dim,
                           const std::vector<std::string>& out_labels);

// Corner placements for 2x2 super-block LMIs over n-dim Hermitian variables.
LinMap place_upper_left_map(int n);    // [[V, 0], [0, 0]]
LinMap place_lower_right_map(int n);   // [[0, 0], [0, V]]
LinMap place_off_diagonal_map(int n);  // [[0, V], [V, 0]]

// X -> u X u^dag between Hermitian spaces of dimensions cols(u) -> rows(u).
LinMap conjugate_map(const Mat& u);

// X (d-dim) placed as the diagonal sub-block starting at `off`.
LinMap place_diagonal_at_map(int total, int off, int d);

// X (r-dim) -> [[0, X k^dag], [k X, 0]] with k mapping the r-frame into the
// complementary corner frame; the block side is r + rows(k).
LinMap place_off_diagonal_map(int r, const Mat& k);

// Scalar variable times a fixed Hermitian matrix.
LinMap scalar_times_map(const Mat& coeff);

LinMap compose(const LinMap& a, const LinMap& b);

struct VarDecl {
    std::string name;
    int dim = 0;  // complex Hermitian dimension; 1 = real scalar
};

struct Term {
    int var = -1;
    LinMap map;
};

// constant + sum of term maps applied to variables; always Hermitian.
struct MatExpr {
    int dim = 0;
    Mat constant;
    std::vector<Term> terms;
};

struct ConicProblem {
    std::vector<VarDecl> vars;
    std::vector<MatExpr> psd_blocks;
    std::vector<MatExpr> equalities;  // expression == 0
    RVec objective;                   // minimize objective . z (+ constant)
    double objective_constant = 0.0;

    int var_offset(int v) const;
    int total_dofs() const;
    int add_var(const std::string& name, int dim);
    void validate() const;
};

nlohmann::json problem_to_json(const ConicProblem& p);

// Real symmetric form.  Block affine maps are stored as per-variable sparse
// columns (entries of the embedded symmetric matrix) because every block map
// used here is entrywise sparse; equalities become sparse rows over the
// global hvec coordinates, which need no embedding.

struct SparseEntry {
    int r = 0, c = 0;
    double v = 0.0;
};

struct BlockVarCols {
    int var = -1;
    std::vector<std::vector<SparseEntry>> cols;  // one list per hvec dof
};

struct EmbeddedBlock {
    int n = 0;  // embedded side
    RMat constant;
    std::vector<BlockVarCols> vars;
    int pure_var = -1;  // block is exactly embed(var): enables fast paths
};

struct SparseRow {
    std::vector<int> idx;
    std::vector<double> val;
};

struct RealConicProblem {
    std::vector<VarDecl> vars;
    std::vector<EmbeddedBlock> blocks;
    std::vector<SparseRow> eq_rows;
    RVec eq_rhs;
    RVec objective;
    double objective_constant = 0.0;

    int var_offset(int v) const;
    int total_dofs() const;
};

RealConicProblem real_embed(const ConicProblem& p);

}  // namespace unext::sdp
