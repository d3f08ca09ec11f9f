#include "unext/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace unext::linalg {

namespace {

// Absolute floor so that an all-zero matrix with rounding noise is accepted
// as PSD instead of tripping the relative negativity test.
constexpr double kNegFloor = 1e-12;

std::vector<int> strides_of(const std::vector<int>& dims) {
  std::vector<int> s(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
    s[i] = s[i + 1] * dims[i + 1];
  return s;
}

// Flat offsets contributed by the listed positions as their joint index runs
// over all values; any full index splits as offsets_a[i] + offsets_b[j] for
// complementary position sets.
std::vector<int> flat_offsets(const std::vector<int>& dims,
                              const std::vector<int>& strides,
                              const std::vector<int>& positions) {
  int total = 1;
  for (int p : positions) total *= dims[p];
  std::vector<int> out(total, 0);
  for (int flat = 0; flat < total; ++flat) {
    int rem = flat;
    for (int k = static_cast<int>(positions.size()) - 1; k >= 0; --k) {
      int p = positions[k];
      out[flat] += (rem % dims[p]) * strides[p];
      rem /= dims[p];
    }
  }
  return out;
}

}  // namespace

HermitianMatrix::HermitianMatrix(Mat m, double herm_tol) : herm_tol_(herm_tol) {
  if (m.rows() != m.cols()) throw ShapeMismatch("HermitianMatrix: not square");
  double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (dev > herm_tol)
    throw NonHermitian("anti-Hermitian deviation " + std::to_string(dev) +
                       " exceeds tolerance " + std::to_string(herm_tol));
  m_ = 0.5 * (m + m.adjoint().eval());
}

HermitianMatrix HermitianMatrix::Identity(int dim) {
  return HermitianMatrix(Mat::Identity(dim, dim));
}

HermitianMatrix HermitianMatrix::Zero(int dim) {
  return HermitianMatrix(Mat::Zero(dim, dim));
}

int SubsystemShape::total_dim() const {
  int t = 1;
  for (int d : dims) t *= d;
  return t;
}

int SubsystemShape::index_of(const std::string& label) const {
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return static_cast<int>(i);
  throw ShapeMismatch("unknown subsystem label: " + label);
}

bool SubsystemShape::has(const std::string& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

int SubsystemShape::dim_of(const std::string& label) const {
  return dims[index_of(label)];
}

void SubsystemShape::check_against(const HermitianMatrix& m) const {
  check_unique();
  if (dims.size() != labels.size())
    throw ShapeMismatch("dims/labels length mismatch");
  if (total_dim() != m.dim())
    throw ShapeMismatch("shape product " + std::to_string(total_dim()) +
                        " != matrix dim " + std::to_string(m.dim()));
}

void SubsystemShape::check_unique() const {
  for (size_t i = 0; i < labels.size(); ++i)
    for (size_t j = i + 1; j < labels.size(); ++j)
      if (labels[i] == labels[j])
        throw ShapeMismatch("duplicate subsystem label: " + labels[i]);
}

EigResult herm_eig(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m.mat());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  int n = m.dim();
  EigResult r;
  r.eigenvalues = es.eigenvalues().reverse();
  r.eigenvectors = Mat(n, n);
  for (int i = 0; i < n; ++i)
    r.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  return r;
}

namespace {

// Shared spectral-function kernel: applies f to eigenvalues above the support
// threshold, zero below, after rejecting genuinely negative inputs.
template <typename F>
HermitianMatrix spectral_on_support(const HermitianMatrix& m, double rank_tol,
                                    F f) {
  EigResult e = herm_eig(m);
  double lmax = e.eigenvalues.size() ? e.eigenvalues(0) : 0.0;
  double lmin = e.eigenvalues.size() ? e.eigenvalues(e.eigenvalues.size() - 1) : 0.0;
  double neg_thr = std::max(rank_tol * std::max(lmax, 0.0), kNegFloor);
  if (lmin < -neg_thr)
    throw NegativeOperator("eigenvalue " + std::to_string(lmin) +
                           " below -" + std::to_string(neg_thr));
  double thr = rank_tol * std::max(lmax, 0.0);
  RVec d = RVec::Zero(m.dim());
  for (int i = 0; i < m.dim(); ++i) {
    double l = e.eigenvalues(i);
    if (l > thr && l > 0) d(i) = f(l);
  }
  Mat out = e.eigenvectors * d.asDiagonal() * e.eigenvectors.adjoint();
  double scale = out.size() ? out.cwiseAbs().maxCoeff() : 0.0;
  return HermitianMatrix(out, std::max({m.herm_tol(), 1e-9, 1e-12 * scale}));
}

}  // namespace

HermitianMatrix support_projector(const HermitianMatrix& m, double rank_tol) {
  return spectral_on_support(m, rank_tol, [](double) { return 1.0; });
}

HermitianMatrix mat_power_on_support(const HermitianMatrix& m, double p,
                                     double rank_tol) {
  return spectral_on_support(m, rank_tol,
                             [p](double l) { return std::pow(l, p); });
}

HermitianMatrix mat_log2_on_support(const HermitianMatrix& m, double rank_tol) {
  return spectral_on_support(m, rank_tol,
                             [](double l) { return std::log2(l); });
}

double support_leakage(const HermitianMatrix& x, const HermitianMatrix& y,
                       double rank_tol) {
  HermitianMatrix pi = support_projector(x, rank_tol);
  Mat comp = Mat::Identity(x.dim(), x.dim()) - pi.mat();
  double num = (comp * y.mat() * comp).norm();
  return num / std::max(1.0, y.frob_norm());
}

HermitianMatrix weighted_geometric_mean(const HermitianMatrix& x,
                                        const HermitianMatrix& y, double alpha,
                                        double rank_tol) {
  if (x.dim() != y.dim()) throw ShapeMismatch("geometric mean: dim mismatch");
  if ((alpha < 0.0 || alpha > 1.0) && support_leakage(x, y, rank_tol) > 1e-8)
    throw SupportViolation("supp(y) not contained in supp(x)");
  HermitianMatrix xh = mat_power_on_support(x, 0.5, rank_tol);
  HermitianMatrix xmh = mat_power_on_support(x, -0.5, rank_tol);
  HermitianMatrix mid(xmh.mat() * y.mat() * xmh.mat(), 1e-8);
  HermitianMatrix midp = mat_power_on_support(mid, alpha, rank_tol);
  return HermitianMatrix(xh.mat() * midp.mat() * xh.mat(), 1e-8);
}

Mat partial_trace_raw(const Mat& m, const SubsystemShape& shape,
                      const std::vector<std::string>& keep) {
  if (m.rows() != m.cols() || m.rows() != shape.total_dim())
    throw ShapeMismatch("partial trace: matrix does not match shape");
  std::vector<int> kept_pos, traced_pos;
  for (size_t i = 0; i < shape.labels.size(); ++i) {
    bool k = std::find(keep.begin(), keep.end(), shape.labels[i]) != keep.end();
    (k ? kept_pos : traced_pos).push_back(static_cast<int>(i));
  }
  for (const auto& l : keep) shape.index_of(l);
  std::vector<int> strides = strides_of(shape.dims);
  std::vector<int> A = flat_offsets(shape.dims, strides, kept_pos);
  std::vector<int> T = flat_offsets(shape.dims, strides, traced_pos);
  int dk = static_cast<int>(A.size());
  Mat out = Mat::Zero(dk, dk);
  for (int a = 0; a < dk; ++a)
    for (int b = 0; b < dk; ++b) {
      cplx s = 0;
      for (int t : T) s += m(A[a] + t, A[b] + t);
      out(a, b) = s;
    }
  return out;
}

HermitianMatrix partial_trace(const HermitianMatrix& m,
                              const SubsystemShape& shape,
                              const std::vector<std::string>& keep) {
  shape.check_against(m);
  return HermitianMatrix(partial_trace_raw(m.mat(), shape, keep),
                         std::max(m.herm_tol(), 1e-9));
}

HermitianMatrix partial_trace_out(const HermitianMatrix& m,
                                  const SubsystemShape& shape,
                                  const std::vector<std::string>& drop) {
  std::vector<std::string> keep;
  for (const auto& l : shape.labels)
    if (std::find(drop.begin(), drop.end(), l) == drop.end()) keep.push_back(l);
  for (const auto& l : drop) shape.index_of(l);
  return partial_trace(m, shape, keep);
}

SubsystemShape reduced_shape(const SubsystemShape& shape,
                             const std::vector<std::string>& keep) {
  SubsystemShape out;
  for (size_t i = 0; i < shape.labels.size(); ++i)
    if (std::find(keep.begin(), keep.end(), shape.labels[i]) != keep.end()) {
      out.dims.push_back(shape.dims[i]);
      out.labels.push_back(shape.labels[i]);
    }
  return out;
}

HermitianMatrix partial_transpose(const HermitianMatrix& m,
                                  const SubsystemShape& shape,
                                  const std::vector<std::string>& on) {
  shape.check_against(m);
  std::vector<int> on_pos, off_pos;
  for (size_t i = 0; i < shape.labels.size(); ++i) {
    bool t = std::find(on.begin(), on.end(), shape.labels[i]) != on.end();
    (t ? on_pos : off_pos).push_back(static_cast<int>(i));
  }
  for (const auto& l : on) shape.index_of(l);
  std::vector<int> strides = strides_of(shape.dims);
  std::vector<int> On = flat_offsets(shape.dims, strides, on_pos);
  std::vector<int> Off = flat_offsets(shape.dims, strides, off_pos);
  int n = m.dim();
  Mat out(n, n);
  for (size_t a = 0; a < On.size(); ++a)
    for (size_t b = 0; b < On.size(); ++b)
      for (int x : Off)
        for (int y : Off)
          out(On[a] + x, On[b] + y) = m.mat()(On[b] + x, On[a] + y);
  return HermitianMatrix(out, std::max(m.herm_tol(), 1e-9));
}

Mat permutation_unitary(int k, int subsystem_dim, const std::vector<int>& pi) {
  if (static_cast<int>(pi.size()) != k)
    throw InvalidPermutation("permutation length != k");
  std::vector<bool> seen(k, false);
  for (int v : pi) {
    if (v < 0 || v >= k || seen[v]) throw InvalidPermutation("not a bijection");
    seen[v] = true;
  }
  int total = 1;
  for (int i = 0; i < k; ++i) total *= subsystem_dim;
  std::vector<int> dims(k, subsystem_dim);
  std::vector<int> strides = strides_of(dims);
  Mat w = Mat::Zero(total, total);
  std::vector<int> comp(k);
  for (int col = 0; col < total; ++col) {
    int rem = col;
    for (int i = k - 1; i >= 0; --i) {
      comp[i] = rem % subsystem_dim;
      rem /= subsystem_dim;
    }
    int row = 0;
    for (int i = 0; i < k; ++i) row += comp[i] * strides[pi[i]];
    w(row, col) = 1.0;
  }
  return w;
}

std::vector<int> subsystem_index_permutation(
    const SubsystemShape& shape, const std::vector<std::string>& new_label_order) {
  if (new_label_order.size() != shape.labels.size())
    throw ShapeMismatch("label permutation: length mismatch");
  std::vector<int> src_pos(new_label_order.size());
  std::vector<int> new_dims(new_label_order.size());
  for (size_t j = 0; j < new_label_order.size(); ++j) {
    src_pos[j] = shape.index_of(new_label_order[j]);
    new_dims[j] = shape.dims[src_pos[j]];
  }
  std::vector<int> old_strides = strides_of(shape.dims);
  std::vector<int> new_strides = strides_of(new_dims);
  int total = shape.total_dim();
  std::vector<int> perm(total, 0);
  std::vector<int> comp(shape.dims.size());
  for (int old = 0; old < total; ++old) {
    int rem = old;
    for (int i = static_cast<int>(shape.dims.size()) - 1; i >= 0; --i) {
      comp[i] = rem % shape.dims[i];
      rem /= shape.dims[i];
    }
    int nw = 0;
    for (size_t j = 0; j < new_label_order.size(); ++j)
      nw += comp[src_pos[j]] * new_strides[j];
    perm[old] = nw;
  }
  return perm;
}

HermitianMatrix permute_subsystems(const HermitianMatrix& m,
                                   const SubsystemShape& shape,
                                   const std::vector<std::string>& new_label_order) {
  shape.check_against(m);
  std::vector<int> p = subsystem_index_permutation(shape, new_label_order);
  int n = m.dim();
  Mat out(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) out(p[r], p[c]) = m.mat()(r, c);
  return HermitianMatrix(out, std::max(m.herm_tol(), 1e-9));
}

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat ket(int dim, int index) {
  Mat v = Mat::Zero(dim, 1);
  v(index, 0) = 1.0;
  return v;
}

HermitianMatrix embed_with_identity(const HermitianMatrix& op,
                                    const std::vector<std::string>& op_labels,
                                    const SubsystemShape& shape) {
  std::vector<std::string> rest;
  int rest_dim = 1;
  for (size_t i = 0; i < shape.labels.size(); ++i)
    if (std::find(op_labels.begin(), op_labels.end(), shape.labels[i]) ==
        op_labels.end()) {
      rest.push_back(shape.labels[i]);
      rest_dim *= shape.dims[i];
    }
  int op_dim = 1;
  for (const auto& l : op_labels) op_dim *= shape.dim_of(l);
  if (op_dim != op.dim())
    throw ShapeMismatch("embedded operator dim mismatch");
  Mat big = kron(op.mat(), Mat::Identity(rest_dim, rest_dim));
  SubsystemShape tmp;
  for (const auto& l : op_labels) {
    tmp.labels.push_back(l);
    tmp.dims.push_back(shape.dim_of(l));
  }
  for (const auto& l : rest) {
    tmp.labels.push_back(l);
    tmp.dims.push_back(shape.dim_of(l));
  }
  return permute_subsystems(HermitianMatrix(big, std::max(op.herm_tol(), 1e-9)),
                            tmp, shape.labels);
}

double min_eigenvalue(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Mat> es(m.mat(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace unext::linalg
