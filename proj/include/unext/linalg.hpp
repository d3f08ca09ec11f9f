#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace unext::linalg {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

inline constexpr double kDefaultHermTol = 1e-10;
inline constexpr double kDefaultRankTol = 1e-9;

struct NonHermitian : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NegativeOperator : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SupportViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidPermutation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dense complex square matrix, symmetrized to (m + m^dag)/2 on construction.
// Construction fails if the anti-Hermitian part exceeds herm_tol relative to
// the matrix scale.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(Mat m, double herm_tol = kDefaultHermTol);

  static HermitianMatrix Identity(int dim);
  static HermitianMatrix Zero(int dim);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Mat& mat() const { return m_; }
  double herm_tol() const { return herm_tol_; }

  double trace() const { return m_.trace().real(); }
  double frob_norm() const { return m_.norm(); }

 private:
  Mat m_;
  double herm_tol_ = kDefaultHermTol;
};

// Ordered tensor factorization annotation: dims[i] is the dimension of the
// subsystem named labels[i]. Order is significant everywhere.
struct SubsystemShape {
  std::vector<int> dims;
  std::vector<std::string> labels;

  int total_dim() const;
  int index_of(const std::string& label) const;  // ShapeMismatch if absent
  bool has(const std::string& label) const;
  int dim_of(const std::string& label) const;
  void check_against(const HermitianMatrix& m) const;
  void check_unique() const;
};

struct EigResult {
  RVec eigenvalues;  // descending
  Mat eigenvectors;  // columns match eigenvalue order
};

EigResult herm_eig(const HermitianMatrix& m);

// Projector onto the span of eigenvectors with eigenvalue > rank_tol * lambda_max.
HermitianMatrix support_projector(const HermitianMatrix& m,
                                  double rank_tol = kDefaultRankTol);

// V diag(f(lambda_i)) V^dag with f(l) = l^p for l above the support threshold
// and 0 below it; negative p therefore means the pseudoinverse power.
HermitianMatrix mat_power_on_support(const HermitianMatrix& m, double p,
                                     double rank_tol = kDefaultRankTol);

// V diag(log2(lambda_i) on support, 0 off support) V^dag.
HermitianMatrix mat_log2_on_support(const HermitianMatrix& m,
                                    double rank_tol = kDefaultRankTol);

// G_alpha(x, y) = x^{1/2} (x^{-1/2} y x^{-1/2})^alpha x^{1/2}, powers taken on
// supports. For alpha outside [0, 1] the support of y must lie inside the
// support of x (SupportViolation otherwise).
HermitianMatrix weighted_geometric_mean(const HermitianMatrix& x,
                                        const HermitianMatrix& y, double alpha,
                                        double rank_tol = kDefaultRankTol);

// Frobenius-normalized weight of y outside the support of x; zero iff
// supp(y) is contained in supp(x).
double support_leakage(const HermitianMatrix& x, const HermitianMatrix& y,
                       double rank_tol = kDefaultRankTol);

// Marginal on the subsystems in `keep` (result ordered as in shape.labels).
HermitianMatrix partial_trace(const HermitianMatrix& m,
                              const SubsystemShape& shape,
                              const std::vector<std::string>& keep);

// Complement-form convenience: trace out the subsystems in `drop`.
HermitianMatrix partial_trace_out(const HermitianMatrix& m,
                                  const SubsystemShape& shape,
                                  const std::vector<std::string>& drop);

// Partial trace of a general (possibly non-Hermitian) matrix, same ordering
// rules; used for contracting operator products before symmetrizing.
Mat partial_trace_raw(const Mat& m, const SubsystemShape& shape,
                      const std::vector<std::string>& keep);

SubsystemShape reduced_shape(const SubsystemShape& shape,
                             const std::vector<std::string>& keep);

// Transpose of the factors named in `on`; an involution.
HermitianMatrix partial_transpose(const HermitianMatrix& m,
                                  const SubsystemShape& shape,
                                  const std::vector<std::string>& on);

// Unitary W with W|i_1 .. i_k> = |i_{pi^{-1}(1)} .. i_{pi^{-1}(k)}> on k
// factors of equal dimension; composition satisfies W^pi W^rho = W^{pi o rho}.
Mat permutation_unitary(int k, int subsystem_dim, const std::vector<int>& pi);

// Conjugates m by the subsystem-reordering permutation: returns the same
// operator expressed with factors in new_label_order.
HermitianMatrix permute_subsystems(const HermitianMatrix& m,
                                   const SubsystemShape& shape,
                                   const std::vector<std::string>& new_label_order);

// Basis-index permutation p with p[old_flat_index] = new_flat_index realizing
// the subsystem reordering above (kernel shared with permute_subsystems).
std::vector<int> subsystem_index_permutation(
    const SubsystemShape& shape, const std::vector<std::string>& new_label_order);

Mat kron(const Mat& a, const Mat& b);
Mat ket(int dim, int index);  // column basis vector as dim x 1 matrix

// Embeds an operator defined on a subset of shape's factors (in shape order)
// as op (x) identity on the remaining factors, reordered to shape order.
HermitianMatrix embed_with_identity(const HermitianMatrix& op,
                                    const std::vector<std::string>& op_labels,
                                    const SubsystemShape& shape);

double min_eigenvalue(const HermitianMatrix& m);

}  // namespace unext::linalg
