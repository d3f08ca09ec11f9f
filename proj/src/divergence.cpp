#include <unext/divergence.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace unext::divergence {

namespace {

// Frobenius-relative weight of omega outside supp(tau) above which the
// divergence is reported as +infinity rather than evaluated.
constexpr double kSupportLeakTol = 1e-8;

constexpr double kInf = std::numeric_limits<double>::infinity();

DivergenceValue infinite_value(double alpha, bool support_ok) {
    return DivergenceValue{kInf, alpha, support_ok};
}

void check_alpha_order(double alpha, double lo, double hi) {
    if (!(alpha > lo) || !(alpha <= hi) || alpha == 1.0) {
        throw std::invalid_argument("divergence order alpha out of range");
    }
}

void check_same_frame(const quantum::ChoiChannel& n, const quantum::ChoiChannel& m) {
    if (n.shape.dims != m.shape.dims || n.inputs.size() != m.inputs.size()) {
        throw linalg::ShapeMismatch("channel divergence needs matching dimensions");
    }
}

// Largest |eigenvalue| = operator norm for Hermitian t.
double spectral_norm(const HermitianMatrix& t) {
    linalg::EigResult eig = linalg::herm_eig(t);
    const int n = static_cast<int>(eig.eigenvalues.size());
    if (n == 0) return 0.0;
    return std::max(std::abs(eig.eigenvalues(0)), std::abs(eig.eigenvalues(n - 1)));
}

}  // namespace

bool DivergenceValue::finite() const { return std::isfinite(value); }

HermitianMatrix support_projected_operator(const HermitianMatrix& omega,
                                           const HermitianMatrix& tau,
                                           double rank_tol) {
    if (omega.dim() != tau.dim()) {
        throw linalg::ShapeMismatch("support projection needs equal dimensions");
    }
    const Mat pi = linalg::support_projector(tau, rank_tol).mat();
    const Mat co = Mat::Identity(omega.dim(), omega.dim()) - pi;
    const Mat blk_on = pi * omega.mat() * pi;
    const Mat blk_off = pi * omega.mat() * co;
    const Mat blk_out = co * omega.mat() * co;
    // Pseudo-inverse of the off-support block, thresholded against the scale
    // of omega itself: a residual block that is pure rounding noise must not
    // get inverted into a huge correction.
    const double scale = spectral_norm(omega);
    linalg::EigResult eig = linalg::herm_eig(HermitianMatrix(blk_out, 1e-8));
    Mat out_pinv = Mat::Zero(omega.dim(), omega.dim());
    for (int i = 0; i < omega.dim(); ++i) {
        if (eig.eigenvalues(i) > rank_tol * scale) {
            out_pinv += (1.0 / eig.eigenvalues(i)) * eig.eigenvectors.col(i) *
                        eig.eigenvectors.col(i).adjoint();
        }
    }
    return HermitianMatrix(blk_on - blk_off * out_pinv * blk_off.adjoint(), 1e-8);
}

double geo_quasi_entropy_state(const HermitianMatrix& omega,
                               const HermitianMatrix& tau,
                               double alpha,
                               double rank_tol) {
    check_alpha_order(alpha, 0.0, 2.0);
    if (omega.dim() != tau.dim()) {
        throw linalg::ShapeMismatch("quasi-entropy needs equal dimensions");
    }
    if (alpha > 1.0 && linalg::support_leakage(tau, omega, rank_tol) > kSupportLeakTol) {
        return kInf;
    }
    const HermitianMatrix proj = support_projected_operator(omega, tau, rank_tol);
    const HermitianMatrix g = linalg::weighted_geometric_mean(tau, proj, alpha, rank_tol);
    return g.trace();
}

DivergenceValue geo_entropy_state(const HermitianMatrix& omega,
                                  const HermitianMatrix& tau,
                                  double alpha,
                                  double rank_tol) {
    if (alpha == 1.0) return bs_entropy_state(omega, tau, rank_tol);
    const double quasi = geo_quasi_entropy_state(omega, tau, alpha, rank_tol);
    if (!std::isfinite(quasi)) return infinite_value(alpha, false);
    // For alpha < 1 disjoint supports drive the quasi-entropy to zero, which
    // is again the infinitely-distinguishable case.
    if (quasi <= 0.0) return infinite_value(alpha, true);
    return DivergenceValue{std::log2(quasi) / (alpha - 1.0), alpha, true};
}

DivergenceValue bs_entropy_state(const HermitianMatrix& omega,
                                 const HermitianMatrix& tau,
                                 double rank_tol) {
    if (omega.dim() != tau.dim()) {
        throw linalg::ShapeMismatch("relative entropy needs equal dimensions");
    }
    if (linalg::support_leakage(tau, omega, rank_tol) > kSupportLeakTol) {
        return infinite_value(1.0, false);
    }
    const Mat sq = linalg::mat_power_on_support(omega, 0.5, rank_tol).mat();
    const Mat tau_pinv = linalg::mat_power_on_support(tau, -1.0, rank_tol).mat();
    const HermitianMatrix x(sq * tau_pinv * sq, 1e-8);
    const Mat lg = linalg::mat_log2_on_support(x, rank_tol).mat();
    const double value = (omega.mat() * lg).trace().real();
    return DivergenceValue{value, 1.0, true};
}

DivergenceValue min_geo_entropy_state(const HermitianMatrix& omega,
                                      const HermitianMatrix& tau,
                                      double rank_tol) {
    if (omega.dim() != tau.dim()) {
        throw linalg::ShapeMismatch("relative entropy needs equal dimensions");
    }
    const HermitianMatrix proj = support_projected_operator(omega, tau, rank_tol);
    const Mat tau_mh = linalg::mat_power_on_support(tau, -0.5, rank_tol).mat();
    const HermitianMatrix zeta(tau_mh * proj.mat() * tau_mh, 1e-8);
    const Mat pi = linalg::support_projector(zeta, rank_tol).mat();
    const double overlap = (tau.mat() * pi).trace().real();
    if (overlap <= 0.0) return infinite_value(0.0, true);
    return DivergenceValue{-std::log2(overlap), 0.0, true};
}

DivergenceValue geo_entropy_channel_sub1(const quantum::ChoiChannel& n,
                                         const quantum::ChoiChannel& m,
                                         double alpha,
                                         double rank_tol) {
    check_alpha_order(alpha, 0.0, 1.0);
    check_same_frame(n, m);
    const HermitianMatrix proj = support_projected_operator(n.choi, m.choi, rank_tol);
    const HermitianMatrix g = linalg::weighted_geometric_mean(m.choi, proj, alpha, rank_tol);
    const HermitianMatrix marg = linalg::partial_trace(g, n.shape, n.inputs);
    const double lmin = linalg::min_eigenvalue(marg);
    if (lmin <= 0.0) return infinite_value(alpha, true);
    return DivergenceValue{std::log2(lmin) / (alpha - 1.0), alpha, true};
}

DivergenceValue bs_entropy_channel(const quantum::ChoiChannel& n,
                                   const quantum::ChoiChannel& m,
                                   double rank_tol) {
    check_same_frame(n, m);
    if (linalg::support_leakage(m.choi, n.choi, rank_tol) > kSupportLeakTol) {
        return infinite_value(1.0, false);
    }
    const Mat sq = linalg::mat_power_on_support(n.choi, 0.5, rank_tol).mat();
    const Mat m_pinv = linalg::mat_power_on_support(m.choi, -1.0, rank_tol).mat();
    const HermitianMatrix q(sq * m_pinv * sq, 1e-8);
    const Mat lg = linalg::mat_log2_on_support(q, rank_tol).mat();
    const HermitianMatrix sandwich(sq * lg * sq, 1e-8);
    const HermitianMatrix marg = linalg::partial_trace(sandwich, n.shape, n.inputs);
    return DivergenceValue{spectral_norm(marg), 1.0, true};
}

DivergenceValue min_geo_entropy_channel(const quantum::ChoiChannel& n,
                                        const quantum::ChoiChannel& m,
                                        double rank_tol) {
    check_same_frame(n, m);
    const HermitianMatrix proj = support_projected_operator(n.choi, m.choi, rank_tol);
    const Mat m_mh = linalg::mat_power_on_support(m.choi, -0.5, rank_tol).mat();
    const HermitianMatrix zeta(m_mh * proj.mat() * m_mh, 1e-8);
    const Mat pi = linalg::support_projector(zeta, rank_tol).mat();
    const Mat m_h = linalg::mat_power_on_support(m.choi, 0.5, rank_tol).mat();
    const HermitianMatrix clipped(m_h * pi * m_h, 1e-8);
    const HermitianMatrix marg = linalg::partial_trace(clipped, n.shape, n.inputs);
    const double lmin = linalg::min_eigenvalue(marg);
    if (lmin <= 0.0) return infinite_value(0.0, true);
    return DivergenceValue{-std::log2(lmin), 0.0, true};
}

}  // namespace unext::divergence
