#include <unext/oracle.hpp>

#include <algorithm>
#include <cmath>

namespace unext::oracle {

namespace {

void require_probability(double p, double hi = 1.0) {
    if (!(p >= 0.0) || !(p <= hi)) {
        throw quantum::InvalidProbability("parameter outside its valid range");
    }
}

void require_dim(int d) {
    if (d < 2) throw InvalidDimension("channel dimension must be at least 2");
}

double clamp_bits(double v) { return std::max(v, 0.0); }

}  // namespace

OracleValue identity_unext(int d) {
    require_dim(d);
    return OracleValue{std::log2(static_cast<double>(d)), "exact", true};
}

OracleValue erasure_bs_bound(int d, double p) {
    require_dim(d);
    require_probability(p);
    const double dd = d;
    if (p > 0.5) {
        return OracleValue{0.0, "p > 1/2", true};
    }
    if (p <= 1.0 / (dd + 1.0)) {
        const double v = (1.0 - p) * std::log2(dd) -
                         0.5 * std::log2((dd * dd - 1.0) * p + 1.0);
        return OracleValue{clamp_bits(v), "p <= 1/(d+1)", p == 0.0};
    }
    const double v = 0.5 * (1.0 - 2.0 * p) * std::log2((1.0 - p) / p);
    return OracleValue{clamp_bits(v), "1/(d+1) < p <= 1/2", false};
}

OracleValue erasure_alpha_bound(int d, double p, double alpha) {
    require_dim(d);
    require_probability(p, 0.5);
    if (!(alpha > 0.0) || !(alpha <= 2.0) || alpha == 1.0) {
        throw std::invalid_argument("divergence order alpha out of range");
    }
    const double dd = d;
    // Interior branch iff p <= 1/(d^{1/alpha}+1), i.e. ln(p/(1-p)) <= -(ln d)/alpha;
    // comparing logarithms avoids overflow for small alpha.
    const bool interior =
        p == 0.0 || std::log(p / (1.0 - p)) <= -std::log(dd) / alpha;
    double x = 0.0;
    std::string regime = "boundary optimum x = 0";
    if (interior && p > 0.0) {
        // k = d^{2/alpha} p / (d (1-p)) can overflow for small alpha even
        // though p*d*k stays below 1-p on this branch, so build both from
        // logarithms; x degrades gracefully to 0 when k saturates to inf.
        const double log_d = std::log(dd);
        const double k =
            std::exp(2.0 / alpha * log_d + std::log(p) - std::log(dd * (1.0 - p)));
        const double pdk =
            std::exp(2.0 / alpha * log_d + 2.0 * std::log(p) - std::log(1.0 - p));
        x = std::max((1.0 - p - pdk) / (k + dd), 0.0);
        regime = "interior optimum";
    } else if (interior) {
        x = 1.0 / dd;
        regime = "interior optimum";
    }
    const double head = (1.0 / dd) * std::pow(dd * (1.0 - p), alpha) *
                        std::pow(p * dd + x, 1.0 - alpha);
    const double tail =
        p == 0.0 ? 0.0
                 : std::pow(p, alpha) * std::pow(1.0 - p - dd * x, 1.0 - alpha);
    const double v = 0.5 * std::log2(head + tail) / (alpha - 1.0);
    return OracleValue{clamp_bits(v), regime, false};
}

OracleValue depolarizing_bs(int d, double p, bool printed_max_variant) {
    require_dim(d);
    const double dd = d;
    require_probability(p, dd * dd / (dd * dd - 1.0));
    if (p >= dd / (2.0 * (dd + 1.0))) {
        return OracleValue{0.0, "two-extendible", true};
    }
    const double f = 1.0 - p + p / (dd * dd);
    const double f_hi = (2.0 * f - 1.0) / (dd * dd) +
                        2.0 * std::sqrt((dd * dd - 1.0) * (1.0 - f) * f) / (dd * dd) -
                        f + 1.0;
    const double f2 = printed_max_variant ? std::max(f_hi, f) : std::min(f_hi, f);
    auto term = [](double a, double b) { return a > 0.0 ? a * std::log2(a / b) : 0.0; };
    const double v = 0.5 * (term(f, f2) + term(1.0 - f, 1.0 - f2));
    return OracleValue{clamp_bits(v), "below two-extendibility threshold", true};
}

OracleValue semicausal_erasure_bs(int d, double p) {
    require_dim(d);
    require_probability(p);
    return OracleValue{clamp_bits((1.0 - p) * std::log2(static_cast<double>(d))),
                       "exact", true};
}

OracleValue full_rank_min_geo(const quantum::ChoiChannel& n, double rank_tol) {
    linalg::EigResult eig = linalg::herm_eig(n.choi);
    const int dim = static_cast<int>(eig.eigenvalues.size());
    const double lmax = eig.eigenvalues(0);
    const double lmin = eig.eigenvalues(dim - 1);
    if (!(lmin > rank_tol * lmax)) {
        throw NotApplicable("Choi operator is rank-deficient");
    }
    return OracleValue{0.0, "full-rank Choi", true};
}

}  // namespace unext::oracle
