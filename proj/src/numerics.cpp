#include "rqif/numerics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace rqif {

PinvResult pseudo_inverse(const Eigen::MatrixXd& A, double rtol) {
    if (A.rows() != A.cols()) throw std::invalid_argument("pseudo_inverse: matrix must be square");
    if (!A.allFinite()) throw std::invalid_argument("pseudo_inverse: non-finite entries");
    const Eigen::Index n = A.rows();
    if (rtol < 0) rtol = 1e-10 * static_cast<double>(n);

    Eigen::MatrixXd sym = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) throw std::runtime_error("pseudo_inverse: eigendecomposition failed");

    const Eigen::VectorXd& ev = es.eigenvalues();
    const double lmax = ev.cwiseAbs().maxCoeff();
    const double cut = rtol * lmax;

    PinvResult out;
    out.tolerance_used = cut;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (ev[i] > cut) {
            inv[i] = 1.0 / ev[i];
            ++out.rank;
        }
    }
    out.pinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    return out;
}

namespace {

// Regularized lower incomplete gamma P(a, x); series for x < a + 1,
// Lentz continued fraction for the complement otherwise.
double gamma_p(double a, double x) {
    if (x < 0 || a <= 0) throw std::invalid_argument("gamma_p: bad arguments");
    if (x == 0) return 0.0;
    const double lg = std::lgamma(a);
    if (x < a + 1.0) {
        double term = 1.0 / a;
        double sum = term;
        double ap = a;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
        }
        return sum * std::exp(-x + a * std::log(x) - lg);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    const double q = std::exp(-x + a * std::log(x) - lg) * h;
    return 1.0 - q;
}

double chi2_pdf(double x, double df) {
    if (x <= 0) return 0.0;
    const double a = 0.5 * df;
    return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::log(2.0) - std::lgamma(a));
}

}  // namespace

double chi2_cdf(double x, double df) {
    if (x < 0) throw std::invalid_argument("chi2_cdf: x must be >= 0");
    if (df <= 0) throw std::invalid_argument("chi2_cdf: df must be positive");
    return gamma_p(0.5 * df, 0.5 * x);
}

double chi2_quantile(double prob, double df) {
    if (!(prob > 0.0 && prob < 1.0)) throw std::invalid_argument("chi2_quantile: prob must be in (0,1)");
    if (df <= 0) throw std::invalid_argument("chi2_quantile: df must be positive");

    // Bracket the root, then bisect with Newton refinement.
    double lo = 0.0, hi = df;
    while (chi2_cdf(hi, df) < prob) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) break;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = chi2_cdf(x, df) - prob;
        if (f > 0) hi = x; else lo = x;
        const double dens = chi2_pdf(x, df);
        double next = (dens > 0) ? x - f / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::fabs(next - x) < 1e-13 * (1.0 + x) && std::fabs(f) < 1e-10) return next;
        x = next;
    }
    return x;
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("cholesky: matrix must be square");
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        double diag = A(j, j) - L.row(j).head(j).squaredNorm();
        if (diag <= 0)
            throw std::runtime_error("cholesky: leading minor " + std::to_string(j + 1) +
                                     " is not positive definite");
        diag = std::sqrt(diag);
        L(j, j) = diag;
        for (Eigen::Index i = j + 1; i < n; ++i)
            L(i, j) = (A(i, j) - L.row(i).head(j).dot(L.row(j).head(j))) / diag;
    }
    return L;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double log_normal_sf(double z) {
    if (z < 10.0) {
        const double sf = 0.5 * std::erfc(z / std::sqrt(2.0));
        return std::log(sf);
    }
    // Asymptotic tail: P(Z > z) ~ phi(z)/z * (1 - 1/z^2 + 3/z^4 - 15/z^6).
    const double z2 = z * z;
    const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
    return -0.5 * z2 - std::log(z) - 0.5 * std::log(2.0 * M_PI) + std::log(series);
}

double neg_log10_two_sided_p(double z) {
    const double az = std::fabs(z);
    const double logp = std::log(2.0) + log_normal_sf(az);
    return -logp / std::log(10.0);
}

}  // namespace rqif
