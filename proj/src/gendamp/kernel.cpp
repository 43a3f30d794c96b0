#include "shmclassnet/gendamp/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "shmclassnet/error.hpp"

namespace shmclassnet::gendamp {

using std::numbers::pi;

std::string to_string(KernelKind kind) {
    switch (kind) {
        case KernelKind::Exponential: return "exponential";
        case KernelKind::TimesTExponential: return "t_exponential";
        case KernelKind::Gaussian: return "gaussian";
        case KernelKind::Rectangular: return "rectangular";
        case KernelKind::RaisedCosine: return "raised_cosine";
        case KernelKind::Dirac: return "dirac";
    }
    return "dirac";
}

KernelKind kernel_kind_from_string(const std::string& s) {
    for (auto k : {KernelKind::Exponential, KernelKind::TimesTExponential, KernelKind::Gaussian,
                   KernelKind::Rectangular, KernelKind::RaisedCosine, KernelKind::Dirac}) {
        if (to_string(k) == s) return k;
    }
    throw Error("unknown kernel kind '" + s + "'");
}

void KernelSpec::validate() const {
    if (!is_dirac() && !(mu > 0.0 && std::isfinite(mu))) {
        throw Error("kernel parameter mu must be positive for " + to_string(kind) + " kernel");
    }
}

double kernel_eval(const KernelSpec& kernel, double t) {
    if (kernel.is_dirac()) throw Error("Dirac kernel is not pointwise-evaluable");
    if (!(t >= 0.0)) throw Error("kernel_eval requires t >= 0");
    kernel.validate();
    const double mu = kernel.mu;
    switch (kernel.kind) {
        case KernelKind::Exponential: return mu * std::exp(-mu * t);
        case KernelKind::TimesTExponential: return mu * mu * t * std::exp(-mu * t);
        case KernelKind::Gaussian: return 2.0 * std::sqrt(mu / pi) * std::exp(-mu * t * t);
        case KernelKind::Rectangular: return t < mu ? 1.0 / mu : 0.0;
        case KernelKind::RaisedCosine: return t < mu ? (1.0 + std::cos(pi * t / mu)) / mu : 0.0;
        case KernelKind::Dirac: break;
    }
    return 0.0;
}

double kernel_cdf(const KernelSpec& kernel, double t) {
    if (kernel.is_dirac()) return t >= 0.0 ? 1.0 : 0.0;
    if (t <= 0.0) return 0.0;
    return kernel_mass(kernel, 0.0, t);
}

double kernel_mass(const KernelSpec& kernel, double a, double b) {
    if (!(a >= 0.0) || !(b >= a)) throw Error("kernel_mass requires 0 <= a <= b");
    kernel.validate();
    const double mu = kernel.mu;
    double m = 0.0;
    switch (kernel.kind) {
        case KernelKind::Exponential:
            // e^{-mu a} - e^{-mu b} = e^{-mu a} (1 - e^{-mu (b-a)})
            m = -std::exp(-mu * a) * std::expm1(-mu * (b - a));
            break;
        case KernelKind::TimesTExponential: {
            // survival S(t) = e^{-mu t}(1 + mu t)
            const auto survival = [mu](double t) { return std::exp(-mu * t) * (1.0 + mu * t); };
            m = a == 0.0 ? -std::expm1(-mu * b) - mu * b * std::exp(-mu * b)
                         : survival(a) - survival(b);
            break;
        }
        case KernelKind::Gaussian: {
            const double s = std::sqrt(mu);
            // erf(s b) - erf(s a); use erfc when both arguments sit in the tail
            m = (s * a > 1.0) ? std::erfc(s * a) - std::erfc(s * b) : std::erf(s * b) - std::erf(s * a);
            break;
        }
        case KernelKind::Rectangular:
            m = (std::min(b, mu) - std::min(a, mu)) / mu;
            break;
        case KernelKind::RaisedCosine: {
            const auto cdf = [mu](double t) {
                if (t >= mu) return 1.0;
                return (t + mu / pi * std::sin(pi * t / mu)) / mu;
            };
            m = cdf(b) - cdf(a);
            break;
        }
        case KernelKind::Dirac:
            m = (a == 0.0 && b > 0.0) ? 1.0 : 0.0;
            break;
    }
    return std::max(m, 0.0);
}

double kernel_weight(const KernelSpec& kernel, std::size_t i, std::size_t k, double dt) {
    if (i < 1 || i > k) {
        throw Error("kernel_weight index i=" + std::to_string(i) + " outside [1, " +
                    std::to_string(k) + "]");
    }
    if (kernel.is_dirac()) throw Error("Dirac kernel has no quadrature weights");
    const double lag = static_cast<double>(k - i);
    return kernel_mass(kernel, lag * dt, (lag + 1.0) * dt);
}

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
    if (b == a) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace shmclassnet::gendamp
