#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace shmclassnet::gendamp {

enum class KernelKind { Exponential, TimesTExponential, Gaussian, Rectangular, RaisedCosine, Dirac };

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

/// Damping memory kernel g(t), normalized so that its integral over [0, inf) is 1.
///
///   Exponential        mu e^{-mu t}
///   TimesTExponential  mu^2 t e^{-mu t}
///   Gaussian           2 sqrt(mu/pi) e^{-mu t^2}
///   Rectangular        1/mu on (0, mu), 0 beyond
///   RaisedCosine       (1/mu)(1 + cos(pi t/mu)) on (0, mu), 0 beyond
///   Dirac              delta(t), which recovers viscous damping
struct KernelSpec {
    KernelKind kind = KernelKind::Dirac;
    double mu = 0.0;  // unused for Dirac

    static KernelSpec exponential(double mu) { return {KernelKind::Exponential, mu}; }
    static KernelSpec times_t_exponential(double mu) { return {KernelKind::TimesTExponential, mu}; }
    static KernelSpec gaussian(double mu) { return {KernelKind::Gaussian, mu}; }
    static KernelSpec rectangular(double mu) { return {KernelKind::Rectangular, mu}; }
    static KernelSpec raised_cosine(double mu) { return {KernelKind::RaisedCosine, mu}; }
    static KernelSpec dirac() { return {KernelKind::Dirac, 0.0}; }

    bool is_dirac() const noexcept { return kind == KernelKind::Dirac; }
    /// Throws if mu is not positive for a parametrized kind.
    void validate() const;

    bool operator==(const KernelSpec&) const = default;
};

/// g(t). Dirac has no pointwise value and is rejected, as is t < 0.
double kernel_eval(const KernelSpec& kernel, double t);

/// Cumulative mass G(t) = integral of g over [0, t], in closed form.
double kernel_cdf(const KernelSpec& kernel, double t);

/// Mass of g over [a, b], 0 <= a <= b, computed without cancellation where
/// the closed form allows it.
double kernel_mass(const KernelSpec& kernel, double a, double b);

/// Quadrature weight W_i = integral over [(i-1)dt, i dt] of g(k dt - tau) d tau,
/// i.e. the kernel mass on [(k-i)dt, (k-i+1)dt]. Requires 1 <= i <= k.
double kernel_weight(const KernelSpec& kernel, std::size_t i, std::size_t k, double dt);

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
/// Fallback for kernels without a closed-form antiderivative.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth = 50);

}  // namespace shmclassnet::gendamp
