#pragma once

#include <cmath>
#include <span>
#include <stdexcept>

namespace pmix {

// Exponents of the operator: p-growth and fractional order s on an N-dim grid.
struct KernelParams {
    double p = 2.0;
    double s = 0.5;
    int N = 1;

    KernelParams() = default;
    KernelParams(double p_, double s_, int N_) : p(p_), s(s_), N(N_) {
        if (!(p > 1.0)) throw std::invalid_argument("kernel params: p must be > 1");
        if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("kernel params: s must lie in (0,1)");
        if (N < 1 || N > 2) throw std::invalid_argument("kernel params: N must be 1 or 2");
    }
};

// |t|^p with fast paths for the common exponents
inline double pow_abs(double t, double p) {
    if (p == 2.0) return t * t;
    const double a = std::abs(t);
    if (p == 3.0) return a * a * a;
    if (p == 1.5) return a * std::sqrt(a);
    if (a == 0.0) return 0.0;
    return std::pow(a, p);
}

// |t|^{p-2} t, the odd monotone nonlinearity of the operator; 0 at t = 0
inline double signed_power(double t, double p) {
    if (p == 2.0) return t;
    if (t == 0.0) return 0.0;
    if (p == 3.0) return std::abs(t) * t;
    if (p == 1.5) return std::copysign(std::sqrt(std::abs(t)), t);
    return std::copysign(std::pow(std::abs(t), p - 1.0), t);
}

// gradient-side variant: (t^2 + eps^2)^{(p-2)/2} t, removes the kink at 0 for p < 2
inline double signed_power_smoothed(double t, double p, double eps) {
    if (p == 2.0) return t;
    const double q = t * t + eps * eps;
    if (p == 3.0) return t * std::sqrt(q);
    if (p == 1.5) return t / std::sqrt(std::sqrt(q));
    return t * std::pow(q, 0.5 * (p - 2.0));
}

// |x-y|^{-(N+ps)}; the singular diagonal x = y is the caller's job to exclude
double pair_weight(std::span<const double> x, std::span<const double> y, const KernelParams& kp);

// symmetric clamp to [-level, level]
inline double clamp_sym(double t, double level) {
    if (!(level > 0.0)) throw std::invalid_argument("clamp_sym: level must be > 0");
    if (t > level) return level;
    if (t < -level) return -level;
    return t;
}

// level-k truncation of the singular source profile l^{-delta} (k on l <= 0)
double singular_source_trunc(double l, double k, double delta);
// its primitive, normalized to vanish at 0
double singular_source_trunc_primitive(double l, double k, double delta);

// regularized source slope (t^+ + 1/n)^{-delta}; valid for every delta > 0
double regularized_source(double t, double n, double delta);
// its primitive in the paper-form closed expression; requires delta < 1
double regularized_source_primitive(double t, double n, double delta);

// unit sphere measure: 2 in 1D, 2*pi in 2D
double unit_sphere_measure(int N);
// angular average factor for the near-diagonal repair: 2 in 1D, the circle
// integral of |cos theta|^p in 2D (one-time numerical quadrature, cached)
double angular_power_constant(double p, int N);

// analytic repair of the dropped near-diagonal band |x-y| < 1.5h
double near_field_correction(double h, const KernelParams& kp, double grad_p_norm);
// analytic radial tail of the pair integral beyond the represented collar
double far_field_tail(double R, double u_abs_p, const KernelParams& kp);

// --- randomized test oracles for the algebraic inequalities the solver leans on ---

enum class InequalityKind { MonotoneGap, PowerChain, PowerSeparation };

struct InequalityArgs {
    // MonotoneGap: <A(a)-A(b), a-b> >= C |a-b|^2 (|a|+|b|)^{p-2}, vectors a, b
    std::span<const double> a{};
    std::span<const double> b{};
    double p = 2.0;
    double C = -1.0;  // < 0 means use monotone_gap_constant(p)
    // PowerChain: A(a-b) (a^delta - b^delta) >= |G(a)-G(b)|^p on a, b >= 0
    double delta = 0.5;
    double x = 0.0;
    double y = 0.0;
    // PowerSeparation: |x-y| <= eps^{1-q} |x^q - y^q| on the admissible quadrant
    double q = 2.0;
    double eps = 1.0;
};

double monotone_gap_constant(double p);
bool monotone_gap_holds(std::span<const double> a, std::span<const double> b, double p, double C = -1.0);
bool power_chain_holds(double a, double b, double p, double delta);
bool power_separation_holds(double x, double y, double q, double eps);

bool inequality_oracle(InequalityKind kind, const InequalityArgs& args);

}  // namespace pmix
