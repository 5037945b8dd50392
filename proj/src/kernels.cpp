#include "pmix/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

namespace pmix {

double pair_weight(std::span<const double> x, std::span<const double> y, const KernelParams& kp) {
    double d2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) d2 += (x[a] - y[a]) * (x[a] - y[a]);
    if (d2 == 0.0) throw std::invalid_argument("pair_weight: singular diagonal x = y");
    return std::pow(d2, -0.5 * (kp.N + kp.p * kp.s));
}

double singular_source_trunc(double l, double k, double delta) {
    if (!(k > 0.0)) throw std::invalid_argument("singular_source_trunc: k must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("singular_source_trunc: delta must be > 0");
    if (l <= 0.0) return k;
    return std::min(std::pow(l, -delta), k);
}

double singular_source_trunc_primitive(double l, double k, double delta) {
    if (!(k > 0.0)) throw std::invalid_argument("singular_source_trunc_primitive: k must be > 0");
    if (!(delta > 0.0)) throw std::invalid_argument("singular_source_trunc_primitive: delta must be > 0");
    // the slope switches from k to l^{-delta} at l* = k^{-1/delta}
    const double lstar = std::pow(k, -1.0 / delta);
    if (l <= lstar) return k * l;
    const double head = k * lstar;
    if (delta == 1.0) return head + std::log(l / lstar);
    return head + (std::pow(l, 1.0 - delta) - std::pow(lstar, 1.0 - delta)) / (1.0 - delta);
}

double regularized_source(double t, double n, double delta) {
    if (!(n >= 1.0)) throw std::invalid_argument("regularized_source: n must be >= 1");
    if (!(delta > 0.0)) throw std::invalid_argument("regularized_source: delta must be > 0");
    const double tp = t > 0.0 ? t : 0.0;
    return std::pow(tp + 1.0 / n, -delta);
}

double regularized_source_primitive(double t, double n, double delta) {
    if (!(n >= 1.0)) throw std::invalid_argument("regularized_source_primitive: n must be >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("regularized_source_primitive: requires 0 < delta < 1");
    const double tp = t > 0.0 ? t : 0.0;
    const double tm = t < 0.0 ? -t : 0.0;
    return std::pow(tp + 1.0 / n, 1.0 - delta) / (1.0 - delta) - std::pow(n, delta) * tm;
}

double unit_sphere_measure(int N) {
    if (N == 1) return 2.0;
    if (N == 2) return 2.0 * M_PI;
    throw std::invalid_argument("unit_sphere_measure: N must be 1 or 2");
}

namespace {

// adaptive Simpson on [a,b]
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
               double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace

double angular_power_constant(double p, int N) {
    if (N == 1) return 2.0;
    if (N != 2) throw std::invalid_argument("angular_power_constant: N must be 1 or 2");
    static std::map<double, double> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(p);
    if (it != cache.end()) return it->second;
    const double quarter = integrate([p](double t) { return std::pow(std::cos(t), p); }, 0.0, 0.5 * M_PI, 1e-14);
    const double value = 4.0 * quarter;
    cache.emplace(p, value);
    return value;
}

double near_field_correction(double h, const KernelParams& kp, double grad_p_norm) {
    const double expo = kp.p - kp.p * kp.s;
    return grad_p_norm * angular_power_constant(kp.p, kp.N) * std::pow(h, expo) / expo;
}

double far_field_tail(double R, double u_abs_p, const KernelParams& kp) {
    if (!(R > 0.0)) throw std::invalid_argument("far_field_tail: R must be > 0");
    const double ps = kp.p * kp.s;
    return u_abs_p * unit_sphere_measure(kp.N) * std::pow(R, -ps) / ps;
}

double monotone_gap_constant(double p) {
    // classical lower constants: p-1 below quadratic growth, 2^{2-p} above
    return p < 2.0 ? p - 1.0 : std::pow(2.0, 2.0 - p);
}

bool monotone_gap_holds(std::span<const double> a, std::span<const double> b, double p, double C) {
    if (!(p > 1.0)) throw std::invalid_argument("monotone_gap: p must be > 1");
    if (a.size() != b.size() || a.empty()) throw std::invalid_argument("monotone_gap: dimension mismatch");
    if (C < 0.0) C = monotone_gap_constant(p);
    double na = 0.0, nb = 0.0, d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        na += a[i] * a[i];
        nb += b[i] * b[i];
        d2 += (a[i] - b[i]) * (a[i] - b[i]);
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    double lhs = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double Aa = na == 0.0 ? 0.0 : std::pow(na, p - 2.0) * a[i];
        const double Ab = nb == 0.0 ? 0.0 : std::pow(nb, p - 2.0) * b[i];
        lhs += (Aa - Ab) * (a[i] - b[i]);
    }
    if (lhs < 0.0) return false;  // sign positivity is what the solver relies on
    if (d2 == 0.0) return true;
    if (na + nb == 0.0) return true;
    const double rhs = C * d2 * std::pow(na + nb, p - 2.0);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return lhs >= rhs - 1e-12 * scale;
}

namespace {

// G(t) = int_0^t (g'(tau))^{1/p} dtau for the power map g(t) = t^delta on t >= 0
double chain_primitive(double t, double p, double delta) {
    const double expo = (delta + p - 1.0) / p;
    return std::pow(delta, 1.0 / p) / expo * std::pow(t, expo);
}

}  // namespace

bool power_chain_holds(double a, double b, double p, double delta) {
    if (!(p > 1.0) || !(delta > 0.0)) throw std::invalid_argument("power_chain: need p > 1, delta > 0");
    if (a < 0.0 || b < 0.0) throw std::invalid_argument("power_chain: increasing branch needs a, b >= 0");
    const double lhs = signed_power(a - b, p) * (std::pow(a, delta) - std::pow(b, delta));
    const double rhs = pow_abs(chain_primitive(a, p, delta) - chain_primitive(b, p, delta), p);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
    return lhs >= rhs - 1e-12 * scale;
}

bool power_separation_holds(double x, double y, double q, double eps) {
    if (!(q > 1.0) || !(eps > 0.0)) throw std::invalid_argument("power_separation: need q > 1, eps > 0");
    const bool in_sx = x >= eps && y >= 0.0;
    const bool in_sy = y >= eps && x >= 0.0;
    if (!in_sx && !in_sy) throw std::invalid_argument("power_separation: (x,y) outside the admissible set");
    const double lhs = std::abs(x - y);
    const double rhs = std::pow(eps, 1.0 - q) * std::abs(std::pow(x, q) - std::pow(y, q));
    const double scale = std::max({lhs, rhs, 1e-300});
    return lhs <= rhs + 1e-12 * scale;
}

bool inequality_oracle(InequalityKind kind, const InequalityArgs& args) {
    switch (kind) {
        case InequalityKind::MonotoneGap: return monotone_gap_holds(args.a, args.b, args.p, args.C);
        case InequalityKind::PowerChain: return power_chain_holds(args.x, args.y, args.p, args.delta);
        case InequalityKind::PowerSeparation: return power_separation_holds(args.x, args.y, args.q, args.eps);
    }
    throw std::invalid_argument("inequality_oracle: unknown kind");
}

}  // namespace pmix
