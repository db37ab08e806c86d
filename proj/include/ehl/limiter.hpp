#pragma once

// Flux limiters, smoothness ratios, kappa-scheme increments and TVD
// diagnostics (total variation, Harten coefficient check).

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehl {

enum class LimiterKind { kappa_fixed, minmod, vanleer, vanalbada, superbee, koren };

struct LimiterSpec {
    LimiterKind kind = LimiterKind::kappa_fixed;
    double kappa = 1.0 / 3.0;     // used by kappa_fixed only, in [-1, 1]
};

inline LimiterSpec make_limiter(LimiterKind kind, double kappa = 1.0 / 3.0) {
    if (kind == LimiterKind::kappa_fixed && (kappa < -1.0 || kappa > 1.0))
        throw std::invalid_argument("make_limiter: kappa must lie in [-1, 1]");
    return LimiterSpec{kind, kappa};
}

inline LimiterSpec parse_limiter(const std::string& name, double kappa = 1.0 / 3.0) {
    if (name == "kappa_fixed") return make_limiter(LimiterKind::kappa_fixed, kappa);
    if (name == "minmod") return make_limiter(LimiterKind::minmod);
    if (name == "vanleer") return make_limiter(LimiterKind::vanleer);
    if (name == "vanalbada") return make_limiter(LimiterKind::vanalbada);
    if (name == "superbee") return make_limiter(LimiterKind::superbee);
    if (name == "koren") return make_limiter(LimiterKind::koren);
    throw std::invalid_argument("parse_limiter: unknown limiter kind '" + name + "'");
}

inline const char* limiter_name(LimiterKind k) {
    switch (k) {
        case LimiterKind::kappa_fixed: return "kappa_fixed";
        case LimiterKind::minmod: return "minmod";
        case LimiterKind::vanleer: return "vanleer";
        case LimiterKind::vanalbada: return "vanalbada";
        case LimiterKind::superbee: return "superbee";
        case LimiterKind::koren: return "koren";
    }
    return "?";
}

// Unclipped limiter value; for kappa_fixed this is the raw kappa-scheme
// weight ((1-k) + (1+k) r)/2, which leaves the TVD region.
inline double limiter_phi_raw(const LimiterSpec& spec, double r) {
    switch (spec.kind) {
        case LimiterKind::kappa_fixed:
            return 0.5 * ((1.0 - spec.kappa) + (1.0 + spec.kappa) * r);
        case LimiterKind::minmod:
            return std::max(0.0, std::min(r, 1.0));
        case LimiterKind::vanleer:
            return (r + std::fabs(r)) / (1.0 + std::fabs(r));
        case LimiterKind::vanalbada:
            return r > 0.0 ? (r * r + r) / (r * r + 1.0) : 0.0;
        case LimiterKind::superbee:
            return std::max({0.0, std::min(2.0 * r, 1.0), std::min(r, 2.0)});
        case LimiterKind::koren:
            return std::max(0.0, std::min(2.0 * r, std::min((1.0 + 2.0 * r) / 3.0, 2.0)));
    }
    return 0.0;
}

// TVD-region limiter: phi(r<=0) = 0 and 0 <= phi <= min(2r, 2).
inline double limiter_phi(const LimiterSpec& spec, double r) {
    if (r <= 0.0) return 0.0;
    double phi = limiter_phi_raw(spec, r);
    return std::max(0.0, std::min({phi, 2.0 * r, 2.0}));
}

// Smoothness ratios around point i given (u_{i-2}, u_{i-1}, u_i, u_{i+1}):
//   r_{i-1/2} = (u_{i+1}-u_i)/(u_i-u_{i-1}),
//   r_{i-3/2} = (u_i-u_{i-1})/(u_{i-1}-u_{i-2}).
// Denominators are regularized so that phi(r) * denominator stays exact when
// the denominator vanishes.
inline double regularized_ratio(double num, double den) {
    double s = den >= 0.0 ? 1.0 : -1.0;
    return num / (den + s * 1e-14);
}

inline std::pair<double, double> ratio_r(double u_mm, double u_m, double u_0, double u_p) {
    double r_minus_half = regularized_ratio(u_p - u_0, u_0 - u_m);
    double r_three_half = regularized_ratio(u_0 - u_m, u_m - u_mm);
    return {r_minus_half, r_three_half};
}

// Convective increments for cell i of the kappa-family discretization
// (a > 0). Callers place the pieces in the line matrix or the right side
// according to the splitting in use.
struct FaceIncrements {
    double l1 = 0;       // u_i - u_{i-1}
    double l_alpha = 0;  // 0.5 phi(r_{i-1/2}) (u_i - u_{i-1})
    double l_beta = 0;   // 0.5 phi(r_{i-3/2}) (u_i - u_{i-1})
    double l_gamma = 0;  // -0.5 phi(r_{i-3/2}) (u_{i-1} - u_{i-2})
};

inline FaceIncrements kappa_flux_1d(double u_mm, double u_m, double u_0, double u_p,
                                    const LimiterSpec& spec, bool clipped = true) {
    auto [r_mh, r_3h] = ratio_r(u_mm, u_m, u_0, u_p);
    double phi_mh = clipped ? limiter_phi(spec, r_mh) : limiter_phi_raw(spec, r_mh);
    double phi_3h = clipped ? limiter_phi(spec, r_3h) : limiter_phi_raw(spec, r_3h);
    FaceIncrements f;
    f.l1 = u_0 - u_m;
    f.l_alpha = 0.5 * phi_mh * (u_0 - u_m);
    f.l_beta = 0.5 * phi_3h * (u_0 - u_m);
    f.l_gamma = -0.5 * phi_3h * (u_m - u_mm);
    return f;
}

// Harten conditions: c >= 0, d >= 0, c + d <= 1 everywhere.
inline bool harten_tvd_check(const std::vector<double>& c, const std::vector<double>& d) {
    if (c.size() != d.size())
        throw std::invalid_argument("harten_tvd_check: length mismatch");
    for (size_t i = 0; i < c.size(); ++i)
        if (c[i] < 0.0 || d[i] < 0.0 || c[i] + d[i] > 1.0) return false;
    return true;
}

inline double total_variation(const std::vector<double>& u) {
    double tv = 0;
    for (size_t i = 0; i + 1 < u.size(); ++i) tv += std::fabs(u[i + 1] - u[i]);
    return tv;
}

// One explicit step of u_t + a u_x = 0 (a > 0) on a periodic line with the
// limited upwind flux F_{i+1/2} = u_i + 0.5 phi(r)(u_i - u_{i-1}),
// r = (u_{i+1}-u_i)/(u_i-u_{i-1}). Diagnostic path for the TVD suite.
inline std::vector<double> advect_step_periodic(const std::vector<double>& u, double cfl,
                                                const LimiterSpec& spec, bool clipped = true) {
    const int n = static_cast<int>(u.size());
    auto wrap = [n](int i) { return (i % n + n) % n; };
    std::vector<double> flux(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        double um = u[static_cast<size_t>(wrap(i - 1))];
        double u0 = u[static_cast<size_t>(i)];
        double up = u[static_cast<size_t>(wrap(i + 1))];
        double r = regularized_ratio(up - u0, u0 - um);
        double phi = clipped ? limiter_phi(spec, r) : limiter_phi_raw(spec, r);
        flux[static_cast<size_t>(i)] = u0 + 0.5 * phi * (u0 - um);
    }
    std::vector<double> next(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i)
        next[static_cast<size_t>(i)] =
            u[static_cast<size_t>(i)] - cfl * (flux[static_cast<size_t>(i)]
                                               - flux[static_cast<size_t>(wrap(i - 1))]);
    return next;
}

} // namespace ehl
