#pragma once

// Lubricant constitutive closures (Roelands viscosity, Dowson-Higginson
// density), the diffusivity coefficient, and resolution of Moes operating
// parameters into the dimensionless constants the solver consumes.

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ehl {

struct PhysicsDefaults {
    double e_prime = 2.26e11;   // reduced modulus [Pa]
    double radius = 0.0127;     // reduced radius [m]
    double eta0 = 0.04;         // ambient viscosity [Pa s]
    double z = 0.68;            // viscosity index
    double p0 = 1.98e8;         // viscosity constant [Pa]
};

struct PhysicsParams {
    double alpha = 0;     // pressure-viscosity coefficient [1/Pa]
    double z = 0.68;
    double p0 = 1.98e8;
    double p_hertz = 0;   // maximum Hertzian pressure [Pa]
    double lambda = 0;    // speed parameter, Eq. driving the Reynolds scaling
    double moes_m = 0;
    double moes_l = 0;
    double eta0 = 0;
    double e_prime = 0;
    double radius = 0;
    double u_sum = 0;     // sum velocity [m/s]
    double contact_radius = 0;  // Hertzian contact radius [m]
};

// eta(u) = exp{(alpha p0/z)(-1 + (1 + u pH/p0)^z)}, dimensionless.
inline double viscosity(double u, const PhysicsParams& p) {
    double base = 1.0 + u * p.p_hertz / p.p0;
    if (base <= 0.0)
        throw std::domain_error("viscosity: 1 + u*pH/p0 <= 0");
    return std::exp((p.alpha * p.p0 / p.z) * (-1.0 + std::pow(base, p.z)));
}

// rho(u) = (0.59e9 + 1.34 u pH)/(0.59e9 + u pH), in [1, 1.34).
inline double density(double u, const PhysicsParams& p) {
    double q = u * p.p_hertz;
    return (0.59e9 + 1.34 * q) / (0.59e9 + q);
}

struct invalid_state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// eps = rho H^3 / (eta lambda); pointwise diffusivity of the Reynolds operator.
inline double epsilon_coef(double u, double H, const PhysicsParams& p) {
    if (!(H > 0.0))
        throw invalid_state_error("epsilon_coef: non-positive film thickness");
    return density(u, p) * H * H * H / (viscosity(u, p) * p.lambda);
}

// Face value by arithmetic mean of the two adjacent point values.
inline double face_epsilon(double eps_a, double eps_b) {
    return 0.5 * (eps_a + eps_b);
}

// Resolve (M, L, alpha) plus the physical gauge into the full parameter set.
// Circular point-contact Moes relations: W = F/(E' R^2), M = W (2U)^{-3/4},
// L = G (2U)^{1/4}. With these, lambda = 4 pi (2/3)^{1/3} M^{-4/3} and
// alpha*pH depend on (M, L, alpha) only, so the physical gauge (E', R, eta0)
// never touches the dimensionless solve.
inline PhysicsParams resolve_moes(double moes_m, double moes_l, double alpha,
                                  const PhysicsDefaults& d = PhysicsDefaults{}) {
    if (!(moes_m > 0) || !(moes_l > 0) || !(alpha > 0))
        throw std::invalid_argument("resolve_moes: M, L, alpha must be positive");
    if (!(d.e_prime > 0) || !(d.radius > 0) || !(d.eta0 > 0))
        throw std::invalid_argument("resolve_moes: defaults must be positive");

    PhysicsParams p;
    p.alpha = alpha;
    p.z = d.z;
    p.p0 = d.p0;
    p.moes_m = moes_m;
    p.moes_l = moes_l;
    p.eta0 = d.eta0;
    p.e_prime = d.e_prime;
    p.radius = d.radius;

    double G = alpha * d.e_prime;                     // material number
    double twoU = std::pow(moes_l / G, 4.0);          // L = G (2U)^{1/4}
    double W = moes_m * std::pow(twoU, 0.75);         // M = W (2U)^{-3/4}
    double F = W * d.e_prime * d.radius * d.radius;   // load [N]
    double a = std::cbrt(1.5 * F * d.radius / d.e_prime);
    p.contact_radius = a;
    p.p_hertz = 3.0 * F / (2.0 * std::numbers::pi * a * a);
    p.u_sum = twoU * d.e_prime * d.radius / d.eta0;
    p.lambda = 6.0 * d.eta0 * p.u_sum * d.radius * d.radius
               / (a * a * a * p.p_hertz);
    return p;
}

// Recover (M, L) from resolved physical fields; round-trip check.
inline std::pair<double, double> moes_from_params(const PhysicsParams& p) {
    double twoU = p.eta0 * p.u_sum / (p.e_prime * p.radius);
    double F = 2.0 * std::numbers::pi * p.contact_radius * p.contact_radius * p.p_hertz / 3.0;
    double W = F / (p.e_prime * p.radius * p.radius);
    double G = p.alpha * p.e_prime;
    double L = G * std::pow(twoU, 0.25);
    double M = W * std::pow(twoU, -0.75);
    return {M, L};
}

} // namespace ehl
