#include "parastab/exponents.hpp"

#include "parastab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parastab {

namespace {
constexpr double kCriticalTol = 1e-12;
}

double alpha_crit(double q, double gamma, double xi) {
    if (!(gamma < xi))
        throw InputError("alpha_crit: require gamma < xi");
    if (q < 1.0)
        throw InputError("alpha_crit: require q >= 1");
    if (q == 1.0)
        return -std::numeric_limits<double>::infinity();
    return (q * xi - 1.0 - gamma) / (q - 1.0);
}

double alpha_crit_star(double q_star, double gamma_star, double xi) {
    if (!(q_star > 1.0))
        throw InputError("alpha_crit_star: require q_* > 1");
    return (q_star * xi - 1.0 - gamma_star) / (q_star - 1.0);
}

CriticalReport validate_profile(const ExponentProfile& p) {
    CriticalReport rep;
    auto fail = [&rep](const char* tag) { rep.violated_constraints.emplace_back(tag); };

    if (p.q < 1.0)
        fail("q_range");
    if (p.mode == ProfileMode::Quasilinear) {
        if (!(0.0 < p.gamma && p.gamma < p.beta && p.beta < p.xi && p.xi < 1.0))
            fail("ordering");
        if (!(p.beta < p.alpha && p.alpha < p.xi))
            fail("alpha_range");
    } else {
        if (!(0.0 <= p.gamma && p.gamma < p.xi && p.xi <= 1.0))
            fail("ordering");
        if (p.gamma == 0.0 && p.xi == 1.0)
            fail("gamma_xi_endpoint");
    }

    if (!rep.violated_constraints.empty()) {
        rep.alpha_crit = std::numeric_limits<double>::quiet_NaN();
        rep.classification = Criticality::Invalid;
        return rep;
    }

    rep.alpha_crit = alpha_crit(p.q, p.gamma, p.xi);
    const bool critical = std::abs(p.alpha - rep.alpha_crit) <= kCriticalTol;

    if (p.mode == ProfileMode::Quasilinear) {
        // alpha_crit <= alpha in (beta, xi), equality allowed
        if (critical)
            rep.classification = Criticality::Critical;
        else if (p.alpha > rep.alpha_crit)
            rep.classification = Criticality::Subcritical;
        else {
            fail("alpha_below_critical");
            rep.classification = Criticality::Invalid;
        }
    } else {
        // either alpha_crit < alpha in [gamma, xi) or alpha_crit = alpha in (gamma, xi)
        const bool in_closed = p.gamma <= p.alpha && p.alpha < p.xi;
        const bool in_open = p.gamma < p.alpha && p.alpha < p.xi;
        if (critical && in_open)
            rep.classification = Criticality::Critical;
        else if (!critical && p.alpha > rep.alpha_crit && in_closed)
            rep.classification = Criticality::Subcritical;
        else {
            fail(p.alpha < rep.alpha_crit ? "alpha_below_critical" : "alpha_range");
            rep.classification = Criticality::Invalid;
        }
    }
    return rep;
}

ExponentProfile chemotaxis_profile(double epsilon, double p, int n) {
    if (!(p > 0.5 * n))
        throw InputError("chemotaxis_profile: require p > n/2");
    const double bound = std::min(1.0 - 1.0 / p, 1.0 - n / (2.0 * p));
    if (!(0.0 < 2.0 * epsilon && 2.0 * epsilon < bound)) {
        const char* which = (1.0 - 1.0 / p <= 1.0 - n / (2.0 * p)) ? "1-1/p" : "1-n/(2p)";
        throw InputError("chemotaxis_profile: require 0 < 2*eps < " + std::string(which) + " = " +
                         std::to_string(bound) + ", got 2*eps = " + std::to_string(2.0 * epsilon));
    }
    ExponentProfile prof;
    prof.gamma = epsilon / 3.0;
    prof.beta = 0.0; // unused in semilinear mode
    prof.alpha = epsilon;
    prof.xi = 0.5 * (1.0 + epsilon);
    prof.q = 2.0;
    prof.mode = ProfileMode::Semilinear;
    return prof;
}

GradientIndices gradient_profile(int n, double p, double kappa, double tau) {
    if (!(kappa > 3.0))
        throw InputError("gradient_profile: require kappa > 3");
    if (!(2.0 * n < p && p < (kappa - 1.0) * n))
        throw InputError("gradient_profile: require p in (2n, (kappa-1)n) = (" +
                         std::to_string(2.0 * n) + ", " + std::to_string((kappa - 1.0) * n) + ")");
    if (p == (n - 1.0) * (kappa - 1.0))
        throw InputError("gradient_profile: require p != (n-1)(kappa-1)");
    if (!(0.5 < 2.0 * tau && 2.0 * tau < 1.0 - n / p))
        throw InputError("gradient_profile: require 1/2 < 2*tau < 1 - n/p = " +
                         std::to_string(1.0 - n / p));

    GradientIndices gi;
    gi.s_bar = 2.0 * tau + n / p;
    gi.s_c = n / p + (kappa - 2.0) / (kappa - 1.0);
    gi.s = 1.0 + n * (kappa - 1.0) / (p * kappa);
    gi.mu = 1.0 / (2.0 * (kappa - 1.0)) - n / (2.0 * p * kappa);

    gi.profile.gamma = tau;
    gi.profile.beta = tau + 0.5 * gi.s_bar;
    gi.profile.alpha = tau + 0.5 * gi.s_c;
    gi.profile.xi = tau + 0.5 * gi.s;
    gi.profile.q = kappa;
    gi.profile.mode = ProfileMode::Quasilinear;
    return gi;
}

double scaling_defect(double s, int n, double p, double kappa) {
    if (!(kappa > 2.0) || !(p > 0.0))
        throw InputError("scaling_defect: require kappa > 2 and p > 0");
    return s - n / p - (kappa - 2.0) / (kappa - 1.0);
}

std::string to_string(Criticality c) {
    switch (c) {
    case Criticality::Subcritical:
        return "subcritical";
    case Criticality::Critical:
        return "critical";
    default:
        return "invalid";
    }
}

} // namespace parastab
