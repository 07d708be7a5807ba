#pragma once

#include <string>
#include <vector>

namespace parastab {

enum class ProfileMode { Quasilinear, Semilinear };

/// The exponent tuple (gamma, beta, alpha, xi, q) steering the time-weighted
/// theory. beta is carried but unused in semilinear mode.
struct ExponentProfile {
    double gamma = 0.0;
    double beta = 0.0;
    double alpha = 0.0;
    double xi = 0.0;
    double q = 1.0;
    ProfileMode mode = ProfileMode::Semilinear;

    double mu() const { return xi - alpha; } // weight of the C_mu space
};

enum class Criticality { Subcritical, Critical, Invalid };

struct CriticalReport {
    double alpha_crit = 0.0; // -inf sentinel when q == 1
    Criticality classification = Criticality::Invalid;
    std::vector<std::string> violated_constraints;
};

/// (q xi - 1 - gamma)/(q - 1) for q > 1; -infinity for q = 1.
double alpha_crit(double q, double gamma, double xi);

/// Same formula with the q_* > 1 requirement of the remainder-based gate.
double alpha_crit_star(double q_star, double gamma_star, double xi);

/// Checks all ordering and range constraints of the profile's mode, computes
/// alpha_crit and classifies. Invalidity is a classification, not an error.
CriticalReport validate_profile(const ExponentProfile& profile);

/// gamma = eps/3, alpha = eps, xi = (1+eps)/2, q = 2 (semilinear), subject to
/// 0 < 2 eps < min{1 - 1/p, 1 - n/(2p)} and p > n/2.
ExponentProfile chemotaxis_profile(double epsilon, double p, int n);

struct GradientIndices {
    ExponentProfile profile;
    double s_bar = 0.0;
    double s = 0.0;
    double s_c = 0.0;
    double mu = 0.0;
};

/// Indices for the |grad u|^kappa problem: gamma = tau, beta = tau + s_bar/2,
/// xi = tau + s/2, alpha = tau + s_c/2, q = kappa (quasilinear), with
/// s_c = n/p + (kappa-2)/(kappa-1) and mu = 1/(2(kappa-1)) - n/(2 p kappa).
GradientIndices gradient_profile(int n, double p, double kappa, double tau);

/// Homogeneity defect of the H^s norm under parabolic rescaling:
/// d(s) = s - n/p - (kappa-2)/(kappa-1); d(s_c) = 0.
double scaling_defect(double s, int n, double p, double kappa);

std::string to_string(Criticality c);

} // namespace parastab
