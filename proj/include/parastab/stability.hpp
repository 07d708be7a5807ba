#pragma once

#include "parastab/exponents.hpp"
#include "parastab/integrate.hpp"
#include "parastab/problems.hpp"
#include "parastab/spaces.hpp"
#include "parastab/special.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace parastab {

struct DecayFit {
    double omega_hat = 0.0;
    double M_hat = 0.0;
    double t_min = 0.0, t_max = 0.0;
    double residual = 0.0; // rms of the log-linear fit
    int samples = 0;
};

/// Least squares on log ||v(t) - v*||_{H^s} over the window.
DecayFit fit_decay(const WeightedTrajectory& traj, const SystemField& v_star, double s,
                   double t_min, double t_max);

/// min over positive-time samples of
///   M e^{-omega t} ||v0-v*||_alpha - (||v(t)-v*||_alpha + t^{xi-alpha} ||v(t)-v*||_xi).
/// Nonnegative margin means the exponential estimate holds on the samples.
/// With xi == alpha the weighted term coincides with the first and is counted
/// once.
double verify_exponential_estimate(const WeightedTrajectory& traj, const SystemField& v_star,
                                   double alpha, double xi, double omega, double M);

struct VanishingReport {
    std::vector<std::pair<double, double>> sequence; // (t, t^mu ||u(t)||_{H^s})
    bool vanishing = false;
};

/// Weighted norms along the trajectory's (dyadic) times; verdict "vanishing"
/// when the sequence decreases toward zero over the last four levels (the
/// four smallest positive times).
VanishingReport weighted_vanishing(const WeightedTrajectory& traj, double mu, double s);

/// sup_t t^weight ||v0(t)-v1(t)||_{E_zeta} / ||v0(0)-v1(0)||_{E_alpha} for two
/// trajectories on a shared mesh.
double smoothing_probe(const WeightedTrajectory& a, const WeightedTrajectory& b, double zeta,
                       double weight, double alpha);

struct RemainderData {
    double gamma_star = 0.0;
    double q_star = 2.0;
    double c_star = 0.0;
    double r_star = 0.0;
    bool linear = false; // remainder identically zero
};

/// Fits log ||f(v*+w)-f(v*)-df(v*)w||_{gamma*} against log ||w||_xi over random
/// directions at the given radii. c_star carries 10% headroom.
RemainderData estimate_remainder_constants(const ProblemSpec& problem, const SystemField& v_star,
                                           const std::vector<double>& radii, double gamma_star,
                                           std::uint64_t seed = 2026, int directions = 8);

struct SemigroupData {
    double value = 1.0;
    /// true: value is the raw sup constant S and the certificate uses M = 4 c0 S;
    /// false: value is the final M.
    bool raw = false;
};

struct GateRecord {
    double alpha = 0.0;
    double alpha_crit_star = 0.0;
    bool strict_required = false;
    bool passed = false;
};

struct BasinCertificate {
    double gamma_star = 0.0, q_star = 0.0, c_star = 0.0, r_star = 0.0;
    double M = 0.0, omega = 0.0, omega_bar = 0.0;
    double mu = 0.0;
    double gamma0 = 0.0;
    double c0 = 0.0;
    double L = 0.0;
    double epsilon0 = 0.0; // = L/M
    GateRecord gate;
};

/// Quantitative basin-of-attraction constants: gamma0 equals gamma_star at
/// the endpoints {0, gamma} and an interior admissible value otherwise, c0 = 1 + (B_{mu q*} + B_{mu(q*-1)}) sup_{r>0} r^{1+gamma0-alpha-mu q*}
/// e^{(omega-omega_bar) r} with B_theta = B(theta, 1-mu q*), then the largest
/// L in (0, r*) with c* M L^{q*-1} <= 1 and epsilon0 = L/M.
BasinCertificate basin_certificate(const RemainderData& remainder, const SemigroupData& semigroup,
                                   const ExponentProfile& profile, double omega, double omega_bar,
                                   double omega0);

enum class Verdict { Stable, Unstable, Inconclusive };

struct DeltaRecord {
    double delta = 0.0;
    bool escaped = false;
    bool degenerate = false; // delta at or above the escape radius
    double escape_time = 0.0;
    double growth_rate = 0.0;
};

struct StabilityVerdict {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<std::string> evidence;
    std::vector<DeltaRecord> records;
};

struct ProbeOptions {
    double t_max = 60.0;
    int steps_per_unit_time = 64;
    double escape_radius = 0.0; // <= 0: 10x the largest delta
};

/// Simulates v* + delta * direction for each delta until the E_alpha deviation
/// exceeds the escape radius, and fits the early-window growth rate.
StabilityVerdict instability_probe(const ProblemSpec& problem, const SystemField& v_star,
                                   const SystemField& direction, const std::vector<double>& deltas,
                                   const ProbeOptions& opts = {});

std::string to_string(Verdict v);

} // namespace parastab
