#include "parastab/stability.hpp"

#include "parastab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace parastab {

namespace {

struct LineFit {
    double slope = 0.0, intercept = 0.0, rms = 0.0;
    int n = 0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    LineFit f;
    f.n = static_cast<int>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < f.n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double det = f.n * sxx - sx * sx;
    f.slope = (f.n * sxy - sx * sy) / det;
    f.intercept = (sy * sxx - sx * sxy) / det;
    double acc = 0.0;
    for (int i = 0; i < f.n; ++i) {
        const double r = y[i] - (f.slope * x[i] + f.intercept);
        acc += r * r;
    }
    f.rms = std::sqrt(acc / f.n);
    return f;
}

} // namespace

DecayFit fit_decay(const WeightedTrajectory& traj, const SystemField& v_star, double s,
                   double t_min, double t_max) {
    traj.check_consistent();
    if (!(t_min < t_max))
        throw InputError("fit_decay: empty window");
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t < t_min || t > t_max)
            continue;
        const double nrm = sobolev_norm(traj.states[i] - v_star, s);
        if (!(nrm > 0.0))
            throw InputError("fit_decay: vanishing deviation inside the window");
        xs.push_back(t);
        ys.push_back(std::log(nrm));
    }
    if (xs.size() < 3)
        throw InputError("fit_decay: fewer than 3 samples in window");
    const LineFit lf = least_squares(xs, ys);
    DecayFit fit;
    fit.omega_hat = -lf.slope;
    const double dev0 = sobolev_norm(traj.states.front() - v_star, s);
    fit.M_hat = dev0 > 0.0 ? std::exp(lf.intercept) / dev0 : std::exp(lf.intercept);
    fit.t_min = t_min;
    fit.t_max = t_max;
    fit.residual = lf.rms;
    fit.samples = lf.n;
    return fit;
}

double verify_exponential_estimate(const WeightedTrajectory& traj, const SystemField& v_star,
                                   double alpha, double xi, double omega, double M) {
    traj.check_consistent();
    const double dev0 = scale_norm(traj.states.front() - v_star, alpha);
    if (!(dev0 > 0.0))
        throw InputError("verify_exponential_estimate: zero initial deviation");
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t <= 0.0)
            continue;
        const SystemField dev = traj.states[i] - v_star;
        double lhs = scale_norm(dev, alpha);
        if (xi > alpha)
            lhs += std::pow(t, xi - alpha) * scale_norm(dev, xi);
        margin = std::min(margin, M * std::exp(-omega * t) * dev0 - lhs);
    }
    return margin;
}

VanishingReport weighted_vanishing(const WeightedTrajectory& traj, double mu, double s) {
    traj.check_consistent();
    VanishingReport rep;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t <= 0.0)
            continue;
        rep.sequence.emplace_back(t, std::pow(t, mu) * sobolev_norm(traj.states[i], s));
    }
    // deepest levels = smallest times; decreasing toward 0 as t -> 0 means the
    // weighted values increase with t across the first entries
    const std::size_t n = rep.sequence.size();
    const std::size_t levels = std::min<std::size_t>(4, n > 0 ? n - 1 : 0);
    if (levels < 1)
        return rep;
    rep.vanishing = true;
    for (std::size_t i = 0; i < levels; ++i)
        if (!(rep.sequence[i].second < rep.sequence[i + 1].second))
            rep.vanishing = false;
    return rep;
}

double smoothing_probe(const WeightedTrajectory& a, const WeightedTrajectory& b, double zeta,
                       double weight, double alpha) {
    a.check_consistent();
    b.check_consistent();
    if (a.times.size() != b.times.size())
        throw InputError("smoothing_probe: trajectories must share a mesh");
    const double dev0 = scale_norm(a.states.front() - b.states.front(), alpha);
    if (!(dev0 > 0.0))
        throw InputError("smoothing_probe: zero initial deviation");
    double sup = 0.0;
    for (std::size_t i = 0; i < a.times.size(); ++i) {
        const double t = a.times[i];
        if (t <= 0.0)
            continue;
        sup = std::max(sup, std::pow(t, weight) * scale_norm(a.states[i] - b.states[i], zeta));
    }
    return sup / dev0;
}

RemainderData estimate_remainder_constants(const ProblemSpec& problem, const SystemField& v_star,
                                           const std::vector<double>& radii, double gamma_star,
                                           std::uint64_t seed, int directions) {
    if (radii.size() < 2)
        throw InputError("estimate_remainder_constants: need at least two radii for the fit");
    Rng rng(seed);
    const int K = v_star.truncation();
    const int m = v_star.size();
    const double fstar_norm = scale_norm(problem.nonlinearity(v_star), gamma_star);

    // fixed set of unit directions reused at every radius, so that the
    // per-direction constants cancel in the slope fit
    std::vector<SystemField> dirs;
    for (int d = 0; d < directions; ++d) {
        SystemField dir = zero_system(problem.domain, m, K);
        for (int c = 0; c < m; ++c)
            for (int k = 0; k < K; ++k)
                dir.comp[c].coeff[k] = rng.normal() / (1.0 + problem.domain.eigenvalue(k));
        dirs.push_back((1.0 / scale_norm(dir, problem.profile.xi)) * dir);
    }

    std::vector<double> logs_r, logs_f;
    std::vector<std::pair<double, double>> samples; // (r, ||fhat||)
    for (double r : radii) {
        for (int d = 0; d < directions; ++d) {
            const SystemField w = r * dirs[d];
            if (problem.admissible_margin(v_star + w) <= 0.0)
                continue;
            SystemField dfw = problem.df
                                  ? problem.df(v_star, w)
                                  : [&] {
                                        const double h = 1e-6;
                                        const SystemField up = problem.nonlinearity(v_star + h * w);
                                        const SystemField dn =
                                            problem.nonlinearity(v_star + (-h) * w);
                                        return (1.0 / (2.0 * h)) * (up - dn);
                                    }();
            const SystemField fhat =
                problem.nonlinearity(v_star + w) - problem.nonlinearity(v_star) - dfw;
            const double fn = scale_norm(fhat, gamma_star);
            samples.emplace_back(r, fn);
            if (fn > 0.0) {
                logs_r.push_back(std::log(r));
                logs_f.push_back(std::log(fn));
            }
        }
    }
    RemainderData out;
    out.gamma_star = gamma_star;
    out.r_star = *std::max_element(radii.begin(), radii.end());

    double fmax = 0.0;
    for (const auto& [r, fn] : samples)
        fmax = std::max(fmax, fn);
    if (fmax <= 1e-14 * (1.0 + fstar_norm)) {
        out.linear = true;
        out.c_star = 0.0;
        out.q_star = 0.0;
        return out;
    }
    const LineFit lf = least_squares(logs_r, logs_f);
    out.q_star = lf.slope;
    double cs = 0.0;
    for (const auto& [r, fn] : samples)
        cs = std::max(cs, fn / std::pow(r, out.q_star));
    out.c_star = 1.1 * cs;
    return out;
}

BasinCertificate basin_certificate(const RemainderData& remainder, const SemigroupData& semigroup,
                                   const ExponentProfile& profile, double omega, double omega_bar,
                                   double omega0) {
    if (remainder.linear || !(remainder.q_star > 1.0))
        throw InputError("basin_certificate: remainder exponent q_* > 1 required");
    const double q_star = remainder.q_star;
    const double gamma_star = remainder.gamma_star;
    const double alpha = profile.alpha;
    const double xi = profile.xi;
    const double gamma = profile.gamma;
    const double mu = profile.mu();

    BasinCertificate cert;
    cert.gamma_star = gamma_star;
    cert.q_star = q_star;
    cert.c_star = remainder.c_star;
    cert.r_star = remainder.r_star;
    cert.omega = omega;
    cert.omega_bar = omega_bar;
    cert.mu = mu;

    cert.gate.alpha = alpha;
    cert.gate.alpha_crit_star = alpha_crit_star(q_star, gamma_star, xi);
    cert.gate.strict_required =
        (gamma_star > 0.0 && gamma_star < gamma) || std::abs(alpha - gamma) <= 1e-14;
    cert.gate.passed = cert.gate.strict_required ? alpha > cert.gate.alpha_crit_star
                                                 : alpha >= cert.gate.alpha_crit_star - 1e-14;
    if (!cert.gate.passed)
        throw InputError("basin_certificate: gate alpha >= alpha_crit_star fails (alpha=" +
                         std::to_string(alpha) + ", alpha_crit_star=" +
                         std::to_string(cert.gate.alpha_crit_star) + ")");
    if (!(mu * q_star < 1.0))
        throw InputError("basin_certificate: mu q_* < 1 required");
    if (!(0.0 < omega && omega < omega_bar && omega_bar < omega0))
        throw InputError("basin_certificate: require 0 < omega < omega_bar < omega0");

    // gamma0: gamma_star at the endpoints {0, gamma}, otherwise the midpoint
    // of the admissible interval
    if (gamma_star <= 1e-14 || std::abs(gamma_star - gamma) <= 1e-14) {
        cert.gamma0 = gamma_star;
    } else {
        const double lo = std::max(0.0, alpha + mu * q_star - 1.0);
        if (!(lo < gamma_star))
            throw InputError("basin_certificate: no admissible gamma0 below gamma_star");
        cert.gamma0 = 0.5 * (lo + gamma_star);
    }
    const double a_exp = 1.0 + cert.gamma0 - alpha - mu * q_star;
    if (a_exp < 0.0)
        throw InputError("basin_certificate: mu q_* <= 1 + gamma0 - alpha violated");

    const double beta_sum = special_beta(mu * q_star, 1.0 - mu * q_star) +
                            special_beta(mu * (q_star - 1.0), 1.0 - mu * q_star);
    cert.c0 = 1.0 + beta_sum * sup_power_exp(a_exp, omega_bar - omega);

    cert.M = semigroup.raw ? 4.0 * cert.c0 * semigroup.value : semigroup.value;
    if (!(cert.M >= 1.0))
        cert.M = 1.0;

    const double L_balance = std::pow(1.0 / (cert.c_star * cert.M), 1.0 / (q_star - 1.0));
    cert.L = std::min(L_balance, cert.r_star * (1.0 - 1e-12));
    cert.epsilon0 = cert.L / cert.M;
    return cert;
}

std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::Stable:
        return "stable";
    case Verdict::Unstable:
        return "unstable";
    default:
        return "inconclusive";
    }
}

StabilityVerdict instability_probe(const ProblemSpec& problem, const SystemField& v_star,
                                   const SystemField& direction, const std::vector<double>& deltas,
                                   const ProbeOptions& opts) {
    if (deltas.empty())
        throw InputError("instability_probe: no perturbation sizes");
    const double alpha = problem.profile.alpha;
    const double dmax = *std::max_element(deltas.begin(), deltas.end());
    const double escape = opts.escape_radius > 0.0 ? opts.escape_radius : 10.0 * dmax;

    StabilityVerdict out;
    bool all_escaped = true;
    for (double delta : deltas) {
        DeltaRecord rec;
        rec.delta = delta;
        if (delta >= escape) {
            rec.escaped = true;
            rec.degenerate = true;
            rec.escape_time = 0.0;
            out.records.push_back(rec);
            out.evidence.push_back("delta=" + std::to_string(delta) +
                                   " at or above escape radius (degenerate)");
            continue;
        }
        // integrate in autonomous restart segments; this keeps the quasilinear
        // freeze iteration on a horizon where it contracts
        const double t_segment = problem.quasilinear ? 2.0 : opts.t_max;
        SystemField state = v_star + delta * direction;
        double t_base = 0.0;
        std::vector<double> ts, ys; // early-window samples for the growth fit
        const double fit_cap = std::min(20.0 * delta, 0.3 * escape);
        bool done = false;
        while (!done && t_base < opts.t_max) {
            SolveConfig cfg;
            cfg.mesh.T = std::min(t_segment, opts.t_max - t_base);
            cfg.mesh.N = std::max(64, static_cast<int>(cfg.mesh.T * opts.steps_per_unit_time));
            cfg.mesh.r = 1.0;
            cfg.weight_mu = problem.profile.mu();
            TrajectorySolution sol =
                problem.quasilinear
                    ? solve_quasilinear(problem, state, cfg)
                    : solve_semilinear(problem.linear_part, problem.nonlinearity, state, cfg,
                                       problem.admissible_margin);
            for (std::size_t i = 0; i < sol.trajectory.times.size(); ++i) {
                const double dev = scale_norm(sol.trajectory.states[i] - v_star, alpha);
                const double t = t_base + sol.trajectory.times[i];
                if (dev > 0.0 && dev <= fit_cap && t > 0.0) {
                    ts.push_back(t);
                    ys.push_back(std::log(dev));
                }
                if (dev > escape) {
                    rec.escaped = true;
                    rec.escape_time = t;
                    done = true;
                    break;
                }
            }
            if (sol.status == SolveStatus::BlowupFNorm) { // blow-up counts as escape
                rec.escaped = true;
                if (rec.escape_time == 0.0)
                    rec.escape_time = t_base + sol.t_plus_estimate.value_or(cfg.mesh.T);
                done = true;
            } else if (sol.status != SolveStatus::Completed) {
                done = true; // solver gave up; treated as no further evidence
            }
            state = sol.trajectory.states.back();
            t_base += cfg.mesh.T;
        }
        if (ts.size() >= 3) {
            rec.growth_rate = least_squares(ts, ys).slope;
        }
        all_escaped = all_escaped && rec.escaped;
        out.records.push_back(rec);
        out.evidence.push_back("delta=" + std::to_string(delta) +
                               (rec.escaped ? " escaped at t=" + std::to_string(rec.escape_time)
                                            : " no escape") +
                               " growth_rate=" + std::to_string(rec.growth_rate));
    }
    out.verdict = all_escaped ? Verdict::Unstable : Verdict::Inconclusive;
    return out;
}

} // namespace parastab
