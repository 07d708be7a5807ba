// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here.

#include "parastab/cli.hpp"
#include "parastab/exponents.hpp"
#include "parastab/integrate.hpp"
#include "parastab/io.hpp"
#include "parastab/linops.hpp"
#include "parastab/problems.hpp"
#include "parastab/rng.hpp"
#include "parastab/spaces.hpp"
#include "parastab/stability.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

using namespace parastab;

namespace {

int g_failures = 0;

void run_criterion(int number, const std::string& label,
                   const std::function<bool(std::string&)>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %2d: %s (%.2f s)%s%s\n", ok ? "PASS" : "FAIL", number,
                label.c_str(), secs, detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++g_failures;
}

SystemField chemotaxis_perturbation(const ProblemSpec& p, double kappa, double scale,
                                    std::uint64_t seed) {
    Rng rng(seed);
    SystemField d = zero_system(p.domain, 2, p.truncation);
    for (int c = 0; c < 2; ++c)
        for (int k = 0; k < p.truncation; ++k)
            d.comp[c].coeff[k] = 0.5 * rng.normal() / (1.0 + p.domain.eigenvalue(k));
    if (kappa < 1.0) {
        d.comp[0].coeff[0] += 1.0 - kappa;
        d.comp[1].coeff[0] += 1.0;
    } else {
        d.comp[1].coeff[0] += 1.0;
    }
    return (scale / scale_norm(d, p.profile.alpha)) * d;
}

// Beta integral by midpoint quadrature after the substitution t = v^(1/x)
// removing the endpoint singularity; independent of the log-gamma path.
double beta_by_quadrature(double x, double y) {
    auto half_integral = [](double a, double b) {
        // int_0^(1/2) t^(a-1) (1-t)^(b-1) dt
        const int n = 400000;
        const double vmax = std::pow(0.5, a);
        const double h = vmax / n;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) {
            const double v = (i + 0.5) * h;
            const double t = std::pow(v, 1.0 / a);
            acc += std::pow(1.0 - t, b - 1.0);
        }
        return acc * h / a;
    };
    return half_integral(x, y) + half_integral(y, x);
}

double sup_by_grid(double a, double eta) {
    double best = 0.0;
    for (int i = 0; i <= 200000; ++i) {
        const double r = 1e-6 + i * (40.0 / eta) / 200000.0;
        best = std::max(best, std::pow(r, a) * std::exp(-eta * r));
    }
    return best;
}

} // namespace

int main() {
    std::printf("parastab acceptance suite\n");

    run_criterion(1, "exponent formulas", [](std::string& detail) {
        // exact closed-form evaluation: the decimal inputs carry one rounding
        // each, so "exactly 0.2" means within two ulps of the double literal
        const bool a = std::abs(alpha_crit(2.0, 0.1, 0.65) - 0.2) <= 5e-16;
        const auto gi = gradient_profile(1, 2.5, 4.0, 0.275);
        const bool b = std::abs(gi.s_c - 16.0 / 15.0) <= 1e-14;
        const bool c = std::abs(gi.s - 1.3) <= 1e-14;
        const bool d = std::abs(gi.mu - 7.0 / 60.0) <= 1e-14;
        const bool e = std::abs(gi.profile.xi - gi.profile.alpha - gi.mu) <= 1e-14;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "alpha_crit=%.17g s_c-16/15=%.1e xi-alpha-mu=%.1e",
                      alpha_crit(2.0, 0.1, 0.65), gi.s_c - 16.0 / 15.0,
                      gi.profile.xi - gi.profile.alpha - gi.mu);
        detail = buf;
        return a && b && c && d && e;
    });

    run_criterion(2, "chemotaxis stability threshold on the (chi,kappa) grid",
                  [](std::string& detail) {
        Domain1D neu{1.0, Boundary::Neumann};
        bool ok = true;
        for (double chi = 0.25; chi <= 2.0 + 1e-12; chi += 0.25)
            for (double kappa : {0.3, 0.5, 1.0, 2.0, 4.0}) {
                const auto rep = spectral_bound(
                    chemotaxis_linearization(chi, kappa, ChemotaxisEquilibrium::One, neu, 64));
                ok = ok && rep.spectral_bound < 0.0 && rep.tail_verified;
            }
        const auto spot =
            spectral_bound(chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, neu, 64));
        ok = ok && std::abs(spot.spectral_bound + 0.5) <= 1e-10;
        char buf[80];
        std::snprintf(buf, sizeof(buf), "spot(2,0.5)=%.12g", spot.spectral_bound);
        detail = buf;
        return ok;
    });

    run_criterion(3, "instability at (0,0): eigenvalue kappa and escape growth",
                  [](std::string& detail) {
        Domain1D neu{1.0, Boundary::Neumann};
        bool ok = true;
        std::string rates;
        for (double kappa : {0.3, 0.7, 1.5}) {
            const auto rep = spectral_bound(
                chemotaxis_linearization(2.0, kappa, ChemotaxisEquilibrium::Zero, neu, 64));
            ok = ok && std::abs(rep.spectral_bound - kappa) <= 1e-12;

            const auto p = make_chemotaxis(2.0, kappa, neu, 32);
            SystemField dir = zero_system(neu, 2, 32);
            dir.comp[0].coeff[0] = 1.0;
            dir.comp[1].coeff[0] = 1.0 / (1.0 + kappa);
            dir = (1.0 / scale_norm(dir, p.profile.alpha)) * dir;
            ProbeOptions opts;
            opts.t_max = 60.0;
            const auto verdict = instability_probe(p, p.equilibria[0], dir, {1e-2, 1e-3, 1e-4}, opts);
            ok = ok && verdict.verdict == Verdict::Unstable;
            for (const auto& rec : verdict.records) {
                ok = ok && rec.escaped && std::abs(rec.growth_rate - kappa) <= 0.05 * kappa;
                char rb[32];
                std::snprintf(rb, sizeof(rb), " %.3f", rec.growth_rate);
                rates += rb;
            }
        }
        detail = "rates:" + rates;
        return ok;
    });

    run_criterion(4, "nonlinear decay and certificate-backed estimate", [](std::string& detail) {
        const double chi = 2.0, kappa = 0.5;
        const auto prof = chemotaxis_profile(0.3, 4.0, 1);
        const auto p = make_chemotaxis(chi, kappa, Domain1D{1.0, Boundary::Neumann}, 64, prof);
        const SystemField base = p.equilibria[1];
        const SystemField u0 = base + chemotaxis_perturbation(p, kappa, 1e-3, 24601);

        SolveConfig cfg;
        cfg.mesh = {20.0, 1024, 2.0};
        cfg.weight_mu = prof.mu();
        const auto sol = solve_semilinear(p.linear_part, p.nonlinearity, u0, cfg);
        if (sol.status != SolveStatus::Completed) {
            detail = "solver status " + to_string(sol.status);
            return false;
        }
        const auto fit = fit_decay(sol.trajectory, base, 2.0 * prof.alpha, 6.0, 18.0);
        bool ok = std::abs(fit.omega_hat - 0.5) <= 0.05;

        const auto lin =
            chemotaxis_linearization(chi, kappa, ChemotaxisEquilibrium::One, p.domain, 64);
        const double omega0 = -spectral_bound(lin).spectral_bound;
        const double omega = 0.4, omega_bar = 0.45;
        const auto rem =
            estimate_remainder_constants(p, base, {1e-1, 1e-2, 1e-3, 1e-4}, prof.gamma, 2026);
        double s_const = 0.0;
        const double pairs[4][2] = {{prof.alpha, prof.alpha},
                                    {prof.alpha, prof.xi},
                                    {rem.gamma_star, prof.alpha},
                                    {rem.gamma_star, prof.xi}};
        for (const auto& pr : pairs)
            s_const = std::max(s_const, semigroup_norm_constants(lin, pr[0], pr[1], omega_bar));
        const auto cert =
            basin_certificate(rem, SemigroupData{s_const, true}, prof, omega, omega_bar, omega0);
        ok = ok && cert.epsilon0 > 0.0 && cert.gate.passed;

        const double margin = verify_exponential_estimate(sol.trajectory, base, prof.alpha,
                                                          prof.xi, cert.omega, cert.M);
        ok = ok && margin >= 0.0;
        char buf[160];
        std::snprintf(buf, sizeof(buf), "omega_hat=%.4f M=%.3g eps0=%.3g margin=%.3g",
                      fit.omega_hat, cert.M, cert.epsilon0, margin);
        detail = buf;
        return ok;
    });

    run_criterion(5, "solver-oracle equivalence", [](std::string& detail) {
        // Bernoulli scalar against the closed form
        Domain1D neu{1.0, Boundary::Neumann};
        BlockGenerator minus_one;
        minus_one.domain = neu;
        minus_one.block_size = 1;
        minus_one.tail_c0 = Eigen::MatrixXd::Constant(1, 1, -1.0);
        minus_one.tail_c1 = Eigen::MatrixXd::Constant(1, 1, -1.0);
        minus_one.blocks.push_back(Eigen::MatrixXd::Constant(1, 1, -1.0));
        SystemField b0 = zero_system(neu, 1, 1);
        b0.comp[0].coeff[0] = 0.1;
        auto square = [](const SystemField& u) {
            SystemField out = u;
            out.comp[0].coeff[0] = u.comp[0].coeff[0] * u.comp[0].coeff[0];
            return out;
        };
        SolveConfig bcfg;
        bcfg.mesh = {1.0, 2048, 2.0};
        const auto bern = solve_semilinear(minus_one, square, b0, bcfg);
        const double want = 0.1 / (0.1 + 0.9 * std::exp(1.0));
        const double bern_rel =
            std::abs(bern.trajectory.states.back().comp[0].coeff[0] - want) / want;
        bool ok = bern_rel <= 1e-8;

        // quasilinear gradient problem against the adaptive oracle
        const auto gi = gradient_profile(1, 2.5, 4.0, 0.275);
        const auto gp = make_gradient_quasilinear(4.0, Domain1D{1.0, Boundary::Dirichlet}, gi, 64);
        SystemField u0 = gp.equilibria[0];
        u0.comp[0].coeff[0] = 0.02;
        SolveConfig qcfg;
        qcfg.mesh = {0.5, 512, 2.0};
        qcfg.fixed_point_tol = 1e-12;
        qcfg.weight_mu = gi.mu;
        const auto quasi = solve_quasilinear(gp, u0, qcfg);
        auto rhs = [&gp](double, const Eigen::VectorXd& y) {
            return stack(problem_rhs(gp, unstack(y, gp.domain, 1)));
        };
        const auto oracle = oracle_integrate(rhs, u0, 0.5, 1e-12, {0.5});
        const double quasi_rel = (quasi.trajectory.states.back().comp[0].coeff -
                                  oracle.trajectory.states.back().comp[0].coeff)
                                     .norm() /
                                 oracle.trajectory.states.back().comp[0].coeff.norm();
        ok = ok && quasi.status == SolveStatus::Completed && quasi_rel <= 1e-6;
        char buf[120];
        std::snprintf(buf, sizeof(buf), "bernoulli_rel=%.2e quasilinear_rel=%.2e", bern_rel,
                      quasi_rel);
        detail = buf;
        return ok;
    });

    run_criterion(6, "time-weighted vanishing of rough-data heat flow", [](std::string& detail) {
        // data on the E_alpha = H^0.6 scale with a marginally rough tail;
        // weighted H^{2 xi} = H^1.3 norm with mu = xi - alpha = 0.35
        Domain1D dir{1.0, Boundary::Dirichlet};
        const int K = 4096;
        const double alpha = 0.3, xi = 0.65, mu = xi - alpha;
        std::vector<double> w(15, 0.0);
        for (int j = 4; j <= 14; ++j) {
            const double t = std::pow(2.0, -j);
            double acc = 0.0;
            for (int k = 0; k < K; ++k) {
                const double lam = dir.eigenvalue(k);
                const double ck = std::pow(1.0 + lam, -alpha) * std::pow(k + 2.0, -0.9);
                const double decayed = ck * std::exp(-lam * t);
                acc += std::pow(1.0 + lam, 2.0 * xi) * decayed * decayed;
            }
            w[j] = std::pow(t, mu) * std::sqrt(acc);
        }
        bool ok = true;
        for (int j = 8; j < 14; ++j)
            ok = ok && w[j] > w[j + 1];
        char buf[200];
        std::snprintf(buf, sizeof(buf), "w8=%.4f w10=%.4f w12=%.4f w14=%.4f", w[8], w[10], w[12],
                      w[14]);
        detail = buf;
        return ok;
    });

    run_criterion(7, "certificate constants against direct quadrature", [](std::string& detail) {
        // c0 for (mu, q*) = (0.25, 2), gamma0 = alpha, omega_bar - omega = 1
        ExponentProfile pr;
        pr.gamma = 0.4;
        pr.alpha = 0.4;
        pr.xi = 0.65;
        pr.q = 2.0;
        pr.mode = ProfileMode::Semilinear;
        RemainderData rem;
        rem.gamma_star = 0.4;
        rem.q_star = 2.0;
        rem.c_star = 2.0;
        rem.r_star = 1.0;
        const auto cert = basin_certificate(rem, SemigroupData{4.0, false}, pr, 1.0, 2.0, 3.0);

        const double muq = 0.5;
        const double indep =
            1.0 + (beta_by_quadrature(muq, 1.0 - muq) + beta_by_quadrature(0.25, 1.0 - muq)) *
                      sup_by_grid(1.0 + 0.4 - 0.4 - muq, 1.0);
        bool ok = std::abs(cert.c0 - indep) <= 1e-3;
        ok = ok && std::abs(cert.c0 - 4.5966) <= 1e-3;
        ok = ok && cert.L == 0.125 && cert.epsilon0 == 0.03125;
        char buf[140];
        std::snprintf(buf, sizeof(buf), "c0=%.6f independent=%.6f L=%.17g eps0=%.17g", cert.c0,
                      indep, cert.L, cert.epsilon0);
        detail = buf;
        return ok;
    });

    run_criterion(8, "singular integral inequality on 1000 random draws", [](std::string& detail) {
        Rng rng(808);
        double worst = 1e300;
        for (int i = 0; i < 1000; ++i) {
            const double b = rng.uniform(-0.8, 0.9);
            const double c = rng.uniform(-0.8, 0.9);
            const double a = rng.uniform(0.0, 0.95 * (1.0 - b));
            const double eta = std::pow(10.0, rng.uniform(-1.3, 1.3));
            const double t = std::pow(10.0, rng.uniform(-3.0, 3.0));
            worst = std::min(worst, singular_bound_check(a, b, c, eta, {t}));
            if (worst < 0.0)
                break;
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "worst margin=%.3e", worst);
        detail = buf;
        return worst >= 0.0;
    });

    run_criterion(9, "scaling criticality on 100 random (n,p,kappa)", [](std::string& detail) {
        Rng rng(909);
        double worst = 0.0;
        for (int tested = 0; tested < 100; ++tested) {
            const int n = 1 + static_cast<int>(rng.uniform() * 3.0);
            const double kappa = rng.uniform(2.1, 9.0);
            const double p = rng.uniform(0.5, 8.0);
            const double sc = n / p + (kappa - 2.0) / (kappa - 1.0);
            worst = std::max(worst, std::abs(scaling_defect(sc, n, p, kappa)));
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "worst |defect|=%.2e", worst);
        detail = buf;
        return worst <= 1e-14;
    });

    run_criterion(10, "structural property suites", [](std::string& detail) {
        bool ok = true;
        // semigroup composition to 1e-12
        Domain1D neu{1.0, Boundary::Neumann};
        const auto gen = chemotaxis_linearization(1.5, 0.8, ChemotaxisEquilibrium::One, neu, 24);
        Rng rng(1010);
        for (int trial = 0; trial < 50; ++trial) {
            SystemField u = zero_system(neu, 2, 24);
            for (int c = 0; c < 2; ++c)
                for (int k = 0; k < 24; ++k)
                    u.comp[c].coeff[k] = rng.normal() / (1.0 + neu.eigenvalue(k));
            const double s = rng.uniform(0.0, 1.0), t = rng.uniform(0.0, 1.0);
            const auto once = apply_semigroup(gen, s + t, u);
            const auto twice = apply_semigroup(gen, s, apply_semigroup(gen, t, u));
            double diff = 0.0;
            for (int c = 0; c < 2; ++c)
                diff = std::max(diff,
                                (once.comp[c].coeff - twice.comp[c].coeff).cwiseAbs().maxCoeff());
            ok = ok && diff <= 1e-12;
        }

        // Sobolev log-convexity on 1000 random fields to 1e-10
        Domain1D dirD{1.0, Boundary::Dirichlet};
        for (int trial = 0; trial < 1000; ++trial) {
            SpectralField f = zero_field(dirD, 24);
            for (int k = 0; k < 24; ++k)
                f.coeff[k] = rng.normal() / (1.0 + k * k);
            const double s0 = rng.uniform(-1.0, 1.5);
            const double s1 = s0 + rng.uniform(1e-3, 2.0);
            const double th = rng.uniform(0.0, 1.0);
            const double mid = sobolev_norm(f, (1.0 - th) * s0 + th * s1);
            const double bound =
                std::pow(sobolev_norm(f, s0), 1.0 - th) * std::pow(sobolev_norm(f, s1), th);
            ok = ok && mid <= bound * (1.0 + 1e-10);
        }

        // energy identity on every computed eigenpair up to mode 32
        const auto lin = chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, neu, 33);
        for (int k = 0; k <= 32; ++k) {
            Eigen::EigenSolver<Eigen::Matrix2d> es(Eigen::Matrix2d(lin.blocks[k]));
            for (int i = 0; i < 2; ++i)
                ok = ok && energy_identity_residual(2.0, 0.5, neu.eigenvalue(k),
                                                    es.eigenvalues()(i),
                                                    es.eigenvectors().col(i)) <= 1e-10;
        }

        // deterministic CSV replay through the CLI driver
        const auto tmp = std::filesystem::temp_directory_path();
        const std::string o1 = (tmp / "parastab_acc1.csv").string();
        const std::string o2 = (tmp / "parastab_acc2.csv").string();
        for (const std::string& o : {o1, o2}) {
            const char* argv[] = {"parastab", "simulate", "--problem", "chemotaxis",
                                  "--K",      "16",       "--T",       "2",
                                  "--N",      "64",       "--seed",    "31415",
                                  "--quiet",  "--out",    o.c_str()};
            ok = ok && run_cli(static_cast<int>(std::size(argv)), argv) == 0;
        }
        ok = ok && read_file(o1) == read_file(o2);
        std::remove(o1.c_str());
        std::remove(o2.c_str());
        detail = "semigroup, log-convexity, energy identity, csv replay";
        return ok;
    });

    std::printf("%s (%d failure%s)\n", g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
