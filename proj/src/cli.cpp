#include "parastab/cli.hpp"

#include "parastab/exponents.hpp"
#include "parastab/integrate.hpp"
#include "parastab/io.hpp"
#include "parastab/linops.hpp"
#include "parastab/problems.hpp"
#include "parastab/rng.hpp"
#include "parastab/spaces.hpp"
#include "parastab/stability.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

namespace parastab {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    return buf;
}

bool g_quiet = false;

void print_kv(const std::vector<std::pair<std::string, std::string>>& items) {
    if (!g_quiet)
        std::fputs(kv_serialize(items).c_str(), stdout);
}

int thread_budget(std::size_t cells) {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0)
        n = 1;
    if (const char* env = std::getenv("PARASTAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1)
            n = static_cast<unsigned>(v);
    }
    return static_cast<int>(std::min<std::size_t>(n, cells ? cells : 1));
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty())
            out.push_back(std::stod(item));
    return out;
}

struct SimOptions {
    std::string problem = "chemotaxis";
    double chi = 2.0, kappa = 0.5;
    double epsilon = 0.3, p = 4.0;
    int n = 1;
    double tau = 0.275;
    double gp = 2.5; // gradient p
    double m_coeff = 1.0;
    std::string equilibrium = "one";
    std::string boundary = "auto"; // per-problem default; explicit values are validated
    int K = 64;
    double length = 1.0;
    double T = 20.0;
    int N = 1024;
    double grading = 0.0; // 0: default from the profile
    double perturb = 1e-3;
    double amplitude = 0.02;
    bool unstable = false; // quadratic problem: +kappa u instead of -m u
    std::uint64_t seed = 20260810;
};

void add_sim_options(CLI::App* cmd, SimOptions& o) {
    cmd->add_option("--problem", o.problem)->check(CLI::IsMember({"chemotaxis", "gradient", "quadratic"}));
    cmd->add_option("--chi", o.chi);
    cmd->add_option("--kappa", o.kappa);
    cmd->add_option("--epsilon", o.epsilon);
    cmd->add_option("--p", o.p);
    cmd->add_option("--n", o.n);
    cmd->add_option("--tau", o.tau);
    cmd->add_option("--gradient-p", o.gp);
    cmd->add_option("--m", o.m_coeff);
    cmd->add_option("--equilibrium", o.equilibrium)->check(CLI::IsMember({"zero", "one"}));
    cmd->add_option("--boundary", o.boundary)
        ->check(CLI::IsMember({"auto", "neumann", "dirichlet"}));
    cmd->add_option("--K", o.K)->check(CLI::PositiveNumber);
    cmd->add_option("--length", o.length)->check(CLI::PositiveNumber);
    cmd->add_option("--T", o.T)->check(CLI::PositiveNumber);
    cmd->add_option("--N", o.N)->check(CLI::PositiveNumber);
    cmd->add_option("--r", o.grading);
    cmd->add_option("--perturb", o.perturb);
    cmd->add_option("--amplitude", o.amplitude);
    cmd->add_flag("--unstable", o.unstable);
    cmd->add_option("--seed", o.seed);
}

struct BuiltProblem {
    ProblemSpec spec;
    SystemField base;     // equilibrium the run is anchored at
    SystemField initial;  // perturbed initial state
};

/// Perturbation with a guaranteed component on the slow mode-0 eigendirection
/// plus a seeded rough tail, normalized in the E_alpha norm.
SystemField chemotaxis_perturbation(const ProblemSpec& p, double kappa, double scale,
                                    std::uint64_t seed) {
    Rng rng(seed);
    SystemField d = zero_system(p.domain, 2, p.truncation);
    for (int c = 0; c < 2; ++c)
        for (int k = 0; k < p.truncation; ++k)
            d.comp[c].coeff[k] = 0.5 * rng.normal() / (1.0 + p.domain.eigenvalue(k));
    // slow eigendirection of the mode-0 block [[-kappa,0],[1,-1]] at (1,1):
    // (1-kappa, 1) for kappa < 1, else (0, 1)
    if (kappa < 1.0) {
        d.comp[0].coeff[0] += 1.0 - kappa;
        d.comp[1].coeff[0] += 1.0;
    } else {
        d.comp[1].coeff[0] += 1.0;
    }
    const double nrm = scale_norm(d, p.profile.alpha);
    return (scale / nrm) * d;
}

Boundary resolve_boundary(const SimOptions& o, Boundary preset) {
    if (o.boundary == "auto")
        return preset;
    return o.boundary == "dirichlet" ? Boundary::Dirichlet : Boundary::Neumann;
}

BuiltProblem build_problem(const SimOptions& o) {
    BuiltProblem b;
    if (o.problem == "chemotaxis") {
        Domain1D dom{o.length, resolve_boundary(o, Boundary::Neumann)};
        b.spec = make_chemotaxis(o.chi, o.kappa, dom, o.K, chemotaxis_profile(o.epsilon, o.p, o.n));
        b.base = (o.equilibrium == "one") ? b.spec.equilibria[1] : b.spec.equilibria[0];
        b.initial = b.base + chemotaxis_perturbation(b.spec, o.kappa, o.perturb, o.seed);
    } else if (o.problem == "gradient") {
        Domain1D dom{o.length, resolve_boundary(o, Boundary::Dirichlet)};
        const GradientIndices gi = gradient_profile(o.n, o.gp, o.kappa, o.tau);
        b.spec = make_gradient_quasilinear(o.kappa, dom, gi, o.K);
        b.base = b.spec.equilibria[0];
        b.initial = b.base;
        b.initial.comp[0].coeff[0] = o.amplitude;
    } else {
        QuadraticOptions qo;
        qo.domain = Domain1D{o.length, resolve_boundary(o, Boundary::Neumann)};
        qo.truncation = o.K;
        qo.linear_coeff = o.unstable ? o.kappa : -o.m_coeff;
        ExponentProfile prof;
        prof.gamma = 0.1;
        prof.beta = 0.2;
        prof.alpha = 0.35;
        prof.xi = 0.6;
        prof.q = 2.0;
        prof.mode = ProfileMode::Semilinear;
        b.spec = make_quadratic(qo, [](double x, double y) { return x * y; }, prof);
        b.base = b.spec.equilibria[0];
        Rng rng(o.seed);
        b.initial = b.base;
        for (int k = 0; k < o.K; ++k)
            b.initial.comp[0].coeff[k] += o.perturb * rng.normal() / (1.0 + qo.domain.eigenvalue(k));
    }
    return b;
}

SolveConfig make_config(const SimOptions& o, const ProblemSpec& spec) {
    SolveConfig cfg;
    cfg.mesh.T = o.T;
    cfg.mesh.N = o.N;
    cfg.mesh.r = o.grading > 0.0 ? o.grading
                                 : default_grading(spec.profile.mu(), spec.profile.q);
    cfg.weight_mu = spec.profile.mu();
    return cfg;
}

TrajectorySolution run_solver(const BuiltProblem& b, const SolveConfig& cfg) {
    if (b.spec.quasilinear)
        return solve_quasilinear(b.spec, b.initial, cfg);
    return solve_semilinear(b.spec.linear_part, b.spec.nonlinearity, b.initial, cfg,
                            b.spec.admissible_margin);
}

void dump_dry_run(const CLI::App* cmd) {
    std::vector<std::pair<std::string, std::string>> items;
    items.emplace_back("subcommand", cmd->get_name());
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_name().rfind("--", 0) != 0)
            continue;
        const std::string name = opt->get_name().substr(2);
        if (name == "dry-run" || name == "config" || name == "help" || name == "quiet")
            continue;
        std::string val;
        if (!opt->results().empty()) {
            for (const auto& r : opt->results())
                val += (val.empty() ? "" : ",") + r;
        } else {
            val = opt->get_default_str();
        }
        items.emplace_back(name, val.empty() ? "<unset>" : val);
    }
    print_kv(items);
}

int do_critical(double q, double gamma, double xi) {
    const double ac = alpha_crit(q, gamma, xi);
    std::printf("alpha_crit=%s\n", std::isinf(ac) ? "-inf" : num(ac).c_str());
    return 0;
}

int do_dispersion(double chi, double kappa, int modes, const std::string& eq, double length,
                  const std::string& out) {
    Domain1D dom{length, Boundary::Neumann};
    const auto gen = chemotaxis_linearization(
        chi, kappa, eq == "one" ? ChemotaxisEquilibrium::One : ChemotaxisEquilibrium::Zero, dom,
        modes);
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < modes; ++k) {
        const auto eigs = block_eigenvalues(gen.blocks[k]);
        rows.push_back({static_cast<double>(k), dom.eigenvalue(k), eigs[0].real(), eigs[0].imag(),
                        eigs[1].real(), eigs[1].imag()});
    }
    const std::string csv =
        csv_table({"mode", "lambda", "re_eig1", "im_eig1", "re_eig2", "im_eig2"}, rows);
    if (out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_file(out, csv);
    return 0;
}

int do_spectrum(const SimOptions& o) {
    BlockGenerator gen;
    if (o.problem == "chemotaxis") {
        Domain1D dom{o.length, Boundary::Neumann};
        gen = chemotaxis_linearization(o.chi, o.kappa,
                                       o.equilibrium == "one" ? ChemotaxisEquilibrium::One
                                                              : ChemotaxisEquilibrium::Zero,
                                       dom, o.K);
    } else {
        const BuiltProblem b = build_problem(o);
        gen = b.spec.linear_part;
    }
    const LinearizationReport rep = spectral_bound(gen);
    print_kv({{"spectral_bound", num(rep.spectral_bound)},
              {"leading_mode", std::to_string(rep.leading_mode)},
              {"tail_verified", rep.tail_verified ? "1" : "0"}});
    return 0;
}

int do_simulate(const SimOptions& o, const std::string& out, const std::string& svg,
                const std::string& sidecar, bool expect_stable) {
    const BuiltProblem b = build_problem(o);
    const SolveConfig cfg = make_config(o, b.spec);
    const TrajectorySolution sol = run_solver(b, cfg);
    const double alpha = b.spec.profile.alpha, xi = b.spec.profile.xi;
    if (!out.empty())
        write_file(out, trajectory_csv(sol, alpha, xi));
    if (!sidecar.empty())
        write_sidecar(sidecar, sol.trajectory);
    if (!svg.empty()) {
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < sol.trajectory.times.size(); ++i)
            pts.emplace_back(sol.trajectory.times[i],
                             scale_norm(sol.trajectory.states[i] - b.base, alpha));
        write_file(svg, svg_line_chart({{"deviation in E_alpha", pts}},
                                       b.spec.name + " deviation", true));
    }
    print_kv({{"status", to_string(sol.status)},
              {"t_plus", sol.t_plus_estimate ? num(*sol.t_plus_estimate) : ">=T"},
              {"samples", std::to_string(sol.trajectory.times.size())}});
    if (expect_stable && sol.status != SolveStatus::Completed)
        return 1;
    return 0;
}

int do_fit(const SimOptions& o, double win_lo, double win_hi, double norm_index) {
    const BuiltProblem b = build_problem(o);
    const SolveConfig cfg = make_config(o, b.spec);
    const TrajectorySolution sol = run_solver(b, cfg);
    const double s = norm_index != 0.0 ? norm_index : 2.0 * b.spec.profile.alpha;
    if (win_hi <= 0.0) {
        win_lo = 0.3 * o.T;
        win_hi = 0.9 * o.T;
    }
    const DecayFit fit = fit_decay(sol.trajectory, b.base, s, win_lo, win_hi);
    print_kv({{"omega_hat", num(fit.omega_hat)},
              {"M_hat", num(fit.M_hat)},
              {"residual", num(fit.residual)},
              {"samples", std::to_string(fit.samples)},
              {"window_lo", num(fit.t_min)},
              {"window_hi", num(fit.t_max)}});
    return 0;
}

BasinCertificate chemotaxis_certificate(const SimOptions& o, double omega, double omega_bar,
                                        std::vector<std::pair<std::string, std::string>>* info) {
    const BuiltProblem b = build_problem(o);
    const auto lin = chemotaxis_linearization(o.chi, o.kappa, ChemotaxisEquilibrium::One,
                                              b.spec.domain, o.K);
    const LinearizationReport rep = spectral_bound(lin);
    const double omega0 = -rep.spectral_bound;
    if (!(omega0 > 0.0))
        throw NumericError("basin: spectral bound is not negative, no certificate");
    if (omega_bar <= 0.0)
        omega_bar = 0.5 * (omega + omega0);

    const ExponentProfile& prof = b.spec.profile;
    RemainderData rem = estimate_remainder_constants(
        b.spec, b.spec.equilibria[1], {1e-1, 1e-2, 1e-3, 1e-4}, prof.gamma, o.seed);

    double S = 0.0;
    const double pairs[4][2] = {{prof.alpha, prof.alpha},
                                {prof.alpha, prof.xi},
                                {rem.gamma_star, prof.alpha},
                                {rem.gamma_star, prof.xi}};
    for (const auto& pr : pairs)
        S = std::max(S, semigroup_norm_constants(lin, pr[0], pr[1], omega_bar));
    if (info) {
        info->emplace_back("omega0", num(omega0));
        info->emplace_back("semigroup_sup", num(S));
        info->emplace_back("q_star_hat", num(rem.q_star));
    }
    return basin_certificate(rem, SemigroupData{S, true}, prof, omega, omega_bar, omega0);
}

std::vector<std::pair<std::string, std::string>> certificate_kv(const BasinCertificate& c) {
    return {{"gamma_star", num(c.gamma_star)},
            {"q_star", num(c.q_star)},
            {"c_star", num(c.c_star)},
            {"r_star", num(c.r_star)},
            {"M", num(c.M)},
            {"omega", num(c.omega)},
            {"omega_bar", num(c.omega_bar)},
            {"mu", num(c.mu)},
            {"gamma0", num(c.gamma0)},
            {"c0", num(c.c0)},
            {"L", num(c.L)},
            {"epsilon0", num(c.epsilon0)},
            {"gate_alpha", num(c.gate.alpha)},
            {"gate_alpha_crit_star", num(c.gate.alpha_crit_star)},
            {"gate_strict", c.gate.strict_required ? "1" : "0"},
            {"gate_passed", c.gate.passed ? "1" : "0"}};
}

int do_basin(const SimOptions& o, double omega, double omega_bar, const std::string& out) {
    if (o.problem == "chemotaxis") {
        std::vector<std::pair<std::string, std::string>> info;
        const BasinCertificate cert = chemotaxis_certificate(o, omega, omega_bar, &info);
        auto kv = certificate_kv(cert);
        kv.insert(kv.end(), info.begin(), info.end());
        kv.emplace_back("empirical", "0");
        if (!out.empty())
            write_file(out, kv_serialize(kv));
        print_kv(kv);
        return 0;
    }
    // quasilinear problems have no constant-based certificate route here;
    // report fit-based empirical constants instead
    const BuiltProblem b = build_problem(o);
    const SolveConfig cfg = make_config(o, b.spec);
    const TrajectorySolution sol = run_solver(b, cfg);
    const DecayFit fit =
        fit_decay(sol.trajectory, b.base, 2.0 * b.spec.profile.alpha, 0.3 * o.T, 0.9 * o.T);
    std::vector<std::pair<std::string, std::string>> kv{{"empirical", "1"},
                                                        {"omega_hat", num(fit.omega_hat)},
                                                        {"M_hat", num(fit.M_hat)},
                                                        {"residual", num(fit.residual)}};
    if (!out.empty())
        write_file(out, kv_serialize(kv));
    print_kv(kv);
    return 0;
}

int do_verify_estimate(const SimOptions& o, double omega, double M, const std::string& basin_file) {
    const BuiltProblem b = build_problem(o);
    const SolveConfig cfg = make_config(o, b.spec);
    const TrajectorySolution sol = run_solver(b, cfg);
    if (sol.status != SolveStatus::Completed) {
        print_kv({{"status", to_string(sol.status)}, {"pass", "0"}});
        return 1;
    }
    if (!basin_file.empty()) {
        const auto kv = kv_parse(read_file(basin_file));
        omega = std::stod(kv.at("omega"));
        M = std::stod(kv.at("M"));
    }
    const double margin = verify_exponential_estimate(sol.trajectory, b.base, b.spec.profile.alpha,
                                                      b.spec.profile.xi, omega, M);
    print_kv({{"margin", num(margin)},
              {"omega", num(omega)},
              {"M", num(M)},
              {"pass", margin >= 0.0 ? "1" : "0"}});
    return margin >= 0.0 ? 0 : 1;
}

int do_instability(const SimOptions& o, const std::string& deltas_text, double escape_radius,
                   double t_max) {
    const BuiltProblem b = build_problem(o);
    std::vector<double> deltas = parse_list(deltas_text);
    if (deltas.empty())
        throw InputError("instability: empty delta list");
    std::sort(deltas.rbegin(), deltas.rend());

    SystemField dir = zero_system(b.spec.domain, b.spec.system_size, b.spec.truncation);
    if (o.problem == "chemotaxis") {
        // leading eigenvector of the mode-0 block [[kappa,0],[1,-1]]
        dir.comp[0].coeff[0] = 1.0;
        dir.comp[1].coeff[0] = 1.0 / (1.0 + o.kappa);
    } else {
        dir.comp[0].coeff[0] = 1.0;
    }
    dir = (1.0 / scale_norm(dir, b.spec.profile.alpha)) * dir;

    ProbeOptions popts;
    popts.t_max = t_max;
    popts.escape_radius = escape_radius;
    const StabilityVerdict v = instability_probe(b.spec, b.base, dir, deltas, popts);
    std::vector<std::pair<std::string, std::string>> kv{{"verdict", to_string(v.verdict)}};
    for (const auto& r : v.records) {
        kv.emplace_back("delta", num(r.delta));
        kv.emplace_back("escaped", r.escaped ? "1" : "0");
        kv.emplace_back("degenerate", r.degenerate ? "1" : "0");
        kv.emplace_back("escape_time", num(r.escape_time));
        kv.emplace_back("growth_rate", num(r.growth_rate));
    }
    print_kv(kv);
    return 0;
}

int do_scan(const SimOptions& o, const std::string& chi_grid, const std::string& kappa_grid,
            const std::string& out) {
    const std::vector<double> chis = parse_list(chi_grid);
    const std::vector<double> kappas = parse_list(kappa_grid);
    if (chis.empty() || kappas.empty())
        throw InputError("scan: empty grid");
    struct Cell {
        double chi, kappa, bound;
        bool tail;
    };
    std::vector<Cell> cells(chis.size() * kappas.size());
    std::atomic<std::size_t> cursor{0};
    const Domain1D dom{o.length, Boundary::Neumann};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= cells.size())
                return;
            const double chi = chis[i / kappas.size()];
            const double kappa = kappas[i % kappas.size()];
            const auto rep = spectral_bound(chemotaxis_linearization(
                chi, kappa,
                o.equilibrium == "one" ? ChemotaxisEquilibrium::One : ChemotaxisEquilibrium::Zero,
                dom, o.K));
            cells[i] = {chi, kappa, rep.spectral_bound, rep.tail_verified};
        }
    };
    const int nthreads = thread_budget(cells.size());
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i)
        pool.emplace_back(worker);
    for (auto& th : pool)
        th.join();

    std::vector<std::vector<double>> rows;
    for (const auto& c : cells)
        rows.push_back({c.chi, c.kappa, c.bound, c.tail ? 1.0 : 0.0});
    const std::string csv = csv_table({"chi", "kappa", "spectral_bound", "tail_verified"}, rows);
    if (out.empty())
        std::fputs(csv.c_str(), stdout);
    else
        write_file(out, csv);
    return 0;
}

int do_scaling(int n, double p, double kappa, double s, double tau) {
    std::vector<std::pair<std::string, std::string>> kv;
    const double sc = n / p + (kappa - 2.0) / (kappa - 1.0);
    kv.emplace_back("s_c", num(sc));
    if (s != 0.0)
        kv.emplace_back("defect", num(scaling_defect(s, n, p, kappa)));
    kv.emplace_back("defect_at_s_c", num(scaling_defect(sc, n, p, kappa)));
    if (tau > 0.0) {
        const GradientIndices gi = gradient_profile(n, p, kappa, tau);
        kv.emplace_back("gamma", num(gi.profile.gamma));
        kv.emplace_back("beta", num(gi.profile.beta));
        kv.emplace_back("alpha", num(gi.profile.alpha));
        kv.emplace_back("xi", num(gi.profile.xi));
        kv.emplace_back("mu", num(gi.mu));
        kv.emplace_back("s", num(gi.s));
        kv.emplace_back("s_bar", num(gi.s_bar));
    }
    print_kv(kv);
    return 0;
}

int do_selftest() {
    int failures = 0;
    auto check = [&failures](bool ok, const char* name) {
        std::printf("%s %s\n", ok ? "[ok]" : "[FAIL]", name);
        if (!ok)
            ++failures;
    };
    check(std::abs(alpha_crit(2.0, 0.1, 0.65) - 0.2) < 1e-15, "alpha_crit chemotaxis value");
    check(std::abs(special_beta(0.5, 0.5) - 3.14159265358979324) < 1e-12, "beta(1/2,1/2) = pi");
    {
        Domain1D dom{1.0, Boundary::Dirichlet};
        const auto f = project_function([](double x) { return std::sin(3.14159265358979324 * x); },
                                        dom, 4);
        check(std::abs(f.coeff[0] - std::sqrt(0.5)) < 1e-12, "sine projection");
    }
    {
        Domain1D dom{1.0, Boundary::Neumann};
        auto gen = chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, dom, 32);
        const auto rep = spectral_bound(gen);
        check(std::abs(rep.spectral_bound + 0.5) < 1e-12 && rep.tail_verified,
              "chemotaxis spectral bound");
    }
    std::printf("selftest %s\n", failures == 0 ? "passed" : "FAILED");
    return failures == 0 ? 0 : 1;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"parastab: stability analysis of parabolic evolution problems in time-weighted scales"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    bool dry = false;
    g_quiet = false;
    std::string config_path;
    auto add_common = [&dry, &config_path](CLI::App* cmd) {
        cmd->add_flag("--dry-run", dry, "validate and print the resolved configuration");
        cmd->add_flag("--quiet", g_quiet, "suppress status output (artifacts still written)");
        cmd->add_option("--config", config_path, "flat key = value configuration file");
    };

    // critical
    double q = 2.0, gamma = 0.0, xi = 0.5;
    CLI::App* c_critical = app.add_subcommand("critical", "critical exponent alpha_crit");
    c_critical->add_option("--q", q)->required();
    c_critical->add_option("--gamma", gamma)->required();
    c_critical->add_option("--xi", xi)->required();
    add_common(c_critical);

    // profile
    std::string prof_kind = "chemotaxis";
    double pr_eps = 0.3, pr_p = 4.0, pr_tau = 0.275, pr_kappa = 4.0;
    int pr_n = 1;
    double man_gamma = 0.1, man_beta = 0.2, man_alpha = 0.3, man_xi = 0.65, man_q = 2.0;
    std::string man_mode = "semilinear";
    CLI::App* c_profile = app.add_subcommand("profile", "exponent profile validation");
    c_profile->add_option("--kind", prof_kind)->check(CLI::IsMember({"chemotaxis", "gradient", "manual"}));
    c_profile->add_option("--epsilon", pr_eps);
    c_profile->add_option("--p", pr_p);
    c_profile->add_option("--n", pr_n);
    c_profile->add_option("--tau", pr_tau);
    c_profile->add_option("--kappa", pr_kappa);
    c_profile->add_option("--gamma", man_gamma);
    c_profile->add_option("--beta", man_beta);
    c_profile->add_option("--alpha", man_alpha);
    c_profile->add_option("--xi", man_xi);
    c_profile->add_option("--q", man_q);
    c_profile->add_option("--mode", man_mode)->check(CLI::IsMember({"semilinear", "quasilinear"}));
    add_common(c_profile);

    // dispersion
    double d_chi = 2.0, d_kappa = 0.5, d_length = 1.0;
    int d_modes = 8;
    std::string d_eq = "one", d_out;
    CLI::App* c_disp = app.add_subcommand("dispersion", "chemotaxis dispersion table");
    c_disp->add_option("--chi", d_chi)->check(CLI::PositiveNumber);
    c_disp->add_option("--kappa", d_kappa)->check(CLI::PositiveNumber);
    c_disp->add_option("--modes", d_modes)->check(CLI::PositiveNumber);
    c_disp->add_option("--equilibrium", d_eq)->check(CLI::IsMember({"zero", "one"}));
    c_disp->add_option("--length", d_length)->check(CLI::PositiveNumber);
    c_disp->add_option("--out", d_out);
    add_common(c_disp);

    // spectrum
    SimOptions sp_opts;
    CLI::App* c_spec = app.add_subcommand("spectrum", "spectral bound of a linearization");
    add_sim_options(c_spec, sp_opts);
    add_common(c_spec);

    // simulate
    SimOptions sim_opts;
    std::string sim_out, sim_svg, sim_sidecar;
    bool expect_stable = false;
    CLI::App* c_sim = app.add_subcommand("simulate", "integrate a problem instance");
    add_sim_options(c_sim, sim_opts);
    c_sim->add_option("--out", sim_out);
    c_sim->add_option("--svg", sim_svg);
    c_sim->add_option("--sidecar", sim_sidecar);
    c_sim->add_flag("--expect-stable", expect_stable);
    add_common(c_sim);

    // fit
    SimOptions fit_opts;
    double fit_lo = 0.0, fit_hi = 0.0, fit_norm = 0.0;
    CLI::App* c_fit = app.add_subcommand("fit", "decay-rate fit against an equilibrium");
    add_sim_options(c_fit, fit_opts);
    c_fit->add_option("--window-lo", fit_lo);
    c_fit->add_option("--window-hi", fit_hi);
    c_fit->add_option("--norm-index", fit_norm);
    add_common(c_fit);

    // verify-estimate
    SimOptions ver_opts;
    double ver_omega = 0.4, ver_M = 0.0;
    std::string ver_basin;
    CLI::App* c_ver = app.add_subcommand("verify-estimate", "check the exponential estimate");
    add_sim_options(c_ver, ver_opts);
    c_ver->add_option("--omega", ver_omega);
    c_ver->add_option("--M", ver_M);
    c_ver->add_option("--basin-file", ver_basin);
    add_common(c_ver);

    // basin
    SimOptions bas_opts;
    double bas_omega = 0.4, bas_omega_bar = 0.0;
    std::string bas_out;
    CLI::App* c_bas = app.add_subcommand("basin", "basin-of-attraction certificate");
    add_sim_options(c_bas, bas_opts);
    c_bas->add_option("--omega", bas_omega);
    c_bas->add_option("--omega-bar", bas_omega_bar);
    c_bas->add_option("--out", bas_out);
    add_common(c_bas);

    // instability
    SimOptions ins_opts;
    std::string ins_deltas = "1e-2,1e-3,1e-4";
    double ins_escape = 0.0, ins_tmax = 60.0;
    CLI::App* c_ins = app.add_subcommand("instability", "instability probe at an equilibrium");
    add_sim_options(c_ins, ins_opts);
    c_ins->add_option("--deltas", ins_deltas);
    c_ins->add_option("--escape-radius", ins_escape);
    c_ins->add_option("--tmax", ins_tmax);
    add_common(c_ins);

    // scan
    SimOptions scan_opts;
    std::string scan_chi = "0.25,0.5,0.75,1.0,1.25,1.5,1.75,2.0";
    std::string scan_kappa = "0.3,0.5,1,2,4";
    std::string scan_out;
    CLI::App* c_scan = app.add_subcommand("scan", "stability-region parameter sweep");
    add_sim_options(c_scan, scan_opts);
    c_scan->add_option("--chi-grid", scan_chi);
    c_scan->add_option("--kappa-grid", scan_kappa);
    c_scan->add_option("--out", scan_out);
    add_common(c_scan);

    // scaling
    int sc_n = 1;
    double sc_p = 2.5, sc_kappa = 4.0, sc_s = 0.0, sc_tau = 0.0;
    CLI::App* c_scal = app.add_subcommand("scaling", "scaling-critical index and defect");
    c_scal->add_option("--n", sc_n);
    c_scal->add_option("--p", sc_p);
    c_scal->add_option("--kappa", sc_kappa);
    c_scal->add_option("--s", sc_s);
    c_scal->add_option("--tau", sc_tau);
    add_common(c_scal);

    // selftest
    CLI::App* c_self = app.add_subcommand("selftest", "quick internal consistency checks");
    add_common(c_self);

    // Expand a --config file into trailing --key=value arguments so that
    // explicitly given flags keep precedence and unknown keys surface as
    // ordinary parse errors naming the key.
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i)
        args.emplace_back(argv[i]);
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] != "--config")
            continue;
        std::map<std::string, std::string> kv;
        try {
            kv = kv_parse(read_file(args[i + 1]));
        } catch (const std::exception& e) {
            std::cerr << "configuration error: " << e.what() << "\n";
            return 2;
        }
        for (const auto& [key, value] : kv) {
            const std::string flag = "--" + key;
            bool given = false;
            for (const auto& a : args)
                given = given || a == flag || a.rfind(flag + "=", 0) == 0;
            if (!given)
                args.push_back(flag + "=" + value);
        }
        break;
    }
    std::vector<const char*> cargv{"parastab"};
    for (const auto& a : args)
        cargv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        CLI::App* active = app.get_subcommands().front();
        if (dry) {
            dump_dry_run(active);
            return 0;
        }
        if (active == c_critical)
            return do_critical(q, gamma, xi);
        if (active == c_profile) {
            ExponentProfile prof;
            if (prof_kind == "chemotaxis")
                prof = chemotaxis_profile(pr_eps, pr_p, pr_n);
            else if (prof_kind == "gradient")
                prof = gradient_profile(pr_n, pr_p, pr_kappa, pr_tau).profile;
            else {
                prof.gamma = man_gamma;
                prof.beta = man_beta;
                prof.alpha = man_alpha;
                prof.xi = man_xi;
                prof.q = man_q;
                prof.mode =
                    man_mode == "quasilinear" ? ProfileMode::Quasilinear : ProfileMode::Semilinear;
            }
            const CriticalReport rep = validate_profile(prof);
            std::string tags;
            for (const auto& t : rep.violated_constraints)
                tags += (tags.empty() ? "" : ";") + t;
            print_kv({{"gamma", num(prof.gamma)},
                      {"beta", num(prof.beta)},
                      {"alpha", num(prof.alpha)},
                      {"xi", num(prof.xi)},
                      {"q", num(prof.q)},
                      {"mu", num(prof.mu())},
                      {"alpha_crit", std::isinf(rep.alpha_crit) ? "-inf" : num(rep.alpha_crit)},
                      {"classification", to_string(rep.classification)},
                      {"violated", tags.empty() ? "none" : tags}});
            return 0;
        }
        if (active == c_disp)
            return do_dispersion(d_chi, d_kappa, d_modes, d_eq, d_length, d_out);
        if (active == c_spec)
            return do_spectrum(sp_opts);
        if (active == c_sim)
            return do_simulate(sim_opts, sim_out, sim_svg, sim_sidecar, expect_stable);
        if (active == c_fit)
            return do_fit(fit_opts, fit_lo, fit_hi, fit_norm);
        if (active == c_ver)
            return do_verify_estimate(ver_opts, ver_omega, ver_M, ver_basin);
        if (active == c_bas)
            return do_basin(bas_opts, bas_omega, bas_omega_bar, bas_out);
        if (active == c_ins)
            return do_instability(ins_opts, ins_deltas, ins_escape, ins_tmax);
        if (active == c_scan)
            return do_scan(scan_opts, scan_chi, scan_kappa, scan_out);
        if (active == c_scal)
            return do_scaling(sc_n, sc_p, sc_kappa, sc_s, sc_tau);
        if (active == c_self)
            return do_selftest();
        return 2;
    } catch (const InputError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace parastab
