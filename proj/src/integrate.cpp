#include "parastab/integrate.hpp"

#include "parastab/special.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace parastab {

double TimeMesh::node(int j) const { return T * std::pow(static_cast<double>(j) / N, r); }

std::vector<double> TimeMesh::nodes() const {
    if (!(T > 0.0) || N < 1 || r < 1.0)
        throw InputError("TimeMesh: require T > 0, N >= 1, r >= 1");
    std::vector<double> t(N + 1);
    for (int j = 0; j <= N; ++j)
        t[j] = node(j);
    return t;
}

double default_grading(double mu, double q) {
    const double muq = mu * q;
    if (muq >= 1.0)
        return 4.0;
    return std::min(4.0, 2.0 / (1.0 - muq));
}

std::string to_string(SolveStatus s) {
    switch (s) {
    case SolveStatus::Completed:
        return "completed";
    case SolveStatus::BlowupFNorm:
        return "blowup_f_norm";
    case SolveStatus::LeftAdmissibleRegion:
        return "left_admissible_region";
    default:
        return "max_iterations";
    }
}

namespace {

bool finite_state(const SystemField& u) {
    for (const auto& c : u.comp)
        if (!c.coeff.allFinite())
            return false;
    return true;
}

StepMonitor make_monitor(double t, const SystemField& state,
                         const std::function<SystemField(const SystemField&)>& f,
                         const std::function<double(const SystemField&)>& margin) {
    StepMonitor m;
    m.t = t;
    m.f_norm = sobolev_norm(f(state), 0.0);
    m.margin = margin ? margin(state) : std::numeric_limits<double>::infinity();
    return m;
}

} // namespace

TrajectorySolution solve_semilinear(const BlockGenerator& A,
                                    const std::function<SystemField(const SystemField&)>& f,
                                    const SystemField& u0, const SolveConfig& config) {
    return solve_semilinear(A, f, u0, config, {});
}

TrajectorySolution solve_semilinear(const BlockGenerator& A,
                                    const std::function<SystemField(const SystemField&)>& f,
                                    const SystemField& u0, const SolveConfig& config,
                                    const std::function<double(const SystemField&)>& margin) {
    u0.check_consistent();
    const int K = u0.truncation();
    const int m = u0.size();
    if (m != A.block_size || K != A.truncation())
        throw InputError("solve_semilinear: shape mismatch between state and generator");

    const std::vector<double> t = config.mesh.nodes();
    TrajectorySolution sol;
    sol.trajectory.weight = config.weight_mu;
    sol.trajectory.times.push_back(0.0);
    sol.trajectory.states.push_back(u0);
    sol.monitors.push_back(make_monitor(0.0, u0, f, margin));

    SystemField u = u0;
    Eigen::VectorXd z(m), w(m);
    for (int j = 0; j < config.mesh.N; ++j) {
        const double h = t[j + 1] - t[j];
        const SystemField fu = f(u);
        SystemField a = u;
        std::vector<PhiTriple> phis(K);
        for (int k = 0; k < K; ++k) {
            phis[k] = phi_triple(h * A.blocks[k]);
            for (int c = 0; c < m; ++c)
                z[c] = u.comp[c].coeff[k];
            Eigen::VectorXd fz(m);
            for (int c = 0; c < m; ++c)
                fz[c] = fu.comp[c].coeff[k];
            w = phis[k].e * z + h * (phis[k].p1 * fz);
            for (int c = 0; c < m; ++c)
                a.comp[c].coeff[k] = w[c];
        }
        const SystemField fa = f(a);
        SystemField next = a;
        for (int k = 0; k < K; ++k) {
            for (int c = 0; c < m; ++c)
                z[c] = fa.comp[c].coeff[k] - fu.comp[c].coeff[k];
            w = h * (phis[k].p2 * z);
            for (int c = 0; c < m; ++c)
                next.comp[c].coeff[k] = a.comp[c].coeff[k] + w[c];
        }
        u = next;

        if (!finite_state(u)) {
            sol.status = SolveStatus::BlowupFNorm;
            sol.t_plus_estimate = t[j + 1];
            return sol;
        }
        const StepMonitor mon = make_monitor(t[j + 1], u, f, margin);
        sol.trajectory.times.push_back(t[j + 1]);
        sol.trajectory.states.push_back(u);
        sol.monitors.push_back(mon);
        if (mon.f_norm >= config.blowup_cap) {
            sol.status = SolveStatus::BlowupFNorm;
            sol.t_plus_estimate = t[j + 1];
            return sol;
        }
        if (mon.margin <= 0.0) {
            sol.status = SolveStatus::LeftAdmissibleRegion;
            sol.t_plus_estimate = t[j + 1];
            return sol;
        }
    }
    sol.status = SolveStatus::Completed;
    return sol;
}

namespace {

// exp/phi1/phi2 applications for a dense slice operator; symmetric matrices
// go through an eigendecomposition, the rest through the augmented exponential.
struct DensePhi {
    bool symmetric = false;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    PhiTriple triple;

    void compute(const Eigen::MatrixXd& hA) {
        const double scale = hA.cwiseAbs().maxCoeff();
        symmetric = (hA - hA.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, scale);
        if (symmetric) {
            eig.compute(hA);
        } else {
            triple = phi_triple(hA);
        }
    }

    Eigen::VectorXd step(const Eigen::VectorXd& v, double h, const Eigen::VectorXd& g0,
                         const Eigen::VectorXd& g1) const {
        if (symmetric) {
            const Eigen::VectorXd& w = eig.eigenvalues();
            const Eigen::MatrixXd& V = eig.eigenvectors();
            Eigen::VectorXd ew(w.size()), p1(w.size()), p2(w.size());
            for (int i = 0; i < w.size(); ++i) {
                ew[i] = std::exp(w[i]);
                p1[i] = (w[i] == 0.0) ? 1.0 : std::expm1(w[i]) / w[i];
                // the subtraction in phi2 cancels below |w| ~ 1e-3
                p2[i] = (std::abs(w[i]) < 1e-3)
                            ? ((((w[i] / 720 + 1.0 / 120) * w[i] + 1.0 / 24) * w[i] + 1.0 / 6) *
                                   w[i] + 0.5)
                            : (std::expm1(w[i]) - w[i]) / (w[i] * w[i]);
            }
            const Eigen::VectorXd vt = V.transpose() * v;
            const Eigen::VectorXd g0t = V.transpose() * g0;
            const Eigen::VectorXd g1t = V.transpose() * g1;
            return V * (ew.cwiseProduct(vt) + h * ((p1 - p2).cwiseProduct(g0t) + p2.cwiseProduct(g1t)));
        }
        return triple.e * v + h * ((triple.p1 - triple.p2) * g0 + triple.p2 * g1);
    }
};

} // namespace

TrajectorySolution solve_quasilinear(const ProblemSpec& problem, const SystemField& u0,
                                     const SolveConfig& config) {
    u0.check_consistent();
    if (problem.admissible_margin(u0) <= 0.0)
        throw InputError("solve_quasilinear: initial state outside the admissible region");

    const std::vector<double> t = config.mesh.nodes();
    const int N = config.mesh.N;
    const double alpha = problem.profile.alpha;
    const double xi = problem.profile.xi;
    const double mu = config.weight_mu > 0.0 ? config.weight_mu : problem.profile.mu();
    if (!(mu * problem.profile.q < 1.0))
        throw InputError("solve_quasilinear: weight violates mu*q < 1 for the active profile");

    TrajectorySolution sol;
    sol.trajectory.weight = mu;

    // initial freeze: semigroup of A at the initial state
    std::vector<SystemField> traj;
    traj.reserve(N + 1);
    {
        const Eigen::MatrixXd A0 = problem.assemble_A(u0);
        const Eigen::VectorXd v0 = stack(u0);
        const double scale = A0.cwiseAbs().maxCoeff();
        const bool sym = (A0 - A0.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, scale);
        traj.push_back(u0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
        if (sym)
            eig.compute(A0);
        for (int j = 1; j <= N; ++j) {
            Eigen::VectorXd vj;
            if (sym) {
                const Eigen::MatrixXd& V = eig.eigenvectors();
                vj = V * ((t[j] * eig.eigenvalues()).array().exp().matrix())
                             .cwiseProduct(V.transpose() * v0);
            } else {
                vj = (t[j] * A0).exp() * v0;
            }
            traj.push_back(unstack(vj, problem.domain, problem.system_size));
        }
    }

    SolveStatus status = SolveStatus::MaxIterations;
    for (int it = 0; it < config.max_outer_iterations; ++it) {
        std::vector<SystemField> next;
        next.reserve(N + 1);
        next.push_back(u0);
        Eigen::VectorXd v = stack(u0);
        DensePhi phi;
        for (int j = 0; j < N; ++j) {
            const double h = t[j + 1] - t[j];
            const Eigen::MatrixXd Aj = problem.assemble_A(traj[j]);
            const Eigen::VectorXd g0 = stack(problem.nonlinearity(traj[j]));
            const Eigen::VectorXd g1 = stack(problem.nonlinearity(traj[j + 1]));
            phi.compute(h * Aj);
            v = phi.step(v, h, g0, g1);
            next.push_back(unstack(v, problem.domain, problem.system_size));
        }
        double d_sup = 0.0, d_weighted = 0.0;
        for (int j = 0; j <= N; ++j) {
            const SystemField diff = next[j] - traj[j];
            d_sup = std::max(d_sup, scale_norm(diff, alpha));
            if (t[j] > 0.0)
                d_weighted = std::max(d_weighted, std::pow(t[j], mu) * scale_norm(diff, xi));
        }
        sol.iteration_distances.emplace_back(d_sup, d_weighted);
        traj = std::move(next);
        if (d_sup + d_weighted <= config.fixed_point_tol) {
            status = SolveStatus::Completed;
            break;
        }
    }

    // populate trajectory with monitors; truncate at a blow-up alternative
    sol.status = status;
    for (int j = 0; j <= N; ++j) {
        if (!finite_state(traj[j])) {
            sol.status = SolveStatus::BlowupFNorm;
            sol.t_plus_estimate = t[j];
            return sol;
        }
        StepMonitor mon = make_monitor(t[j], traj[j], problem.nonlinearity, problem.admissible_margin);
        sol.trajectory.times.push_back(t[j]);
        sol.trajectory.states.push_back(traj[j]);
        sol.monitors.push_back(mon);
        if (mon.f_norm >= config.blowup_cap) {
            sol.status = SolveStatus::BlowupFNorm;
            sol.t_plus_estimate = t[j];
            return sol;
        }
        if (mon.margin <= 0.0) {
            sol.status = SolveStatus::LeftAdmissibleRegion;
            sol.t_plus_estimate = t[j];
            return sol;
        }
    }
    return sol;
}

TrajectorySolution oracle_integrate(
    const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
    const SystemField& u0, double T, double tol, const std::vector<double>& sample_times) {
    using Vec = Eigen::VectorXd;
    const int comps = u0.size();
    const Domain1D dom = u0.domain();

    // Dormand-Prince 5(4)
    static const double c[7] = {0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
    static const double a2[] = {1.0 / 5};
    static const double a3[] = {3.0 / 40, 9.0 / 40};
    static const double a4[] = {44.0 / 45, -56.0 / 15, 32.0 / 9};
    static const double a5[] = {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729};
    static const double a6[] = {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176,
                                -5103.0 / 18656};
    static const double a7[] = {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784,
                                11.0 / 84};
    static const double e[7] = {71.0 / 57600,    0.0,          -71.0 / 16695, 71.0 / 1920,
                                -17253.0 / 339200, 22.0 / 525, -1.0 / 40};
    static const double d[7] = {-12715105075.0 / 11282082432.0,
                                0.0,
                                87487479700.0 / 32700410799.0,
                                -10690763975.0 / 1880347072.0,
                                701980252875.0 / 199316789632.0,
                                -1453857185.0 / 822651844.0,
                                69997945.0 / 29380423.0};

    TrajectorySolution sol;
    sol.trajectory.weight = 0.0;

    Vec y = stack(u0);
    double tcur = 0.0;
    double h = std::min(1e-4 * std::max(T, 1.0), T);
    const double hmin = 1e-14 * std::max(T, 1.0);
    std::size_t next_sample = 0;

    auto record = [&](double ts, const Vec& ys) {
        sol.trajectory.times.push_back(ts);
        sol.trajectory.states.push_back(unstack(ys, dom, comps));
    };
    if (!sample_times.empty() && sample_times.front() == 0.0) {
        record(0.0, y);
        ++next_sample;
    }

    Vec k1 = rhs(tcur, y);
    int max_steps = 50'000'000;
    while (tcur < T && max_steps-- > 0) {
        h = std::min(h, T - tcur);
        const Vec k2 = rhs(tcur + c[1] * h, y + h * (a2[0] * k1));
        const Vec k3 = rhs(tcur + c[2] * h, y + h * (a3[0] * k1 + a3[1] * k2));
        const Vec k4 = rhs(tcur + c[3] * h, y + h * (a4[0] * k1 + a4[1] * k2 + a4[2] * k3));
        const Vec k5 =
            rhs(tcur + c[4] * h, y + h * (a5[0] * k1 + a5[1] * k2 + a5[2] * k3 + a5[3] * k4));
        const Vec k6 = rhs(tcur + h, y + h * (a6[0] * k1 + a6[1] * k2 + a6[2] * k3 + a6[3] * k4 +
                                              a6[4] * k5));
        const Vec y5 = y + h * (a7[0] * k1 + a7[2] * k3 + a7[3] * k4 + a7[4] * k5 + a7[5] * k6);
        const Vec k7 = rhs(tcur + h, y5);

        const Vec errv = h * (e[0] * k1 + e[2] * k3 + e[3] * k4 + e[4] * k5 + e[5] * k6 + e[6] * k7);
        double err = 0.0;
        for (int i = 0; i < y.size(); ++i) {
            const double sc = tol + tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err += (errv[i] / sc) * (errv[i] / sc);
        }
        err = std::sqrt(err / y.size());
        if (!std::isfinite(err)) {
            sol.status = SolveStatus::BlowupFNorm;
            sol.t_plus_estimate = tcur;
            return sol;
        }

        if (err <= 1.0) {
            // dense output over [tcur, tcur+h]
            const Vec dy = y5 - y;
            const Vec r1 = y;
            const Vec r2 = dy;
            const Vec r3 = h * k1 - dy;
            const Vec r4 = dy - h * k7 - r3;
            const Vec r5 = h * (d[0] * k1 + d[2] * k3 + d[3] * k4 + d[4] * k5 + d[5] * k6 +
                                d[6] * k7);
            while (next_sample < sample_times.size() &&
                   sample_times[next_sample] <= tcur + h + 1e-14 * std::max(T, 1.0)) {
                const double th = std::clamp((sample_times[next_sample] - tcur) / h, 0.0, 1.0);
                const Vec ys = r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)));
                record(sample_times[next_sample], ys);
                ++next_sample;
            }
            tcur += h;
            y = y5;
            k1 = k7;
        }
        const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0);
        h *= fac;
        if (h < hmin) {
            sol.status = SolveStatus::BlowupFNorm;
            sol.t_plus_estimate = tcur;
            return sol;
        }
    }
    while (next_sample < sample_times.size() &&
           sample_times[next_sample] <= T + 1e-12 * std::max(T, 1.0)) {
        record(sample_times[next_sample], y);
        ++next_sample;
    }
    sol.status = SolveStatus::Completed;
    return sol;
}

void gauss_jacobi(int n, double A, double B, std::vector<double>& nodes,
                  std::vector<double>& weights) {
    if (n < 1 || A <= -1.0 || B <= -1.0)
        throw InputError("gauss_jacobi: require n >= 1 and exponents > -1");
    Eigen::VectorXd diag(n), sub(std::max(n - 1, 1));
    const double apb = A + B;
    diag[0] = (B - A) / (apb + 2.0);
    for (int j = 1; j < n; ++j) {
        const double den = (2.0 * j + apb) * (2.0 * j + apb + 2.0);
        diag[j] = (B * B - A * A) / den;
    }
    for (int j = 1; j < n; ++j) {
        double b2;
        if (j == 1)
            b2 = 4.0 * (A + 1.0) * (B + 1.0) / ((apb + 2.0) * (apb + 2.0) * (apb + 3.0));
        else
            b2 = 4.0 * j * (j + A) * (j + B) * (j + apb) /
                 ((2.0 * j + apb) * (2.0 * j + apb) * (2.0 * j + apb + 1.0) * (2.0 * j + apb - 1.0));
        sub[j - 1] = std::sqrt(b2);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub.head(n - 1 > 0 ? n - 1 : 0));
    const double mu0 = std::pow(2.0, apb + 1.0) * special_beta(A + 1.0, B + 1.0);
    nodes.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        nodes[i] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        weights[i] = mu0 * v0 * v0;
    }
}

namespace {

// integral of (1-s)^(-b) s^(-c) e^(-x(1-s)) over (0,1): one Jacobi panel at
// each singular endpoint plus geometric Legendre panels resolving the e^(-x(1-s))
// boundary layer at s = 1
double layered_kernel_integral(double b, double c, double x, int n) {
    std::vector<double> gx, gw;
    double acc = 0.0;

    // [0, 1/2] with weight s^(-c)
    gauss_jacobi(n, 0.0, -c, gx, gw);
    for (int i = 0; i < n; ++i) {
        const double s = 0.25 * (1.0 + gx[i]);
        const double oms = 1.0 - s;
        if (x * oms < 700.0)
            acc += std::pow(0.25, 1.0 - c) * gw[i] * std::pow(oms, -b) * std::exp(-x * oms);
    }

    int layers = 1;
    while (x * std::pow(2.0, -layers) > 8.0 && layers < 60)
        ++layers;

    // interior panels [1-2^-j, 1-2^-j-1]
    if (layers >= 2) {
        gauss_jacobi(n, 0.0, 0.0, gx, gw);
        for (int j = 1; j < layers; ++j) {
            const double w_hi = std::pow(2.0, -j);
            const double w_lo = 0.5 * w_hi;
            if (x * w_lo > 45.0)
                continue; // panel numerically zero
            const double mid = 1.0 - 0.5 * (w_hi + w_lo);
            const double half = 0.5 * (w_hi - w_lo);
            for (int i = 0; i < n; ++i) {
                const double s = mid + half * gx[i];
                const double oms = 1.0 - s;
                acc += half * gw[i] * std::pow(oms, -b) * std::pow(s, -c) * std::exp(-x * oms);
            }
        }
    }

    // layer panel [1-delta, 1] with weight (1-s)^(-b)
    const double delta = std::pow(2.0, -layers);
    gauss_jacobi(n, -b, 0.0, gx, gw);
    for (int i = 0; i < n; ++i) {
        const double oms = 0.5 * delta * (1.0 - gx[i]);
        acc += std::pow(0.5 * delta, 1.0 - b) * gw[i] * std::pow(1.0 - oms, -c) * std::exp(-x * oms);
    }
    return acc;
}

} // namespace

double singular_bound_check(double a, double b, double c, double eta,
                            const std::vector<double>& t_samples) {
    if (!(a >= 0.0) || !(b < 1.0) || !(c < 1.0) || !(a < 1.0 - b) || !(eta > 0.0))
        throw InputError("singular_bound_check: require 0 <= a < 1-b, b < 1, c < 1, eta > 0");
    if (t_samples.empty())
        throw InputError("singular_bound_check: no time samples");

    const double rhs = sup_power_exp(a, eta) * special_beta(1.0 - a - b, 1.0 - c);

    double worst = std::numeric_limits<double>::infinity();
    for (double t : t_samples) {
        if (!(t > 0.0))
            throw InputError("singular_bound_check: times must be positive");
        const double l1 = std::pow(t, a) * layered_kernel_integral(b, c, eta * t, 32);
        const double l2 = std::pow(t, a) * layered_kernel_integral(b, c, eta * t, 48);
        if (std::abs(l2 - l1) > 1e-10 * std::max(1.0, std::abs(l2)))
            throw NumericError("singular_bound_check: quadrature did not converge at t=" +
                               std::to_string(t));
        worst = std::min(worst, rhs - l2);
    }
    return worst;
}

} // namespace parastab
