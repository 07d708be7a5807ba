#include "parastab/linops.hpp"

#include "parastab/rng.hpp"
#include "parastab/special.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>

namespace parastab {

namespace {

using Complex = std::complex<double>;

Complex phi0(Complex z) { return std::exp(z); }

Complex phi1(Complex z) {
    if (std::abs(z) < 0.1) {
        Complex acc(0.0, 0.0), term(1.0, 0.0);
        for (int k = 0; k < 14; ++k) { // z^k / (k+1)!
            acc += term;
            term *= z / static_cast<double>(k + 2);
        }
        return acc;
    }
    return (std::exp(z) - 1.0) / z;
}

Complex phi2(Complex z) {
    if (std::abs(z) < 0.1) {
        Complex acc(0.0, 0.0), term(0.5, 0.0);
        for (int k = 0; k < 14; ++k) { // z^k / (k+2)!
            acc += term;
            term *= z / static_cast<double>(k + 3);
        }
        return acc;
    }
    return (std::exp(z) - 1.0 - z) / (z * z);
}

Complex phi1_deriv(Complex z) {
    if (std::abs(z) < 0.1) {
        // sum_{k>=1} k z^(k-1) / (k+1)!
        Complex acc(0.0, 0.0), zp(1.0, 0.0);
        double f = 2.0; // (k+1)! at k=1
        for (int k = 1; k <= 14; ++k) {
            acc += static_cast<double>(k) / f * zp;
            zp *= z;
            f *= (k + 2);
        }
        return acc;
    }
    return (phi0(z) - phi1(z)) / z;
}

Complex phi2_deriv(Complex z) {
    if (std::abs(z) < 0.1) {
        // sum k z^(k-1) / (k+2)!
        Complex acc(0.0, 0.0);
        Complex zp(1.0, 0.0);
        double f = 6.0; // 3!
        for (int k = 1; k <= 14; ++k) {
            acc += static_cast<double>(k) / f * zp;
            zp *= z;
            f *= (k + 3);
        }
        return acc;
    }
    return (phi1(z) - 2.0 * phi2(z)) / z;
}

// f(A) = a I + b A for a 2x2 matrix via its eigenvalues; divided difference
// switches to the derivative when the eigenvalues nearly coincide.
Eigen::Matrix2d analytic_2x2(const Eigen::Matrix2d& m, const std::function<Complex(Complex)>& f,
                             const std::function<Complex(Complex)>& fp) {
    const double tr = m(0, 0) + m(1, 1);
    const double s = 0.5 * tr;
    const double disc = 0.25 * (m(0, 0) - m(1, 1)) * (m(0, 0) - m(1, 1)) + m(0, 1) * m(1, 0);
    Complex mu1, mu2;
    if (disc >= 0.0) {
        const double rt = std::sqrt(disc);
        mu1 = Complex(s + rt, 0.0);
        mu2 = Complex(s - rt, 0.0);
    } else {
        const double rt = std::sqrt(-disc);
        mu1 = Complex(s, rt);
        mu2 = Complex(s, -rt);
    }
    const double scale = std::max({1.0, std::abs(mu1), std::abs(mu2)});
    Complex a, b;
    if (std::abs(mu1 - mu2) > 1e-7 * scale) {
        b = (f(mu1) - f(mu2)) / (mu1 - mu2);
        a = f(mu1) - b * mu1;
    } else {
        const Complex mu = 0.5 * (mu1 + mu2);
        b = fp(mu);
        a = f(mu) - b * mu;
    }
    Eigen::Matrix2d out;
    out(0, 0) = (a + b * m(0, 0)).real();
    out(0, 1) = (b * m(0, 1)).real();
    out(1, 0) = (b * m(1, 0)).real();
    out(1, 1) = (a + b * m(1, 1)).real();
    return out;
}

std::vector<std::complex<double>> eig2(const Eigen::Matrix2d& m) {
    const double s = 0.5 * (m(0, 0) + m(1, 1));
    const double disc = 0.25 * (m(0, 0) - m(1, 1)) * (m(0, 0) - m(1, 1)) + m(0, 1) * m(1, 0);
    if (disc >= 0.0) {
        const double rt = std::sqrt(disc);
        return {Complex(s + rt, 0.0), Complex(s - rt, 0.0)};
    }
    const double rt = std::sqrt(-disc);
    return {Complex(s, rt), Complex(s, -rt)};
}

double two_norm(const Eigen::MatrixXd& m) {
    if (m.rows() == 1)
        return std::abs(m(0, 0));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

} // namespace

double BlockGenerator::tail_consistency() const {
    const int K = truncation();
    const double lam = domain.eigenvalue(K - 1);
    return (blocks[K - 1] - tail_block(lam)).cwiseAbs().maxCoeff();
}

Eigen::VectorXd stack(const SystemField& u) {
    const int K = u.truncation();
    Eigen::VectorXd v(u.size() * K);
    for (int c = 0; c < u.size(); ++c)
        v.segment(c * K, K) = u.comp[c].coeff;
    return v;
}

SystemField unstack(const Eigen::VectorXd& v, const Domain1D& domain, int components) {
    const int K = static_cast<int>(v.size()) / components;
    SystemField u = zero_system(domain, components, K);
    for (int c = 0; c < components; ++c)
        u.comp[c].coeff = v.segment(c * K, K);
    return u;
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    const int m = static_cast<int>(a.rows());
    if (m == 1) {
        Eigen::MatrixXd r(1, 1);
        r(0, 0) = std::exp(a(0, 0));
        return r;
    }
    if (m == 2) {
        // e^A = e^s (cosh(sqrt(q)) I + sinhc(sqrt(q)) B), B = A - s I traceless
        const double s = 0.5 * (a(0, 0) + a(1, 1));
        Eigen::Matrix2d b = a;
        b(0, 0) -= s;
        b(1, 1) -= s;
        const double q = b(0, 0) * b(0, 0) + b(0, 1) * b(1, 0);
        // e^s cosh/sinh assembled from e^{s+r} and e^{s-r} so that large |s|
        // and large r cannot overflow before the final underflow
        double ech, eshc;
        if (q > 1e-12) {
            const double r = std::sqrt(q);
            const double ep = std::exp(s + r);
            const double em = std::exp(s - r);
            ech = 0.5 * (ep + em);
            eshc = 0.5 * (ep - em) / r;
        } else if (q < -1e-12) {
            const double r = std::sqrt(-q);
            const double es = std::exp(s);
            ech = es * std::cos(r);
            eshc = es * std::sin(r) / r;
        } else {
            const double es = std::exp(s);
            ech = es * (1.0 + 0.5 * q);
            eshc = es * (1.0 + q / 6.0);
        }
        return ech * Eigen::Matrix2d::Identity() + eshc * b;
    }
    return a.exp();
}

PhiTriple phi_triple(const Eigen::MatrixXd& a) {
    const int m = static_cast<int>(a.rows());
    PhiTriple t;
    if (m == 1) {
        t.e = Eigen::MatrixXd(1, 1);
        t.p1 = Eigen::MatrixXd(1, 1);
        t.p2 = Eigen::MatrixXd(1, 1);
        const Complex z(a(0, 0), 0.0);
        t.e(0, 0) = phi0(z).real();
        t.p1(0, 0) = phi1(z).real();
        t.p2(0, 0) = phi2(z).real();
        return t;
    }
    if (m == 2) {
        const Eigen::Matrix2d b = a;
        t.e = analytic_2x2(b, phi0, phi0);
        t.p1 = analytic_2x2(b, phi1, phi1_deriv);
        t.p2 = analytic_2x2(b, phi2, phi2_deriv);
        return t;
    }
    // augmented exponential: exp([[A,I,0],[0,0,I],[0,0,0]]) carries
    // [e^A, phi1(A), phi2(A)] in its top block row
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3 * m, 3 * m);
    w.topLeftCorner(m, m) = a;
    w.block(0, m, m, m).setIdentity();
    w.block(m, 2 * m, m, m).setIdentity();
    const Eigen::MatrixXd ew = w.exp();
    t.e = ew.topLeftCorner(m, m);
    t.p1 = ew.block(0, m, m, m);
    t.p2 = ew.block(0, 2 * m, m, m);
    return t;
}

std::vector<std::complex<double>> block_eigenvalues(const Eigen::MatrixXd& b) {
    const int m = static_cast<int>(b.rows());
    if (m == 1)
        return {Complex(b(0, 0), 0.0)};
    if (m == 2)
        return eig2(b);
    Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
    std::vector<Complex> out(m);
    for (int i = 0; i < m; ++i)
        out[i] = es.eigenvalues()(i);
    return out;
}

SystemField apply_semigroup(const BlockGenerator& gen, double t, const SystemField& u) {
    if (t < 0.0)
        throw InputError("apply_semigroup: negative time");
    u.check_consistent();
    const int K = u.truncation();
    const int m = gen.block_size;
    if (u.size() != m || K != gen.truncation())
        throw InputError("apply_semigroup: shape mismatch");
    SystemField out = u;
    Eigen::VectorXd z(m), w(m);
    for (int k = 0; k < K; ++k) {
        for (int c = 0; c < m; ++c)
            z[c] = u.comp[c].coeff[k];
        w = expm(t * gen.blocks[k]) * z;
        for (int c = 0; c < m; ++c)
            out.comp[c].coeff[k] = w[c];
    }
    return out;
}

SystemField apply_semigroup(const DenseGenerator& gen, double t, const SystemField& u) {
    if (t < 0.0)
        throw InputError("apply_semigroup: negative time");
    const Eigen::VectorXd v = stack(u);
    const Eigen::MatrixXd e = (t * gen.matrix).exp();
    return unstack(e * v, u.domain(), u.size());
}

BlockGenerator chemotaxis_linearization(double chi, double kappa, ChemotaxisEquilibrium at,
                                        const Domain1D& domain, int truncation) {
    if (domain.boundary != Boundary::Neumann)
        throw InputError("chemotaxis_linearization: Neumann boundary required");
    if (!(chi > 0.0) || !(kappa > 0.0))
        throw InputError("chemotaxis_linearization: chi and kappa must be positive");
    BlockGenerator gen;
    gen.domain = domain;
    gen.block_size = 2;
    gen.tail_c0.resize(2, 2);
    gen.tail_c1.resize(2, 2);
    if (at == ChemotaxisEquilibrium::One) {
        gen.tail_c0 << -kappa, 0.0, 1.0, -1.0;
        gen.tail_c1 << -1.0, chi, 0.0, -1.0;
    } else {
        gen.tail_c0 << kappa, 0.0, 1.0, -1.0;
        gen.tail_c1 << -1.0, 0.0, 0.0, -1.0;
    }
    gen.blocks.reserve(truncation);
    for (int k = 0; k < truncation; ++k)
        gen.blocks.push_back(gen.tail_block(domain.eigenvalue(k)));
    return gen;
}

LinearizationReport spectral_bound(const BlockGenerator& gen) {
    LinearizationReport rep;
    rep.spectral_bound = -std::numeric_limits<double>::infinity();
    const int K = gen.truncation();
    rep.per_mode_eigs.resize(K);
    for (int k = 0; k < K; ++k) {
        rep.per_mode_eigs[k] = block_eigenvalues(gen.blocks[k]);
        for (const auto& ev : rep.per_mode_eigs[k]) {
            if (ev.real() > rep.spectral_bound) {
                rep.spectral_bound = ev.real();
                rep.leading_mode = k;
            }
        }
    }

    // Tail certificate: scaled Gershgorin rows of B(lambda) = C0 + lambda C1
    // are affine in lambda; if every slope is negative the tail supremum is
    // attained at the first unretained eigenvalue.
    const int m = gen.block_size;
    const double lam0 = gen.domain.eigenvalue(K);
    auto tail_objective = [&](const std::vector<double>& d, double& worst_slope) {
        double bound = -std::numeric_limits<double>::infinity();
        worst_slope = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < m; ++i) {
            double slope = gen.tail_c1(i, i);
            double icpt = gen.tail_c0(i, i);
            for (int j = 0; j < m; ++j) {
                if (j == i)
                    continue;
                slope += std::abs(gen.tail_c1(i, j)) * d[j] / d[i];
                icpt += std::abs(gen.tail_c0(i, j)) * d[j] / d[i];
            }
            worst_slope = std::max(worst_slope, slope);
            bound = std::max(bound, icpt + lam0 * slope);
        }
        return bound;
    };

    std::vector<double> d(m, 1.0);
    double slope;
    double best = tail_objective(d, slope);
    bool feasible = slope < 0.0;
    for (int sweep = 0; sweep < 4; ++sweep) {
        for (int i = 0; i < m; ++i) {
            double best_di = d[i];
            for (int g = -60; g <= 60; ++g) {
                d[i] = std::pow(10.0, g / 5.0);
                double sl;
                const double val = tail_objective(d, sl);
                const bool ok = sl < 0.0;
                if ((ok && !feasible) || (ok == feasible && val < best)) {
                    best = val;
                    feasible = ok;
                    best_di = d[i];
                }
            }
            d[i] = best_di;
        }
    }
    const double scale = std::max(1.0, std::abs(rep.spectral_bound));
    rep.tail_verified = feasible && best <= rep.spectral_bound + 1e-12 * scale;
    return rep;
}

GeneratorCertificate resolvent_certificate(const BlockGenerator& gen, double omega, int trials,
                                           std::uint64_t seed) {
    if (trials < 1)
        throw InputError("resolvent_certificate: trials must be >= 1");
    Rng rng(seed);
    const int K = gen.truncation();
    const int m = gen.block_size;
    GeneratorCertificate cert;
    cert.omega_cert = omega;
    cert.worst_ratio_low = std::numeric_limits<double>::infinity();
    cert.worst_ratio_high = 0.0;

    using MatC = Eigen::MatrixXcd;
    for (int trial = 0; trial < trials; ++trial) {
        // random z decaying over modes, random mu with Re mu >= omega
        Eigen::MatrixXd z(m, K);
        for (int c = 0; c < m; ++c)
            for (int k = 0; k < K; ++k)
                z(c, k) = rng.normal() / (1.0 + gen.domain.eigenvalue(k));
        // include the boundary point Re mu = omega itself; singular resolvents
        // live on that line when omega dips below -s(gen)
        Complex mu;
        if (trial == 0) {
            mu = Complex(omega, 0.0);
        } else {
            const double r = std::pow(10.0, rng.uniform(-2.0, 5.0)) * (1.0 + std::abs(omega));
            const double th = (rng.uniform() < 0.25) ? 0.0 : rng.uniform(-1.5, 1.5);
            mu = Complex(omega + r * std::cos(th), r * std::sin(th));
        }

        double num2 = 0.0, z0 = 0.0, z1 = 0.0;
        bool singular = false;
        for (int k = 0; k < K; ++k) {
            MatC b = -gen.blocks[k].cast<Complex>();
            for (int i = 0; i < m; ++i)
                b(i, i) += mu;
            const Complex det = (m == 1) ? b(0, 0)
                                         : (m == 2) ? b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0)
                                                    : Complex(b.determinant());
            const double bscale = std::pow(std::max({1.0, std::abs(mu), gen.blocks[k].cwiseAbs().maxCoeff()}),
                                           static_cast<double>(m));
            if (std::abs(det) <= 1e-10 * bscale) {
                singular = true;
                break;
            }
            const Eigen::VectorXcd w = b * z.col(k).cast<Complex>();
            num2 += w.squaredNorm();
            const double wk = 1.0 + gen.domain.eigenvalue(k);
            z0 += z.col(k).squaredNorm();
            z1 += wk * wk * z.col(k).squaredNorm();
        }
        if (singular) {
            ++cert.singular_failures;
            continue;
        }
        const double ratio = std::sqrt(num2) / (std::abs(mu) * std::sqrt(z0) + std::sqrt(z1));
        cert.worst_ratio_low = std::min(cert.worst_ratio_low, ratio);
        cert.worst_ratio_high = std::max(cert.worst_ratio_high, ratio);
        ++cert.sample_count;
    }
    if (cert.sample_count > 0)
        cert.kappa_cert = std::max(cert.worst_ratio_high, 1.0 / cert.worst_ratio_low);
    return cert;
}

SystemField evolution_operator(const std::vector<std::pair<double, BlockGenerator>>& frozen,
                               double t, double s, const SystemField& u) {
    if (t < s)
        throw InputError("evolution_operator: require s <= t");
    if (frozen.empty() || s < frozen.front().first)
        throw InputError("evolution_operator: [s,t] not covered by the schedule");
    SystemField v = u;
    for (std::size_t j = 0; j < frozen.size(); ++j) {
        const double a = frozen[j].first;
        const double b = (j + 1 < frozen.size()) ? frozen[j + 1].first
                                                 : std::numeric_limits<double>::infinity();
        const double lo = std::max(s, a);
        const double hi = std::min(t, b);
        if (hi > lo)
            v = apply_semigroup(frozen[j].second, hi - lo, v);
    }
    return v;
}

double energy_identity_residual(double chi, double kappa, double lambda,
                                std::complex<double> value, const Eigen::Vector2cd& vec) {
    const Complex u = vec(0), v = vec(1);
    const double u2 = std::norm(u);
    const double v2 = std::norm(v);
    const double uv = (u * std::conj(v)).real();
    const double s = u2 + v2;
    return std::abs(value.real() * s + lambda * s - chi * lambda * uv + kappa * u2 - uv + v2);
}

double semigroup_norm_constants(const BlockGenerator& gen, double theta_from, double theta_to,
                                double omega_bar) {
    if (theta_to < theta_from)
        throw InputError("semigroup_norm_constants: require theta_to >= theta_from");
    const LinearizationReport rep = spectral_bound(gen);
    if (!(omega_bar < -rep.spectral_bound))
        throw NumericError("semigroup_norm_constants: omega_bar >= -s(gen), supremum diverges");

    const double a = theta_to - theta_from;
    const int K = gen.truncation();
    double best = 0.0;

    auto mode_value = [&](const Eigen::MatrixXd& block, double lam) {
        double max_re = -std::numeric_limits<double>::infinity();
        for (const auto& ev : block_eigenvalues(block))
            max_re = std::max(max_re, ev.real());
        const double b = -(omega_bar + max_re);
        const double w = std::pow(1.0 + lam, a);
        double m = w * sup_power_exp(a, b); // closed-form floor from the eigenvalues
        // refine against the actual transient of the block
        const double tstar = (a > 0.0) ? a / b : 1.0 / b;
        for (int g = -20; g <= 20; ++g) {
            const double t = tstar * std::pow(10.0, g / 10.0);
            const double val =
                std::pow(t, a) * std::exp(omega_bar * t) * w * two_norm(expm(t * block));
            m = std::max(m, val);
        }
        if (a == 0.0)
            m = std::max(m, 1.0); // t -> 0 limit
        return m;
    };

    for (int k = 0; k < K; ++k)
        best = std::max(best, mode_value(gen.blocks[k], gen.domain.eigenvalue(k)));
    // tail safeguard on dyadically growing eigenvalues
    double lam = gen.domain.eigenvalue(K);
    for (int j = 0; j < 20; ++j) {
        best = std::max(best, mode_value(gen.tail_block(lam), lam));
        lam *= 2.0;
    }
    return best;
}

Eigen::MatrixXd richardson_jacobian(const std::function<SystemField(const SystemField&)>& g,
                                    const SystemField& base, double h) {
    const int K = base.truncation();
    const int m = base.size();
    const int n = m * K;
    if (h <= 0.0) {
        const double scale = std::max(1.0, stack(base).cwiseAbs().maxCoeff());
        h = std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
    }
    auto jac_at = [&](double step) {
        Eigen::MatrixXd j(n, n);
        for (int col = 0; col < n; ++col) {
            SystemField up = base, dn = base;
            up.comp[col / K].coeff[col % K] += step;
            dn.comp[col / K].coeff[col % K] -= step;
            j.col(col) = (stack(g(up)) - stack(g(dn))) / (2.0 * step);
        }
        return j;
    };
    const Eigen::MatrixXd jh = jac_at(h);
    const Eigen::MatrixXd jh2 = jac_at(0.5 * h);
    return (4.0 * jh2 - jh) / 3.0;
}

} // namespace parastab
