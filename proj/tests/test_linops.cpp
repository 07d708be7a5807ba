#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "parastab/linops.hpp"
#include "parastab/rng.hpp"
#include "parastab/special.hpp"

#include <cmath>
#include <complex>

using namespace parastab;

namespace {
constexpr double kPi = 3.14159265358979323846264338327950288;

BlockGenerator diagonal_generator(const Domain1D& dom, int K, double shift) {
    // blocks -lambda_k + shift
    BlockGenerator g;
    g.domain = dom;
    g.block_size = 1;
    g.tail_c0 = Eigen::MatrixXd::Constant(1, 1, shift);
    g.tail_c1 = Eigen::MatrixXd::Constant(1, 1, -1.0);
    for (int k = 0; k < K; ++k)
        g.blocks.push_back(g.tail_block(dom.eigenvalue(k)));
    return g;
}
} // namespace

TEST_CASE("matrix exponential and phi functions") {
    SUBCASE("nilpotent block is exact") {
        Eigen::MatrixXd n(2, 2);
        n << 0, 1, 0, 0;
        const Eigen::MatrixXd e = expm(2.0 * n);
        CHECK(e(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(e(0, 1) == doctest::Approx(2.0).epsilon(1e-15));
        CHECK(e(1, 0) == doctest::Approx(0.0));
        CHECK(e(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    }

    SUBCASE("phi triple matches scalar formulas on diagonal blocks") {
        for (double z : {-30.0, -2.0, -1e-3, 1e-9, 0.5, 3.0}) {
            Eigen::MatrixXd a(2, 2);
            a << z, 0.0, 0.0, 0.5 * z - 0.1;
            const PhiTriple t = phi_triple(a);
            auto p1 = [](double x) { return x == 0.0 ? 1.0 : std::expm1(x) / x; };
            auto p2 = [](double x) {
                return std::abs(x) < 1e-3 ? 0.5 + x / 6.0 + x * x / 24.0
                                          : (std::expm1(x) - x) / (x * x);
            };
            CHECK(t.e(0, 0) == doctest::Approx(std::exp(z)).epsilon(1e-12));
            CHECK(t.p1(0, 0) == doctest::Approx(p1(z)).epsilon(1e-11));
            CHECK(t.p2(0, 0) == doctest::Approx(p2(z)).epsilon(1e-10));
            CHECK(std::abs(t.p1(0, 1)) <= 1e-14);
        }
    }

    SUBCASE("phi triple against quadrature of the integral representations") {
        // phi1(A) = int_0^1 e^{sA} ds, phi2(A) = int_0^1 (1-s) e^{sA} ds
        Rng rng(13);
        for (int trial = 0; trial < 20; ++trial) {
            Eigen::MatrixXd a(2, 2);
            for (int i = 0; i < 4; ++i)
                a(i / 2, i % 2) = rng.uniform(-4.0, 2.0);
            const PhiTriple fast = phi_triple(a);
            Eigen::MatrixXd q1 = Eigen::MatrixXd::Zero(2, 2), q2 = q1;
            const int n = 4000;
            for (int i = 0; i < n; ++i) {
                const double s = (i + 0.5) / n;
                const Eigen::MatrixXd es = expm(s * a);
                q1 += es / n;
                q2 += (1.0 - s) * es / n;
            }
            CHECK((fast.p1 - q1).cwiseAbs().maxCoeff() <= 1e-6);
            CHECK((fast.p2 - q2).cwiseAbs().maxCoeff() <= 1e-6);
        }
    }

    SUBCASE("generic path on a 3x3 diagonal block") {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
        a(0, 0) = -1.0;
        a(1, 1) = -2.0;
        a(2, 2) = 0.3;
        const PhiTriple t = phi_triple(a);
        CHECK(t.e(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        CHECK(t.p1(1, 1) == doctest::Approx(std::expm1(-2.0) / -2.0).epsilon(1e-12));
        CHECK(t.p2(2, 2) == doctest::Approx((std::expm1(0.3) - 0.3) / 0.09).epsilon(1e-11));
    }
}

TEST_CASE("apply_semigroup") {
    Domain1D dir{1.0, Boundary::Dirichlet};
    const int K = 4;
    const BlockGenerator heat = diagonal_generator(dir, K, 0.0);
    SystemField u = zero_system(dir, 1, K);
    u.comp[0].coeff[0] = 1.0;

    SUBCASE("t = 0 is the identity") {
        const SystemField v = apply_semigroup(heat, 0.0, u);
        CHECK(v.comp[0].coeff[0] == doctest::Approx(1.0));
    }
    SUBCASE("heat decay of the first mode") {
        const SystemField v = apply_semigroup(heat, 0.1, u);
        CHECK(v.comp[0].coeff[0] == doctest::Approx(std::exp(-kPi * kPi / 10.0)).epsilon(1e-13));
    }
    SUBCASE("negative time is rejected") {
        CHECK_THROWS_AS(apply_semigroup(heat, -1.0, u), InputError);
    }
    SUBCASE("semigroup composition law") {
        Rng rng(21);
        SystemField w = zero_system(dir, 1, K);
        for (int k = 0; k < K; ++k)
            w.comp[0].coeff[k] = rng.normal();
        const SystemField one_step = apply_semigroup(heat, 0.7, w);
        const SystemField two_step = apply_semigroup(heat, 0.3, apply_semigroup(heat, 0.4, w));
        CHECK((one_step.comp[0].coeff - two_step.comp[0].coeff).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("chemotaxis linearization blocks and spectral bound") {
    Domain1D neu{1.0, Boundary::Neumann};

    SUBCASE("mode 0 at the (1,1) equilibrium") {
        const auto gen = chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, neu, 8);
        CHECK(gen.blocks[0](0, 0) == doctest::Approx(-0.5));
        CHECK(gen.blocks[0](0, 1) == doctest::Approx(0.0));
        CHECK(gen.blocks[0](1, 0) == doctest::Approx(1.0));
        CHECK(gen.blocks[0](1, 1) == doctest::Approx(-1.0));
        const auto eigs = block_eigenvalues(gen.blocks[0]);
        const double lo = std::min(eigs[0].real(), eigs[1].real());
        const double hi = std::max(eigs[0].real(), eigs[1].real());
        CHECK(hi == doctest::Approx(-0.5).epsilon(1e-13));
        CHECK(lo == doctest::Approx(-1.0).epsilon(1e-13));
        CHECK(gen.tail_consistency() <= 1e-10);
    }

    SUBCASE("mode 1 eigenvalues at (1,1)") {
        const auto gen = chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, neu, 8);
        const auto eigs = block_eigenvalues(gen.blocks[1]);
        const double lo = std::min(eigs[0].real(), eigs[1].real());
        const double hi = std::max(eigs[0].real(), eigs[1].real());
        CHECK(hi == doctest::Approx(-6.1694).epsilon(1e-4));
        CHECK(lo == doctest::Approx(-15.0698).epsilon(1e-4));
    }

    SUBCASE("spectral bound at (1,1) with verified tail") {
        const auto rep =
            spectral_bound(chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, neu, 64));
        CHECK(rep.spectral_bound == doctest::Approx(-0.5).epsilon(1e-12));
        CHECK(rep.leading_mode == 0);
        CHECK(rep.tail_verified);
    }

    SUBCASE("instability eigenvalue kappa at (0,0)") {
        for (double kappa : {0.3, 0.7, 1.5}) {
            const auto rep = spectral_bound(
                chemotaxis_linearization(2.0, kappa, ChemotaxisEquilibrium::Zero, neu, 32));
            CHECK(std::abs(rep.spectral_bound - kappa) <= 1e-12);
            CHECK(rep.tail_verified);
        }
        // mode-0 block at (0,0) is lower triangular with eigenvalues {kappa, -1}
        const auto gen = chemotaxis_linearization(2.0, 0.7, ChemotaxisEquilibrium::Zero, neu, 4);
        const auto eigs = block_eigenvalues(gen.blocks[0]);
        const double lo = std::min(eigs[0].real(), eigs[1].real());
        const double hi = std::max(eigs[0].real(), eigs[1].real());
        CHECK(hi == doctest::Approx(0.7).epsilon(1e-14));
        CHECK(lo == doctest::Approx(-1.0).epsilon(1e-14));
    }

    SUBCASE("pure Dirichlet heat") {
        Domain1D dir{1.0, Boundary::Dirichlet};
        const auto rep = spectral_bound(diagonal_generator(dir, 16, 0.0));
        CHECK(rep.spectral_bound == doctest::Approx(-kPi * kPi).epsilon(1e-13));
        CHECK(rep.tail_verified);
    }

    SUBCASE("Dirichlet domain is rejected") {
        Domain1D dir{1.0, Boundary::Dirichlet};
        CHECK_THROWS_AS(chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, dir, 8),
                        InputError);
    }

    SUBCASE("dispersion stability region chi <= 2, kappa > 1/4") {
        for (double chi : {0.5, 1.0, 1.5, 2.0})
            for (double kappa : {0.26, 0.3, 0.5, 1.0, 2.0, 4.0}) {
                const auto rep = spectral_bound(
                    chemotaxis_linearization(chi, kappa, ChemotaxisEquilibrium::One, neu, 48));
                CHECK(rep.spectral_bound < 0.0);
                CHECK(rep.tail_verified);
            }
    }

    SUBCASE("per-mode eigenvalues never exceed the bound") {
        const auto rep =
            spectral_bound(chemotaxis_linearization(1.3, 0.8, ChemotaxisEquilibrium::One, neu, 32));
        for (const auto& evs : rep.per_mode_eigs)
            for (const auto& ev : evs)
                CHECK(ev.real() <= rep.spectral_bound + 1e-12);
    }
}

TEST_CASE("resolvent certificate") {
    Domain1D neu{1.0, Boundary::Neumann};
    const BlockGenerator gen = diagonal_generator(neu, 12, -1.0); // -lambda_k - 1

    SUBCASE("single mode stays at ratio 1 for real mu") {
        BlockGenerator one = gen;
        one.blocks.resize(1);
        const auto cert = resolvent_certificate(one, 0.0, 400, 7);
        CHECK(cert.worst_ratio_high <= 1.0 + 1e-12);
        CHECK(cert.worst_ratio_high >= 0.99); // attained on the real samples
    }

    SUBCASE("mixed modes stay within kappa = 2") {
        const auto cert = resolvent_certificate(gen, 0.0, 1000, 11);
        CHECK(cert.kappa_cert <= 2.0 + 1e-9);
        CHECK(cert.sample_count == 1000);
        CHECK(cert.singular_failures == 0);
        CHECK(1.0 / cert.kappa_cert <= cert.worst_ratio_low + 1e-12);
        CHECK(cert.worst_ratio_low <= cert.worst_ratio_high);
    }

    SUBCASE("chemotaxis generator carries a finite certificate") {
        const auto chem = chemotaxis_linearization(2.0, 0.5, ChemotaxisEquilibrium::One, neu, 16);
        const auto cert = resolvent_certificate(chem, 0.0, 800, 3);
        CHECK(cert.singular_failures == 0);
        CHECK(cert.kappa_cert >= 1.0);
        CHECK(cert.kappa_cert < 10.0);
    }

    SUBCASE("mu at an eigenvalue is flagged as singular") {
        BlockGenerator one = gen;
        one.blocks.resize(1); // single block with eigenvalue -1
        bool flagged = false;
        for (std::uint64_t seed = 0; seed < 300 && !flagged; ++seed)
            flagged = resolvent_certificate(one, -1.0, 50, seed).singular_failures > 0;
        CHECK(flagged);
    }
}

TEST_CASE("evolution operator") {
    Domain1D neu{1.0, Boundary::Neumann};
    const BlockGenerator g1 = diagonal_generator(neu, 1, -1.0);
    const BlockGenerator g2 = diagonal_generator(neu, 1, -2.0);
    SystemField u = zero_system(neu, 1, 1);
    u.comp[0].coeff[0] = 1.0;

    SUBCASE("constant schedule equals the semigroup") {
        const auto v = evolution_operator({{0.0, g1}}, 0.8, 0.1, u);
        CHECK(v.comp[0].coeff[0] == doctest::Approx(std::exp(-0.7)).epsilon(1e-14));
    }
    SUBCASE("two slices of one generator compose") {
        const auto v = evolution_operator({{0.0, g1}, {0.5, g1}}, 1.0, 0.0, u);
        CHECK(v.comp[0].coeff[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-13));
    }
    SUBCASE("alternating schedule multiplies the slice factors") {
        const auto v = evolution_operator({{0.0, g1}, {0.5, g2}}, 1.0, 0.0, u);
        CHECK(v.comp[0].coeff[0] == doctest::Approx(std::exp(-1.5)).epsilon(1e-13));
    }
    SUBCASE("t < s is rejected") {
        CHECK_THROWS_AS(evolution_operator({{0.0, g1}}, 0.1, 0.6, u), InputError);
    }
    SUBCASE("refinement of the freeze schedule converges, empirical order near 1") {
        // time-dependent generator a(t) = -(1 + t); exact factor exp(-(T + T^2/2))
        const double T = 1.0;
        auto frozen_error = [&](int slices) {
            std::vector<std::pair<double, BlockGenerator>> sched;
            for (int j = 0; j < slices; ++j) {
                const double tj = T * j / slices;
                sched.emplace_back(tj, diagonal_generator(neu, 1, -(1.0 + tj)));
            }
            const auto v = evolution_operator(sched, T, 0.0, u);
            return std::abs(v.comp[0].coeff[0] - std::exp(-1.5));
        };
        const double e1 = frozen_error(16);
        const double e2 = frozen_error(32);
        const double rho = std::log2(e1 / e2);
        CHECK(rho >= 0.8);
        CHECK(rho <= 1.3);
    }
}

TEST_CASE("energy identity residual") {
    const double chi = 2.0, kappa = 0.5;

    auto block = [&](double lam) {
        Eigen::Matrix2d b;
        b << -lam - kappa, chi * lam, 1.0, -lam - 1.0;
        return b;
    };

    SUBCASE("exact eigenpairs have vanishing residual") {
        for (double lam : {0.0, kPi * kPi, 4.0 * kPi * kPi}) {
            const Eigen::Matrix2d b = block(lam);
            Eigen::EigenSolver<Eigen::Matrix2d> es(b);
            for (int i = 0; i < 2; ++i) {
                const Eigen::Vector2cd v = es.eigenvectors().col(i);
                CHECK(energy_identity_residual(chi, kappa, lam, es.eigenvalues()(i), v) <= 1e-10);
            }
        }
    }

    SUBCASE("lambda = 0 pair forced by the block") {
        // eigenvalue -kappa of [[-kappa, 0],[1, -1]] with vector (1-kappa, 1)
        Eigen::Vector2cd v;
        v << std::complex<double>(1.0 - kappa, 0.0), std::complex<double>(1.0, 0.0);
        CHECK(energy_identity_residual(chi, kappa, 0.0, std::complex<double>(-kappa, 0.0), v) <=
              1e-12);
    }

    SUBCASE("random non-eigenvector is rejected by the identity") {
        Eigen::Vector2cd v;
        v << std::complex<double>(0.8, 0.1), std::complex<double>(-0.4, 0.7);
        CHECK(energy_identity_residual(chi, kappa, kPi * kPi, std::complex<double>(-3.0, 0.2), v) >
              1e-3);
    }
}

TEST_CASE("semigroup norm constants") {
    SUBCASE("heat with theta_from = theta_to gives M = 1") {
        Domain1D dir{1.0, Boundary::Dirichlet};
        const double m = semigroup_norm_constants(diagonal_generator(dir, 16, 0.0), 0.3, 0.3, 1.0);
        CHECK(m == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("scalar closed form") {
        Domain1D neu{1.0, Boundary::Neumann};
        BlockGenerator g = diagonal_generator(neu, 1, -1.0); // single mode, eigenvalue -1
        const double m = semigroup_norm_constants(g, 0.0, 0.5, 0.5);
        CHECK(m == doctest::Approx(std::exp(-0.5)).epsilon(1e-10));
    }
    SUBCASE("omega_bar beyond the spectral bound diverges") {
        Domain1D neu{1.0, Boundary::Neumann};
        CHECK_THROWS_AS(semigroup_norm_constants(diagonal_generator(neu, 4, -1.0), 0.0, 0.5, 2.0),
                        NumericError);
    }
}

TEST_CASE("richardson jacobian on a polynomial map") {
    Domain1D neu{1.0, Boundary::Neumann};
    SystemField base = zero_system(neu, 1, 3);
    base.comp[0].coeff << 0.3, -0.2, 0.1;
    // G(u)_k = u_k^2 + 2 u_{k+1 mod 3}
    auto g = [](const SystemField& u) {
        SystemField out = u;
        for (int k = 0; k < 3; ++k)
            out.comp[0].coeff[k] =
                u.comp[0].coeff[k] * u.comp[0].coeff[k] + 2.0 * u.comp[0].coeff[(k + 1) % 3];
        return out;
    };
    const Eigen::MatrixXd j = richardson_jacobian(g, base, 0.0);
    for (int k = 0; k < 3; ++k) {
        CHECK(j(k, k) == doctest::Approx(2.0 * base.comp[0].coeff[k]).epsilon(1e-8));
        CHECK(j(k, (k + 1) % 3) == doctest::Approx(2.0).epsilon(1e-8));
    }
}
