#pragma once

#include "parastab/spaces.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <utility>
#include <vector>

namespace parastab {

/// Per-mode family of m x m blocks representing a generator on the truncated
/// scale, plus a closed-form affine rule B(lambda) = tail_c0 + lambda*tail_c1
/// describing the blocks for every mode k >= K.
struct BlockGenerator {
    Domain1D domain;
    int block_size = 1;
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::MatrixXd tail_c0, tail_c1;

    int truncation() const { return static_cast<int>(blocks.size()); }
    Eigen::MatrixXd tail_block(double lambda) const { return tail_c0 + lambda * tail_c1; }
    /// Deviation between blocks[K-1] and the tail rule evaluated there.
    double tail_consistency() const;
};

/// Dense generator on the stacked coefficient vector (index = comp*K + k).
struct DenseGenerator {
    Domain1D domain;
    int block_size = 1;
    Eigen::MatrixXd matrix;

    int truncation() const { return static_cast<int>(matrix.rows()) / block_size; }
};

Eigen::VectorXd stack(const SystemField& u);
SystemField unstack(const Eigen::VectorXd& v, const Domain1D& domain, int components);

/// Sampled evidence for membership in the class H(E1,E0;kappa,omega):
/// extremal values of ||(mu-A)z||_0 / (|mu| ||z||_0 + ||z||_1).
struct GeneratorCertificate {
    double kappa_cert = 1.0;
    double omega_cert = 0.0;
    int sample_count = 0;
    double worst_ratio_low = 0.0;
    double worst_ratio_high = 0.0;
    int singular_failures = 0;
};

struct LinearizationReport {
    double spectral_bound = 0.0;
    int leading_mode = -1;
    std::vector<std::vector<std::complex<double>>> per_mode_eigs;
    bool tail_verified = false;
};

/// Matrix exponential: closed form for 1x1/2x2 blocks, scaling-and-squaring
/// otherwise.
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// exp(A), phi1(A) = (e^A-1)/A, phi2(A) = (e^A-1-A)/A^2 evaluated together.
struct PhiTriple {
    Eigen::MatrixXd e, p1, p2;
};
PhiTriple phi_triple(const Eigen::MatrixXd& a);

/// Eigenvalues of a small dense block (closed form for m <= 2).
std::vector<std::complex<double>> block_eigenvalues(const Eigen::MatrixXd& b);

SystemField apply_semigroup(const BlockGenerator& gen, double t, const SystemField& u);
SystemField apply_semigroup(const DenseGenerator& gen, double t, const SystemField& u);

/// Mode-k block of the chemotaxis linearization: at (1,1)
/// [[-lam-kappa, chi*lam],[1, -lam-1]], at (0,0) [[-lam+kappa, 0],[1, -lam-1]].
enum class ChemotaxisEquilibrium { Zero, One };
BlockGenerator chemotaxis_linearization(double chi, double kappa, ChemotaxisEquilibrium at,
                                        const Domain1D& domain, int truncation);

/// Supremum of eigenvalue real parts over all retained blocks, with a scaled
/// Gershgorin certificate that the affine tail cannot exceed it.
LinearizationReport spectral_bound(const BlockGenerator& gen);

/// Samples the resolvent ratio over random z in E_1 and random Re mu >= omega.
GeneratorCertificate resolvent_certificate(const BlockGenerator& gen, double omega, int trials,
                                           std::uint64_t seed = 1234);

/// Composes semigroup slices of piecewise-frozen generators; entry j of the
/// schedule is active on [time_j, time_{j+1}).
SystemField evolution_operator(const std::vector<std::pair<double, BlockGenerator>>& frozen,
                               double t, double s, const SystemField& u);

/// Absolute residual of the per-mode energy identity of the chemotaxis
/// eigenvalue system: Re L (|u|^2+|v|^2) =
/// -[lam(|u|^2+|v|^2) - chi lam Re(u conj(v)) + kappa|u|^2 - Re(u conj(v)) + |v|^2].
double energy_identity_residual(double chi, double kappa, double lambda,
                                std::complex<double> value, const Eigen::Vector2cd& vec);

/// M = sup_{t>0} t^{theta-vartheta} e^{omega_bar t} ||e^{t gen}||_{E_vartheta -> E_theta}
/// by per-mode maximization (closed form for the single-mode optimum plus a
/// log grid in t for non-normal transients).
double semigroup_norm_constants(const BlockGenerator& gen, double theta_from, double theta_to,
                                double omega_bar);

/// Central-difference Jacobian of G in coefficient directions with one
/// Richardson extrapolation step. h <= 0 selects eps^(1/3) scaled by the
/// state magnitude.
Eigen::MatrixXd richardson_jacobian(const std::function<SystemField(const SystemField&)>& g,
                                    const SystemField& base, double h);

} // namespace parastab
