#pragma once

#include "parastab/exponents.hpp"
#include "parastab/linops.hpp"
#include "parastab/spaces.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace parastab {

/// One evolution problem v' = A(v)v + f(v) behind a single abstraction.
/// Semilinear instances carry a fixed BlockGenerator; quasilinear ones expose
/// the state-dependent action and its dense assembly on the truncated basis.
struct ProblemSpec {
    std::string name;
    int system_size = 1;
    Domain1D domain;
    int truncation = 256;
    double dealias = 1.5;
    ExponentProfile profile;
    bool quasilinear = false;

    BlockGenerator linear_part; // semilinear A; for quasilinear problems A at the reference equilibrium
    std::function<SystemField(const SystemField&)> nonlinearity;           // f
    std::function<SystemField(const SystemField&, const SystemField&)> df; // w -> df(base)[w]
    std::function<SystemField(const SystemField&, const SystemField&)> apply_A; // (y,w) -> A(y)w
    std::function<Eigen::MatrixXd(const SystemField&)> assemble_A; // dense stacked A(y)
    std::function<double(const SystemField&)> admissible_margin;

    std::vector<SystemField> equilibria;
    std::vector<std::string> references;
};

/// A(y)w for the problem's generator frozen at y (for semilinear problems the
/// block generator, independent of y).
SystemField apply_generator(const BlockGenerator& gen, const SystemField& w);

/// Right-hand side A(y)y + f(y).
SystemField problem_rhs(const ProblemSpec& p, const SystemField& y);

/// H^0 norm of the assembled right-hand side at v.
double equilibrium_residual(const ProblemSpec& p, const SystemField& v);

/// Keller-Segel system with logistic source on a Neumann interval, split as
/// linear blocks [[-lam+kappa, 0],[1, -lam-1]] plus
/// f(u,v) = (-chi (u v_x)_x - kappa u^2, 0).
ProblemSpec make_chemotaxis(double chi, double kappa, const Domain1D& domain, int truncation);
ProblemSpec make_chemotaxis(double chi, double kappa, const Domain1D& domain, int truncation,
                            const ExponentProfile& profile);

/// Quasilinear problem u' = div(a(u) grad u) + |u_x|^kappa with homogeneous
/// Dirichlet conditions. a must stay above a_min on the probe range.
ProblemSpec make_gradient_quasilinear(const std::function<double(double)>& a,
                                      const std::function<double(double)>& a_prime, double kappa,
                                      const Domain1D& domain, const GradientIndices& indices,
                                      int truncation);
/// Default diffusivity a(u) = 1 + u^2/(1+u^2).
ProblemSpec make_gradient_quasilinear(double kappa, const Domain1D& domain,
                                      const GradientIndices& indices, int truncation);

struct QuadraticOptions {
    Domain1D domain{1.0, Boundary::Neumann};
    int truncation = 64;
    /// coefficient of the zeroth-order linear term: -m (stable) or +kappa (unstable)
    double linear_coeff = -1.0;
    /// A(u)w = ((1+sigma(u)) w_x)_x + linear_coeff*w with sigma(u) = u^2/(1+u^2);
    /// false freezes sigma at 0 (semilinear instance)
    bool state_dependent = true;
};

/// u' = A(u)u + Q(u,u) with a pointwise bilinear form Q. Asymmetric forms are
/// symmetrized with a warning.
ProblemSpec make_quadratic(const QuadraticOptions& opts,
                           const std::function<double(double, double)>& q,
                           const ExponentProfile& profile);

/// Dense linearization A(v*) + (dA(v*)[.])v* + df(v*) assembled by Richardson-
/// extrapolated central differences of w -> A(v*+w)v* + f(v*+w).
/// h <= 0 selects the default step. Requires an equilibrium residual <= 1e-8.
DenseGenerator numeric_linearization(const ProblemSpec& p, const SystemField& v_star, double h);

} // namespace parastab
