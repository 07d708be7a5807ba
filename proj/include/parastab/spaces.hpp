#pragma once

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parastab {

struct InputError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Boundary { Dirichlet, Neumann };

/// Interval (0, length) with the eigenbasis of the Laplacian under the given
/// boundary condition. Dirichlet modes are numbered 1,2,... and Neumann modes
/// 0,1,...; array position idx holds mode number idx+1 (Dirichlet) or idx
/// (Neumann).
struct Domain1D {
    double length = 1.0;
    Boundary boundary = Boundary::Neumann;

    int mode_number(int idx) const { return boundary == Boundary::Dirichlet ? idx + 1 : idx; }
    double eigenvalue(int idx) const {
        const double w = mode_number(idx) * 3.14159265358979323846264338327950288 / length;
        return w * w;
    }
    /// L2-orthonormal eigenfunction at array position idx.
    double basis(int idx, double x) const;
    bool same_as(const Domain1D& other) const {
        return boundary == other.boundary && length == other.length;
    }
};

/// A function on the interval represented by its first K eigenbasis coefficients.
struct SpectralField {
    Domain1D domain;
    Eigen::VectorXd coeff;

    int truncation() const { return static_cast<int>(coeff.size()); }
    double evaluate(double x) const;
};

SpectralField zero_field(const Domain1D& domain, int truncation);

/// Fixed-length tuple of fields sharing one domain and truncation.
struct SystemField {
    std::vector<SpectralField> comp;

    int size() const { return static_cast<int>(comp.size()); }
    int truncation() const { return comp.empty() ? 0 : comp.front().truncation(); }
    const Domain1D& domain() const { return comp.front().domain; }
    void check_consistent() const;
};

SystemField zero_system(const Domain1D& domain, int components, int truncation);
SystemField operator+(const SystemField& a, const SystemField& b);
SystemField operator-(const SystemField& a, const SystemField& b);
SystemField operator*(double s, const SystemField& a);

/// Time-stamped states with the C_mu weight they are measured in.
struct WeightedTrajectory {
    std::vector<double> times; // strictly increasing, optionally starting at 0
    std::vector<SystemField> states;
    double weight = 0.0; // mu

    void check_consistent() const;
};

/// Composite Gauss-Legendre projection of a pointwise function onto the first
/// K eigenmodes. Uses >= 4K nodes; band-limited inputs are reproduced to
/// ~1e-12 relative.
SpectralField project_function(const std::function<double(double)>& f, const Domain1D& domain,
                               int truncation);

/// Spectral H^s norm: (sum_k (1+lambda_k)^s c_k^2)^{1/2}.
double sobolev_norm(const SpectralField& u, double s);
double sobolev_norm(const SystemField& u, double s);

/// Norm of the scale space E_theta realized as H^{2 theta}.
inline double scale_norm(const SystemField& u, double theta) { return sobolev_norm(u, 2.0 * theta); }
inline double scale_norm(const SpectralField& u, double theta) { return sobolev_norm(u, 2.0 * theta); }

/// sup over positive-time samples of t^mu * H^s norm of one component.
double weighted_sup_norm(const WeightedTrajectory& traj, double mu, double s, int component);

/// Midpoint collocation grid shared by all pseudospectral nonlinearities.
/// Holds evaluation tables for both bases so that mixed-parity products
/// (sine fields times cosine fields) can be formed pointwise and projected
/// back onto either basis.
class CollocationGrid {
  public:
    CollocationGrid(double length, int nodes);

    int nodes() const { return nodes_; }
    double node(int i) const { return x_[i]; }
    double quad_weight() const { return w_; }

    Eigen::VectorXd evaluate(const SpectralField& u) const;
    /// Quadrature projection of grid values onto the first K modes of the basis.
    SpectralField project(const Eigen::VectorXd& values, Boundary basis, int truncation) const;

  private:
    double length_;
    int nodes_;
    std::vector<double> x_;
    double w_;
    Eigen::MatrixXd cos_; // row k = cosine mode k at all nodes
    Eigen::MatrixXd sin_; // row j = sine mode j+1 at all nodes
};

/// Number of collocation nodes for truncation K at a given dealias factor.
int dealias_nodes(int truncation, double dealias);

/// Exact spectral derivative. Dirichlet (sine) input yields a Neumann (cosine)
/// field with K+1 coefficients; Neumann input yields a Dirichlet field with
/// max(K-1,1) coefficients.
SpectralField derivative(const SpectralField& u);

/// Collocation composition: evaluate on ceil(dealias*K) midpoint nodes, apply
/// g to the values of every component, project back to K coefficients.
/// For polynomial g of degree d and dealias >= (d+1)/2 this is the exact
/// Galerkin projection. The output basis defaults to the input basis; passing
/// a different basis projects the composed values onto that basis instead
/// (implicit parity extension).
SystemField pointwise_compose(const SystemField& u, const std::function<double(double)>& g,
                              double dealias);
SystemField pointwise_compose(const SystemField& u, const std::function<double(double)>& g,
                              double dealias, Boundary out_basis);

} // namespace parastab
