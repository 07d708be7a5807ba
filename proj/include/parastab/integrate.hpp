#pragma once

#include "parastab/linops.hpp"
#include "parastab/problems.hpp"
#include "parastab/spaces.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace parastab {

/// Graded mesh t_j = T (j/N)^r resolving the weighted singularity at t = 0.
struct TimeMesh {
    double T = 1.0;
    int N = 256;
    double r = 1.0;

    double node(int j) const;
    std::vector<double> nodes() const;
};

/// Grading that equidistributes the s^(-mu q) source singularity.
double default_grading(double mu, double q);

struct SolveConfig {
    TimeMesh mesh;
    double dealias = 1.5;
    double fixed_point_tol = 1e-10;
    int max_outer_iterations = 25;
    double weight_mu = 0.0;
    double blowup_cap = 1e8;
};

enum class SolveStatus { Completed, BlowupFNorm, LeftAdmissibleRegion, MaxIterations };

struct StepMonitor {
    double t = 0.0;
    double f_norm = 0.0;
    double margin = 0.0;
};

struct TrajectorySolution {
    WeightedTrajectory trajectory;
    SolveStatus status = SolveStatus::Completed;
    /// first failing node when a blow-up alternative triggered; empty means ">= T"
    std::optional<double> t_plus_estimate;
    std::vector<StepMonitor> monitors;
    /// quasilinear solver: per outer iteration (sup E_alpha distance, weighted E_xi distance)
    std::vector<std::pair<double, double>> iteration_distances;
};

std::string to_string(SolveStatus s);

/// Mild-solution integrator u(t) = e^{tA}u0 + int_0^t e^{(t-s)A} f(u(s)) ds by
/// second-order exponential time differencing with per-mode phi functions on
/// the graded mesh.
TrajectorySolution solve_semilinear(const BlockGenerator& A,
                                    const std::function<SystemField(const SystemField&)>& f,
                                    const SystemField& u0, const SolveConfig& config);
TrajectorySolution solve_semilinear(const BlockGenerator& A,
                                    const std::function<SystemField(const SystemField&)>& f,
                                    const SystemField& u0, const SolveConfig& config,
                                    const std::function<double(const SystemField&)>& margin);

/// Freeze-coefficient fixed point: w^0(t) = e^{tA(u0)}u0, then w^{m+1} solves
/// v' = A(w^m)v + f(w^m) by exponential-trapezoid slices until the combined
/// C([0,T],E_alpha) + C_mu((0,T],E_xi) distance drops below fixed_point_tol.
TrajectorySolution solve_quasilinear(const ProblemSpec& problem, const SystemField& u0,
                                     const SolveConfig& config);

/// Independent reference: adaptive Dormand-Prince 5(4) on the stacked
/// coefficient system with dense output at the requested times.
TrajectorySolution oracle_integrate(
    const std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>& rhs,
    const SystemField& u0, double T, double tol, const std::vector<double>& sample_times);

/// Worst margin of the singular-kernel bound
///   t^a int_0^1 (1-s)^(-b) e^(-eta t (1-s)) s^(-c) ds
///     <= (sup_{r>0} r^a e^(-eta r)) * B(1-a-b, 1-c)
/// over the given times, by Gauss-Jacobi quadrature honoring both endpoint
/// singularities. Nonnegative when the bound holds.
double singular_bound_check(double a, double b, double c, double eta,
                            const std::vector<double>& t_samples);

/// Gauss-Jacobi nodes/weights on [-1,1] for the weight (1-x)^A (1+x)^B.
void gauss_jacobi(int n, double A, double B, std::vector<double>& nodes,
                  std::vector<double>& weights);

} // namespace parastab
