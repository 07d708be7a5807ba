#include "parastab/spaces.hpp"

#include <algorithm>
#include <cmath>

namespace parastab {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// Nodes/weights of the n-point Gauss-Legendre rule on [-1,1], by Newton
// iteration on the Legendre recurrence.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            const double z1 = z;
            z = z1 - p1 / pp;
            if (std::abs(z - z1) < 1e-15)
                break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
}

} // namespace

double Domain1D::basis(int idx, double x) const {
    const int n = mode_number(idx);
    if (boundary == Boundary::Dirichlet)
        return std::sqrt(2.0 / length) * std::sin(n * kPi * x / length);
    if (n == 0)
        return std::sqrt(1.0 / length);
    return std::sqrt(2.0 / length) * std::cos(n * kPi * x / length);
}

double SpectralField::evaluate(double x) const {
    double v = 0.0;
    for (int k = 0; k < truncation(); ++k)
        v += coeff[k] * domain.basis(k, x);
    return v;
}

SpectralField zero_field(const Domain1D& domain, int truncation) {
    if (truncation < 1)
        throw InputError("zero_field: truncation must be >= 1");
    return SpectralField{domain, Eigen::VectorXd::Zero(truncation)};
}

void SystemField::check_consistent() const {
    if (comp.empty())
        throw InputError("SystemField: no components");
    for (const auto& c : comp) {
        if (!c.domain.same_as(comp.front().domain) || c.truncation() != comp.front().truncation())
            throw InputError("SystemField: components must share domain and truncation");
        if (!c.coeff.allFinite())
            throw InputError("SystemField: non-finite coefficient");
    }
}

SystemField zero_system(const Domain1D& domain, int components, int truncation) {
    SystemField s;
    for (int i = 0; i < components; ++i)
        s.comp.push_back(zero_field(domain, truncation));
    return s;
}

SystemField operator+(const SystemField& a, const SystemField& b) {
    SystemField r = a;
    for (int i = 0; i < r.size(); ++i)
        r.comp[i].coeff += b.comp[i].coeff;
    return r;
}

SystemField operator-(const SystemField& a, const SystemField& b) {
    SystemField r = a;
    for (int i = 0; i < r.size(); ++i)
        r.comp[i].coeff -= b.comp[i].coeff;
    return r;
}

SystemField operator*(double s, const SystemField& a) {
    SystemField r = a;
    for (auto& c : r.comp)
        c.coeff *= s;
    return r;
}

void WeightedTrajectory::check_consistent() const {
    if (states.empty() || times.size() != states.size())
        throw InputError("WeightedTrajectory: empty or mismatched samples");
    for (std::size_t i = 0; i + 1 < times.size(); ++i)
        if (!(times[i] < times[i + 1]))
            throw InputError("WeightedTrajectory: times must be strictly increasing");
    if (times.front() < 0.0)
        throw InputError("WeightedTrajectory: negative time");
}

SpectralField project_function(const std::function<double(double)>& f, const Domain1D& domain,
                               int truncation) {
    if (truncation < 1)
        throw InputError("project_function: truncation must be >= 1");
    const int per_panel = 16;
    const int panels = std::max(2, (5 * truncation + per_panel - 1) / per_panel);
    std::vector<double> gx, gw;
    gauss_legendre(per_panel, gx, gw);

    Eigen::VectorXd c = Eigen::VectorXd::Zero(truncation);
    const double h = domain.length / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = p * h;
        for (int i = 0; i < per_panel; ++i) {
            const double x = a + 0.5 * h * (gx[i] + 1.0);
            const double fx = f(x);
            if (!std::isfinite(fx))
                throw InputError("project_function: non-finite sample at x=" + std::to_string(x));
            const double wq = 0.5 * h * gw[i];
            for (int k = 0; k < truncation; ++k)
                c[k] += wq * fx * domain.basis(k, x);
        }
    }
    return SpectralField{domain, c};
}

double sobolev_norm(const SpectralField& u, double s) {
    if (!std::isfinite(s))
        throw InputError("sobolev_norm: index must be finite");
    double acc = 0.0;
    for (int k = 0; k < u.truncation(); ++k)
        acc += std::pow(1.0 + u.domain.eigenvalue(k), s) * u.coeff[k] * u.coeff[k];
    return std::sqrt(acc);
}

double sobolev_norm(const SystemField& u, double s) {
    double acc = 0.0;
    for (const auto& c : u.comp) {
        const double n = sobolev_norm(c, s);
        acc += n * n;
    }
    return std::sqrt(acc);
}

double weighted_sup_norm(const WeightedTrajectory& traj, double mu, double s, int component) {
    traj.check_consistent();
    if (component < 0 || component >= traj.states.front().size())
        throw InputError("weighted_sup_norm: component index out of range");
    double best = -1.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const double t = traj.times[i];
        if (t <= 0.0)
            continue;
        best = std::max(best, std::pow(t, mu) * sobolev_norm(traj.states[i].comp[component], s));
    }
    if (best < 0.0)
        throw InputError("weighted_sup_norm: no positive-time samples");
    return best;
}

CollocationGrid::CollocationGrid(double length, int nodes) : length_(length), nodes_(nodes) {
    if (nodes < 1)
        throw InputError("CollocationGrid: need at least one node");
    x_.resize(nodes);
    for (int i = 0; i < nodes; ++i)
        x_[i] = length * (i + 0.5) / nodes;
    w_ = length / nodes;
    // eager tables up to the mode count the quadrature can represent, so the
    // grid is immutable and safe to share across threads
    cos_.resize(nodes, nodes);
    sin_.resize(nodes, nodes);
    for (int k = 0; k < nodes; ++k)
        for (int i = 0; i < nodes; ++i) {
            cos_(k, i) = (k == 0) ? std::sqrt(1.0 / length_)
                                  : std::sqrt(2.0 / length_) * std::cos(k * kPi * x_[i] / length_);
            sin_(k, i) = std::sqrt(2.0 / length_) * std::sin((k + 1) * kPi * x_[i] / length_);
        }
}

Eigen::VectorXd CollocationGrid::evaluate(const SpectralField& u) const {
    const int K = u.truncation();
    if (K > nodes_)
        throw InputError("CollocationGrid: more modes than quadrature nodes");
    if (u.domain.boundary == Boundary::Dirichlet)
        return sin_.topRows(K).transpose() * u.coeff;
    return cos_.topRows(K).transpose() * u.coeff;
}

SpectralField CollocationGrid::project(const Eigen::VectorXd& values, Boundary basis,
                                       int truncation) const {
    // the sine mode with number == nodes alternates as +-1 on the midpoint
    // grid and carries a different quadrature weight; keep it out of range
    const int max_modes = basis == Boundary::Dirichlet ? nodes_ - 1 : nodes_;
    if (truncation > max_modes)
        throw InputError("CollocationGrid: more modes than the quadrature resolves");
    Domain1D d{length_, basis};
    Eigen::VectorXd c;
    if (basis == Boundary::Dirichlet)
        c = w_ * (sin_.topRows(truncation) * values);
    else
        c = w_ * (cos_.topRows(truncation) * values);
    return SpectralField{d, c};
}

int dealias_nodes(int truncation, double dealias) {
    if (dealias < 1.0)
        throw InputError("dealias factor must be >= 1");
    // one node beyond ceil(dealias*K): Dirichlet mode numbers reach K (not
    // K-1), which otherwise puts the top retained mode exactly on the first
    // aliased frequency at the minimal dealias factor
    return std::max(static_cast<int>(std::ceil(dealias * truncation)) + 1, truncation + 2);
}

SpectralField derivative(const SpectralField& u) {
    const int K = u.truncation();
    const double ell = u.domain.length;
    if (u.domain.boundary == Boundary::Dirichlet) {
        // sine modes 1..K -> cosine modes 1..K
        Eigen::VectorXd c = Eigen::VectorXd::Zero(K + 1);
        for (int n = 1; n <= K; ++n)
            c[n] = (n * kPi / ell) * u.coeff[n - 1];
        return SpectralField{Domain1D{ell, Boundary::Neumann}, c};
    }
    // cosine modes 0..K-1 -> sine modes 1..K-1
    const int Kout = std::max(K - 1, 1);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(Kout);
    for (int n = 1; n < K; ++n)
        s[n - 1] = -(n * kPi / ell) * u.coeff[n];
    return SpectralField{Domain1D{ell, Boundary::Dirichlet}, s};
}

SystemField pointwise_compose(const SystemField& u, const std::function<double(double)>& g,
                              double dealias, Boundary out_basis) {
    u.check_consistent();
    const int K = u.truncation();
    CollocationGrid grid(u.domain().length, dealias_nodes(K, dealias));
    SystemField out;
    for (const auto& c : u.comp) {
        Eigen::VectorXd vals = grid.evaluate(c);
        for (int i = 0; i < vals.size(); ++i) {
            vals[i] = g(vals[i]);
            if (!std::isfinite(vals[i]))
                throw NumericError("pointwise_compose: non-finite value at node " +
                                   std::to_string(i) + " (x=" + std::to_string(grid.node(i)) + ")");
        }
        out.comp.push_back(grid.project(vals, out_basis, K));
    }
    return out;
}

SystemField pointwise_compose(const SystemField& u, const std::function<double(double)>& g,
                              double dealias) {
    return pointwise_compose(u, g, dealias, u.domain().boundary);
}

} // namespace parastab
