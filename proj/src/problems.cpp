#include "parastab/problems.hpp"

#include <cmath>
#include <iostream>
#include <limits>

namespace parastab {

namespace {

constexpr double kSmoothingEps = 1e-12; // |.| smoothing inside |u_x|^kappa
constexpr double kDiffusivityFloor = 1e-6;

std::shared_ptr<CollocationGrid> make_grid(const Domain1D& domain, int truncation, double dealias) {
    // one extra mode of headroom so that derivatives (K+1 cosine modes) are
    // representable on the grid
    const int nodes = dealias_nodes(truncation + 1, dealias);
    return std::make_shared<CollocationGrid>(domain.length, nodes);
}

} // namespace

SystemField apply_generator(const BlockGenerator& gen, const SystemField& w) {
    const int K = w.truncation();
    const int m = gen.block_size;
    SystemField out = w;
    Eigen::VectorXd z(m);
    for (int k = 0; k < K; ++k) {
        for (int c = 0; c < m; ++c)
            z[c] = w.comp[c].coeff[k];
        const Eigen::VectorXd y = gen.blocks[k] * z;
        for (int c = 0; c < m; ++c)
            out.comp[c].coeff[k] = y[c];
    }
    return out;
}

SystemField problem_rhs(const ProblemSpec& p, const SystemField& y) {
    SystemField lin = p.quasilinear ? p.apply_A(y, y) : apply_generator(p.linear_part, y);
    return lin + p.nonlinearity(y);
}

double equilibrium_residual(const ProblemSpec& p, const SystemField& v) {
    return sobolev_norm(problem_rhs(p, v), 0.0);
}

ProblemSpec make_chemotaxis(double chi, double kappa, const Domain1D& domain, int truncation) {
    return make_chemotaxis(chi, kappa, domain, truncation, chemotaxis_profile(0.3, 4.0, 1));
}

ProblemSpec make_chemotaxis(double chi, double kappa, const Domain1D& domain, int truncation,
                            const ExponentProfile& profile) {
    if (domain.boundary != Boundary::Neumann)
        throw InputError("make_chemotaxis: boundary condition is Neumann");
    if (!(chi > 0.0) || !(kappa > 0.0))
        throw InputError("make_chemotaxis: chi and kappa must be positive");

    ProblemSpec p;
    p.name = "chemotaxis";
    p.system_size = 2;
    p.domain = domain;
    p.truncation = truncation;
    p.profile = profile;
    p.quasilinear = false;
    p.references = {"keller-segel logistic", "neumann interval"};

    // linear split: [[Delta + kappa, 0], [1, Delta - 1]]
    p.linear_part.domain = domain;
    p.linear_part.block_size = 2;
    p.linear_part.tail_c0.resize(2, 2);
    p.linear_part.tail_c0 << kappa, 0.0, 1.0, -1.0;
    p.linear_part.tail_c1.resize(2, 2);
    p.linear_part.tail_c1 << -1.0, 0.0, 0.0, -1.0;
    for (int k = 0; k < truncation; ++k)
        p.linear_part.blocks.push_back(p.linear_part.tail_block(domain.eigenvalue(k)));

    auto grid = make_grid(domain, truncation, p.dealias);
    const int K = truncation;

    // f(u,v) = (-chi (u v_x)_x - kappa u^2, 0)
    p.nonlinearity = [grid, chi, kappa, K](const SystemField& s) {
        const Eigen::VectorXd ug = grid->evaluate(s.comp[0]);
        const Eigen::VectorXd vxg = grid->evaluate(derivative(s.comp[1]));
        const SpectralField w = grid->project(ug.cwiseProduct(vxg), Boundary::Dirichlet, K);
        const SpectralField dw = derivative(w); // K+1 cosine coefficients
        const SpectralField u2 = grid->project(ug.cwiseProduct(ug), Boundary::Neumann, K);
        SystemField out = zero_system(s.domain(), 2, K);
        out.comp[0].coeff = -chi * dw.coeff.head(K) - kappa * u2.coeff;
        return out;
    };

    p.df = [grid, chi, kappa, K](const SystemField& base, const SystemField& w) {
        const Eigen::VectorXd ub = grid->evaluate(base.comp[0]);
        const Eigen::VectorXd vxb = grid->evaluate(derivative(base.comp[1]));
        const Eigen::VectorXd uw = grid->evaluate(w.comp[0]);
        const Eigen::VectorXd vxw = grid->evaluate(derivative(w.comp[1]));
        const SpectralField mix =
            grid->project(ub.cwiseProduct(vxw) + uw.cwiseProduct(vxb), Boundary::Dirichlet, K);
        const SpectralField dmix = derivative(mix);
        const SpectralField uu = grid->project(ub.cwiseProduct(uw), Boundary::Neumann, K);
        SystemField out = zero_system(base.domain(), 2, K);
        out.comp[0].coeff = -chi * dmix.coeff.head(K) - 2.0 * kappa * uu.coeff;
        return out;
    };

    const BlockGenerator lin = p.linear_part;
    p.apply_A = [lin](const SystemField&, const SystemField& w) { return apply_generator(lin, w); };
    p.assemble_A = [lin, K](const SystemField&) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * K, 2 * K);
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    a(i * K + k, j * K + k) = lin.blocks[k](i, j);
        return a;
    };
    p.admissible_margin = [](const SystemField&) { return std::numeric_limits<double>::infinity(); };

    SystemField zero = zero_system(domain, 2, truncation);
    SystemField one = zero;
    one.comp[0].coeff[0] = std::sqrt(domain.length); // constant 1
    one.comp[1].coeff[0] = std::sqrt(domain.length);
    p.equilibria = {zero, one};
    return p;
}

ProblemSpec make_gradient_quasilinear(double kappa, const Domain1D& domain,
                                      const GradientIndices& indices, int truncation) {
    auto a = [](double u) { return 1.0 + u * u / (1.0 + u * u); };
    auto ap = [](double u) { return 2.0 * u / ((1.0 + u * u) * (1.0 + u * u)); };
    return make_gradient_quasilinear(a, ap, kappa, domain, indices, truncation);
}

ProblemSpec make_gradient_quasilinear(const std::function<double(double)>& a,
                                      const std::function<double(double)>& /*a_prime*/,
                                      double kappa, const Domain1D& domain,
                                      const GradientIndices& indices, int truncation) {
    if (!(kappa > 3.0))
        throw InputError("make_gradient_quasilinear: kappa > 3 required");
    if (domain.boundary != Boundary::Dirichlet)
        throw InputError("make_gradient_quasilinear: boundary condition is Dirichlet");
    for (double u = -4.0; u <= 4.0; u += 0.05)
        if (!(a(u) > kDiffusivityFloor))
            throw InputError("make_gradient_quasilinear: diffusivity reaches a_min on probe range");

    ProblemSpec p;
    p.name = "gradient";
    p.system_size = 1;
    p.domain = domain;
    p.truncation = truncation;
    p.profile = indices.profile;
    p.quasilinear = true;
    p.references = {"div(a(u) grad u) + |grad u|^kappa", "dirichlet interval"};

    const int K = truncation;
    auto grid = make_grid(domain, truncation, p.dealias);

    // linearization at u* = 0: a(0) * diag(-lambda_k)
    const double a0 = a(0.0);
    p.linear_part.domain = domain;
    p.linear_part.block_size = 1;
    p.linear_part.tail_c0 = Eigen::MatrixXd::Zero(1, 1);
    p.linear_part.tail_c1 = Eigen::MatrixXd::Constant(1, 1, -a0);
    for (int k = 0; k < K; ++k)
        p.linear_part.blocks.push_back(p.linear_part.tail_block(domain.eigenvalue(k)));

    p.nonlinearity = [grid, kappa, K](const SystemField& s) {
        const Eigen::VectorXd uxg = grid->evaluate(derivative(s.comp[0]));
        Eigen::VectorXd g(uxg.size());
        for (int i = 0; i < g.size(); ++i)
            g[i] = std::pow(uxg[i] * uxg[i] + kSmoothingEps * kSmoothingEps, 0.5 * kappa) -
                   std::pow(kSmoothingEps, kappa);
        SystemField out;
        out.comp.push_back(grid->project(g, Boundary::Dirichlet, K));
        return out;
    };

    p.df = [grid, kappa, K](const SystemField& base, const SystemField& w) {
        const Eigen::VectorXd bx = grid->evaluate(derivative(base.comp[0]));
        const Eigen::VectorXd wx = grid->evaluate(derivative(w.comp[0]));
        Eigen::VectorXd g(bx.size());
        for (int i = 0; i < g.size(); ++i)
            g[i] = kappa *
                   std::pow(bx[i] * bx[i] + kSmoothingEps * kSmoothingEps, 0.5 * (kappa - 2.0)) *
                   bx[i] * wx[i];
        SystemField out;
        out.comp.push_back(grid->project(g, Boundary::Dirichlet, K));
        return out;
    };

    p.apply_A = [grid, a, K](const SystemField& y, const SystemField& w) {
        const Eigen::VectorXd yg = grid->evaluate(y.comp[0]);
        Eigen::VectorXd ag(yg.size());
        for (int i = 0; i < ag.size(); ++i)
            ag[i] = a(yg[i]);
        const Eigen::VectorXd wxg = grid->evaluate(derivative(w.comp[0]));
        // a(y) w_x projected with one extra cosine mode so its derivative fills
        // all K sine modes
        const SpectralField z = grid->project(ag.cwiseProduct(wxg), Boundary::Neumann, K + 1);
        SystemField out;
        out.comp.push_back(derivative(z));
        return out;
    };

    p.assemble_A = [p_apply = p.apply_A, domain, K](const SystemField& y) {
        Eigen::MatrixXd m(K, K);
        SystemField e = zero_system(domain, 1, K);
        for (int j = 0; j < K; ++j) {
            e.comp[0].coeff.setZero();
            e.comp[0].coeff[j] = 1.0;
            m.col(j) = p_apply(y, e).comp[0].coeff;
        }
        return m;
    };

    p.admissible_margin = [grid, a](const SystemField& s) {
        const Eigen::VectorXd vals = grid->evaluate(s.comp[0]);
        double margin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < vals.size(); ++i)
            margin = std::min(margin, a(vals[i]) - kDiffusivityFloor);
        return margin;
    };

    p.equilibria = {zero_system(domain, 1, truncation)};
    return p;
}

ProblemSpec make_quadratic(const QuadraticOptions& opts,
                           const std::function<double(double, double)>& q,
                           const ExponentProfile& profile) {
    // symmetry check on sample values
    std::function<double(double, double)> qq = q;
    bool asym = false;
    for (double x : {0.3, -1.1, 2.0})
        for (double y : {0.7, 1.9, -0.4})
            if (std::abs(q(x, y) - q(y, x)) > 1e-12 * (1.0 + std::abs(q(x, y))))
                asym = true;
    if (asym) {
        std::cerr << "make_quadratic: asymmetric form, using its symmetrization\n";
        qq = [q](double x, double y) { return 0.5 * (q(x, y) + q(y, x)); };
    }

    ProblemSpec p;
    p.name = "quadratic";
    p.system_size = 1;
    p.domain = opts.domain;
    p.truncation = opts.truncation;
    p.profile = profile;
    p.quasilinear = opts.state_dependent;
    p.references = {"u' = A(u)u + Q(u,u)"};

    const int K = opts.truncation;
    const double c0 = opts.linear_coeff;
    auto grid = make_grid(opts.domain, K, p.dealias);

    p.linear_part.domain = opts.domain;
    p.linear_part.block_size = 1;
    p.linear_part.tail_c0 = Eigen::MatrixXd::Constant(1, 1, c0);
    p.linear_part.tail_c1 = Eigen::MatrixXd::Constant(1, 1, -1.0);
    for (int k = 0; k < K; ++k)
        p.linear_part.blocks.push_back(p.linear_part.tail_block(opts.domain.eigenvalue(k)));

    p.nonlinearity = [grid, qq, K](const SystemField& s) {
        const Eigen::VectorXd ug = grid->evaluate(s.comp[0]);
        Eigen::VectorXd g(ug.size());
        for (int i = 0; i < g.size(); ++i)
            g[i] = qq(ug[i], ug[i]);
        SystemField out;
        out.comp.push_back(grid->project(g, s.domain().boundary, K));
        return out;
    };

    p.df = [grid, qq, K](const SystemField& base, const SystemField& w) {
        const Eigen::VectorXd bg = grid->evaluate(base.comp[0]);
        const Eigen::VectorXd wg = grid->evaluate(w.comp[0]);
        Eigen::VectorXd g(bg.size());
        for (int i = 0; i < g.size(); ++i)
            g[i] = 2.0 * qq(bg[i], wg[i]);
        SystemField out;
        out.comp.push_back(grid->project(g, base.domain().boundary, K));
        return out;
    };

    auto sigma = [](double u) { return u * u / (1.0 + u * u); };
    const bool state_dep = opts.state_dependent;
    // the flux (1+sigma(y)) w_x carries the parity of w_x, i.e. the basis
    // opposite to the state basis; differentiating maps it back
    const Boundary mid = opts.domain.boundary == Boundary::Dirichlet ? Boundary::Neumann
                                                                     : Boundary::Dirichlet;
    p.apply_A = [grid, sigma, c0, K, state_dep, mid, lin = p.linear_part](const SystemField& y,
                                                                          const SystemField& w) {
        if (!state_dep)
            return apply_generator(lin, w);
        const Eigen::VectorXd yg = grid->evaluate(y.comp[0]);
        Eigen::VectorXd dg(yg.size());
        for (int i = 0; i < dg.size(); ++i)
            dg[i] = 1.0 + sigma(yg[i]);
        const Eigen::VectorXd wxg = grid->evaluate(derivative(w.comp[0]));
        const SpectralField z = grid->project(dg.cwiseProduct(wxg), mid, K + 1);
        SpectralField dz = derivative(z);
        SystemField out;
        SpectralField res = w.comp[0];
        res.coeff = dz.coeff.head(K) + c0 * w.comp[0].coeff;
        out.comp.push_back(res);
        return out;
    };

    p.assemble_A = [p_apply = p.apply_A, domain = opts.domain, K](const SystemField& y) {
        Eigen::MatrixXd m(K, K);
        SystemField e = zero_system(domain, 1, K);
        for (int j = 0; j < K; ++j) {
            e.comp[0].coeff.setZero();
            e.comp[0].coeff[j] = 1.0;
            m.col(j) = p_apply(y, e).comp[0].coeff;
        }
        return m;
    };

    p.admissible_margin = [](const SystemField&) { return std::numeric_limits<double>::infinity(); };
    p.equilibria = {zero_system(opts.domain, 1, K)};
    return p;
}

DenseGenerator numeric_linearization(const ProblemSpec& p, const SystemField& v_star, double h) {
    const double res = equilibrium_residual(p, v_star);
    if (res > 1e-8)
        throw InputError("numeric_linearization: equilibrium residual " + std::to_string(res) +
                         " exceeds 1e-8");
    const int K = v_star.truncation();
    const int m = v_star.size();

    // dense A(v*)
    Eigen::MatrixXd a_fixed;
    if (p.quasilinear) {
        a_fixed = p.assemble_A(v_star);
    } else {
        a_fixed = Eigen::MatrixXd::Zero(m * K, m * K);
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j)
                    a_fixed(i * K + k, j * K + k) = p.linear_part.blocks[k](i, j);
    }

    // derivative part of w -> A(v*+w)v* + f(v*+w)
    auto frozen = [&p, &v_star](const SystemField& w) {
        const SystemField y = v_star + w;
        SystemField lin = p.quasilinear ? p.apply_A(y, v_star) : apply_generator(p.linear_part, v_star);
        return lin + p.nonlinearity(y);
    };
    const SystemField origin = zero_system(p.domain, m, K);
    const Eigen::MatrixXd deriv = richardson_jacobian(frozen, origin, h);

    DenseGenerator gen;
    gen.domain = p.domain;
    gen.block_size = m;
    gen.matrix = a_fixed + deriv;
    return gen;
}

} // namespace parastab
