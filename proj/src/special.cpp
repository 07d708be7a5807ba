#include "parastab/special.hpp"

#include <cmath>
#include <stdexcept>

namespace parastab {

namespace {

// Lanczos coefficients for g = 607/128, n = 15 (Godfrey's table). Good for
// close to full double precision on the positive real axis.
constexpr double kLanczosG = 607.0 / 128.0;
constexpr double kLanczos[15] = {
    0.99999999999999709182,     57.156235665862923517,     -59.597960355475491248,
    14.136097974741747174,      -0.49191381609762019978,   0.33994649984811888699e-4,
    0.46523628927048575665e-4,  -0.98374475304879564677e-4, 0.15808870322491248884e-3,
    -0.21026444172410488319e-3, 0.21743961811521264320e-3, -0.16431810653676389022e-3,
    0.84418223983852743293e-4,  -0.26190838401581408670e-4, 0.36899182659531622704e-5,
};

double lanczos_log_gamma(double x) {
    // valid for x >= 0.5
    double sum = kLanczos[0];
    for (int i = 1; i < 15; ++i)
        sum += kLanczos[i] / (x - 1.0 + i);
    const double t = x - 0.5 + kLanczosG;
    constexpr double half_log_two_pi = 0.91893853320467274178032973640562;
    return half_log_two_pi + (x - 0.5) * std::log(t) - t + std::log(sum);
}

} // namespace

double log_gamma(double x) {
    if (!(x > 0.0))
        throw std::invalid_argument("log_gamma: argument must be positive");
    if (x >= 0.5)
        return lanczos_log_gamma(x);
    // shift small arguments into the stable range: Gamma(x) = Gamma(x+1)/x
    return lanczos_log_gamma(x + 1.0) - std::log(x);
}

double special_beta(double x, double y) {
    if (!(x > 0.0) || !(y > 0.0))
        throw std::invalid_argument("special_beta: arguments must be positive");
    return std::exp(log_gamma(x) + log_gamma(y) - log_gamma(x + y));
}

double sup_power_exp(double a, double eta) {
    if (a < 0.0 || !(eta > 0.0))
        throw std::invalid_argument("sup_power_exp: require a >= 0 and eta > 0");
    if (a == 0.0)
        return 1.0;
    return std::exp(a * (std::log(a / eta) - 1.0));
}

} // namespace parastab
