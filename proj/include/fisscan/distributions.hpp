#pragma once

namespace fisscan {

// Quantile constant Phi^{-1}(0.75) - Phi^{-1}(0.25) of the standard normal.
inline constexpr double kNormalIqr = 1.348979500392164;

double normal_cdf(double x);
double normal_quantile(double p);

// Regularized incomplete gamma P(a, x) and incomplete beta I_x(a, b).
double regularized_gamma_p(double a, double x);
double regularized_beta(double a, double b, double x);

double student_t_cdf(double x, double nu);
double student_t_quantile(double p, double nu);

// Quantile of Gamma(shape, rate).
double gamma_quantile(double p, double shape, double rate);

double exponential_quantile(double p, double rate);

}  // namespace fisscan
