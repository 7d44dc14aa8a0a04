#pragma once

// Test-only reference implementations, independent of the library's own
// numeric paths: MPFR evaluations of the closed forms, adaptive quadrature
// for the entropy integrals, and finite differences for gradients.

#include <functional>
#include <vector>

#include "cenal/network.hpp"

namespace oracle {

// 256-bit MPFR evaluations.
double mp_gaussian_log_pdf(double y, double mu, double sigma);
double mp_std_normal_log_survival(double z);
double mp_std_normal_log_cdf(double z);
double mp_binary_entropy(double p);
double mp_softplus(double x);

/// Adaptive Simpson integration.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-10);

// Quadrature references for the acquisition estimators, written against the
// textbook integrands with long-double std math (no shared code with the
// library's kernels).
double censored_entropy_conditional_quad(const cenal::nn::HeadOutput& h);
double censored_entropy_marginal_quad(const std::vector<cenal::nn::HeadOutput>& draws);
double mi_label_quad(const std::vector<cenal::nn::HeadOutput>& draws);
double gaussian_mixture_entropy_quad(const std::vector<double>& mus,
                                     const std::vector<double>& sigmas);
double bald_quad(const std::vector<cenal::nn::HeadOutput>& draws);

/// Central finite differences, h = 1e-5.
std::vector<double> finite_diff_grad(const std::function<double(const std::vector<double>&)>& f,
                                     std::vector<double> params, double h = 1e-5);

}  // namespace oracle
