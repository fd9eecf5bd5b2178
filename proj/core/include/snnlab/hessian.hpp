#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "snnlab/data.hpp"
#include "snnlab/network.hpp"
#include "snnlab/rng.hpp"

namespace snnlab {

// Maps a flat parameter vector to (loss, flat gradient). Deterministic:
// the same theta must produce the same gradient.
struct GradientOracle {
  std::size_t dim = 0;
  std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)> eval;
};

// L(theta) = 0.5 * theta^T A theta for an explicit symmetric matrix (row
// major, p*p). Lets every estimator be tested against exact linear algebra.
GradientOracle make_matrix_oracle(std::vector<double> a, std::size_t p);

// Binds a network, a fixed evaluation batch and the MSE loss. The batch is
// encoded once at construction so poisson noise is frozen. mode selects the
// forward used by BPTT (the curvature of the surrogate-gradient graph uses
// spiking mode).
GradientOracle make_network_oracle(const Network& proto, const Tensor& images,
                                   const std::vector<int>& labels, ForwardMode mode,
                                   std::uint64_t encoder_seed = 0);

// Step size for gradient differencing: 1e-3 relative to |theta|.
double default_hvp_eps(const std::vector<double>& theta);

// Central difference of gradients along v:
//   (g(theta + eps*v_hat) - g(theta - eps*v_hat)) / (2 eps) * |v|
// v = 0 returns the zero vector.
std::vector<double> hvp(const GradientOracle& oracle, const std::vector<double>& theta,
                        const std::vector<double>& v, double eps);

// Hutchinson estimator: mean and standard error of v^T H v over Rademacher
// probes. n_probes >= 2.
std::pair<double, double> hutchinson_trace(const GradientOracle& oracle, const std::vector<double>& theta,
                                           std::size_t n_probes, RngStream& rng, double eps = 0.0);

// Lanczos with full reorthogonalization; restarts with a fresh random
// direction on breakdown so repeated eigenvalues are recovered. Returns the
// largest k Ritz values, descending. Convergence is declared when
// successive top-eigenvalue estimates differ by less than tol (checked only
// once at least k+2 vectors exist).
std::vector<double> top_eigenvalues(const GradientOracle& oracle, const std::vector<double>& theta,
                                    std::size_t k, std::size_t max_iters, double tol, RngStream& rng,
                                    double eps = 0.0);

// Stochastic Lanczos quadrature: per probe the Ritz values become nodes
// weighted by squared first components; weights are averaged over probes and
// sum to 1. The first moment estimates Tr(H)/P.
std::pair<std::vector<double>, std::vector<double>> spectral_density(const GradientOracle& oracle,
                                                                     const std::vector<double>& theta,
                                                                     std::size_t lanczos_steps,
                                                                     std::size_t n_probes, RngStream& rng,
                                                                     double eps = 0.0);

struct HessianReport {
  double trace_estimate = 0.0;
  double trace_stderr = 0.0;
  std::vector<double> top_eigenvalues;  // descending
  std::vector<double> density_nodes;
  std::vector<double> density_weights;  // sum to 1
  std::size_t param_count = 0;
  std::size_t n_probes = 0;
};

struct HessianSettings {
  std::size_t k = 50;
  std::size_t n_probes = 100;
  std::size_t lanczos_steps = 80;
  std::size_t max_iters = 120;
  double tol = 1e-6;
};

HessianReport compute_hessian_report(const GradientOracle& oracle, const std::vector<double>& theta,
                                     const HessianSettings& settings, RngStream& rng);

// JSON with fields trace, trace_stderr, top_eigenvalues, density (array of
// {node, weight}), param_count, n_probes.
std::string hessian_report_json(const HessianReport& report);

}  // namespace snnlab
