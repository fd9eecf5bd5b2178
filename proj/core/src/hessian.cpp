#include "snnlab/hessian.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "snnlab/train.hpp"

namespace snnlab {
namespace {

double l2_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double a, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// Eigenvalues (ascending) and first-row eigenvector components of the
// symmetric tridiagonal built from alphas/betas (beta[j] couples j and j+1).
std::pair<std::vector<double>, std::vector<double>> tridiag_eig(const std::vector<double>& alphas,
                                                                const std::vector<double>& betas) {
  const long m = static_cast<long>(alphas.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
  for (long i = 0; i < m; ++i) {
    t(i, i) = alphas[static_cast<std::size_t>(i)];
    if (i + 1 < m) {
      t(i, i + 1) = betas[static_cast<std::size_t>(i)];
      t(i + 1, i) = betas[static_cast<std::size_t>(i)];
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
  std::vector<double> vals(alphas.size()), first(alphas.size());
  for (long i = 0; i < m; ++i) {
    vals[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    first[static_cast<std::size_t>(i)] = es.eigenvectors()(0, i);
  }
  return {vals, first};
}

}  // namespace

GradientOracle make_matrix_oracle(std::vector<double> a, std::size_t p) {
  if (a.size() != p * p) throw ParameterError("make_matrix_oracle: matrix size mismatch");
  GradientOracle o;
  o.dim = p;
  o.eval = [a = std::move(a), p](const std::vector<double>& theta) {
    if (theta.size() != p) throw ParameterError("matrix oracle: theta dim mismatch");
    std::vector<double> g(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < p; ++j) g[i] += a[i * p + j] * theta[j];
    }
    double loss = 0.5 * dot(theta, g);
    return std::make_pair(loss, std::move(g));
  };
  return o;
}

GradientOracle make_network_oracle(const Network& proto, const Tensor& images,
                                   const std::vector<int>& labels, ForwardMode mode,
                                   std::uint64_t encoder_seed) {
  RngStream enc_rng(encoder_seed, 0x0AC1E);
  auto frames = encode_input(images, proto.spec.time_steps, proto.spec.encoder, enc_rng);
  GradientOracle o;
  o.dim = param_count(proto);
  // the network copy is mutated per evaluation; the callable owns it
  auto net = std::make_shared<Network>(proto);
  o.eval = [net, frames = std::move(frames), labels, mode](const std::vector<double>& theta) {
    set_flat_params(*net, theta);
    auto res = forward_frames(*net, frames, mode);
    auto [loss, d_rates] = mse_loss(res.rates, labels);
    auto grads = backward(*net, res.tape, d_rates);
    return std::make_pair(loss, flatten_grads(*net, grads));
  };
  return o;
}

double default_hvp_eps(const std::vector<double>& theta) { return 1e-3 * (1.0 + l2_norm(theta)); }

std::vector<double> hvp(const GradientOracle& oracle, const std::vector<double>& theta,
                        const std::vector<double>& v, double eps) {
  if (theta.size() != oracle.dim || v.size() != oracle.dim) {
    throw ParameterError("hvp: dimension mismatch, oracle dim " + std::to_string(oracle.dim) + " vs " +
                         std::to_string(theta.size()) + "/" + std::to_string(v.size()));
  }
  if (eps <= 0.0) eps = default_hvp_eps(theta);
  const double norm = l2_norm(v);
  if (norm == 0.0) return std::vector<double>(oracle.dim, 0.0);

  std::vector<double> tp(theta), tm(theta);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double step = eps * v[i] / norm;
    tp[i] += step;
    tm[i] -= step;
  }
  auto gp = oracle.eval(tp).second;
  auto gm = oracle.eval(tm).second;
  std::vector<double> out(oracle.dim);
  const double scale = norm / (2.0 * eps);
  for (std::size_t i = 0; i < oracle.dim; ++i) out[i] = (gp[i] - gm[i]) * scale;
  return out;
}

std::pair<double, double> hutchinson_trace(const GradientOracle& oracle, const std::vector<double>& theta,
                                           std::size_t n_probes, RngStream& rng, double eps) {
  if (n_probes < 2) throw ParameterError("hutchinson_trace: need n_probes >= 2");
  std::vector<double> samples;
  samples.reserve(n_probes);
  std::vector<double> v(oracle.dim);
  for (std::size_t p = 0; p < n_probes; ++p) {
    for (auto& x : v) x = rng.next_rademacher();
    const auto hv = hvp(oracle, theta, v, eps);
    samples.push_back(dot(v, hv));
  }
  double m = 0.0;
  for (double s : samples) m += s;
  m /= static_cast<double>(n_probes);
  double var = 0.0;
  for (double s : samples) var += (s - m) * (s - m);
  var /= static_cast<double>(n_probes - 1);
  return {m, std::sqrt(var / static_cast<double>(n_probes))};
}

namespace {

struct LanczosRun {
  std::vector<double> alphas;
  std::vector<double> betas;  // betas[j] couples j and j+1; 0 at restarts
};

// Full reorthogonalization against all stored vectors, applied twice.
void reorthogonalize(const std::vector<std::vector<double>>& basis, std::vector<double>& w) {
  for (int round = 0; round < 2; ++round) {
    for (const auto& q : basis) axpy(-dot(q, w), q, w);
  }
}

}  // namespace

std::vector<double> top_eigenvalues(const GradientOracle& oracle, const std::vector<double>& theta,
                                    std::size_t k, std::size_t max_iters, double tol, RngStream& rng,
                                    double eps) {
  if (k < 1) throw ParameterError("top_eigenvalues: k must be >= 1");
  const std::size_t dim = oracle.dim;
  const std::size_t limit = std::min(max_iters, dim);

  std::vector<std::vector<double>> basis;
  LanczosRun run;
  double prev_top = 0.0;
  bool have_prev = false;

  std::vector<double> q(dim);
  for (auto& x : q) x = rng.next_gaussian(0.0, 1.0);
  {
    const double n = l2_norm(q);
    for (auto& x : q) x /= n;
  }

  while (basis.size() < limit) {
    basis.push_back(q);
    std::vector<double> w = hvp(oracle, theta, q, eps);
    const double alpha = dot(q, w);
    run.alphas.push_back(alpha);
    reorthogonalize(basis, w);
    const double beta = l2_norm(w);

    if (basis.size() == limit) break;
    const double breakdown = 1e-10 * (1.0 + std::abs(alpha));
    if (beta > breakdown) {
      run.betas.push_back(beta);
      for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / beta;
    } else {
      // invariant subspace exhausted: restart with a fresh direction
      run.betas.push_back(0.0);
      for (auto& x : q) x = rng.next_gaussian(0.0, 1.0);
      reorthogonalize(basis, q);
      const double n = l2_norm(q);
      if (n < 1e-12) break;  // whole space spanned
      for (auto& x : q) x /= n;
    }

    if (basis.size() >= k + 2) {
      auto [vals, first] = tridiag_eig(run.alphas, run.betas);
      (void)first;
      const double top = vals.back();
      if (have_prev && std::abs(top - prev_top) < tol) break;
      prev_top = top;
      have_prev = true;
    }
  }

  if (run.alphas.size() < k) {
    throw ParameterError("top_eigenvalues: k=" + std::to_string(k) + " exceeds the " +
                         std::to_string(run.alphas.size()) + " iterations performed");
  }
  auto [vals, first] = tridiag_eig(run.alphas, run.betas);
  (void)first;
  std::sort(vals.begin(), vals.end(), std::greater<double>());
  vals.resize(k);
  return vals;
}

std::pair<std::vector<double>, std::vector<double>> spectral_density(const GradientOracle& oracle,
                                                                     const std::vector<double>& theta,
                                                                     std::size_t lanczos_steps,
                                                                     std::size_t n_probes, RngStream& rng,
                                                                     double eps) {
  if (lanczos_steps < 2) throw ParameterError("spectral_density: need lanczos_steps >= 2");
  if (n_probes < 1) throw ParameterError("spectral_density: need n_probes >= 1");
  const std::size_t dim = oracle.dim;
  const std::size_t steps = std::min(lanczos_steps, dim);

  std::vector<double> nodes, weights;
  for (std::size_t p = 0; p < n_probes; ++p) {
    std::vector<double> q(dim);
    for (auto& x : q) x = rng.next_rademacher();
    {
      const double n = l2_norm(q);
      for (auto& x : q) x /= n;
    }
    std::vector<std::vector<double>> basis;
    std::vector<double> alphas, betas;
    for (std::size_t it = 0; it < steps; ++it) {
      basis.push_back(q);
      std::vector<double> w = hvp(oracle, theta, q, eps);
      const double alpha = dot(q, w);
      alphas.push_back(alpha);
      reorthogonalize(basis, w);
      const double beta = l2_norm(w);
      if (it + 1 == steps || beta <= 1e-10 * (1.0 + std::abs(alpha))) break;  // natural termination
      betas.push_back(beta);
      for (std::size_t i = 0; i < dim; ++i) q[i] = w[i] / beta;
    }
    auto [vals, first] = tridiag_eig(alphas, betas);
    for (std::size_t i = 0; i < vals.size(); ++i) {
      nodes.push_back(vals[i]);
      weights.push_back(first[i] * first[i] / static_cast<double>(n_probes));
    }
  }
  return {nodes, weights};
}

HessianReport compute_hessian_report(const GradientOracle& oracle, const std::vector<double>& theta,
                                     const HessianSettings& settings, RngStream& rng) {
  HessianReport report;
  report.param_count = oracle.dim;
  report.n_probes = settings.n_probes;
  RngStream trace_rng = rng.substream(1);
  RngStream lanczos_rng = rng.substream(2);
  RngStream slq_rng = rng.substream(3);
  std::tie(report.trace_estimate, report.trace_stderr) =
      hutchinson_trace(oracle, theta, settings.n_probes, trace_rng);
  report.top_eigenvalues =
      top_eigenvalues(oracle, theta, settings.k, settings.max_iters, settings.tol, lanczos_rng);
  std::tie(report.density_nodes, report.density_weights) =
      spectral_density(oracle, theta, settings.lanczos_steps, settings.n_probes, slq_rng);
  return report;
}

std::string hessian_report_json(const HessianReport& report) {
  auto num = [](double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  std::ostringstream os;
  os << "{\n";
  os << "  \"trace\": " << num(report.trace_estimate) << ",\n";
  os << "  \"trace_stderr\": " << num(report.trace_stderr) << ",\n";
  os << "  \"top_eigenvalues\": [";
  for (std::size_t i = 0; i < report.top_eigenvalues.size(); ++i) {
    if (i) os << ", ";
    os << num(report.top_eigenvalues[i]);
  }
  os << "],\n";
  os << "  \"density\": [";
  for (std::size_t i = 0; i < report.density_nodes.size(); ++i) {
    if (i) os << ", ";
    os << "{\"node\": " << num(report.density_nodes[i]) << ", \"weight\": " << num(report.density_weights[i])
       << "}";
  }
  os << "],\n";
  os << "  \"param_count\": " << report.param_count << ",\n";
  os << "  \"n_probes\": " << report.n_probes << "\n";
  os << "}\n";
  return os.str();
}

}  // namespace snnlab
