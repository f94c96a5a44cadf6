#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "tmfwc/feature_matrix.hpp"

namespace tmfwc {

struct ReservoirParams {
  std::size_t n_nodes = 200;
  double spectral_radius = 0.9;
  double input_scaling = 0.5;
  double leak_rate = 0.3;
  double input_density = 0.1;
  double recurrent_density = 0.1;
  std::uint64_t seed = 42;

  void validate() const;
};

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Largest |eigenvalue| by block power (subspace) iteration with a
// Rayleigh-Ritz step, which also converges when the dominant eigenvalues
// form a complex pair. Stops once the estimate moves less than rel_tol.
double estimate_spectral_radius(const SparseMatrix& w, double rel_tol = 1e-12,
                                std::size_t max_iterations = 20000);

struct StateSummary {
  Eigen::VectorXd mean_state;
  Eigen::VectorXd final_state;

  // [mean; final]
  Eigen::VectorXd concatenated() const;
};

// Leaky-integrator tanh echo state network with fixed random weights.
class Reservoir {
 public:
  // Recurrent stream: for each (i, j) in row-major order draw u; if
  // u < recurrent_density draw w = uniform(-1, 1). Input stream: same over
  // the n x d input matrix with uniform(-input_scaling, input_scaling).
  // W is then rescaled to the requested spectral radius.
  Reservoir(const ReservoirParams& params, std::size_t input_dim);

  const ReservoirParams& params() const noexcept { return params_; }
  std::size_t size() const noexcept { return params_.n_nodes; }
  std::size_t input_dim() const noexcept { return input_dim_; }
  const SparseMatrix& recurrent() const noexcept { return w_; }
  const Eigen::MatrixXd& input_weights() const noexcept { return w_in_; }

  // x' = (1 - a) x + a tanh(W x + W_in u).
  Eigen::VectorXd update_state(const Eigen::VectorXd& state, std::span<const double> input) const;

  // Runs rows in time order from x0 (zero when empty) and summarizes.
  StateSummary run_sequence(const FeatureMatrix& features,
                            const Eigen::VectorXd& initial_state = {}) const;

  // FNV-1a over the raw weight bytes, for "weights untouched" checks.
  std::uint64_t weights_checksum() const;

 private:
  ReservoirParams params_;
  std::size_t input_dim_;
  SparseMatrix w_;
  Eigen::MatrixXd w_in_;
};

Reservoir init_reservoir(const ReservoirParams& params, std::size_t input_dim);

}  // namespace tmfwc
