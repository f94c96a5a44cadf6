#include "tmfwc/reservoir.hpp"

#include <cmath>
#include <cstring>
#include <vector>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "tmfwc/error.hpp"
#include "tmfwc/rng.hpp"

namespace tmfwc {

void ReservoirParams::validate() const {
  if (n_nodes < 1) throw Error(ErrorCode::ConfigInvalid, "reservoir needs at least one node");
  if (!(spectral_radius > 0.0 && spectral_radius < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid,
                fmt::format("spectral_radius {} outside (0, 1)", spectral_radius));
  }
  if (!(leak_rate > 0.0 && leak_rate <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, fmt::format("leak_rate {} outside (0, 1]", leak_rate));
  }
  if (!(input_density > 0.0 && input_density <= 1.0) ||
      !(recurrent_density > 0.0 && recurrent_density <= 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "densities must lie in (0, 1]");
  }
  if (!std::isfinite(input_scaling)) throw Error(ErrorCode::ConfigInvalid, "input_scaling not finite");
}

double estimate_spectral_radius(const SparseMatrix& w, double rel_tol,
                                std::size_t max_iterations) {
  const auto n = static_cast<std::size_t>(w.rows());
  if (n == 0 || w.nonZeros() == 0) return 0.0;
  const std::size_t block = std::min<std::size_t>(n, 16);

  Rng rng(0x5eed, RngStream::InitialState);
  Eigen::MatrixXd q(n, block);
  for (std::size_t j = 0; j < block; ++j) {
    for (std::size_t i = 0; i < n; ++i) q(i, j) = rng.uniform(-1.0, 1.0);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(q);
  q = qr.householderQ() * Eigen::MatrixXd::Identity(n, block);

  double estimate = 0.0;
  std::size_t stable = 0;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Eigen::MatrixXd z = w * q;
    const Eigen::MatrixXd ritz = q.transpose() * z;
    Eigen::EigenSolver<Eigen::MatrixXd> es(ritz, false);
    double rho = 0.0;
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
      rho = std::max(rho, std::abs(es.eigenvalues()[k]));
    }
    if (std::abs(rho - estimate) <= rel_tol * std::max(rho, 1e-300)) {
      if (++stable >= 5) return rho;
    } else {
      stable = 0;
    }
    estimate = rho;
    if (block == n) return rho;  // the block spans the whole space
    Eigen::HouseholderQR<Eigen::MatrixXd> step(z);
    q = step.householderQ() * Eigen::MatrixXd::Identity(n, block);
  }
  return estimate;
}

Eigen::VectorXd StateSummary::concatenated() const {
  Eigen::VectorXd out(mean_state.size() + final_state.size());
  out << mean_state, final_state;
  return out;
}

Reservoir::Reservoir(const ReservoirParams& params, std::size_t input_dim)
    : params_(params), input_dim_(input_dim) {
  params_.validate();
  if (input_dim_ < 1) throw Error(ErrorCode::ConfigInvalid, "input dimension must be >= 1");
  const std::size_t n = params_.n_nodes;

  Rng rec(params_.seed, RngStream::RecurrentWeights);
  std::vector<Eigen::Triplet<double>> triplets;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (rec.uniform() < params_.recurrent_density) {
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(j), rec.uniform(-1.0, 1.0));
      }
    }
  }
  w_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  w_.setFromTriplets(triplets.begin(), triplets.end());
  w_.makeCompressed();

  const double radius = estimate_spectral_radius(w_);
  if (!(radius > 1e-12)) {
    throw Error(ErrorCode::SingularRescale,
                fmt::format("recurrent matrix has spectral radius {} (density {} on {} nodes)",
                            radius, params_.recurrent_density, n));
  }
  w_ *= params_.spectral_radius / radius;

  Rng inp(params_.seed, RngStream::InputWeights);
  w_in_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(input_dim_));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < input_dim_; ++j) {
      if (inp.uniform() < params_.input_density) {
        w_in_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            inp.uniform(-params_.input_scaling, params_.input_scaling);
      }
    }
  }
}

Eigen::VectorXd Reservoir::update_state(const Eigen::VectorXd& state,
                                        std::span<const double> input) const {
  if (static_cast<std::size_t>(state.size()) != params_.n_nodes) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("state has {} entries, reservoir has {} nodes", state.size(),
                            params_.n_nodes));
  }
  if (input.size() != input_dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("input has {} entries, reservoir expects {}", input.size(), input_dim_));
  }
  const Eigen::Map<const Eigen::VectorXd> u(input.data(), static_cast<Eigen::Index>(input.size()));
  const double a = params_.leak_rate;
  Eigen::VectorXd pre = w_ * state;
  pre.noalias() += w_in_ * u;
  return (1.0 - a) * state + a * pre.array().tanh().matrix();
}

StateSummary Reservoir::run_sequence(const FeatureMatrix& features,
                                     const Eigen::VectorXd& initial_state) const {
  if (features.cols() != input_dim_) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("features have {} columns, reservoir expects {}", features.cols(),
                            input_dim_));
  }
  if (features.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "empty feature sequence");
  const auto n = static_cast<Eigen::Index>(params_.n_nodes);
  Eigen::VectorXd x = initial_state.size() == 0 ? Eigen::VectorXd::Zero(n) : initial_state;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n);
  for (std::size_t t = 0; t < features.rows(); ++t) {
    x = update_state(x, features.row(t));
    sum += x;
  }
  return {sum / static_cast<double>(features.rows()), x};
}

std::uint64_t Reservoir::weights_checksum() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  mix(w_.valuePtr(), sizeof(double) * static_cast<std::size_t>(w_.nonZeros()));
  mix(w_.innerIndexPtr(), sizeof(int) * static_cast<std::size_t>(w_.nonZeros()));
  mix(w_in_.data(), sizeof(double) * static_cast<std::size_t>(w_in_.size()));
  return h;
}

Reservoir init_reservoir(const ReservoirParams& params, std::size_t input_dim) {
  return Reservoir(params, input_dim);
}

}  // namespace tmfwc
