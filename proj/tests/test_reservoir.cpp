#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include <Eigen/Eigenvalues>

#include "support.hpp"
#include "tmfwc/error.hpp"
#include "tmfwc/readout.hpp"
#include "tmfwc/reservoir.hpp"
#include "tmfwc/rng.hpp"

using namespace tmfwc;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::IoFailure;
}

double dense_radius(const SparseMatrix& w) {
  const Eigen::MatrixXd d(w);
  Eigen::EigenSolver<Eigen::MatrixXd> es(d, false);
  double r = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) r = std::max(r, std::abs(es.eigenvalues()[k]));
  return r;
}

FeatureMatrix random_features(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  return FeatureMatrix(rows, cols, testutil::random_signal(rows * cols, seed, 1.0));
}

}  // namespace

TEST_SUITE("reservoir") {
  TEST_CASE("random streams") {
    CHECK(splitmix64(0) == 0xE220A8397B1DCDAFULL);
    Rng a(9, RngStream::DataSplit), b(9, RngStream::DataSplit), c(9, RngStream::LabelShuffle);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
      const auto x = a.next_u64();
      CHECK(x == b.next_u64());
      differs |= x != c.next_u64();
    }
    CHECK(differs);
    Rng r(1, RngStream::InputWeights);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
      const auto v = r.below(7);
      CHECK(v < 7);
      seen.insert(v);
      const double u = r.uniform();
      CHECK(u >= 0.0);
      CHECK(u < 1.0);
    }
    CHECK(seen.size() == 7);
  }

  TEST_CASE("rescaled spectral radius matches a dense eigensolver") {
    for (std::uint64_t seed : {1u, 2u, 42u}) {
      ReservoirParams p;
      p.seed = seed;
      const Reservoir res(p, 10);
      CHECK(std::abs(dense_radius(res.recurrent()) - 0.9) < 1e-6);

      // ||W^k||^(1/k) tends to the radius.
      Eigen::MatrixXd power = Eigen::MatrixXd::Identity(200, 200);
      const Eigen::MatrixXd w(res.recurrent());
      for (int k = 0; k < 400; ++k) power = power * w;
      CHECK(std::pow(power.operatorNorm(), 1.0 / 400.0) == doctest::Approx(0.9).epsilon(0.03));
    }
    ReservoirParams q;
    q.n_nodes = 60;
    q.spectral_radius = 0.5;
    q.recurrent_density = 0.3;
    CHECK(std::abs(dense_radius(init_reservoir(q, 3).recurrent()) - 0.5) < 1e-6);
    q.spectral_radius = 1.25;
    CHECK(code_of([&] { q.validate(); }) == ErrorCode::ConfigInvalid);
  }

  TEST_CASE("radius estimate on known matrices") {
    // Rotation-scaled blocks have a complex dominant pair.
    SparseMatrix w(4, 4);
    std::vector<Eigen::Triplet<double>> t{{0, 1, 2.0}, {1, 0, -2.0}, {2, 2, 0.5}, {3, 3, -1.5}};
    w.setFromTriplets(t.begin(), t.end());
    CHECK(estimate_spectral_radius(w) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(estimate_spectral_radius(SparseMatrix(5, 5)) == 0.0);
  }

  TEST_CASE("single node") {
    ReservoirParams p;
    p.n_nodes = 1;
    p.recurrent_density = 1.0;
    p.input_density = 1.0;
    const Reservoir res(p, 2);
    REQUIRE(res.recurrent().nonZeros() == 1);
    CHECK(std::abs(res.recurrent().coeff(0, 0)) == doctest::Approx(0.9).epsilon(1e-14));

    p.recurrent_density = 1e-12;
    CHECK(code_of([&] { init_reservoir(p, 2); }) == ErrorCode::SingularRescale);
  }

  TEST_CASE("parameter validation") {
    ReservoirParams p;
    p.leak_rate = 0.0;
    CHECK(code_of([&] { p.validate(); }) == ErrorCode::ConfigInvalid);
    p = {};
    p.input_density = 1.5;
    CHECK(code_of([&] { p.validate(); }) == ErrorCode::ConfigInvalid);
    p = {};
    p.n_nodes = 0;
    CHECK(code_of([&] { p.validate(); }) == ErrorCode::ConfigInvalid);
    CHECK(code_of([] { init_reservoir(ReservoirParams{}, 0); }) == ErrorCode::ConfigInvalid);
  }

  TEST_CASE("construction is deterministic") {
    ReservoirParams p;
    const Reservoir a(p, 10), b(p, 10);
    CHECK(a.weights_checksum() == b.weights_checksum());
    CHECK(Eigen::MatrixXd(a.recurrent()) == Eigen::MatrixXd(b.recurrent()));
    CHECK(a.input_weights() == b.input_weights());
    p.seed = 43;
    CHECK(init_reservoir(p, 10).weights_checksum() != a.weights_checksum());
    const double density = static_cast<double>(a.recurrent().nonZeros()) / (200.0 * 200.0);
    CHECK(density == doctest::Approx(0.1).epsilon(0.1));
  }

  TEST_CASE("state update") {
    ReservoirParams p;
    p.n_nodes = 30;
    const Reservoir res(p, 4);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(30);
    CHECK(res.update_state(zero, std::vector<double>(4, 0.0)).isZero());

    const std::vector<double> u{0.3, -0.2, 0.9, 0.1};
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(30, -0.5, 0.5);
    const Eigen::Map<const Eigen::VectorXd> uv(u.data(), 4);
    const Eigen::MatrixXd w(res.recurrent());
    const Eigen::VectorXd expected = 0.7 * x + 0.3 * (w * x + res.input_weights() * uv).array().tanh().matrix();
    CHECK((res.update_state(x, u) - expected).cwiseAbs().maxCoeff() < 1e-14);

    CHECK(code_of([&] { res.update_state(zero, std::vector<double>(3, 0.0)); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { res.update_state(Eigen::VectorXd::Zero(5), u); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("sequence summary") {
    ReservoirParams p;
    p.n_nodes = 20;
    const Reservoir res(p, 3);
    const auto f = random_features(5, 3, 8);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(20), sum = Eigen::VectorXd::Zero(20);
    for (std::size_t r = 0; r < 5; ++r) {
      x = res.update_state(x, f.row(r));
      sum += x;
    }
    const auto s = res.run_sequence(f);
    CHECK((s.final_state - x).norm() < 1e-14);
    CHECK((s.mean_state - sum / 5.0).norm() < 1e-14);
    CHECK(s.concatenated().size() == 40);
    CHECK(s.concatenated().head(20) == s.mean_state);
    CHECK(code_of([&] { res.run_sequence(FeatureMatrix(0, 3)); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { res.run_sequence(FeatureMatrix(2, 4)); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("echo state property") {
    const Reservoir res(ReservoirParams{}, 10);
    const auto f = random_features(800, 10, 3);
    Rng rng(1, RngStream::InitialState);
    Eigen::VectorXd x1(200);
    for (auto& v : x1) v = rng.uniform(-1.0, 1.0);
    const auto a = res.run_sequence(f);
    const auto b = res.run_sequence(f, x1);
    CHECK((a.final_state - b.final_state).norm() < 1e-6);
  }
}

TEST_SUITE("readout") {
  TEST_CASE("two by two by hand") {
    Eigen::MatrixXd s(2, 1);
    s << 1.0, -1.0;
    const std::vector<int> labels{0, 1};
    const auto r0 = train_readout(s, labels, 2, 0.0, Task::Digit);
    Eigen::MatrixXd expected(2, 2);
    expected << 0.5, 0.5, -0.5, 0.5;
    CHECK((r0.w_out - expected).cwiseAbs().maxCoeff() < 1e-14);
    const auto r1 = train_readout(s, labels, 2, 1.0, Task::Digit);
    CHECK((r1.w_out - expected * (2.0 / 3.0)).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(r1.num_classes() == 2);
    CHECK(r1.summary_dim() == 1);
    CHECK(r1.task == Task::Digit);
  }

  TEST_CASE("solution satisfies the normal equations") {
    const auto f = random_features(60, 12, 5);
    const Eigen::MatrixXd s = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(f.data().data(), 60, 12);
    std::vector<int> labels(60);
    for (std::size_t i = 0; i < 60; ++i) labels[i] = static_cast<int>(i % 4);
    for (double lambda : {0.0, 1e-6, 0.5}) {
      const auto r = train_readout(s, labels, 4, lambda, Task::Speaker);
      Eigen::MatrixXd aug(60, 13);
      aug << s, Eigen::VectorXd::Ones(60);
      Eigen::MatrixXd y = Eigen::MatrixXd::Zero(60, 4);
      for (int i = 0; i < 60; ++i) y(i, labels[i]) = 1.0;
      const Eigen::MatrixXd lhs = (aug.transpose() * aug + lambda * Eigen::MatrixXd::Identity(13, 13)) * r.w_out.transpose();
      const Eigen::MatrixXd rhs = aug.transpose() * y;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff() < 1e-8);
    }

    // Large penalties shrink the weights toward S^T Y / lambda.
    const auto big = train_readout(s, labels, 4, 1e12, Task::Digit);
    CHECK(big.w_out.cwiseAbs().maxCoeff() < 1e-10);

    // Duplicating every example with twice the penalty leaves the solution unchanged.
    Eigen::MatrixXd twice(120, 12);
    twice << s, s;
    std::vector<int> labels2(labels);
    labels2.insert(labels2.end(), labels.begin(), labels.end());
    const auto a = train_readout(s, labels, 4, 0.3, Task::Digit);
    const auto b = train_readout(twice, labels2, 4, 0.6, Task::Digit);
    CHECK((a.w_out - b.w_out).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("readout errors") {
    Eigen::MatrixXd s(3, 2);
    s << 1, 1, 2, 2, 3, 3;
    CHECK(code_of([&] { train_readout(s, std::vector<int>{0, 1, 0}, 3, 1e-3, Task::Digit); }) ==
          ErrorCode::InsufficientData);
    CHECK(code_of([&] { train_readout(s, std::vector<int>{0, 1, 0}, 2, 0.0, Task::Digit); }) ==
          ErrorCode::IllConditioned);
    CHECK(code_of([&] { train_readout(s, std::vector<int>{0, 1}, 2, 0.1, Task::Digit); }) ==
          ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { train_readout(s, std::vector<int>{0, 5, 1}, 2, 0.1, Task::Digit); }) ==
          ErrorCode::DimensionMismatch);
    CHECK_NOTHROW(train_readout(s, std::vector<int>{0, 1, 0}, 2, 1e-3, Task::Digit));
  }

  TEST_CASE("classification") {
    ReadoutWeights r{Eigen::MatrixXd::Zero(3, 3), Task::Digit};
    CHECK(classify(r, Eigen::Vector2d(1.0, 2.0)).label == 0);
    r.w_out(2, 0) = 1.0;
    r.w_out(1, 0) = 1.0;
    CHECK(classify(r, Eigen::Vector2d(1.0, 0.0)).label == 1);
    r.w_out(0, 2) = 5.0;
    const auto c = classify(r, Eigen::Vector2d(1.0, 0.0));
    CHECK(c.label == 0);
    CHECK(c.scores[0] == 5.0);

    const auto f = random_features(40, 5, 10);
    const Eigen::MatrixXd s = Eigen::Map<const Eigen::Matrix<double, -1, -1, Eigen::RowMajor>>(f.data().data(), 40, 5);
    std::vector<int> labels(40);
    for (std::size_t i = 0; i < 40; ++i) labels[i] = static_cast<int>(i % 3);
    auto trained = train_readout(s, labels, 3, 0.1, Task::Digit);
    auto scaled = trained;
    scaled.w_out *= 7.5;
    for (Eigen::Index i = 0; i < 40; ++i) {
      CHECK(classify(trained, Eigen::VectorXd(s.row(i).transpose())).label ==
            classify(scaled, Eigen::VectorXd(s.row(i).transpose())).label);
    }
    CHECK(code_of([&] { classify(trained, Eigen::VectorXd::Zero(4)); }) == ErrorCode::DimensionMismatch);
  }

  TEST_CASE("multitask training is independent per task") {
    const Reservoir res(ReservoirParams{}, 6);
    const auto before = res.weights_checksum();
    std::vector<StateSummary> summaries;
    std::vector<int> digits, speakers;
    for (std::size_t i = 0; i < 24; ++i) {
      summaries.push_back(res.run_sequence(random_features(10, 6, 100 + i)));
      digits.push_back(static_cast<int>(i % 4));
      speakers.push_back(static_cast<int>(i % 3));
    }
    const auto stacked = stack_summaries(summaries);
    CHECK(stacked.rows() == 24);
    CHECK(stacked.cols() == 400);
    const std::map<Task, TaskLabels> tasks{{Task::Digit, {digits, 4}}, {Task::Speaker, {speakers, 3}}};
    const auto both = train_multitask(stacked, tasks, 1e-3);
    REQUIRE(both.size() == 2);
    CHECK(both.at(Task::Digit).w_out == train_readout(summaries, digits, 4, 1e-3, Task::Digit).w_out);
    CHECK(both.at(Task::Speaker).w_out == train_readout(stacked, speakers, 3, 1e-3, Task::Speaker).w_out);
    CHECK(both.at(Task::Speaker).task == Task::Speaker);
    CHECK(res.weights_checksum() == before);
  }
}
