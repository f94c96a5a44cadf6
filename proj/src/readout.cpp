#include "tmfwc/readout.hpp"

#include <string>

#include <fmt/format.h>

#include "tmfwc/error.hpp"

namespace tmfwc {

std::string_view to_string(Task task) noexcept {
  return task == Task::Digit ? "digit" : "speaker";
}

Task task_from_string(std::string_view name) {
  if (name == "digit") return Task::Digit;
  if (name == "speaker") return Task::Speaker;
  throw Error(ErrorCode::ConfigInvalid, "unknown task '" + std::string(name) + "'");
}

ReadoutWeights train_readout(const Eigen::MatrixXd& summaries, std::span<const int> labels,
                             std::size_t num_classes, double ridge_lambda, Task task) {
  const Eigen::Index rows = summaries.rows();
  if (static_cast<std::size_t>(rows) != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("{} summaries, {} labels", rows, labels.size()));
  }
  if (!(ridge_lambda >= 0.0)) throw Error(ErrorCode::ConfigInvalid, "ridge_lambda must be >= 0");
  if (num_classes < 1) throw Error(ErrorCode::InsufficientData, "no classes");

  std::vector<std::size_t> counts(num_classes, 0);
  for (int label : labels) {
    if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
      throw Error(ErrorCode::DimensionMismatch, fmt::format("label {} out of range", label));
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::InsufficientData, fmt::format("class {} has no training examples", c));
    }
  }

  const Eigen::Index dim = summaries.cols() + 1;
  Eigen::MatrixXd s(rows, dim);
  s.leftCols(summaries.cols()) = summaries;
  s.col(dim - 1).setOnes();
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(rows, static_cast<Eigen::Index>(num_classes));
  for (Eigen::Index i = 0; i < rows; ++i) y(i, labels[static_cast<std::size_t>(i)]) = 1.0;

  Eigen::MatrixXd gram = s.transpose() * s;
  gram.diagonal().array() += ridge_lambda;
  const Eigen::MatrixXd rhs = s.transpose() * y;

  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || (ridge_lambda == 0.0 && ldlt.rcond() < 1e-14)) {
    throw Error(ErrorCode::IllConditioned,
                fmt::format("normal equations singular at lambda = {}; raise ridge_lambda",
                            ridge_lambda));
  }
  const Eigen::MatrixXd wt = ldlt.solve(rhs);
  if (!wt.allFinite()) throw Error(ErrorCode::IllConditioned, "ridge solution not finite");
  return {wt.transpose(), task};
}

Eigen::MatrixXd stack_summaries(std::span<const StateSummary> summaries) {
  if (summaries.empty()) return {};
  const Eigen::Index dim = summaries.front().mean_state.size() + summaries.front().final_state.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(summaries.size()), dim);
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const auto row = summaries[i].concatenated();
    if (row.size() != dim) throw Error(ErrorCode::DimensionMismatch, "summaries differ in size");
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

ReadoutWeights train_readout(std::span<const StateSummary> summaries, std::span<const int> labels,
                             std::size_t num_classes, double ridge_lambda, Task task) {
  return train_readout(stack_summaries(summaries), labels, num_classes, ridge_lambda, task);
}

Classification classify(const ReadoutWeights& readout, const Eigen::VectorXd& summary) {
  if (static_cast<std::size_t>(summary.size()) != readout.summary_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                fmt::format("summary has {} entries, readout expects {}", summary.size(),
                            readout.summary_dim()));
  }
  const Eigen::Index dim = summary.size();
  Classification out;
  out.scores = readout.w_out.leftCols(dim) * summary + readout.w_out.col(dim);
  for (Eigen::Index c = 1; c < out.scores.size(); ++c) {
    if (out.scores[c] > out.scores[out.label]) out.label = static_cast<int>(c);
  }
  return out;
}

Classification classify(const ReadoutWeights& readout, const StateSummary& summary) {
  return classify(readout, summary.concatenated());
}

std::map<Task, ReadoutWeights> train_multitask(const Eigen::MatrixXd& summaries,
                                               const std::map<Task, TaskLabels>& tasks,
                                               double ridge_lambda) {
  std::map<Task, ReadoutWeights> out;
  for (const auto& [task, labels] : tasks) {
    out.emplace(task, train_readout(summaries, labels.labels, labels.num_classes, ridge_lambda, task));
  }
  return out;
}

}  // namespace tmfwc
