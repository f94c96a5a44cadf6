#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tmfwc/reservoir.hpp"

namespace tmfwc {

enum class Task { Digit, Speaker };

std::string_view to_string(Task task) noexcept;
Task task_from_string(std::string_view name);

struct ReadoutWeights {
  Eigen::MatrixXd w_out;  // classes x (summary_dim + 1); last column is the bias
  Task task = Task::Digit;

  std::size_t num_classes() const noexcept { return static_cast<std::size_t>(w_out.rows()); }
  std::size_t summary_dim() const noexcept {
    return w_out.cols() > 0 ? static_cast<std::size_t>(w_out.cols() - 1) : 0;
  }
};

// Ridge regression onto one-hot targets over bias-augmented rows of
// `summaries` (examples x dim): solves (S^T S + lambda I) W^T = S^T Y by a
// Cholesky (LDL^T) factorization. Labels must lie in [0, num_classes); every
// class needs at least one example (InsufficientData). A singular system at
// lambda = 0 raises IllConditioned.
ReadoutWeights train_readout(const Eigen::MatrixXd& summaries, std::span<const int> labels,
                             std::size_t num_classes, double ridge_lambda, Task task);
ReadoutWeights train_readout(std::span<const StateSummary> summaries, std::span<const int> labels,
                             std::size_t num_classes, double ridge_lambda, Task task);

struct Classification {
  int label = 0;
  Eigen::VectorXd scores;
};

// scores = W_out [x; 1]; argmax with ties going to the lowest class id.
Classification classify(const ReadoutWeights& readout, const Eigen::VectorXd& summary);
Classification classify(const ReadoutWeights& readout, const StateSummary& summary);

struct TaskLabels {
  std::vector<int> labels;
  std::size_t num_classes = 0;
};

// Independent ridge solves over the same summaries, one per task.
std::map<Task, ReadoutWeights> train_multitask(const Eigen::MatrixXd& summaries,
                                               const std::map<Task, TaskLabels>& tasks,
                                               double ridge_lambda);

// Stacks concatenated summaries as rows.
Eigen::MatrixXd stack_summaries(std::span<const StateSummary> summaries);

}  // namespace tmfwc
