#pragma once

#include <cstdint>
#include <vector>

#include "nrlb/dataset.hpp"
#include "nrlb/network.hpp"

namespace nrlb {

/// Percentage of positions where the two prediction vectors agree.
double agreement_score(std::span<const int> preds_m, std::span<const int> preds_n);

/// Percentage of predictions equal to the reference labels.
double accuracy(std::span<const int> preds, std::span<const int> labels);

struct BoundaryFilterResult {
    Matrix features;                   // kept rows, original relative order
    std::vector<std::size_t> indices;  // row indices into the input
    std::vector<int> labels;           // solver argmax on the kept rows
};

/// Keeps the keep_fraction of samples whose softmax confidence vector has the
/// smallest standard deviation across classes (population divisor K), i.e. the
/// points nearest the decision boundary. Output size is ceil(keep_fraction*n).
BoundaryFilterResult boundary_filter(const SolverNetwork& solver, const Matrix& samples,
                                     double keep_fraction);

/// Standard deviation of one softmax confidence vector (divisor K).
double softmax_std(std::span<const double> probs);

struct AgreementExperimentResult {
    double alpha_a = 0.0;
    double alpha_b = 0.0;
    double original_test_accuracy = 0.0;
    double a_test_accuracy = 0.0;
    double b_test_accuracy = 0.0;
};

/// Trains three same-init networks on original / synth_a / synth_b and scores
/// each synthetic model's agreement against the original-data model on `test`.
AgreementExperimentResult agreement_experiment(const Dataset& original_train,
                                               const Dataset& synth_a, const Dataset& synth_b,
                                               const Dataset& test, std::size_t hidden_dim,
                                               const TrainConfig& train_cfg);

}  // namespace nrlb
