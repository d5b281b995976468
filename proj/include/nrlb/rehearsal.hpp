#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrlb/dataset.hpp"
#include "nrlb/network.hpp"
#include "nrlb/rng.hpp"

namespace nrlb {

/// One task in a two-task sequence. `class_offset` shifts labels into the
/// shared softmax head (old task at 0..K1-1, new task above).
struct TaskSpec {
    std::string id;
    Dataset train;
    Dataset test;
    int class_offset = 0;
};

/// Copy of a dataset with labels shifted by the task's class offset.
Dataset offset_labels(const Dataset& ds, int class_offset, int head_classes);

struct RetentionRecord {
    std::size_t epoch = 0;  // 1-based
    double old_task_accuracy = 0.0;  // percent, on real held-out old data
    double new_task_accuracy = 0.0;  // percent, on new-task test data
    std::string scheme;
};

/// Shuffled union of two datasets; the multiset of rows is preserved.
Dataset interleave(const Dataset& old_data, const Dataset& new_data, Rng& rng);

struct RehearsalConfig {
    std::size_t epochs = 30;  // epochs for interleaved, cycles for serial/sweep
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    LossKind loss = LossKind::CategoricalCrossEntropy;
    double sweep_fraction = 0.5;  // old-item fraction per minibatch, sweep only
    std::uint64_t seed = 0;
};

/// Old synthetic data shuffled into the new training set, trained jointly;
/// both accuracies measured on real test sets after every epoch.
std::vector<RetentionRecord> run_interleaved(SolverNetwork& solver, const Dataset& old_synth,
                                             const TaskSpec& new_task, const Dataset& old_test,
                                             const RehearsalConfig& cfg);

/// One epoch on old synthetic data, then one epoch on new data, per cycle.
std::vector<RetentionRecord> run_serial(SolverNetwork& solver, const Dataset& old_synth,
                                        const TaskSpec& new_task, const Dataset& old_test,
                                        const RehearsalConfig& cfg);

/// Tally of items that actually entered sweep minibatches.
struct SweepCounters {
    std::size_t old_items = 0;
    std::size_t new_items = 0;
};

/// Every minibatch mixes a fixed fraction of re-sampled old-synthetic items
/// with new-task items.
std::vector<RetentionRecord> run_sweep(SolverNetwork& solver, const Dataset& old_synth,
                                       const TaskSpec& new_task, const Dataset& old_test,
                                       const RehearsalConfig& cfg,
                                       SweepCounters* counters = nullptr);

/// Control: train on the new task only, still recording old-task accuracy.
std::vector<RetentionRecord> run_none(SolverNetwork& solver, const TaskSpec& new_task,
                                      const Dataset& old_test, const RehearsalConfig& cfg);

/// Uniform [0,1]^d vectors with balanced labels across K classes.
Dataset random_vector_dataset(std::size_t dim, std::size_t n_per_class, int num_classes, Rng& rng);

}  // namespace nrlb
