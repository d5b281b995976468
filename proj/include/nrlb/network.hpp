#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "nrlb/dataset.hpp"
#include "nrlb/matrix.hpp"
#include "nrlb/rng.hpp"

namespace nrlb {

/// Trainable parameter set of the solver (also doubles as a gradient holder).
struct Params {
    Matrix w1;               // input_dim x hidden_dim
    std::vector<double> b1;  // hidden_dim
    Matrix w2;               // hidden_dim x num_classes
    std::vector<double> b2;  // num_classes
};

/// One-hidden-layer MLP with ReLU hidden activation and a softmax head.
struct SolverNetwork {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    int num_classes = 0;
    Params params;
};

/// He-style uniform init scaled by fan-in, fully determined by the seed.
SolverNetwork make_solver(std::size_t input_dim, std::size_t hidden_dim, int num_classes,
                          std::uint64_t seed);

/// Logits, one row per input row.
Matrix forward(const SolverNetwork& net, const Matrix& batch);

/// Numerically stable softmax of one logit row (max-subtraction).
std::vector<double> softmax(std::span<const double> logits);

/// Row-wise softmax of a logit matrix.
Matrix softmax_rows(const Matrix& logits);

/// Argmax class per row; ties resolve to the lowest class index.
std::vector<int> predict(const SolverNetwork& net, const Matrix& features);

enum class LossKind {
    CategoricalCrossEntropy,   // standard softmax CE
    PerClassBinaryCrossEntropy // one-vs-rest BCE applied to the softmax outputs
};

struct LossAndGrads {
    double loss = 0.0;
    Params grads;
};

LossAndGrads loss_and_gradients(const SolverNetwork& net, const Matrix& batch,
                                std::span<const int> labels, LossKind kind);

/// Adam accumulators mirroring the parameter shapes.
struct AdamState {
    Params m;
    Params v;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 1e-3;

    static AdamState for_network(const SolverNetwork& net, double learning_rate = 1e-3);
};

/// Standard bias-corrected Adam update, in place.
void adam_step(Params& params, const Params& grads, AdamState& state);

struct TrainConfig {
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    LossKind loss = LossKind::CategoricalCrossEntropy;
    std::uint64_t seed = 0;
};

struct EpochRecord {
    std::size_t epoch = 0;  // 1-based
    double loss = 0.0;
    double train_accuracy = 0.0;  // percent
};

/// Minibatch Adam training; deterministic given the seed (fixed shuffle order).
/// `per_epoch`, when set, runs after every epoch (used by the rehearsal schedules).
std::vector<EpochRecord> train(SolverNetwork& net, const Dataset& dataset, const TrainConfig& cfg,
                               const std::function<void(const EpochRecord&)>& per_epoch = {});

void save_checkpoint(const SolverNetwork& net, const std::string& path);
SolverNetwork load_checkpoint(const std::string& path);

}  // namespace nrlb
