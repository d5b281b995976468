#include "nrlb/metrics.hpp"

#include <cmath>
#include <numeric>

namespace nrlb {

double agreement_score(std::span<const int> preds_m, std::span<const int> preds_n) {
    if (preds_m.empty()) throw std::invalid_argument("agreement_score: empty predictions");
    if (preds_m.size() != preds_n.size())
        throw std::invalid_argument("agreement_score: length mismatch " +
                                    std::to_string(preds_m.size()) + " vs " +
                                    std::to_string(preds_n.size()));
    std::size_t matching = 0;
    for (std::size_t i = 0; i < preds_m.size(); ++i)
        if (preds_m[i] == preds_n[i]) ++matching;
    return 100.0 * double(matching) / double(preds_m.size());
}

double accuracy(std::span<const int> preds, std::span<const int> labels) {
    return agreement_score(preds, labels);
}

double softmax_std(std::span<const double> probs) {
    const double k = double(probs.size());
    double mean = 0.0;
    for (double p : probs) mean += p;
    mean /= k;
    double var = 0.0;
    for (double p : probs) var += (p - mean) * (p - mean);
    return std::sqrt(var / k);  // population divisor: the confidence list is complete
}

BoundaryFilterResult boundary_filter(const SolverNetwork& solver, const Matrix& samples,
                                     double keep_fraction) {
    if (samples.rows == 0) throw std::invalid_argument("boundary_filter: empty input");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw std::invalid_argument("boundary_filter: keep_fraction must be in (0,1]");

    Matrix probs = softmax_rows(forward(solver, samples));
    std::vector<double> stds(samples.rows);
    for (std::size_t i = 0; i < samples.rows; ++i) stds[i] = softmax_std(probs.row(i));

    std::vector<std::size_t> order(samples.rows);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return stds[a] < stds[b]; });

    const std::size_t keep =
        static_cast<std::size_t>(std::ceil(keep_fraction * double(samples.rows)));
    order.resize(keep);
    std::sort(order.begin(), order.end());  // kept rows retain their input order

    BoundaryFilterResult out;
    out.indices = order;
    out.features = Matrix(keep, samples.cols);
    out.labels.resize(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        auto src = samples.row(order[i]);
        std::copy(src.begin(), src.end(), out.features.row(i).begin());
        auto prow = probs.row(order[i]);
        out.labels[i] = static_cast<int>(std::max_element(prow.begin(), prow.end()) - prow.begin());
    }
    return out;
}

AgreementExperimentResult agreement_experiment(const Dataset& original_train,
                                               const Dataset& synth_a, const Dataset& synth_b,
                                               const Dataset& test, std::size_t hidden_dim,
                                               const TrainConfig& train_cfg) {
    const int head = std::max({original_train.num_classes, synth_a.num_classes,
                               synth_b.num_classes, test.num_classes});
    SolverNetwork base =
        make_solver(original_train.dim(), hidden_dim, head, derive_seed(train_cfg.seed, "shared-init"));

    SolverNetwork net_orig = base;
    SolverNetwork net_a = base;
    SolverNetwork net_b = base;
    train(net_orig, original_train, train_cfg);
    train(net_a, synth_a, train_cfg);
    train(net_b, synth_b, train_cfg);

    auto preds_orig = predict(net_orig, test.features);
    auto preds_a = predict(net_a, test.features);
    auto preds_b = predict(net_b, test.features);

    AgreementExperimentResult r;
    r.alpha_a = agreement_score(preds_a, preds_orig);
    r.alpha_b = agreement_score(preds_b, preds_orig);
    r.original_test_accuracy = accuracy(preds_orig, test.labels);
    r.a_test_accuracy = accuracy(preds_a, test.labels);
    r.b_test_accuracy = accuracy(preds_b, test.labels);
    return r;
}

}  // namespace nrlb
