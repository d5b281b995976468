#include "nrlb/rehearsal.hpp"

#include <numeric>

namespace nrlb {

Dataset offset_labels(const Dataset& ds, int class_offset, int head_classes) {
    Dataset out = ds;
    out.num_classes = head_classes;
    for (int& l : out.labels) {
        l += class_offset;
        if (l < 0 || l >= head_classes)
            throw std::invalid_argument("offset_labels: label " + std::to_string(l) +
                                        " outside the shared head [0, " +
                                        std::to_string(head_classes) + ")");
    }
    return out;
}

Dataset interleave(const Dataset& old_data, const Dataset& new_data, Rng& rng) {
    if (old_data.size() == 0 && new_data.size() == 0)
        throw std::invalid_argument("interleave: both datasets empty");
    Dataset merged;
    if (old_data.size() > 0) merged = old_data;
    append(merged, new_data);
    std::vector<std::size_t> order(merged.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    Dataset out = take(merged, order);
    out.num_classes = merged.num_classes;
    return out;
}

namespace {

double accuracy_on(const SolverNetwork& net, const Dataset& test) {
    auto preds = predict(net, test.features);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < preds.size(); ++i)
        if (preds[i] == test.labels[i]) ++correct;
    return 100.0 * double(correct) / double(test.size());
}

/// One pass over `ds` in shuffled minibatches with a persistent Adam state.
void epoch_pass(SolverNetwork& net, const Dataset& ds, const RehearsalConfig& cfg, Rng& rng,
                AdamState& adam) {
    std::vector<std::size_t> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < ds.size(); start += cfg.batch_size) {
        const std::size_t stop = std::min(start + cfg.batch_size, ds.size());
        Matrix batch(stop - start, ds.dim());
        std::vector<int> labels(stop - start);
        for (std::size_t i = start; i < stop; ++i) {
            auto src = ds.features.row(order[i]);
            std::copy(src.begin(), src.end(), batch.row(i - start).begin());
            labels[i - start] = ds.labels[order[i]];
        }
        auto lg = loss_and_gradients(net, batch, labels, cfg.loss);
        adam_step(net.params, lg.grads, adam);
    }
}

RetentionRecord record_epoch(const SolverNetwork& net, std::size_t epoch, const Dataset& old_test,
                             const Dataset& new_test, const char* scheme) {
    return RetentionRecord{epoch, accuracy_on(net, old_test), accuracy_on(net, new_test), scheme};
}

}  // namespace

std::vector<RetentionRecord> run_interleaved(SolverNetwork& solver, const Dataset& old_synth,
                                             const TaskSpec& new_task, const Dataset& old_test,
                                             const RehearsalConfig& cfg) {
    Dataset new_train = offset_labels(new_task.train, new_task.class_offset, solver.num_classes);
    Dataset new_test = offset_labels(new_task.test, new_task.class_offset, solver.num_classes);
    Rng mix_rng(derive_seed(cfg.seed, "interleave"));
    Dataset combined = interleave(old_synth, new_train, mix_rng);

    Rng rng(derive_seed(cfg.seed, "rehearse"));
    AdamState adam = AdamState::for_network(solver, cfg.learning_rate);
    std::vector<RetentionRecord> records;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        epoch_pass(solver, combined, cfg, rng, adam);
        records.push_back(record_epoch(solver, epoch, old_test, new_test, "interleaved"));
    }
    return records;
}

std::vector<RetentionRecord> run_serial(SolverNetwork& solver, const Dataset& old_synth,
                                        const TaskSpec& new_task, const Dataset& old_test,
                                        const RehearsalConfig& cfg) {
    Dataset new_train = offset_labels(new_task.train, new_task.class_offset, solver.num_classes);
    Dataset new_test = offset_labels(new_task.test, new_task.class_offset, solver.num_classes);

    Rng rng(derive_seed(cfg.seed, "rehearse"));
    AdamState adam = AdamState::for_network(solver, cfg.learning_rate);
    std::vector<RetentionRecord> records;
    for (std::size_t cycle = 1; cycle <= cfg.epochs; ++cycle) {
        epoch_pass(solver, old_synth, cfg, rng, adam);
        epoch_pass(solver, new_train, cfg, rng, adam);
        records.push_back(record_epoch(solver, cycle, old_test, new_test, "serial"));
    }
    return records;
}

std::vector<RetentionRecord> run_sweep(SolverNetwork& solver, const Dataset& old_synth,
                                       const TaskSpec& new_task, const Dataset& old_test,
                                       const RehearsalConfig& cfg, SweepCounters* counters) {
    if (!(cfg.sweep_fraction > 0.0 && cfg.sweep_fraction < 1.0))
        throw std::invalid_argument("run_sweep: sweep_fraction must be in (0,1)");
    if (old_synth.size() == 0) throw std::invalid_argument("run_sweep: empty old_synth");
    Dataset new_train = offset_labels(new_task.train, new_task.class_offset, solver.num_classes);
    Dataset new_test = offset_labels(new_task.test, new_task.class_offset, solver.num_classes);

    const std::size_t n_old_per_batch = std::min(
        cfg.batch_size,
        static_cast<std::size_t>(std::llround(cfg.sweep_fraction * double(cfg.batch_size))));
    const std::size_t n_new_per_batch = cfg.batch_size - n_old_per_batch;

    Rng rng(derive_seed(cfg.seed, "rehearse"));
    AdamState adam = AdamState::for_network(solver, cfg.learning_rate);
    std::uniform_int_distribution<std::size_t> pick_old(0, old_synth.size() - 1);
    std::vector<std::size_t> new_order(new_train.size());
    std::iota(new_order.begin(), new_order.end(), 0);

    std::vector<RetentionRecord> records;
    for (std::size_t cycle = 1; cycle <= cfg.epochs; ++cycle) {
        std::shuffle(new_order.begin(), new_order.end(), rng);
        const std::size_t batches =
            n_new_per_batch > 0
                ? (new_train.size() + n_new_per_batch - 1) / n_new_per_batch
                : (new_train.size() + cfg.batch_size - 1) / cfg.batch_size;
        std::size_t new_cursor = 0;
        for (std::size_t b = 0; b < batches; ++b) {
            const std::size_t n_new =
                n_new_per_batch > 0 ? std::min(n_new_per_batch, new_train.size() - new_cursor) : 0;
            Matrix batch(n_old_per_batch + n_new, new_train.dim());
            std::vector<int> labels(batch.rows);
            for (std::size_t i = 0; i < n_old_per_batch; ++i) {
                const std::size_t j = pick_old(rng);  // freshly re-sampled old items
                auto src = old_synth.features.row(j);
                std::copy(src.begin(), src.end(), batch.row(i).begin());
                labels[i] = old_synth.labels[j];
            }
            for (std::size_t i = 0; i < n_new; ++i) {
                auto src = new_train.features.row(new_order[new_cursor]);
                std::copy(src.begin(), src.end(), batch.row(n_old_per_batch + i).begin());
                labels[n_old_per_batch + i] = new_train.labels[new_order[new_cursor]];
                ++new_cursor;
            }
            if (counters) {
                counters->old_items += n_old_per_batch;
                counters->new_items += n_new;
            }
            auto lg = loss_and_gradients(solver, batch, labels, cfg.loss);
            adam_step(solver.params, lg.grads, adam);
        }
        records.push_back(record_epoch(solver, cycle, old_test, new_test, "sweep"));
    }
    return records;
}

std::vector<RetentionRecord> run_none(SolverNetwork& solver, const TaskSpec& new_task,
                                      const Dataset& old_test, const RehearsalConfig& cfg) {
    Dataset new_train = offset_labels(new_task.train, new_task.class_offset, solver.num_classes);
    Dataset new_test = offset_labels(new_task.test, new_task.class_offset, solver.num_classes);

    Rng rng(derive_seed(cfg.seed, "rehearse"));
    AdamState adam = AdamState::for_network(solver, cfg.learning_rate);
    std::vector<RetentionRecord> records;
    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        epoch_pass(solver, new_train, cfg, rng, adam);
        records.push_back(record_epoch(solver, epoch, old_test, new_test, "none"));
    }
    return records;
}

Dataset random_vector_dataset(std::size_t dim, std::size_t n_per_class, int num_classes, Rng& rng) {
    if (dim == 0 || num_classes < 1)
        throw std::invalid_argument("random_vector_dataset: bad dimensions");
    Dataset ds;
    ds.num_classes = num_classes;
    ds.features = Matrix(n_per_class * static_cast<std::size_t>(num_classes), dim);
    ds.labels.reserve(ds.features.rows);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::size_t row = 0;
    for (int cls = 0; cls < num_classes; ++cls) {
        for (std::size_t i = 0; i < n_per_class; ++i, ++row) {
            for (double& v : ds.features.row(row)) v = unit(rng);
            ds.labels.push_back(cls);
        }
    }
    return ds;
}

}  // namespace nrlb
