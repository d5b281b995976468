#include "nrlb/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace nrlb {

namespace {

void init_uniform(Matrix& w, std::vector<double>& b, std::size_t fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& v : w.data) v = dist(rng);
    std::fill(b.begin(), b.end(), 0.0);
}

Matrix hidden_pre(const SolverNetwork& net, const Matrix& batch) {
    require_shape(batch.cols == net.input_dim, "forward input dim");
    Matrix h = matmul(batch, net.params.w1);
    add_row_vector(h, net.params.b1);
    return h;
}

void relu_inplace(Matrix& m) {
    for (double& v : m.data) v = v > 0.0 ? v : 0.0;
}

}  // namespace

SolverNetwork make_solver(std::size_t input_dim, std::size_t hidden_dim, int num_classes,
                          std::uint64_t seed) {
    if (input_dim == 0 || hidden_dim == 0 || num_classes < 1)
        throw std::invalid_argument("make_solver: dimensions must be positive");
    SolverNetwork net;
    net.input_dim = input_dim;
    net.hidden_dim = hidden_dim;
    net.num_classes = num_classes;
    net.params.w1 = Matrix(input_dim, hidden_dim);
    net.params.b1.assign(hidden_dim, 0.0);
    net.params.w2 = Matrix(hidden_dim, static_cast<std::size_t>(num_classes));
    net.params.b2.assign(static_cast<std::size_t>(num_classes), 0.0);
    Rng rng(derive_seed(seed, "init"));
    init_uniform(net.params.w1, net.params.b1, input_dim, rng);
    init_uniform(net.params.w2, net.params.b2, hidden_dim, rng);
    return net;
}

Matrix forward(const SolverNetwork& net, const Matrix& batch) {
    Matrix h = hidden_pre(net, batch);
    relu_inplace(h);
    Matrix z = matmul(h, net.params.w2);
    add_row_vector(z, net.params.b2);
    return z;
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty logits");
    const double mx = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p = logits;
    for (std::size_t i = 0; i < p.rows; ++i) {
        auto row = p.row(i);
        const double mx = *std::max_element(row.begin(), row.end());
        double sum = 0.0;
        for (double& v : row) {
            v = std::exp(v - mx);
            sum += v;
        }
        for (double& v : row) v /= sum;
    }
    return p;
}

std::vector<int> predict(const SolverNetwork& net, const Matrix& features) {
    Matrix z = forward(net, features);
    std::vector<int> out(z.rows);
    for (std::size_t i = 0; i < z.rows; ++i) {
        auto row = z.row(i);
        out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

LossAndGrads loss_and_gradients(const SolverNetwork& net, const Matrix& batch,
                                std::span<const int> labels, LossKind kind) {
    require_shape(batch.rows == labels.size(), "loss batch/label count");
    for (int l : labels)
        if (l < 0 || l >= net.num_classes)
            throw std::invalid_argument("label " + std::to_string(l) + " outside [0, " +
                                        std::to_string(net.num_classes) + ")");

    const std::size_t n = batch.rows;
    const std::size_t k = static_cast<std::size_t>(net.num_classes);
    constexpr double kEps = 1e-12;  // clamps log/ratio arguments

    Matrix hpre = hidden_pre(net, batch);
    Matrix h = hpre;
    relu_inplace(h);
    Matrix z = matmul(h, net.params.w2);
    add_row_vector(z, net.params.b2);
    Matrix p = softmax_rows(z);

    double loss = 0.0;
    Matrix dz(n, k);
    for (std::size_t i = 0; i < n; ++i) {
        auto pr = p.row(i);
        const std::size_t t = static_cast<std::size_t>(labels[i]);
        if (kind == LossKind::CategoricalCrossEntropy) {
            loss += -std::log(std::max(pr[t], kEps));
            for (std::size_t j = 0; j < k; ++j)
                dz(i, j) = (pr[j] - (j == t ? 1.0 : 0.0)) / static_cast<double>(n);
        } else {
            // BCE summed over the K one-vs-rest outputs of the softmax head.
            // dL/dz_j = p_j * (g_j - sum_c g_c p_c) with g = dL/dp.
            double dot = 0.0;
            std::vector<double> g(k);
            for (std::size_t j = 0; j < k; ++j) {
                const double y = (j == t) ? 1.0 : 0.0;
                const double pj = std::clamp(pr[j], kEps, 1.0 - kEps);
                loss += -(y * std::log(pj) + (1.0 - y) * std::log(1.0 - pj)) /
                        static_cast<double>(k);
                g[j] = (-y / pj + (1.0 - y) / (1.0 - pj)) /
                       (static_cast<double>(n) * static_cast<double>(k));
                dot += g[j] * pr[j];
            }
            for (std::size_t j = 0; j < k; ++j) dz(i, j) = pr[j] * (g[j] - dot);
        }
    }
    loss /= static_cast<double>(n);

    LossAndGrads out;
    out.loss = loss;
    out.grads.w2 = matmul_tn(h, dz);
    out.grads.b2 = col_sum(dz);
    Matrix dh = matmul_nt(dz, net.params.w2);
    for (std::size_t i = 0; i < dh.data.size(); ++i)
        if (hpre.data[i] <= 0.0) dh.data[i] = 0.0;
    out.grads.w1 = matmul_tn(batch, dh);
    out.grads.b1 = col_sum(dh);
    return out;
}

AdamState AdamState::for_network(const SolverNetwork& net, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    auto zeros_like = [](const Params& p) {
        Params z;
        z.w1 = Matrix(p.w1.rows, p.w1.cols);
        z.b1.assign(p.b1.size(), 0.0);
        z.w2 = Matrix(p.w2.rows, p.w2.cols);
        z.b2.assign(p.b2.size(), 0.0);
        return z;
    };
    s.m = zeros_like(net.params);
    s.v = zeros_like(net.params);
    return s;
}

namespace {
void adam_update(std::span<double> p, std::span<const double> g, std::span<double> m,
                 std::span<double> v, const AdamState& s, double corr1, double corr2) {
    require_shape(p.size() == g.size() && p.size() == m.size() && p.size() == v.size(),
                  "adam tensor sizes");
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * g[i];
        v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * g[i] * g[i];
        const double mhat = m[i] / corr1;
        const double vhat = v[i] / corr2;
        p[i] -= s.learning_rate * mhat / (std::sqrt(vhat) + s.epsilon);
    }
}
}  // namespace

void adam_step(Params& params, const Params& grads, AdamState& state) {
    ++state.step;
    const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    adam_update(params.w1.data, grads.w1.data, state.m.w1.data, state.v.w1.data, state, corr1, corr2);
    adam_update(params.b1, grads.b1, state.m.b1, state.v.b1, state, corr1, corr2);
    adam_update(params.w2.data, grads.w2.data, state.m.w2.data, state.v.w2.data, state, corr1, corr2);
    adam_update(params.b2, grads.b2, state.m.b2, state.v.b2, state, corr1, corr2);
}

std::vector<EpochRecord> train(SolverNetwork& net, const Dataset& dataset, const TrainConfig& cfg,
                               const std::function<void(const EpochRecord&)>& per_epoch) {
    if (dataset.size() == 0) throw std::invalid_argument("train: empty dataset");
    if (cfg.epochs == 0) throw std::invalid_argument("train: epochs must be >= 1");
    if (cfg.batch_size == 0) throw std::invalid_argument("train: batch_size must be >= 1");
    dataset.validate();
    require_shape(dataset.dim() == net.input_dim, "train feature dim");
    if (dataset.num_classes > net.num_classes)
        throw std::invalid_argument("train: dataset has more classes than the network head");

    const std::size_t n = dataset.size();
    Rng rng(derive_seed(cfg.seed, "shuffle"));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    AdamState adam = AdamState::for_network(net, cfg.learning_rate);
    std::vector<EpochRecord> records;
    records.reserve(cfg.epochs);

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double loss_sum = 0.0;
        std::size_t correct = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, n);
            Matrix batch(stop - start, dataset.dim());
            std::vector<int> labels(stop - start);
            for (std::size_t i = start; i < stop; ++i) {
                auto src = dataset.features.row(order[i]);
                std::copy(src.begin(), src.end(), batch.row(i - start).begin());
                labels[i - start] = dataset.labels[order[i]];
            }
            auto lg = loss_and_gradients(net, batch, labels, cfg.loss);
            loss_sum += lg.loss * static_cast<double>(stop - start);
            adam_step(net.params, lg.grads, adam);
        }
        // train accuracy with the epoch-final weights
        auto preds = predict(net, dataset.features);
        for (std::size_t i = 0; i < n; ++i)
            if (preds[i] == dataset.labels[i]) ++correct;

        EpochRecord rec{epoch, loss_sum / static_cast<double>(n),
                        100.0 * static_cast<double>(correct) / static_cast<double>(n)};
        records.push_back(rec);
        if (per_epoch) per_epoch(rec);
    }
    return records;
}

// --- Checkpoints ------------------------------------------------------------

namespace {
constexpr char kCkptMagic[4] = {'N', 'R', 'L', 'B'};
constexpr std::uint16_t kCkptVersion = 1;

struct CkptReader {
    std::ifstream in;
    std::size_t offset = 0;
    std::string path;

    CkptReader(const std::string& p) : in(p, std::ios::binary), path(p) {
        if (!in) throw std::runtime_error("cannot open checkpoint: " + p);
    }

    void read(void* dst, std::size_t bytes, const char* what) {
        in.read(static_cast<char*>(dst), static_cast<std::streamsize>(bytes));
        if (!in)
            throw std::runtime_error(path + ": truncated checkpoint reading " + what +
                                     " at byte offset " + std::to_string(offset));
        offset += bytes;
    }

    template <typename T>
    T scalar(const char* what) {
        T v{};
        read(&v, sizeof(T), what);
        return v;
    }
};
}  // namespace

void save_checkpoint(const SolverNetwork& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kCkptMagic, 4);
    auto put = [&out](auto v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
    put(kCkptVersion);
    put(static_cast<std::uint32_t>(net.input_dim));
    put(static_cast<std::uint32_t>(net.hidden_dim));
    put(static_cast<std::uint32_t>(net.num_classes));
    auto put_block = [&out](std::span<const double> block) {
        out.write(reinterpret_cast<const char*>(block.data()),
                  static_cast<std::streamsize>(block.size() * sizeof(double)));
    };
    put_block(net.params.w1.data);
    put_block(net.params.b1);
    put_block(net.params.w2.data);
    put_block(net.params.b2);
    if (!out) throw std::runtime_error("write failed: " + path);
}

SolverNetwork load_checkpoint(const std::string& path) {
    CkptReader r(path);
    char magic[4];
    r.read(magic, 4, "magic");
    if (std::memcmp(magic, kCkptMagic, 4) != 0)
        throw std::runtime_error(path + ": bad checkpoint magic at byte offset 0, expected \"NRLB\"");
    const auto version = r.scalar<std::uint16_t>("version");
    if (version != kCkptVersion)
        throw std::runtime_error(path + ": checkpoint version " + std::to_string(version) +
                                 " unsupported (expected " + std::to_string(kCkptVersion) + ")");
    const auto input_dim = r.scalar<std::uint32_t>("input_dim");
    const auto hidden_dim = r.scalar<std::uint32_t>("hidden_dim");
    const auto num_classes = r.scalar<std::uint32_t>("num_classes");
    if (input_dim == 0 || hidden_dim == 0 || num_classes == 0)
        throw std::runtime_error(path + ": zero dimension in checkpoint header");

    SolverNetwork net;
    net.input_dim = input_dim;
    net.hidden_dim = hidden_dim;
    net.num_classes = static_cast<int>(num_classes);
    net.params.w1 = Matrix(input_dim, hidden_dim);
    net.params.b1.assign(hidden_dim, 0.0);
    net.params.w2 = Matrix(hidden_dim, num_classes);
    net.params.b2.assign(num_classes, 0.0);
    auto get_block = [&r](std::span<double> block, const char* what) {
        r.read(block.data(), block.size() * sizeof(double), what);
    };
    get_block(net.params.w1.data, "w1");
    get_block(net.params.b1, "b1");
    get_block(net.params.w2.data, "w2");
    get_block(net.params.b2, "b2");
    return net;
}

}  // namespace nrlb
