#include "nrlb/enrichment.hpp"

#include <cmath>
#include <numbers>

namespace nrlb {

std::optional<Matrix> cholesky(const Matrix& spd) {
    require_shape(spd.rows == spd.cols, "cholesky square input");
    const std::size_t d = spd.rows;
    Matrix l(d, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = spd(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                if (s <= 0.0 || !std::isfinite(s)) return std::nullopt;
                l(i, i) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j);
            }
        }
    }
    return l;
}

GaussianModel fit_gaussian(const Matrix& samples) {
    if (samples.rows < 2)
        throw std::invalid_argument("fit_gaussian: need at least 2 samples, got " +
                                    std::to_string(samples.rows));
    const std::size_t n = samples.rows;
    const std::size_t d = samples.cols;

    GaussianModel model;
    model.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        auto row = samples.row(i);
        for (std::size_t j = 0; j < d; ++j) model.mean[j] += row[j];
    }
    for (double& v : model.mean) v /= double(n);

    model.covariance = Matrix(d, d);
    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        auto src = samples.row(i);
        auto dst = centered.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] - model.mean[j];
    }
    model.covariance = matmul_tn(centered, centered);
    for (double& v : model.covariance.data) v /= double(n);

    // grow the diagonal regularizer until Cholesky succeeds
    for (double eps = 1e-6;; eps *= 10.0) {
        if (eps > 1e6) throw std::runtime_error("fit_gaussian: covariance cannot be regularized");
        Matrix reg = model.covariance;
        for (std::size_t i = 0; i < d; ++i) reg(i, i) += eps;
        if (auto l = cholesky(reg)) {
            model.eps_reg = eps;
            model.chol = std::move(*l);
            return model;
        }
    }
}

double gaussian_log_density(const GaussianModel& model, std::span<const double> x) {
    const std::size_t d = model.dim();
    require_shape(x.size() == d, "gaussian_density input dim");
    // forward-solve L y = (x - mu); quadratic form is |y|^2, log|Sigma| = 2 sum log L_ii
    std::vector<double> y(d);
    double logdet = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double s = x[i] - model.mean[i];
        for (std::size_t k = 0; k < i; ++k) s -= model.chol(i, k) * y[k];
        y[i] = s / model.chol(i, i);
        quad += y[i] * y[i];
        logdet += 2.0 * std::log(model.chol(i, i));
    }
    return -0.5 * (double(d) * std::log(2.0 * std::numbers::pi) + logdet + quad);
}

double gaussian_density(const GaussianModel& model, std::span<const double> x) {
    return std::exp(gaussian_log_density(model, x));
}

Matrix sample_gaussian(const GaussianModel& model, std::size_t n, Rng& rng) {
    const std::size_t d = model.dim();
    Matrix out(n, d);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> z(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (double& v : z) v = g(rng);
        auto row = out.row(i);
        for (std::size_t r = 0; r < d; ++r) {
            double s = model.mean[r];
            for (std::size_t k = 0; k <= r; ++k) s += model.chol(r, k) * z[k];
            row[r] = std::clamp(s, 0.0, 1.0);
        }
    }
    return out;
}

namespace {

Matrix class_rows(const Dataset& ds, int cls) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < ds.size(); ++i)
        if (ds.labels[i] == cls) idx.push_back(i);
    Matrix out(idx.size(), ds.features.cols);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        auto src = ds.features.row(idx[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

}  // namespace

Dataset enrich_step1(const Dataset& raw, std::size_t n_per_class, Rng& rng) {
    raw.validate();
    Dataset out = raw;
    for (int cls = 0; cls < raw.num_classes; ++cls) {
        Matrix rows = class_rows(raw, cls);
        if (rows.rows < 2)
            throw std::invalid_argument("enrich_step1: class " + std::to_string(cls) +
                                        " has fewer than 2 samples");
        if (n_per_class == 0) continue;
        GaussianModel model = fit_gaussian(rows);
        Dataset add;
        add.num_classes = raw.num_classes;
        add.features = sample_gaussian(model, n_per_class, rng);
        add.labels.assign(n_per_class, cls);
        append(out, add);
    }
    return out;
}

Step2Result enrich_step2(const Dataset& step1_data, std::size_t n_global,
                         const SolverNetwork& solver, double min_confidence, Rng& rng) {
    step1_data.validate();
    Step2Result result;
    result.dataset = step1_data;
    if (n_global == 0) return result;

    GaussianModel model = fit_gaussian(step1_data.features);
    Matrix drawn = sample_gaussian(model, n_global, rng);
    result.drawn = n_global;

    Matrix probs = softmax_rows(forward(solver, drawn));
    std::vector<std::size_t> kept;
    std::vector<int> kept_labels;
    for (std::size_t i = 0; i < drawn.rows; ++i) {
        auto row = probs.row(i);
        auto top = std::max_element(row.begin(), row.end());
        if (*top >= min_confidence) {
            kept.push_back(i);
            kept_labels.push_back(static_cast<int>(top - row.begin()));
        }
    }
    result.kept = kept.size();

    Dataset add;
    add.num_classes = step1_data.num_classes;
    add.features = Matrix(kept.size(), drawn.cols);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        auto src = drawn.row(kept[i]);
        std::copy(src.begin(), src.end(), add.features.row(i).begin());
    }
    add.labels = std::move(kept_labels);
    // solver head may be wider than the generated class set
    int maxl = step1_data.num_classes - 1;
    for (int l : add.labels) maxl = std::max(maxl, l);
    add.num_classes = maxl + 1;
    append(result.dataset, add);
    return result;
}

SyntheticResult build_synthetic(const SolverNetwork& solver, int num_classes,
                                const GaConfig& ga_cfg, const EnrichConfig& enrich_cfg,
                                std::uint64_t seed, const StatsSink& stats) {
    GaConfig ga = ga_cfg;
    ga.seed = derive_seed(seed, "ga");

    SyntheticResult out;
    GenerateResult raw = generate_raw(solver, num_classes, ga, stats);
    out.ga_converged = raw.converged_all;
    out.unconverged_classes = raw.unconverged_classes;
    out.raw_count = raw.dataset.size();

    Rng rng1(derive_seed(seed, "enrich1"));
    Dataset step1 = enrich_step1(raw.dataset, enrich_cfg.step1_per_class, rng1);
    out.step1_count = step1.size();

    Rng rng2(derive_seed(seed, "enrich2"));
    Step2Result step2 =
        enrich_step2(step1, enrich_cfg.step2_global, solver, enrich_cfg.min_confidence, rng2);
    out.step2_drawn = step2.drawn;
    out.step2_kept = step2.kept;
    out.dataset = std::move(step2.dataset);
    return out;
}

}  // namespace nrlb
