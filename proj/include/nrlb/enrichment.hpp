#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nrlb/dataset.hpp"
#include "nrlb/genetic.hpp"
#include "nrlb/matrix.hpp"
#include "nrlb/network.hpp"
#include "nrlb/rng.hpp"

namespace nrlb {

/// Multivariate Gaussian with a diagonal regularizer large enough for the
/// Cholesky factorization of Sigma + eps*I to succeed.
struct GaussianModel {
    std::vector<double> mean;
    Matrix covariance;   // d x d, symmetric, pre-regularization
    double eps_reg = 0.0;
    Matrix chol;         // lower-triangular factor of covariance + eps_reg*I

    std::size_t dim() const { return mean.size(); }
};

/// In-place Cholesky of a symmetric matrix; empty optional if not SPD.
std::optional<Matrix> cholesky(const Matrix& spd);

/// MLE fit (divisor n); the diagonal regularizer starts at 1e-6 and grows
/// tenfold until the factorization succeeds.
GaussianModel fit_gaussian(const Matrix& samples);

double gaussian_log_density(const GaussianModel& model, std::span<const double> x);
double gaussian_density(const GaussianModel& model, std::span<const double> x);

/// n draws of mu + L z, clamped to [0,1]^d.
Matrix sample_gaussian(const GaussianModel& model, std::size_t n, Rng& rng);

/// Per-class Gaussian fit and sampling; adds n_per_class points to every class.
Dataset enrich_step1(const Dataset& raw, std::size_t n_per_class, Rng& rng);

struct Step2Result {
    Dataset dataset;
    std::size_t drawn = 0;
    std::size_t kept = 0;
};

/// One global Gaussian over all step-1 genomes (labels ignored); drawn points
/// are labeled by solver argmax and dropped when top confidence < min_confidence.
Step2Result enrich_step2(const Dataset& step1_data, std::size_t n_global,
                         const SolverNetwork& solver, double min_confidence, Rng& rng);

struct EnrichConfig {
    std::size_t step1_per_class = 1000;
    std::size_t step2_global = 2000;
    double min_confidence = 0.5;
};

struct SyntheticResult {
    Dataset dataset;
    std::size_t raw_count = 0;
    std::size_t step1_count = 0;
    std::size_t step2_drawn = 0;
    std::size_t step2_kept = 0;
    bool ga_converged = true;
    std::vector<int> unconverged_classes;
};

/// Full pipeline: GA raw generation, per-class enrichment, global enrichment.
/// Consumes only the solver, never the original training data.
SyntheticResult build_synthetic(const SolverNetwork& solver, int num_classes,
                                const GaConfig& ga_cfg, const EnrichConfig& enrich_cfg,
                                std::uint64_t seed, const StatsSink& stats = {});

}  // namespace nrlb
