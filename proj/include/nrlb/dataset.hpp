#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nrlb/matrix.hpp"
#include "nrlb/rng.hpp"

namespace nrlb {

/// Labeled feature matrix. Features live in [0,1]; labels in [0, num_classes).
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    int num_classes = 0;

    std::size_t size() const { return labels.size(); }
    std::size_t dim() const { return features.cols; }

    void validate() const;
};

/// Appends rows of `other` to `ds`. Class counts are merged; num_classes takes the max.
void append(Dataset& ds, const Dataset& other);

/// Subset by row indices (labels carried along).
Dataset take(const Dataset& ds, const std::vector<std::size_t>& indices);

/// Per-class sample counts, indexed by label.
std::vector<std::size_t> class_counts(const Dataset& ds);

// --- IDX (MNIST-style) ingestion -------------------------------------------

/// Parses a big-endian IDX u8 image file (magic 0x00000803). Pixels are scaled
/// by 1/255 and images flattened to rows*cols features.
Matrix load_idx_images(const std::string& path);

/// Parses a big-endian IDX label file (magic 0x00000801).
std::vector<int> load_idx_labels(const std::string& path);

/// Joins an image and a label file into a Dataset; counts must match.
Dataset load_idx_dataset(const std::string& images_path, const std::string& labels_path);

// --- Toy generators ---------------------------------------------------------

/// Isotropic Gaussian clusters around the given centers, clamped to [0,1]^d.
Dataset make_blobs(std::size_t n_per_class, const std::vector<std::vector<double>>& centers,
                   double stddev, Rng& rng);

/// Two interleaving half-circle arcs with Gaussian noise, rescaled into [0,1]^2.
Dataset make_moons(std::size_t n, double noise, Rng& rng);

// --- Persistence ------------------------------------------------------------

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

// --- CSV --------------------------------------------------------------------

/// One metrics table: fixed column order, one row per record.
struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> cells);
};

/// Formats a double with enough digits for exact round-trip.
std::string csv_number(double v);

/// RFC-4180-style output: header row then data rows, fields quoted when needed.
void write_metrics_csv(const CsvTable& table, const std::string& path);

}  // namespace nrlb
