#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedsim/matrix.hpp"

namespace fedsim {

// Feature table plus integer class labels in [0, class_count).
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    int class_count = 0;

    std::size_t size() const { return labels.size(); }
    int input_dim() const { return static_cast<int>(features.cols); }
    void validate() const;

    // Label histogram normalized to a distribution over class_count bins.
    std::vector<double> label_distribution() const;
};

enum class PartitionKind { label_shards, dirichlet, iid };

std::string to_string(PartitionKind kind);
PartitionKind partition_kind_from_string(const std::string& s);

struct PartitionPlan {
    PartitionKind kind = PartitionKind::iid;
    int num_clients = 1;
    int shards_per_client = 1; // label_shards only
    double alpha = 1.0;        // dirichlet only
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const PartitionPlan&) const = default;
};

// Gaussian blobs: one unit-variance cluster per class, class means of norm
// `separation` (axis-aligned +/- directions while they last, then random
// unit directions). Deterministic per seed.
Dataset gen_synthetic(int classes, int per_class, int input_dim, double separation,
                      std::uint64_t seed);

// Split into num_clients disjoint shards covering the input. Every client
// receives at least one sample or the plan is rejected.
std::vector<Dataset> partition(const Dataset& data, const PartitionPlan& plan);

// Mean total-variation distance between each client's label distribution and
// the pooled distribution. 0 for identical clients; approaches 1 for extreme
// skew.
double heterogeneity_index(const std::vector<Dataset>& partitions);

struct CsvSchema {
    int label_column = 0;
    std::vector<int> feature_columns;

    bool operator==(const CsvSchema&) const = default;
};

// Numeric CSV, no header row, '.' decimal separator. Labels must be
// non-negative integers; class_count becomes max label + 1. Row order is
// preserved. Parse failures name the row and column (1-based).
Dataset load_csv(const std::string& path, const CsvSchema& schema);

// Restrict a dataset to the given row indices (order preserved).
Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices);

} // namespace fedsim
