#include "fedsim/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

void Dataset::validate() const {
    if (labels.empty() || features.rows == 0) throw ValidationError("Dataset: empty dataset");
    if (features.rows != labels.size()) {
        throw ValidationError("Dataset: feature rows != label count");
    }
    if (class_count < 1) throw ValidationError("Dataset: class_count must be >= 1");
    for (int y : labels) {
        if (y < 0 || y >= class_count) throw ValidationError("Dataset: label out of range");
    }
}

std::vector<double> Dataset::label_distribution() const {
    std::vector<double> dist(static_cast<std::size_t>(class_count), 0.0);
    for (int y : labels) dist[static_cast<std::size_t>(y)] += 1.0;
    for (auto& d : dist) d /= static_cast<double>(labels.size());
    return dist;
}

std::string to_string(PartitionKind kind) {
    switch (kind) {
        case PartitionKind::label_shards: return "label_shards";
        case PartitionKind::dirichlet: return "dirichlet";
        case PartitionKind::iid: return "iid";
    }
    return "?";
}

PartitionKind partition_kind_from_string(const std::string& s) {
    if (s == "label_shards") return PartitionKind::label_shards;
    if (s == "dirichlet") return PartitionKind::dirichlet;
    if (s == "iid") return PartitionKind::iid;
    throw ValidationError("unknown partition kind: '" + s + "'");
}

void PartitionPlan::validate() const {
    if (num_clients < 1) throw ValidationError("PartitionPlan.num_clients must be >= 1");
    if (kind == PartitionKind::label_shards && shards_per_client < 1) {
        throw ValidationError("PartitionPlan.shards_per_client must be >= 1");
    }
    if (kind == PartitionKind::dirichlet && !(alpha > 0.0)) {
        throw ValidationError("PartitionPlan.alpha must be > 0");
    }
}

Dataset gen_synthetic(int classes, int per_class, int input_dim, double separation,
                      std::uint64_t seed) {
    if (classes < 2) throw ValidationError("gen_synthetic: classes must be >= 2");
    if (per_class < 1) throw ValidationError("gen_synthetic: per_class must be >= 1");
    if (input_dim < 1) throw ValidationError("gen_synthetic: input_dim must be >= 1");
    if (!(separation >= 0.0)) throw ValidationError("gen_synthetic: separation must be >= 0");

    const auto d = static_cast<std::size_t>(input_dim);
    Rng rng(seed);

    // Class means: +/- axis directions cover the first 2*d classes; any
    // further classes get random unit directions.
    std::vector<std::vector<double>> means(static_cast<std::size_t>(classes),
                                           std::vector<double>(d, 0.0));
    for (int c = 0; c < classes; ++c) {
        auto& m = means[static_cast<std::size_t>(c)];
        if (c < 2 * input_dim) {
            const double sign = (c < input_dim) ? 1.0 : -1.0;
            m[static_cast<std::size_t>(c % input_dim)] = sign * separation;
        } else {
            double norm = 0.0;
            while (norm == 0.0) {
                for (auto& x : m) x = rng.normal();
                norm = std::sqrt(std::inner_product(m.begin(), m.end(), m.begin(), 0.0));
            }
            for (auto& x : m) x *= separation / norm;
        }
    }

    const std::size_t n = static_cast<std::size_t>(classes) * static_cast<std::size_t>(per_class);
    Dataset out;
    out.features = Matrix(n, d);
    out.labels.resize(n);
    out.class_count = classes;
    std::size_t row = 0;
    for (int c = 0; c < classes; ++c) {
        const auto& m = means[static_cast<std::size_t>(c)];
        for (int i = 0; i < per_class; ++i, ++row) {
            for (std::size_t f = 0; f < d; ++f) out.features.at(row, f) = m[f] + rng.normal();
            out.labels[row] = c;
        }
    }
    return out;
}

Dataset subset(const Dataset& data, const std::vector<std::size_t>& indices) {
    Dataset out;
    out.features = Matrix(indices.size(), data.features.cols);
    out.labels.resize(indices.size());
    out.class_count = data.class_count;
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const std::size_t src = indices[i];
        for (std::size_t f = 0; f < data.features.cols; ++f) {
            out.features.at(i, f) = data.features.at(src, f);
        }
        out.labels[i] = data.labels[src];
    }
    return out;
}

namespace {

std::vector<Dataset> from_index_groups(const Dataset& data,
                                       const std::vector<std::vector<std::size_t>>& groups) {
    std::vector<Dataset> out;
    out.reserve(groups.size());
    for (const auto& g : groups) out.push_back(subset(data, g));
    return out;
}

std::vector<std::vector<std::size_t>> split_label_shards(const Dataset& data,
                                                         const PartitionPlan& plan) {
    const auto k = static_cast<std::size_t>(plan.num_clients);
    const auto spc = static_cast<std::size_t>(plan.shards_per_client);
    const std::size_t total_shards = k * spc;
    const std::size_t n = data.size();
    if (n < total_shards) {
        throw UsageError("partition: label_shards needs at least " +
                         std::to_string(total_shards) + " samples, got " + std::to_string(n));
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return data.labels[a] < data.labels[b];
    });

    // Contiguous slices of the label-sorted order; the first n % total_shards
    // shards get one extra sample.
    const std::size_t base = n / total_shards;
    const std::size_t extra = n % total_shards;
    std::vector<std::pair<std::size_t, std::size_t>> shards; // [begin, end)
    std::size_t pos = 0;
    for (std::size_t s = 0; s < total_shards; ++s) {
        const std::size_t len = base + (s < extra ? 1 : 0);
        shards.emplace_back(pos, pos + len);
        pos += len;
    }

    std::vector<std::size_t> shard_order(total_shards);
    std::iota(shard_order.begin(), shard_order.end(), 0);
    Rng rng(plan.seed);
    rng.shuffle(shard_order);

    std::vector<std::vector<std::size_t>> groups(k);
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < spc; ++j) {
            const auto [b, e] = shards[shard_order[c * spc + j]];
            for (std::size_t i = b; i < e; ++i) groups[c].push_back(order[i]);
        }
    }
    return groups;
}

std::vector<std::vector<std::size_t>> split_dirichlet(const Dataset& data,
                                                      const PartitionPlan& plan) {
    const auto k = static_cast<std::size_t>(plan.num_clients);
    const std::size_t n = data.size();
    if (n < k) {
        throw UsageError("partition: dirichlet needs at least one sample per client");
    }

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.class_count));
    for (std::size_t i = 0; i < n; ++i) {
        by_class[static_cast<std::size_t>(data.labels[i])].push_back(i);
    }

    Rng rng(plan.seed);
    constexpr int kMaxAttempts = 100;
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::vector<std::vector<std::size_t>> groups(k);
        for (auto& cls : by_class) {
            if (cls.empty()) continue;
            std::vector<std::size_t> idx = cls;
            rng.shuffle(idx);
            const std::vector<double> w = rng.dirichlet(plan.alpha, k);
            // Cumulative-rounding split keeps per-class counts summing to
            // the class size.
            double cum = 0.0;
            std::size_t taken = 0;
            for (std::size_t c = 0; c < k; ++c) {
                cum += w[c];
                const auto upto = (c + 1 == k)
                                      ? idx.size()
                                      : std::min(idx.size(), static_cast<std::size_t>(std::floor(
                                                                 cum * static_cast<double>(idx.size()) + 0.5)));
                for (; taken < upto; ++taken) groups[c].push_back(idx[taken]);
            }
        }
        const bool any_empty =
            std::any_of(groups.begin(), groups.end(), [](const auto& g) { return g.empty(); });
        if (!any_empty) return groups;
    }
    throw UsageError("partition: dirichlet produced an empty client in 100 consecutive draws; "
                     "raise alpha or reduce num_clients");
}

std::vector<std::vector<std::size_t>> split_iid(const Dataset& data, const PartitionPlan& plan) {
    const auto k = static_cast<std::size_t>(plan.num_clients);
    const std::size_t n = data.size();
    if (n < k) throw UsageError("partition: iid needs at least one sample per client");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(plan.seed);
    rng.shuffle(order);

    const std::size_t base = n / k;
    const std::size_t extra = n % k;
    std::vector<std::vector<std::size_t>> groups(k);
    std::size_t pos = 0;
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t len = base + (c < extra ? 1 : 0);
        groups[c].assign(order.begin() + static_cast<std::ptrdiff_t>(pos),
                         order.begin() + static_cast<std::ptrdiff_t>(pos + len));
        pos += len;
    }
    return groups;
}

} // namespace

std::vector<Dataset> partition(const Dataset& data, const PartitionPlan& plan) {
    data.validate();
    plan.validate();
    if (plan.num_clients == 1) {
        return {data};
    }
    switch (plan.kind) {
        case PartitionKind::label_shards: return from_index_groups(data, split_label_shards(data, plan));
        case PartitionKind::dirichlet: return from_index_groups(data, split_dirichlet(data, plan));
        case PartitionKind::iid: return from_index_groups(data, split_iid(data, plan));
    }
    throw UsageError("partition: unknown kind");
}

double heterogeneity_index(const std::vector<Dataset>& partitions) {
    if (partitions.empty()) throw UsageError("heterogeneity_index: no partitions");
    const int class_count = partitions.front().class_count;
    std::vector<double> pooled(static_cast<std::size_t>(class_count), 0.0);
    double total = 0.0;
    for (const auto& part : partitions) {
        part.validate();
        if (part.class_count != class_count) {
            throw StructuralError("heterogeneity_index: class_count mismatch across partitions");
        }
        for (int y : part.labels) pooled[static_cast<std::size_t>(y)] += 1.0;
        total += static_cast<double>(part.size());
    }
    for (auto& p : pooled) p /= total;

    double tv_sum = 0.0;
    for (const auto& part : partitions) {
        const auto dist = part.label_distribution();
        double tv = 0.0;
        for (std::size_t c = 0; c < pooled.size(); ++c) tv += std::fabs(dist[c] - pooled[c]);
        tv_sum += 0.5 * tv;
    }
    return tv_sum / static_cast<double>(partitions.size());
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, std::size_t row, std::size_t col) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw IngestionError("csv row " + std::to_string(row + 1) + ", column " +
                             std::to_string(col + 1) + ": cannot parse '" + cell + "' as a number");
    }
    while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
    if (pos != cell.size()) {
        throw IngestionError("csv row " + std::to_string(row + 1) + ", column " +
                             std::to_string(col + 1) + ": trailing junk in '" + cell + "'");
    }
    return v;
}

} // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    if (schema.feature_columns.empty()) {
        throw ValidationError("CsvSchema.feature_columns must be non-empty");
    }
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");

    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::string line;
    std::size_t row_idx = 0;
    int max_label = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            ++row_idx;
            continue;
        }
        const auto cells = split_csv_line(line);
        auto need = [&](int col) -> const std::string& {
            if (col < 0 || static_cast<std::size_t>(col) >= cells.size()) {
                throw IngestionError("csv row " + std::to_string(row_idx + 1) + ": missing column " +
                                     std::to_string(col + 1));
            }
            return cells[static_cast<std::size_t>(col)];
        };

        const double raw_label =
            parse_cell(need(schema.label_column), row_idx, static_cast<std::size_t>(schema.label_column));
        const double rounded = std::nearbyint(raw_label);
        if (!(raw_label >= 0.0) || std::fabs(raw_label - rounded) > 1e-9) {
            throw IngestionError("csv row " + std::to_string(row_idx + 1) + ", column " +
                                 std::to_string(schema.label_column + 1) + ": unknown label '" +
                                 need(schema.label_column) + "' (expected a non-negative integer)");
        }
        const int label = static_cast<int>(rounded);
        max_label = std::max(max_label, label);

        std::vector<double> feats;
        feats.reserve(schema.feature_columns.size());
        for (int col : schema.feature_columns) {
            feats.push_back(parse_cell(need(col), row_idx, static_cast<std::size_t>(col)));
        }
        rows.push_back(std::move(feats));
        labels.push_back(label);
        ++row_idx;
    }
    if (rows.empty()) throw IngestionError("csv '" + path + "': no data rows");

    Dataset out;
    out.features = Matrix(rows.size(), schema.feature_columns.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < out.features.cols; ++c) out.features.at(r, c) = rows[r][c];
    }
    out.labels = std::move(labels);
    out.class_count = max_label + 1;
    out.validate();
    return out;
}

} // namespace fedsim
