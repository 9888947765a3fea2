#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crs/label.hpp"
#include "crs/matrix.hpp"

namespace crs {

// Sensor-array readouts with per-row mixture labels. Immutable after
// construction in practice; all pipeline stages take it by const ref.
struct LabeledDataset {
    std::vector<std::string> sensor_ids;       // length n
    Matrix features;                           // rows x n
    std::vector<MixtureLabel> labels;          // length rows
    std::optional<Matrix> concentrations;      // rows x 6, ug/L

    std::size_t rows() const { return labels.size(); }
    std::size_t sensor_count() const { return sensor_ids.size(); }

    // Throws on dimension mismatch or non-finite values.
    void validate() const;

    // Distinct labels, sorted, with per-class row counts.
    std::vector<std::pair<MixtureLabel, std::size_t>> class_counts() const;
};

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
};

struct CsvSchema {
    std::vector<std::string> concentration_columns{"B", "T", "E", "X", "N", "I"};
    std::string label_column = "label";  // optional in the input, ignored on load
};

// Loads the sensor-array CSV: 6 concentration columns followed by one
// column per sensor. The label of a row is the set of analytes with
// concentration > 0; all-zero rows get "NONE".
LabeledDataset load_csv(const std::string& path, const CsvSchema& schema = {});

// Writes the same schema plus a trailing `label` column. Byte-stable
// for identical input.
void save_csv(const LabeledDataset& ds, const std::string& path,
              const CsvSchema& schema = {});

// Per-class shuffled split: ceil(fraction * count) rows to train, at
// least one row in each partition. Deterministic per seed.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds,
                                                           const SplitSpec& spec);

// Row subset preserving order of `rows`.
LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows);

// Column projection onto the named sensors, in the given order.
LabeledDataset project_sensors(const LabeledDataset& ds,
                               const std::vector<std::string>& sensor_ids);

} // namespace crs
