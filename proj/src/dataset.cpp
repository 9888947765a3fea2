#include "crs/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "crs/rng.hpp"

namespace crs {

void LabeledDataset::validate() const {
    if (features.rows() != labels.size())
        throw Error(ErrorCode::Shape, "feature rows != label count");
    if (features.cols() != sensor_ids.size())
        throw Error(ErrorCode::Shape, "feature columns != sensor count");
    if (concentrations &&
        (concentrations->rows() != labels.size() || concentrations->cols() != kAnalyteCount))
        throw Error(ErrorCode::Shape, "concentration matrix shape mismatch");
    for (std::size_t r = 0; r < features.rows(); ++r)
        for (double v : features.row(r))
            if (!std::isfinite(v))
                throw Error(ErrorCode::Parse,
                            "non-finite feature value in row " + std::to_string(r));
}

std::vector<std::pair<MixtureLabel, std::size_t>> LabeledDataset::class_counts() const {
    std::map<MixtureLabel, std::size_t> counts;
    for (const auto& l : labels) ++counts[l];
    return {counts.begin(), counts.end()};
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim whitespace and a possible trailing \r
        auto b = cell.find_first_not_of(" \t\r");
        auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

double parse_cell(const std::string& cell, std::size_t row) {
    try {
        std::size_t pos = 0;
        double v = std::stod(cell, &pos);
        if (pos != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::Parse,
                    "non-numeric cell '" + cell + "' in row " + std::to_string(row));
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

LabeledDataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::Schema, "empty file '" + path + "'");
    const auto header = split_line(line);

    std::vector<std::size_t> conc_cols;
    for (const auto& name : schema.concentration_columns) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw Error(ErrorCode::Schema, "missing concentration column '" + name + "'");
        conc_cols.push_back(static_cast<std::size_t>(it - header.begin()));
    }

    LabeledDataset ds;
    std::vector<std::size_t> sensor_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (std::find(conc_cols.begin(), conc_cols.end(), c) != conc_cols.end()) continue;
        if (header[c] == schema.label_column) continue;
        sensor_cols.push_back(c);
        ds.sensor_ids.push_back(header[c]);
    }
    if (sensor_cols.empty())
        throw Error(ErrorCode::Schema, "no sensor columns found in '" + path + "'");

    std::vector<double> feat_data, conc_data;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto cells = split_line(line);
        if (cells.size() != header.size())
            throw Error(ErrorCode::Parse, "row " + std::to_string(row) + " has " +
                                              std::to_string(cells.size()) + " cells, expected " +
                                              std::to_string(header.size()));
        std::uint8_t mask = 0;
        for (std::size_t j = 0; j < conc_cols.size(); ++j) {
            double v = parse_cell(cells[conc_cols[j]], row);
            conc_data.push_back(v);
            if (v > 0.0) mask |= static_cast<std::uint8_t>(1u << j);
        }
        for (std::size_t c : sensor_cols) feat_data.push_back(parse_cell(cells[c], row));
        ds.labels.push_back(MixtureLabel::from_mask(mask));
        ++row;
    }

    ds.features = Matrix(row, ds.sensor_ids.size());
    ds.features.data() = std::move(feat_data);
    Matrix conc(row, kAnalyteCount);
    conc.data() = std::move(conc_data);
    ds.concentrations = std::move(conc);
    ds.validate();
    return ds;
}

void save_csv(const LabeledDataset& ds, const std::string& path, const CsvSchema& schema) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
    for (const auto& name : schema.concentration_columns) out << name << ',';
    for (const auto& id : ds.sensor_ids) out << id << ',';
    out << schema.label_column << '\n';
    for (std::size_t r = 0; r < ds.rows(); ++r) {
        for (std::size_t j = 0; j < kAnalyteCount; ++j) {
            double v = ds.concentrations ? (*ds.concentrations)(r, j)
                                         : (ds.labels[r].contains(j) ? 1.0 : 0.0);
            out << format_double(v) << ',';
        }
        for (double v : ds.features.row(r)) out << format_double(v) << ',';
        out << ds.labels[r].canonical() << '\n';
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

LabeledDataset take_rows(const LabeledDataset& ds, const std::vector<std::size_t>& rows) {
    LabeledDataset out;
    out.sensor_ids = ds.sensor_ids;
    out.features = ds.features.select_rows(rows);
    out.labels.reserve(rows.size());
    for (std::size_t r : rows) out.labels.push_back(ds.labels.at(r));
    if (ds.concentrations) out.concentrations = ds.concentrations->select_rows(rows);
    return out;
}

LabeledDataset project_sensors(const LabeledDataset& ds,
                               const std::vector<std::string>& sensor_ids) {
    std::vector<std::size_t> cols;
    for (const auto& id : sensor_ids) {
        auto it = std::find(ds.sensor_ids.begin(), ds.sensor_ids.end(), id);
        if (it == ds.sensor_ids.end())
            throw Error(ErrorCode::Parameter, "unknown sensor id '" + id + "'");
        cols.push_back(static_cast<std::size_t>(it - ds.sensor_ids.begin()));
    }
    LabeledDataset out;
    out.sensor_ids = sensor_ids;
    out.features = ds.features.select_columns(cols);
    out.labels = ds.labels;
    out.concentrations = ds.concentrations;
    return out;
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& ds,
                                                           const SplitSpec& spec) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
        throw Error(ErrorCode::Parameter, "train_fraction must lie in (0,1)");

    std::map<MixtureLabel, std::vector<std::size_t>> by_class;
    for (std::size_t r = 0; r < ds.rows(); ++r) by_class[ds.labels[r]].push_back(r);
    for (const auto& [label, rows] : by_class)
        if (rows.size() < 2)
            throw Error(ErrorCode::Stratification,
                        "class '" + label.canonical() + "' has a single row");

    std::vector<std::size_t> train_rows, test_rows;
    std::size_t class_idx = 0;
    for (const auto& [label, rows] : by_class) {
        auto shuffled = rows;
        Rng rng(derive_seed(spec.seed, {0x53504c49ull, class_idx++}));
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        auto n_train = static_cast<std::size_t>(
            std::ceil(spec.train_fraction * static_cast<double>(rows.size())));
        n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
        train_rows.insert(train_rows.end(), shuffled.begin(), shuffled.begin() + n_train);
        test_rows.insert(test_rows.end(), shuffled.begin() + n_train, shuffled.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {take_rows(ds, train_rows), take_rows(ds, test_rows)};
}

} // namespace crs
