#include "crs/synth.hpp"

#include <cmath>
#include <cstdio>

#include "crs/rng.hpp"

namespace crs {

namespace {
constexpr double kNonzeroTol = 1e-12;
}

SensitivityMatrix synth_sensitivity(std::size_t n, std::size_t m, double density,
                                    std::uint64_t seed) {
    if (n < 1 || m < 1) throw Error(ErrorCode::Parameter, "n and m must be >= 1");
    if (!(density > 0.0 && density <= 1.0))
        throw Error(ErrorCode::Parameter, "density must lie in (0,1]");
    SensitivityMatrix D{Matrix(n, m), std::vector<std::uint8_t>(n * m, 0)};
    Rng rng(derive_seed(seed, {0x53454e53ull}));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> magnitude(0.5, 1.5);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            bool on = unit(rng) < density;
            double mag = magnitude(rng);  // drawn unconditionally to keep the stream aligned
            if (on) {
                D.entries(i, j) = mag;
                D.mask[i * m + j] = 1;
            }
        }
    return D;
}

SensitivityMatrix planted_sensitivity(std::size_t n_sensors,
                                      const std::vector<std::size_t>& informative,
                                      std::size_t m, std::uint64_t seed) {
    if (n_sensors < 1 || m < 1) throw Error(ErrorCode::Parameter, "n and m must be >= 1");
    SensitivityMatrix D{Matrix(n_sensors, m), std::vector<std::uint8_t>(n_sensors * m, 0)};
    Rng rng(derive_seed(seed, {0x504c414eull}));
    std::uniform_real_distribution<double> magnitude(0.5, 1.5);
    for (std::size_t i : informative) {
        if (i >= n_sensors)
            throw Error(ErrorCode::Parameter, "informative sensor index out of range");
        for (std::size_t j = 0; j < m; ++j) {
            D.entries(i, j) = magnitude(rng);
            D.mask[i * m + j] = 1;
        }
    }
    return D;
}

Measurement synth_measure(const SensitivityMatrix& D, const SampleMatrix& X, double noise_sd,
                          std::uint64_t seed) {
    if (X.diagonal.size() != D.analytes())
        throw Error(ErrorCode::Shape, "sample diagonal length != analyte count");
    if (noise_sd < 0) throw Error(ErrorCode::Parameter, "noise_sd must be >= 0");
    Measurement M;
    M.response = Matrix(D.sensors(), D.analytes());
    M.readouts.assign(D.sensors(), 0.0);
    Rng rng(derive_seed(seed, {0x4d454153ull}));
    std::normal_distribution<double> noise(0.0, noise_sd > 0 ? noise_sd : 1.0);
    for (std::size_t i = 0; i < D.sensors(); ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < D.analytes(); ++j) {
            double v = D.entries(i, j) * X.diagonal[j];
            M.response(i, j) = v;
            sum += v;
        }
        M.readouts[i] = sum + (noise_sd > 0 ? noise(rng) : 0.0);
    }
    return M;
}

bool perfect_measurement(const Measurement& M, std::size_t k) {
    if (k < 1 || k > M.response.rows())
        throw Error(ErrorCode::Parameter, "k must lie in [1, n]");
    for (std::size_t j = 0; j < M.response.cols(); ++j) {
        double sum = 0;
        for (std::size_t i = 0; i < k; ++i) sum += M.response(i, j);
        if (std::abs(sum) <= kNonzeroTol) return false;
    }
    return true;
}

LabeledDataset synth_dataset(const SensitivityMatrix& D,
                             const std::vector<std::pair<SampleMatrix, MixtureLabel>>& mixtures,
                             std::size_t repeats, double noise_sd, std::uint64_t seed) {
    if (mixtures.empty()) throw Error(ErrorCode::Parameter, "mixture list is empty");
    if (repeats < 1) throw Error(ErrorCode::Parameter, "repeats must be >= 1");

    LabeledDataset ds;
    for (std::size_t i = 0; i < D.sensors(); ++i) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "S%02zu", i + 1);
        ds.sensor_ids.emplace_back(buf);
    }
    ds.features = Matrix(mixtures.size() * repeats, D.sensors());
    Matrix conc(mixtures.size() * repeats, kAnalyteCount, 0.0);

    std::size_t row = 0;
    for (std::size_t mi = 0; mi < mixtures.size(); ++mi) {
        const auto& [sample, label] = mixtures[mi];
        for (std::size_t rep = 0; rep < repeats; ++rep, ++row) {
            auto M = synth_measure(D, sample, noise_sd, derive_seed(seed, {0x44415441ull, mi, rep}));
            for (std::size_t i = 0; i < D.sensors(); ++i) ds.features(row, i) = M.readouts[i];
            for (std::size_t j = 0; j < std::min<std::size_t>(kAnalyteCount, sample.diagonal.size()); ++j)
                conc(row, j) = sample.diagonal[j];
            ds.labels.push_back(label);
        }
    }
    ds.concentrations = std::move(conc);
    ds.validate();
    return ds;
}

std::vector<std::pair<SampleMatrix, MixtureLabel>> enumerate_mixtures(std::size_t m,
                                                                      std::size_t max_size,
                                                                      double amount,
                                                                      bool include_none) {
    if (m < 1 || m > kAnalyteCount)
        throw Error(ErrorCode::Parameter, "analyte count must lie in [1,6]");
    std::vector<std::pair<SampleMatrix, MixtureLabel>> out;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        auto size = static_cast<std::size_t>(__builtin_popcount(mask));
        if (mask == 0 && !include_none) continue;
        if (size > max_size) continue;
        SampleMatrix X{std::vector<double>(m, 0.0)};
        for (std::size_t j = 0; j < m; ++j)
            if (mask & (1u << j)) X.diagonal[j] = amount;
        out.emplace_back(std::move(X), MixtureLabel::from_mask(static_cast<std::uint8_t>(mask)));
    }
    return out;
}

} // namespace crs
