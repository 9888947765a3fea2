#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "crs/dataset.hpp"
#include "crs/matrix.hpp"

namespace crs {

// Sensor sensitivity matrix D (n sensors x m analytes). Entry (i,j) is
// sensor i's sensitivity to analyte j; the mask marks structural
// nonzeros.
struct SensitivityMatrix {
    Matrix entries;                  // n x m, >= 0
    std::vector<std::uint8_t> mask;  // n*m row-major, entry zero wherever mask is 0

    std::size_t sensors() const { return entries.rows(); }
    std::size_t analytes() const { return entries.cols(); }
};

// Diagonal sample matrix X: analyte amounts A_jj.
struct SampleMatrix {
    std::vector<double> diagonal;  // length m, >= 0
};

// One measurement M = DX plus the per-sensor readouts R_i (row sums,
// optionally noise-perturbed).
struct Measurement {
    Matrix response;               // n x m
    std::vector<double> readouts;  // length n
};

// Each entry nonzero independently with probability `density`; nonzero
// magnitudes uniform(0.5, 1.5).
SensitivityMatrix synth_sensitivity(std::size_t n, std::size_t m, double density,
                                    std::uint64_t seed);

// response[i][j] = D[i][j] * X[j][j]; readouts[i] = row sum + N(0, noise_sd).
Measurement synth_measure(const SensitivityMatrix& D, const SampleMatrix& X,
                          double noise_sd, std::uint64_t seed);

// True iff every analyte column of the first k sensor rows has a
// nonzero (|.| > 1e-12) sum.
bool perfect_measurement(const Measurement& M, std::size_t k);

// |mixtures| x repeats rows of noisy readouts with labels attached.
LabeledDataset synth_dataset(const SensitivityMatrix& D,
                             const std::vector<std::pair<SampleMatrix, MixtureLabel>>& mixtures,
                             std::size_t repeats, double noise_sd, std::uint64_t seed);

// Planted ground truth: the listed sensor rows are dense uniform(0.5,1.5),
// every other row is all-zero (a dead sensor whose readout is pure noise).
SensitivityMatrix planted_sensitivity(std::size_t n_sensors,
                                      const std::vector<std::size_t>& informative,
                                      std::size_t m, std::uint64_t seed);

// All analyte subsets with at most `max_size` components (NONE included
// when include_none), each at the given amount.
std::vector<std::pair<SampleMatrix, MixtureLabel>> enumerate_mixtures(
    std::size_t m, std::size_t max_size, double amount, bool include_none = true);

} // namespace crs
