#include <cmath>

#include "doctest.h"

#include "crs/error.hpp"
#include "crs/rng.hpp"
#include "crs/synth.hpp"

using namespace crs;

TEST_CASE("synth_sensitivity density 1 is fully dense") {
    auto D = synth_sensitivity(4, 3, 1.0, 9);
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
            CHECK(D.entries(i, j) >= 0.5);
            CHECK(D.entries(i, j) <= 1.5);
            CHECK(D.mask[i * 3 + j] == 1);
        }
}

TEST_CASE("synth_sensitivity rejects bad density") {
    CHECK_THROWS_AS(synth_sensitivity(4, 3, 0.0, 1), Error);
    CHECK_THROWS_AS(synth_sensitivity(4, 3, 1.5, 1), Error);
}

TEST_CASE("synth_sensitivity nonzero fraction concentrates at the density") {
    // binomial concentration over many seeds
    const double density = 0.62;
    std::size_t nonzero = 0, total = 0;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        auto D = synth_sensitivity(17, 6, density, seed);
        for (auto m : D.mask) nonzero += m;
        total += D.mask.size();
    }
    double fraction = static_cast<double>(nonzero) / static_cast<double>(total);
    CHECK(fraction == doctest::Approx(density).epsilon(0.05));
    CHECK(std::abs(fraction - density) < 0.03);
}

TEST_CASE("synth_measure identity case") {
    SensitivityMatrix D{Matrix(3, 3), std::vector<std::uint8_t>(9, 0)};
    for (std::size_t i = 0; i < 3; ++i) {
        D.entries(i, i) = 1.0;
        D.mask[i * 3 + i] = 1;
    }
    auto M = synth_measure(D, {{1, 2, 3}}, 0.0, 5);
    CHECK(M.readouts == std::vector<double>{1, 2, 3});

    auto zero = synth_measure(D, {{0, 0, 0}}, 0.0, 5);
    CHECK(zero.readouts == std::vector<double>{0, 0, 0});
}

TEST_CASE("synth_measure matches a brute-force row-sum oracle") {
    auto D = synth_sensitivity(4, 3, 0.7, 21);
    SampleMatrix X{{0.5, 2.0, 1.25}};
    auto M = synth_measure(D, X, 0.0, 3);
    for (std::size_t i = 0; i < 4; ++i) {
        double expect = 0;
        for (std::size_t j = 0; j < 3; ++j) expect += D.entries(i, j) * X.diagonal[j];
        CHECK(M.readouts[i] == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK_THROWS_AS(synth_measure(D, {{1, 2}}, 0.0, 0), Error);
}

TEST_CASE("noise-free measurement is exactly linear in the sample") {
    auto D = synth_sensitivity(5, 4, 0.6, 77);
    SampleMatrix X{{1.0, 0.25, 3.0, 0.5}};
    for (double alpha : {0.0, 0.5, 2.0, 10.0}) {
        SampleMatrix scaled = X;
        for (double& v : scaled.diagonal) v *= alpha;
        auto base = synth_measure(D, X, 0.0, 1);
        auto big = synth_measure(D, scaled, 0.0, 1);
        for (std::size_t i = 0; i < 5; ++i)
            CHECK(big.readouts[i] == doctest::Approx(alpha * base.readouts[i]).epsilon(1e-12));
    }
}

TEST_CASE("perfect_measurement matches an exhaustive column check and is monotone in k") {
    Rng rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        auto D = synth_sensitivity(6, 4, 0.4, 1000 + static_cast<std::uint64_t>(rep));
        auto M = synth_measure(D, {{1, 1, 1, 1}}, 0.0, 2);
        bool prev = false;
        for (std::size_t k = 1; k <= 6; ++k) {
            bool expect = true;
            for (std::size_t j = 0; j < 4; ++j) {
                double sum = 0;
                for (std::size_t i = 0; i < k; ++i) sum += M.response(i, j);
                if (std::abs(sum) <= 1e-12) expect = false;
            }
            bool got = perfect_measurement(M, k);
            CHECK(got == expect);
            if (prev) CHECK(got);  // nonnegative rows: true stays true
            prev = got;
        }
    }
}

TEST_CASE("perfect_measurement false on an undetectable analyte") {
    SensitivityMatrix D{Matrix(3, 2), std::vector<std::uint8_t>(6, 0)};
    D.entries(0, 0) = 1.0;
    D.mask[0] = 1;  // column 1 is all zeros
    auto M = synth_measure(D, {{1, 1}}, 0.0, 0);
    for (std::size_t k = 1; k <= 3; ++k) CHECK_FALSE(perfect_measurement(M, k));
}

TEST_CASE("synth_dataset row arithmetic and determinism") {
    auto D = synth_sensitivity(5, 3, 0.8, 4);
    auto mixtures = enumerate_mixtures(3, 3, 1.0, true);
    CHECK(mixtures.size() == 8);

    auto ds = synth_dataset(D, mixtures, 12, 0.01, 99);
    CHECK(ds.rows() == 96);
    CHECK(ds.sensor_count() == 5);

    auto again = synth_dataset(D, mixtures, 12, 0.01, 99);
    CHECK(ds.features == again.features);

    // zero noise duplicates rows within a mixture
    auto clean = synth_dataset(D, mixtures, 2, 0.0, 1);
    for (std::size_t m = 0; m < mixtures.size(); ++m)
        for (std::size_t j = 0; j < 5; ++j)
            CHECK(clean.features(2 * m, j) == clean.features(2 * m + 1, j));

    CHECK_THROWS_AS(synth_dataset(D, {}, 1, 0.0, 1), Error);
}

TEST_CASE("planted sensitivity leaves dead sensors with pure-noise columns") {
    auto D = planted_sensitivity(17, {0, 1, 2, 3, 4}, 6, 8);
    auto mixtures = enumerate_mixtures(6, 6, 1.0, true);
    auto ds = synth_dataset(D, mixtures, 3, 0.05, 13);

    // informative sensors carry signal: column mean well above noise
    for (std::size_t j : {0u, 1u, 2u, 3u, 4u}) {
        double mean = 0;
        for (std::size_t r = 0; r < ds.rows(); ++r) mean += ds.features(r, j);
        mean /= static_cast<double>(ds.rows());
        CHECK(mean > 1.0);
    }
    // dead sensors: mean near zero, spread consistent with noise only
    for (std::size_t j = 5; j < 17; ++j) {
        double mean = 0, var = 0;
        for (std::size_t r = 0; r < ds.rows(); ++r) mean += ds.features(r, j);
        mean /= static_cast<double>(ds.rows());
        for (std::size_t r = 0; r < ds.rows(); ++r) {
            double d = ds.features(r, j) - mean;
            var += d * d;
        }
        var /= static_cast<double>(ds.rows());
        CHECK(std::abs(mean) < 0.02);
        CHECK(std::sqrt(var) < 0.1);
    }
}
