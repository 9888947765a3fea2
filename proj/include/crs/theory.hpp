#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crs {

// Gaussian per-sensor capability model: each sensor's per-analyte
// detection probability C_i/m is drawn from N(mu_frac, sigma_frac^2)
// clipped to [0,1].
struct CapabilityModel {
    double mu_frac = 0.62;
    double sigma_frac = 0.1;
    std::size_t m = 6;          // analytes
    double epsilon = 0.38;      // per-sensor tolerance, 1 - epsilon = C_i fraction
};

enum class McEstimator {
    AllAnalytesCovered,   // indicator that every analyte is detected by >= 1 sensor
    FractionCovered,      // fraction of analytes detected
};

struct McResult {
    double mean = 0;
    double ci_low = 0;
    double ci_high = 0;
};

struct TheoryCurve {
    std::vector<std::size_t> n_values;
    std::vector<double> analytic;
    std::vector<double> mc_mean;
    std::vector<double> mc_ci_low;
    std::vector<double> mc_ci_high;
    std::size_t trials = 0;
};

struct GreenModeVerdict {
    std::size_t sensors = 0;
    double empirical_capability = 0;
    bool above_analytic_curve = false;
};

struct ValidationReport {
    TheoryCurve curve;
    double target_capability = 0;
    std::size_t analytic_crossing = 0;  // 0 = never crossed on the grid
    std::size_t mc_crossing = 0;
    bool crossings_within_one = false;
    std::vector<GreenModeVerdict> green_modes;
};

// [1 - (1 - mu_frac)^n]^m: probability that all m analytes are covered
// by an n-sensor array with mean capability mu_frac.
double analytic_capability(std::size_t n, const CapabilityModel& model);

// ceil(ln(1 - C^(1/m)) / ln(1 - mu_frac)); tight on both sides.
std::size_t min_sensors(double capability, const CapabilityModel& model);

// Monte Carlo estimate with a 95% normal-approximation CI;
// deterministic per seed with per-trial derived seeds.
McResult mc_capability(std::size_t n, const CapabilityModel& model, std::size_t trials,
                       std::uint64_t seed,
                       McEstimator estimator = McEstimator::AllAnalytesCovered,
                       int workers = 1);

// Builds analytic and MC curves over n = 1..n_max, locates both
// crossings of the target capability, and flags each supplied green
// mode point as above/below the analytic curve.
ValidationReport validate_green_modes(const std::vector<std::size_t>& green_sizes,
                                      const std::vector<double>& empirical_capabilities,
                                      const CapabilityModel& model, std::size_t trials,
                                      std::uint64_t seed, std::size_t n_max = 17,
                                      double target_capability = 0.9,
                                      McEstimator estimator = McEstimator::AllAnalytesCovered,
                                      int workers = 1);

} // namespace crs
