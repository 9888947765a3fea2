#include "crs/theory.hpp"

#include <algorithm>
#include <cmath>

#include "crs/error.hpp"
#include "crs/parallel.hpp"
#include "crs/rng.hpp"

namespace crs {

namespace {

void check_model(const CapabilityModel& model) {
    if (!(model.mu_frac > 0.0 && model.mu_frac <= 1.0))
        throw Error(ErrorCode::Parameter, "mu_frac must lie in (0,1]");
    if (model.sigma_frac < 0) throw Error(ErrorCode::Parameter, "sigma_frac must be >= 0");
    if (model.m < 1) throw Error(ErrorCode::Parameter, "analyte count must be >= 1");
}

} // namespace

double analytic_capability(std::size_t n, const CapabilityModel& model) {
    check_model(model);
    if (n == 0) return model.m >= 1 ? 0.0 : 1.0;
    double miss = std::pow(1.0 - model.mu_frac, static_cast<double>(n));
    return std::pow(1.0 - miss, static_cast<double>(model.m));
}

std::size_t min_sensors(double capability, const CapabilityModel& model) {
    check_model(model);
    if (!(capability > 0.0 && capability < 1.0))
        throw Error(ErrorCode::Domain, "target capability must lie in (0,1)");
    if (model.mu_frac >= 1.0)
        throw Error(ErrorCode::Domain, "bound is singular at mu_frac = 1");
    double root = std::pow(capability, 1.0 / static_cast<double>(model.m));
    double bound = std::log(1.0 - root) / std::log(1.0 - model.mu_frac);
    auto n = static_cast<std::size_t>(std::ceil(std::max(0.0, bound)));
    // guard the ceiling against floating-point edge cases: enforce the
    // two-sided postcondition directly
    while (analytic_capability(n, model) < capability) ++n;
    while (n > 0 && analytic_capability(n - 1, model) >= capability) --n;
    return n;
}

McResult mc_capability(std::size_t n, const CapabilityModel& model, std::size_t trials,
                       std::uint64_t seed, McEstimator estimator, int workers) {
    check_model(model);
    if (trials < 1) throw Error(ErrorCode::Parameter, "trials must be >= 1");

    std::vector<double> stats(trials, 0.0);
    parallel_for(trials, workers, [&](std::size_t t) {
        Rng rng(derive_seed(seed, {0x4d43ull, t}));
        std::normal_distribution<double> capability(model.mu_frac, model.sigma_frac);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<std::uint8_t> covered(model.m, 0);
        for (std::size_t i = 0; i < n; ++i) {
            double p = model.sigma_frac > 0 ? std::clamp(capability(rng), 0.0, 1.0)
                                            : model.mu_frac;
            for (std::size_t j = 0; j < model.m; ++j)
                if (unit(rng) < p) covered[j] = 1;
        }
        std::size_t hits = 0;
        for (auto c : covered) hits += c;
        stats[t] = estimator == McEstimator::AllAnalytesCovered
                       ? (hits == model.m ? 1.0 : 0.0)
                       : static_cast<double>(hits) / static_cast<double>(model.m);
    });

    double mean = 0;
    for (double s : stats) mean += s;
    mean /= static_cast<double>(trials);
    double var = 0;
    for (double s : stats) var += (s - mean) * (s - mean);
    var /= static_cast<double>(trials);
    double half = 1.959963984540054 * std::sqrt(var / static_cast<double>(trials));
    return {mean, mean - half, mean + half};
}

ValidationReport validate_green_modes(const std::vector<std::size_t>& green_sizes,
                                      const std::vector<double>& empirical_capabilities,
                                      const CapabilityModel& model, std::size_t trials,
                                      std::uint64_t seed, std::size_t n_max,
                                      double target_capability, McEstimator estimator,
                                      int workers) {
    check_model(model);
    if (green_sizes.size() != empirical_capabilities.size())
        throw Error(ErrorCode::Shape, "green mode size/capability lists differ in length");
    if (n_max < 1) throw Error(ErrorCode::Parameter, "n_max must be >= 1");

    ValidationReport report;
    report.target_capability = target_capability;
    report.curve.trials = trials;
    for (std::size_t n = 1; n <= n_max; ++n) {
        report.curve.n_values.push_back(n);
        report.curve.analytic.push_back(analytic_capability(n, model));
        auto mc = mc_capability(n, model, trials, derive_seed(seed, {0x43555256ull, n}),
                                estimator, workers);
        report.curve.mc_mean.push_back(mc.mean);
        report.curve.mc_ci_low.push_back(mc.ci_low);
        report.curve.mc_ci_high.push_back(mc.ci_high);
    }

    for (std::size_t i = 0; i < report.curve.n_values.size(); ++i) {
        if (report.analytic_crossing == 0 && report.curve.analytic[i] >= target_capability)
            report.analytic_crossing = report.curve.n_values[i];
        if (report.mc_crossing == 0 && report.curve.mc_mean[i] >= target_capability)
            report.mc_crossing = report.curve.n_values[i];
    }
    report.crossings_within_one =
        report.analytic_crossing > 0 && report.mc_crossing > 0 &&
        (report.analytic_crossing > report.mc_crossing
             ? report.analytic_crossing - report.mc_crossing
             : report.mc_crossing - report.analytic_crossing) <= 1;

    for (std::size_t i = 0; i < green_sizes.size(); ++i) {
        GreenModeVerdict v;
        v.sensors = green_sizes[i];
        v.empirical_capability = empirical_capabilities[i];
        v.above_analytic_curve =
            empirical_capabilities[i] > analytic_capability(green_sizes[i], model);
        report.green_modes.push_back(v);
    }
    return report;
}

} // namespace crs
