#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mlelab/family.hpp"
#include "mlelab/stats.hpp"

namespace mlelab {

/// One experiment: a family, a center theta0, a bracketing radius delta, a
/// grid of sample sizes, and the Monte Carlo controls.  The canonical text
/// and hash cover everything that affects the numbers; `workers` is
/// deliberately excluded because the per-replicate stream keying makes the
/// outputs independent of it.
struct ExperimentConfig {
    std::string family_id;
    std::map<std::string, double> params;
    double theta0 = 0.0;
    double delta = 0.0;
    std::vector<std::size_t> n_grid;
    std::size_t replications = 0;
    std::uint64_t master_seed = 0;
    std::vector<double> z_grid;
    double omega = 1.0;
    int workers = 1;

    /// Throws ConfigError on any violated invariant (n_grid not strictly
    /// increasing, replications < 100, z_grid outside (0, omega sqrt(min n)],
    /// [theta0 +- delta] leaving the parameter space, unknown family, ...).
    void validate() const;

    /// Fills an empty z_grid with the default 40 log-spaced points in
    /// [0.25, min(3, omega sqrt(min n))].
    void fill_default_z_grid();

    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig from_json_file(const std::string& path);

    /// Canonical serialization: sorted keys, %.17g numbers, no whitespace;
    /// excludes workers.
    std::string canonical_text() const;

    /// FNV-1a over canonical_text().
    std::uint64_t hash() const;
};

struct NonuniformPoint {
    double z;
    double gap;     // |F_hat(z) - Phi(z)|
    double scaled;  // z^3 sqrt(n) * gap
};

/// Empirical Kolmogorov summary at one sample size.  `standardized` holds
/// the sorted values of sqrt(n I(theta0)) (theta_hat - theta0), with
/// boundary or failed replicates absorbed at the sign-appropriate infinity.
struct KolmogorovReport {
    std::size_t n = 0;
    std::size_t replications = 0;
    double d_k = 0.0;
    double dkw_band = 0.0;
    double boundary_rate = 0.0;
    std::vector<double> z_grid;
    std::vector<NonuniformPoint> nonuniform;
    std::vector<double> standardized;
};

/// One report per n_grid entry.  Deterministic in config alone: replicate
/// rep of sample size n always draws from child stream (n, rep), and the
/// aggregation is a count plus a final sort, so worker count cannot change
/// any output bit.  Throws PropagatedSolverFailure when more than 1% of the
/// replicates at some n fail hard (boundary results are not failures; they
/// are absorbed and reported in boundary_rate).
std::vector<KolmogorovReport> run_experiment(const ExperimentConfig& config);

/// Test hook: build a report from externally supplied standardized values.
KolmogorovReport report_from_standardized(std::vector<double> values,
                                          std::size_t n,
                                          std::span<const double> z_grid,
                                          double omega);

/// Least-squares fit of ln d_K against ln n.
struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::vector<std::pair<double, double>> points;  // (ln n, ln d_K)
};

/// Requires at least 4 points with positive d_K (DomainError otherwise);
/// DegenerateFit when all n coincide.
RateFit rate_fit(std::span<const std::pair<std::size_t, double>> n_and_dk);

/// z^3 sqrt(n) |F_hat(z) - Phi(z)| on an arbitrary z grid, evaluated from
/// the report's stored standardized values.  RangeError for any z outside
/// (0, omega sqrt(n)].
std::vector<NonuniformPoint> nonuniform_profile(const KolmogorovReport& report,
                                                std::span<const double> z_grid,
                                                double omega);

struct TailPoint {
    std::size_t n;
    std::size_t exceed_count;
    double p_hat;
    WilsonInterval ci;
};

/// Wilson-interval frequencies of |theta_hat - theta0| > delta per n, with a
/// companion exponential fit of ln p_hat against n when every p_hat is
/// positive.  Boundary and failed replicates count as exceedances.
struct TailReport {
    std::vector<TailPoint> points;
    bool has_fit = false;
    LinearFit fit{};
};

TailReport tail_probability(const Family& fam, double theta0, double delta,
                            std::span<const std::size_t> n_grid,
                            std::size_t replications, std::uint64_t seed);

}  // namespace mlelab
