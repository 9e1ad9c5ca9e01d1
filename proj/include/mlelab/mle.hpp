#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "mlelab/family.hpp"
#include "mlelab/stats.hpp"

namespace mlelab {

struct SolveOptions {
    int scan_points = 64;
    int max_iter = 200;
    int max_expansions = 6;
};

/// Outcome of a global likelihood maximization.  When the evidence says the
/// supremum is approached at a parameter-space boundary, theta_hat is NaN,
/// at_boundary is set and side records which end (-1 lower, +1 upper).
struct MleResult {
    double theta_hat;
    double loglik;
    double score;
    int iterations;
    bool converged;
    bool at_boundary;
    int side;
};

/// Global MLE by grid scan (log-spaced for positive scale parameters) with
/// per-cell safeguarded Newton on the score, window expansion when the best
/// scan value sits on the window edge, and a second-stage scan inside the
/// best cell for families without a sufficient-statistic reduction.
MleResult solve_mle(const Family& fam, std::span<const double> xs,
                    const SolveOptions& options = {});

/// Per-sample averages at theta0: z_bar of the score, u_bar of minus the
/// score slope, rstar_bar of the third-derivative envelope over
/// [theta0 - delta, theta0 + delta].
struct Moments {
    double z_bar;
    double u_bar;
    double rstar_bar;
};

Moments sample_moments(const Family& fam, std::span<const double> xs,
                       double theta0, double delta);

/// Quadratic bracket endpoints t_pm = 2 z_bar / (u_bar + sqrt(disc_pm)),
/// disc_pm = u_bar^2 -+ 2 |z_bar| rstar_bar.  Either endpoint is undefined
/// when its discriminant is negative or the denominator is not positive.
struct Bracket {
    double t_minus = 0.0;
    double t_plus = 0.0;
    bool minus_defined = false;
    bool plus_defined = false;
    double disc_minus = 0.0;
    double disc_plus = 0.0;
};

Bracket bracket_from_moments(double z_bar, double u_bar, double rstar_bar);

/// One replicate's worth of bracketing diagnostics.
///
/// in_good_event: interior MLE with |theta_hat - theta0| <= delta.
/// in_b1: u_bar <= 0, or the deviation equals the far quadratic root d_plus
///        (detected through the recovered mean curvature-remainder).
/// in_b2: u_bar^2 <= 2 |z_bar| rstar_bar.
/// eligible: in_good_event and in neither exceptional set; exactly then the
///           deviation must lie in [bracket_lo, bracket_hi].
struct BracketStats {
    Moments moments;
    Bracket bracket;
    MleResult mle;
    double theta0;
    double delta;
    bool in_good_event;
    bool in_b1;
    bool in_b2;
    bool eligible;
    double bracket_lo;
    double bracket_hi;
};

BracketStats bracket_stats(const Family& fam, std::span<const double> xs,
                           double theta0, double delta,
                           const SolveOptions& options = {});

/// Monte Carlo frequencies of the good event and the exceptional sets, plus
/// the count of eligible replicates whose deviation escapes the bracket
/// (which the theory says must be zero).
struct EventRates {
    std::size_t replications;
    WilsonInterval p_good;
    WilsonInterval p_good_and_bad;
    WilsonInterval p_b2;
    std::size_t boundary_count;
    std::size_t violation_count;
};

EventRates event_rates(const Family& fam, double theta0, double delta,
                       std::size_t n, std::size_t replications,
                       std::uint64_t seed, const SolveOptions& options = {});

}  // namespace mlelab
