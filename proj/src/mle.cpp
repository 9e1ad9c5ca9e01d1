#include "mlelab/mle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mlelab/errors.hpp"

namespace mlelab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

double finite_or(double v, double fallback) {
    return std::isnan(v) ? fallback : v;
}

// Likelihood evaluations for one fixed sample, routed through the family's
// sufficient statistics when it has them.
class Objective {
  public:
    Objective(const Family& fam, std::span<const double> xs)
        : fam_(fam), xs_(xs), n_(xs.size()) {
        if (fam.has_stat_reduction()) {
            use_stats_ = true;
            stats_ = fam.reduce(xs);
        }
    }

    double loglik(double th) const {
        double s;
        if (use_stats_) {
            s = fam_.loglik_from_stats(stats_, n_, th);
        } else {
            s = 0.0;
            for (double x : xs_) s += fam_.log_density(x, th);
        }
        return finite_or(s, -kInf);
    }

    double score(double th) const {
        if (use_stats_) return fam_.score_from_stats(stats_, n_, th);
        double s = 0.0;
        for (double x : xs_) s += fam_.score_derivative(x, th, 1);
        return s;
    }

    double slope(double th) const {
        if (use_stats_) return fam_.score_slope_from_stats(stats_, n_, th);
        double s = 0.0;
        for (double x : xs_) s += fam_.score_derivative(x, th, 2);
        return s;
    }

    bool fast() const { return use_stats_; }

  private:
    const Family& fam_;
    std::span<const double> xs_;
    std::size_t n_;
    bool use_stats_ = false;
    StatVec stats_;
};

struct Grid {
    std::vector<double> theta;
    std::vector<double> value;
    std::size_t best = 0;
};

Grid evaluate_grid(const Objective& obj, bool log_scale, double lo, double hi,
                   int points) {
    Grid g;
    g.theta.resize(points);
    g.value.resize(points);
    const double tlo = log_scale ? std::log(lo) : lo;
    const double thi = log_scale ? std::log(hi) : hi;
    for (int i = 0; i < points; ++i) {
        const double t = tlo + (thi - tlo) * double(i) / double(points - 1);
        const double th = log_scale ? std::exp(t) : t;
        g.theta[i] = th;
        g.value[i] = obj.loglik(th);
        if (g.value[i] > g.value[g.best]) g.best = i;
    }
    return g;
}

struct Candidate {
    double theta = kNaN;
    double loglik = -kInf;
    double score = kNaN;
    int iterations = 0;
    bool ok = false;
};

// Maximize the log-likelihood over [a, b] by golden-section search.  Only
// used when the score does not change sign across the cell (a shoulder or a
// touching root); the common path is the Newton polish below.
Candidate golden_polish(const Objective& obj, double a, double b) {
    constexpr double gr = 0.6180339887498949;
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = obj.loglik(x1);
    double f2 = obj.loglik(x2);
    Candidate c;
    for (int it = 0; it < 120; ++it) {
        ++c.iterations;
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = obj.loglik(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = obj.loglik(x1);
        }
        if (b - a <= 1e-13 * (1.0 + std::fabs(a) + std::fabs(b))) break;
    }
    c.theta = 0.5 * (a + b);
    c.loglik = obj.loglik(c.theta);
    c.score = obj.score(c.theta);
    c.ok = true;
    return c;
}

// Newton on the score with a bisection safeguard; [a, b] must have
// score(a) > 0 > score(b).
Candidate newton_polish(const Objective& obj, double a, double b, double seed,
                        int max_iter) {
    Candidate c;
    double th = seed;
    const double stol = 1e-13 * (1.0 + std::fabs(obj.score(a)) + std::fabs(obj.score(b)));
    for (int it = 0; it < max_iter; ++it) {
        ++c.iterations;
        const double s = obj.score(th);
        if (std::isfinite(s)) {
            if (s > 0.0)
                a = th;
            else
                b = th;
            if (std::fabs(s) <= stol) break;
        } else {
            break;
        }
        const double sl = obj.slope(th);
        double next = th - s / sl;
        if (!(std::isfinite(next) && next > a && next < b)) next = 0.5 * (a + b);
        const double step = next - th;
        th = next;
        if (std::fabs(step) <= 1e-13 * (1.0 + std::fabs(th))) break;
        if (b - a <= 1e-13 * (1.0 + std::fabs(a) + std::fabs(b))) break;
    }
    c.theta = th;
    c.loglik = obj.loglik(th);
    c.score = obj.score(th);
    c.ok = c.iterations < max_iter || std::fabs(c.score) <= stol * 10.0;
    return c;
}

Candidate polish_cell(const Objective& obj, double a, double m, double b,
                      const SolveOptions& opt) {
    const double sa = obj.score(a);
    const double sb = obj.score(b);
    if (std::isfinite(sa) && std::isfinite(sb) && sa > 0.0 && sb < 0.0)
        return newton_polish(obj, a, b, m, opt.max_iter);
    return golden_polish(obj, a, b);
}

std::vector<std::size_t> local_maxima(const std::vector<double>& v) {
    std::vector<std::size_t> out;
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
        const bool left_ok = (i == 0) || v[i] >= v[i - 1];
        const bool right_ok = (i + 1 == n) || v[i] >= v[i + 1];
        if (left_ok && right_ok && v[i] > -kInf) out.push_back(i);
    }
    return out;
}

}  // namespace

MleResult solve_mle(const Family& fam, std::span<const double> xs,
                    const SolveOptions& opt) {
    if (xs.empty()) throw DomainError("solve_mle: empty sample");
    if (opt.scan_points < 8) throw DomainError("solve_mle: need >= 8 scan points");

    const Objective obj(fam, xs);
    const Interval space = fam.param_space();
    const bool log_scale = fam.positive_scale();

    auto [wlo, whi] = fam.scan_window(xs);
    auto clamp_window = [&](double& lo, double& hi) {
        if (std::isfinite(space.lo))
            lo = std::max(lo, space.lo + 1e-12 * (1.0 + std::fabs(space.lo)));
        if (std::isfinite(space.hi))
            hi = std::min(hi, space.hi - 1e-12 * (1.0 + std::fabs(space.hi)));
    };
    clamp_window(wlo, whi);
    if (!(wlo < whi)) throw DomainError("solve_mle: empty scan window");

    Grid grid = evaluate_grid(obj, log_scale, wlo, whi, opt.scan_points);

    // Push the window outward while the best scan value sits on its edge and
    // the edge is not pinned against the parameter space itself.
    int expansions = 0;
    int boundary_side = 0;
    for (;;) {
        const bool at_low = grid.best == 0;
        const bool at_high = grid.best + 1 == grid.theta.size();
        if (!at_low && !at_high) break;

        const double tlo = log_scale ? std::log(wlo) : wlo;
        const double thi = log_scale ? std::log(whi) : whi;
        const double range = thi - tlo;
        double nlo = wlo, nhi = whi;
        if (at_low) nlo = log_scale ? std::exp(tlo - range) : tlo - range;
        if (at_high) nhi = log_scale ? std::exp(thi + range) : thi + range;
        clamp_window(nlo, nhi);

        const bool grew = (nlo < wlo) || (nhi > whi);
        if (!grew || expansions >= opt.max_expansions) {
            boundary_side = at_low ? -1 : +1;
            break;
        }
        wlo = nlo;
        whi = nhi;
        ++expansions;
        grid = evaluate_grid(obj, log_scale, wlo, whi, opt.scan_points);
    }

    if (boundary_side != 0) {
        MleResult r;
        r.theta_hat = kNaN;
        r.loglik = grid.value[grid.best];
        r.score = kNaN;
        r.iterations = 0;
        r.converged = false;
        r.at_boundary = true;
        r.side = boundary_side;
        return r;
    }

    std::vector<Candidate> candidates;
    int total_iters = 0;
    auto polish_range = [&](double a, double m, double b) {
        Candidate c = polish_cell(obj, a, m, b, opt);
        total_iters += c.iterations;
        if (c.ok) candidates.push_back(c);
    };

    for (std::size_t i : local_maxima(grid.value)) {
        const double a = grid.theta[i == 0 ? 0 : i - 1];
        const double b = grid.theta[std::min(i + 1, grid.theta.size() - 1)];
        if (!(a < b)) continue;
        if (obj.fast()) {
            polish_range(a, grid.theta[i], b);
        } else {
            // Without a statistic reduction, cells can hide several score
            // roots (heavy-tailed data); resolve the cell with its own scan.
            Grid sub = evaluate_grid(obj, false, a, b, opt.scan_points);
            for (std::size_t j : local_maxima(sub.value)) {
                const double sa = sub.theta[j == 0 ? 0 : j - 1];
                const double sb = sub.theta[std::min(j + 1, sub.theta.size() - 1)];
                if (sa < sb) polish_range(sa, sub.theta[j], sb);
            }
        }
    }

    if (candidates.empty())
        throw NonConvergence("solve_mle: no score root could be polished");

    const Candidate* best = &candidates.front();
    for (const Candidate& c : candidates) {
        if (c.loglik > best->loglik ||
            (c.loglik == best->loglik && c.theta < best->theta))
            best = &c;
    }

    MleResult r;
    r.theta_hat = best->theta;
    r.loglik = best->loglik;
    r.score = best->score;
    r.iterations = total_iters;
    r.converged = true;
    r.at_boundary = false;
    r.side = 0;
    return r;
}

Moments sample_moments(const Family& fam, std::span<const double> xs,
                       double theta0, double delta) {
    if (xs.empty()) throw DomainError("sample_moments: empty sample");
    const double n = double(xs.size());
    double sz = 0.0, su = 0.0, sr = 0.0;
    if (fam.envelope_x_free()) {
        sr = n * third_derivative_envelope(fam, xs[0], theta0, delta);
    } else {
        for (double x : xs) sr += third_derivative_envelope(fam, x, theta0, delta);
    }
    for (double x : xs) {
        sz += fam.score_derivative(x, theta0, 1);
        su += fam.score_derivative(x, theta0, 2);
    }
    return {sz / n, -su / n, sr / n};
}

Bracket bracket_from_moments(double z_bar, double u_bar, double rstar_bar) {
    Bracket br;
    const double az = std::fabs(z_bar);
    br.disc_plus = u_bar * u_bar - 2.0 * az * rstar_bar;
    br.disc_minus = u_bar * u_bar + 2.0 * az * rstar_bar;
    if (br.disc_plus >= 0.0) {
        const double den = u_bar + std::sqrt(br.disc_plus);
        if (den > 0.0) {
            br.t_plus = 2.0 * z_bar / den;
            br.plus_defined = true;
        }
    }
    const double den_m = u_bar + std::sqrt(br.disc_minus);
    if (den_m > 0.0) {
        br.t_minus = 2.0 * z_bar / den_m;
        br.minus_defined = true;
    }
    if (!br.plus_defined) br.t_plus = kNaN;
    if (!br.minus_defined) br.t_minus = kNaN;
    return br;
}

BracketStats bracket_stats(const Family& fam, std::span<const double> xs,
                           double theta0, double delta,
                           const SolveOptions& opt) {
    BracketStats bs;
    bs.theta0 = theta0;
    bs.delta = delta;
    bs.moments = sample_moments(fam, xs, theta0, delta);
    bs.bracket = bracket_from_moments(bs.moments.z_bar, bs.moments.u_bar,
                                      bs.moments.rstar_bar);
    bs.mle = solve_mle(fam, xs, opt);

    const bool interior = bs.mle.converged && !bs.mle.at_boundary;
    const double h = interior ? bs.mle.theta_hat - theta0 : kNaN;
    bs.in_good_event = interior && std::fabs(h) <= delta;

    const double z = bs.moments.z_bar;
    const double u = bs.moments.u_bar;
    bs.in_b2 = u * u <= 2.0 * std::fabs(z) * bs.moments.rstar_bar;

    // B1 holds when u_bar <= 0, or when the deviation is the far root d_plus
    // of the exact quadratic z - h u + h^2 r / 2 = 0; the curvature
    // remainder r is recovered from the root itself.
    bs.in_b1 = u <= 0.0;
    if (!bs.in_b1 && interior) {
        const double h_tiny = 1e-10 * (1.0 + std::fabs(theta0));
        if (std::fabs(h) > h_tiny) {
            const double r = 2.0 * (h * u - z) / (h * h);
            if (std::fabs(r) > 1e-12 * (1.0 + std::fabs(u) + std::fabs(z))) {
                const double disc = std::max(0.0, u * u - 2.0 * z * r);
                const double d_plus = (u + std::sqrt(disc)) / r;
                bs.in_b1 = std::fabs(h - d_plus) <= 1e-8 * (1.0 + std::fabs(d_plus));
            }
        }
    }

    bs.eligible = bs.in_good_event && !bs.in_b1 && !bs.in_b2 &&
                  bs.bracket.plus_defined && bs.bracket.minus_defined;
    if (bs.bracket.plus_defined && bs.bracket.minus_defined) {
        bs.bracket_lo = std::min(bs.bracket.t_minus, bs.bracket.t_plus);
        bs.bracket_hi = std::max(bs.bracket.t_minus, bs.bracket.t_plus);
    } else {
        bs.bracket_lo = kNaN;
        bs.bracket_hi = kNaN;
    }
    return bs;
}

EventRates event_rates(const Family& fam, double theta0, double delta,
                       std::size_t n, std::size_t replications,
                       std::uint64_t seed, const SolveOptions& opt) {
    if (replications == 0) throw DomainError("event_rates: zero replications");
    const RandomStream root(seed);
    std::size_t good = 0, good_and_bad = 0, b2 = 0, boundary = 0, violations = 0;
    for (std::size_t rep = 0; rep < replications; ++rep) {
        RandomStream stream = root.child(n, rep);
        const std::vector<double> xs = draw_sample(fam, theta0, n, stream);
        const BracketStats bs = bracket_stats(fam, xs, theta0, delta, opt);
        if (bs.mle.at_boundary) ++boundary;
        if (bs.in_good_event) {
            ++good;
            if (bs.in_b1 || bs.in_b2) ++good_and_bad;
        }
        if (bs.in_b2) ++b2;
        if (bs.eligible) {
            const double h = bs.mle.theta_hat - theta0;
            const double tol = 1e-9 * (1.0 + std::fabs(h));
            if (!(h >= bs.bracket_lo - tol && h <= bs.bracket_hi + tol))
                ++violations;
        }
    }
    EventRates er;
    er.replications = replications;
    er.p_good = wilson_interval(good, replications);
    er.p_good_and_bad = wilson_interval(good_and_bad, replications);
    er.p_b2 = wilson_interval(b2, replications);
    er.boundary_count = boundary;
    er.violation_count = violations;
    return er;
}

}  // namespace mlelab
