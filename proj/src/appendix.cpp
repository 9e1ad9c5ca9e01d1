#include "mlelab/appendix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mlelab/errors.hpp"
#include "mlelab/mle.hpp"
#include "mlelab/special.hpp"

namespace mlelab {

namespace {

void validate(const FergusonParams& p) {
    if (!(p.alpha > 0.0)) throw DomainError("ferguson: alpha must be > 0");
    if (p.gamma == 0.0) throw DomainError("ferguson: gamma must be nonzero");
    if (!(p.sigma2 > 0.0)) throw DomainError("ferguson: sigma2 must be > 0");
}

}  // namespace

double ferguson_density(const FergusonParams& params, double u) {
    validate(params);
    const double a = params.alpha;
    const double g = params.gamma;
    const double log_norm =
        std::log(std::fabs(g)) + a * (std::log(a) - 1.0) - log_gamma(a);
    const double gu = g * u;
    const double exponent = -a * (std::expm1(gu) - gu);
    return std::exp(log_norm + exponent);
}

double ferguson_normal_gap(const FergusonParams& params, int grid_points) {
    validate(params);
    if (grid_points < 2) throw DomainError("ferguson_normal_gap: grid too small");
    const double s2 = params.sigma2;
    const double norm = 1.0 / std::sqrt(2.0 * M_PI * s2);
    double sup = 0.0;
    for (int i = 0; i < grid_points; ++i) {
        const double u = -5.0 + 10.0 * double(i) / double(grid_points - 1);
        const double target = norm * std::exp(-u * u / (2.0 * s2));
        sup = std::max(sup, std::fabs(ferguson_density(params, u) - target));
    }
    return sup;
}

double linear_statistic_residual(const Family& fam,
                                 const std::function<double(double)>& q,
                                 const std::function<double(double)>& g,
                                 const std::vector<std::vector<double>>& samples) {
    if (samples.empty())
        throw DomainError("linear_statistic_residual: no samples");
    double worst = 0.0;
    for (const auto& xs : samples) {
        const MleResult r = solve_mle(fam, xs);
        if (r.at_boundary)
            throw NonConvergence("linear_statistic_residual: boundary MLE");
        double mean_g = 0.0;
        for (double x : xs) mean_g += g(x);
        mean_g /= double(xs.size());
        worst = std::max(worst, std::fabs(q(r.theta_hat) - mean_g));
    }
    return worst;
}

std::optional<ProductWitness> find_product_subset(
    const std::function<bool(std::span<const double>)>& indicator,
    const std::vector<std::function<double(RandomStream&)>>& samplers,
    RandomStream& stream, const SubsetBudget& budget) {
    const std::size_t n = samplers.size();
    if (n == 0 || n > 16)
        throw DomainError("find_product_subset: dimension must be 1..16");

    std::size_t evals = 0;
    std::vector<double> point(n);

    ProductBox box;
    box.lo.assign(n, std::numeric_limits<double>::infinity());
    box.hi.assign(n, -std::numeric_limits<double>::infinity());
    for (int i = 0; i < 256; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            point[k] = samplers[k](stream);
            box.lo[k] = std::min(box.lo[k], point[k]);
            box.hi[k] = std::max(box.hi[k], point[k]);
        }
    }

    auto draw_in_box = [&](const ProductBox& b, std::vector<double>& pt) {
        for (std::size_t k = 0; k < n; ++k) {
            long tries = 0;
            do {
                pt[k] = samplers[k](stream);
                if (++tries > 200000) return false;
            } while (pt[k] < b.lo[k] || pt[k] > b.hi[k]);
        }
        return true;
    };

    constexpr std::size_t kBatch = 64;
    auto box_freq = [&](const ProductBox& b) -> double {
        std::size_t hits = 0;
        for (std::size_t i = 0; i < kBatch; ++i) {
            if (!draw_in_box(b, point)) return -1.0;
            if (indicator(point)) ++hits;
            ++evals;
        }
        return double(hits) / double(kBatch);
    };

    const double threshold = 1.0 - std::pow(2.0, -double(n + 1));
    double freq = 0.0;
    std::size_t axis = 0;
    for (;;) {
        if (evals + kBatch > budget.localization_evals) return std::nullopt;
        freq = box_freq(box);
        if (freq < 0.0) return std::nullopt;
        if (freq >= threshold) break;

        const double mid = 0.5 * (box.lo[axis] + box.hi[axis]);
        ProductBox left = box, right = box;
        left.hi[axis] = mid;
        right.lo[axis] = mid;
        if (evals + 2 * kBatch > budget.localization_evals) return std::nullopt;
        const double fl = box_freq(left);
        const double fr = box_freq(right);
        if (fl < 0.0 || fr < 0.0) return std::nullopt;
        box = fl >= fr ? left : right;
        axis = (axis + 1) % n;
    }

    std::vector<double> y1(n), y2(n), vertex(n);
    for (std::size_t attempt = 0; attempt < budget.pair_attempts; ++attempt) {
        if (!draw_in_box(box, y1) || !draw_in_box(box, y2)) return std::nullopt;
        bool distinct = true;
        for (std::size_t k = 0; k < n; ++k)
            if (y1[k] == y2[k]) distinct = false;
        if (!distinct) continue;

        bool all_in = true;
        for (std::size_t mask = 0; mask < (std::size_t(1) << n) && all_in; ++mask) {
            for (std::size_t k = 0; k < n; ++k)
                vertex[k] = (mask >> k) & 1 ? y2[k] : y1[k];
            ++evals;
            if (!indicator(vertex)) all_in = false;
        }
        if (all_in) {
            ProductWitness w;
            w.y1 = y1;
            w.y2 = y2;
            w.box = box;
            w.box_freq = freq;
            w.indicator_evals = evals;
            return w;
        }
    }
    return std::nullopt;
}

}  // namespace mlelab
