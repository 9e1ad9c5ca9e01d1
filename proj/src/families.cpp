#include <algorithm>
#include <cmath>
#include <limits>

#include "mlelab/errors.hpp"
#include "mlelab/family.hpp"
#include "mlelab/jet.hpp"
#include "mlelab/special.hpp"

namespace mlelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kLogSqrt2Pi = 0.9189385332046727418;  // ln sqrt(2 pi)
constexpr double kLogPi = 1.1447298858494001741;

// Consumes parameters by name so unknown keys can be rejected.
class ParamReader {
  public:
    explicit ParamReader(const std::map<std::string, double>& params)
        : params_(params) {}

    double take(const std::string& key, double fallback) {
        auto it = params_.find(key);
        if (it == params_.end()) return fallback;
        const double v = it->second;
        params_.erase(it);
        return v;
    }

    void finish(const std::string& family) const {
        if (!params_.empty())
            throw ConfigError(family + ": unknown parameter '" +
                              params_.begin()->first + "'");
    }

  private:
    std::map<std::string, double> params_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}

// log of the Hellinger affinity, clamped to <= 0 against rounding.
double h_from_log_affinity(double log_aff) {
    return -2.0 * std::expm1(std::min(log_aff, 0.0));
}

std::pair<double, double> data_hull_window(std::span<const double> xs, double pad) {
    auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    return {*lo - pad, *hi + pad};
}

// ---------------------------------------------------------------------------

class NormalLocation final : public Family {
  public:
    explicit NormalLocation(ParamReader& pr) : sigma_(pr.take("sigma", 1.0)) {
        require(sigma_ > 0.0, "normal_location: sigma must be > 0");
        name_ = "normal_location";
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override {
        return "normal_location(sigma=" + std::to_string(sigma_) + ")";
    }
    Interval param_space() const override { return {-kInf, kInf}; }
    Interval support() const override { return {-kInf, kInf}; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        const double z = (x - th) / sigma_;
        return -0.5 * z * z - std::log(sigma_) - kLogSqrt2Pi;
    }

    double score_derivative(double x, double th, int order) const override {
        switch (order) {
            case 1: return (x - th) / (sigma_ * sigma_);
            case 2: return -1.0 / (sigma_ * sigma_);
            case 3: return 0.0;
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double, double, double) const override {
        return 0.0;
    }
    bool envelope_x_free() const override { return true; }

    double sample(double th, RandomStream& s) const override {
        return th + sigma_ * s.normal();
    }
    double typical_location(double th) const override { return th; }
    bool positive_scale() const override { return false; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        return data_hull_window(xs, sigma_);
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            s.v[0] += x;
            s.v[1] += x * x;
        }
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        const double nn = double(n);
        const double ss = sigma_ * sigma_;
        return -nn * (std::log(sigma_) + kLogSqrt2Pi) -
               (s.v[1] - 2.0 * th * s.v[0] + nn * th * th) / (2.0 * ss);
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return (s.v[0] - double(n) * th) / (sigma_ * sigma_);
    }
    double score_slope_from_stats(const StatVec&, std::size_t n, double) const override {
        return -double(n) / (sigma_ * sigma_);
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double d = th - th0;
        return h_from_log_affinity(-d * d / (8.0 * sigma_ * sigma_));
    }

  private:
    double sigma_;
    std::string name_;
};

// ---------------------------------------------------------------------------

class NormalScale final : public Family {
  public:
    explicit NormalScale(ParamReader& pr) : mu_(pr.take("mu", 1.0)) {
        name_ = "normal_scale";
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override {
        return "normal_scale(mu=" + std::to_string(mu_) + ")";
    }
    Interval param_space() const override { return {0.0, kInf}; }
    Interval support() const override { return {-kInf, kInf}; }
    bool log_concave_in_theta() const override { return false; }

    double log_density(double x, double th) const override {
        const double z = (x - mu_) / th;
        return -0.5 * z * z - std::log(th) - kLogSqrt2Pi;
    }

    double score_derivative(double x, double th, int order) const override {
        const double m = (x - mu_) * (x - mu_);
        const double t2 = th * th;
        switch (order) {
            case 1: return -1.0 / th + m / (t2 * th);
            case 2: return 1.0 / t2 - 3.0 * m / (t2 * t2);
            case 3: return -2.0 / (t2 * th) + 12.0 * m / (t2 * t2 * th);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double x, double lo, double hi) const override {
        const double m = (x - mu_) * (x - mu_);
        auto d3 = [&](double t) {
            const double t2 = t * t;
            return std::fabs(-2.0 / (t2 * t) + 12.0 * m / (t2 * t2 * t));
        };
        double best = std::max(d3(lo), d3(hi));
        const double crit = std::sqrt(10.0 * m);  // stationary point of d3
        if (crit > lo && crit < hi) best = std::max(best, d3(crit));
        return best;
    }

    double sample(double th, RandomStream& s) const override {
        return mu_ + th * s.normal();
    }
    double typical_location(double) const override { return mu_; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double sm = 0.0;
        for (double x : xs) sm += (x - mu_) * (x - mu_);
        const double guess = std::sqrt(std::max(sm / double(xs.size()), 1e-300));
        return {guess / 8.0, guess * 8.0};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) s.v[0] += (x - mu_) * (x - mu_);
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return -double(n) * (std::log(th) + kLogSqrt2Pi) - s.v[0] / (2.0 * th * th);
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return -double(n) / th + s.v[0] / (th * th * th);
    }
    double score_slope_from_stats(const StatVec& s, std::size_t n, double th) const override {
        const double t2 = th * th;
        return double(n) / t2 - 3.0 * s.v[0] / (t2 * t2);
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double log_aff =
            0.5 * (std::log(2.0) + std::log(th) + std::log(th0) -
                   std::log(th * th + th0 * th0));
        return h_from_log_affinity(log_aff);
    }

  private:
    double mu_;
    std::string name_;
};

// ---------------------------------------------------------------------------

class ExpRate final : public Family {
  public:
    explicit ExpRate(ParamReader&) { name_ = "exp_rate"; }

    const std::string& name() const override { return name_; }
    std::string describe() const override { return "exp_rate"; }
    Interval param_space() const override { return {0.0, kInf}; }
    Interval support() const override { return {0.0, kInf}; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        if (!(x > 0.0)) return -kInf;
        return std::log(th) - th * x;
    }

    double score_derivative(double x, double th, int order) const override {
        switch (order) {
            case 1: return 1.0 / th - x;
            case 2: return -1.0 / (th * th);
            case 3: return 2.0 / (th * th * th);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double, double lo, double) const override {
        return 2.0 / (lo * lo * lo);
    }
    bool envelope_x_free() const override { return true; }

    double sample(double th, RandomStream& s) const override {
        return s.exponential() / th;
    }
    double typical_location(double th) const override { return 1.0 / th; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double sum = 0.0;
        for (double x : xs) sum += x;
        const double guess = double(xs.size()) / sum;
        return {guess / 8.0, guess * 8.0};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) s.v[0] += x;
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return double(n) * std::log(th) - th * s.v[0];
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return double(n) / th - s.v[0];
    }
    double score_slope_from_stats(const StatVec&, std::size_t n, double th) const override {
        return -double(n) / (th * th);
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double log_aff = 0.5 * (std::log(4.0) + std::log(th) + std::log(th0)) -
                               std::log(th + th0);
        return h_from_log_affinity(log_aff);
    }

  private:
    std::string name_;
};

// ---------------------------------------------------------------------------

class WeibullScale final : public Family {
  public:
    explicit WeibullScale(ParamReader& pr) : k_(pr.take("k", 2.0)) {
        require(k_ > 0.0, "weibull_scale: k must be > 0");
        name_ = "weibull_scale";
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override {
        return "weibull_scale(k=" + std::to_string(k_) + ")";
    }
    Interval param_space() const override { return {0.0, kInf}; }
    Interval support() const override { return {0.0, kInf}; }
    bool log_concave_in_theta() const override { return false; }

    double log_density(double x, double th) const override {
        if (!(x > 0.0)) return -kInf;
        return std::log(k_) + (k_ - 1.0) * std::log(x) - k_ * std::log(th) -
               std::pow(x / th, k_);
    }

    double score_derivative(double x, double th, int order) const override {
        const double s = std::pow(x / th, k_);
        const double t2 = th * th;
        switch (order) {
            case 1: return (k_ / th) * (s - 1.0);
            case 2: return (k_ / t2) * (1.0 - (k_ + 1.0) * s);
            case 3: return (k_ / (t2 * th)) * ((k_ + 1.0) * (k_ + 2.0) * s - 2.0);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double x, double lo, double hi) const override {
        auto d3 = [&](double t) { return std::fabs(score_derivative(x, t, 3)); };
        double best = std::max(d3(lo), d3(hi));
        const double crit =
            x * std::pow((k_ + 1.0) * (k_ + 2.0) * (k_ + 3.0) / 6.0, 1.0 / k_);
        if (crit > lo && crit < hi) best = std::max(best, d3(crit));
        return best;
    }

    double sample(double th, RandomStream& s) const override {
        return th * std::pow(s.exponential(), 1.0 / k_);
    }
    double typical_location(double th) const override {
        return th * std::exp(log_gamma(1.0 + 1.0 / k_));
    }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double sum = 0.0;
        for (double x : xs) sum += std::pow(x, k_);
        const double guess = std::pow(sum / double(xs.size()), 1.0 / k_);
        return {guess / 8.0, guess * 8.0};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            s.v[0] += std::pow(x, k_);
            s.v[1] += std::log(x);
        }
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return double(n) * std::log(k_) + (k_ - 1.0) * s.v[1] -
               double(n) * k_ * std::log(th) - s.v[0] / std::pow(th, k_);
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return (k_ / th) * (s.v[0] / std::pow(th, k_) - double(n));
    }
    double score_slope_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return (k_ / (th * th)) *
               (double(n) - (k_ + 1.0) * s.v[0] / std::pow(th, k_));
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double la = k_ * std::log(th);
        const double lb = k_ * std::log(th0);
        const double lse = std::max(la, lb) + std::log1p(std::exp(-std::fabs(la - lb)));
        const double log_aff = std::log(2.0) + 0.5 * (la + lb) - lse;
        return h_from_log_affinity(log_aff);
    }

  private:
    double k_;
    std::string name_;
};

// ---------------------------------------------------------------------------

class GammaShape final : public Family {
  public:
    explicit GammaShape(ParamReader& pr) : beta_(pr.take("beta", 1.0)) {
        require(beta_ > 0.0, "gamma_shape: beta must be > 0");
        name_ = "gamma_shape";
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override {
        return "gamma_shape(beta=" + std::to_string(beta_) + ")";
    }
    Interval param_space() const override { return {0.0, kInf}; }
    Interval support() const override { return {0.0, kInf}; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        if (!(x > 0.0)) return -kInf;
        return (th - 1.0) * std::log(x) - x / beta_ - log_gamma(th) -
               th * std::log(beta_);
    }

    double score_derivative(double x, double th, int order) const override {
        switch (order) {
            case 1: return std::log(x) - digamma(th) - std::log(beta_);
            case 2: return -trigamma(th);
            case 3: return -tetragamma(th);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double, double lo, double) const override {
        return std::fabs(tetragamma(lo));  // |psi''| is decreasing
    }
    bool envelope_x_free() const override { return true; }

    double sample(double th, RandomStream& s) const override {
        return beta_ * s.gamma(th);
    }
    double typical_location(double th) const override { return th * beta_; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double sl = 0.0;
        for (double x : xs) sl += std::log(x);
        const double c = sl / double(xs.size()) - std::log(beta_);
        const double guess = std::exp(c) + 0.5;  // psi^{-1} to first order
        return {guess / 64.0, guess * 16.0};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            s.v[0] += std::log(x);
            s.v[1] += x;
        }
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return (th - 1.0) * s.v[0] - s.v[1] / beta_ -
               double(n) * (log_gamma(th) + th * std::log(beta_));
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return s.v[0] - double(n) * (digamma(th) + std::log(beta_));
    }
    double score_slope_from_stats(const StatVec&, std::size_t n, double th) const override {
        return -double(n) * trigamma(th);
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double log_aff = log_gamma(0.5 * (th + th0)) -
                               0.5 * (log_gamma(th) + log_gamma(th0));
        return h_from_log_affinity(log_aff);
    }

  private:
    double beta_;
    std::string name_;
};

// ---------------------------------------------------------------------------

class GammaRate final : public Family {
  public:
    explicit GammaRate(ParamReader& pr) : alpha_(pr.take("alpha", 3.0)) {
        require(alpha_ > 0.0, "gamma_rate: alpha must be > 0");
        name_ = "gamma_rate";
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override {
        return "gamma_rate(alpha=" + std::to_string(alpha_) + ")";
    }
    Interval param_space() const override { return {0.0, kInf}; }
    Interval support() const override { return {0.0, kInf}; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        if (!(x > 0.0)) return -kInf;
        return alpha_ * std::log(th) - th * x + (alpha_ - 1.0) * std::log(x) -
               log_gamma(alpha_);
    }

    double score_derivative(double x, double th, int order) const override {
        switch (order) {
            case 1: return alpha_ / th - x;
            case 2: return -alpha_ / (th * th);
            case 3: return 2.0 * alpha_ / (th * th * th);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double, double lo, double) const override {
        return 2.0 * alpha_ / (lo * lo * lo);
    }
    bool envelope_x_free() const override { return true; }

    double sample(double th, RandomStream& s) const override {
        return s.gamma(alpha_) / th;
    }
    double typical_location(double th) const override { return alpha_ / th; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double sum = 0.0;
        for (double x : xs) sum += x;
        const double guess = alpha_ * double(xs.size()) / sum;
        return {guess / 8.0, guess * 8.0};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            s.v[0] += x;
            s.v[1] += std::log(x);
        }
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return double(n) * (alpha_ * std::log(th) - log_gamma(alpha_)) -
               th * s.v[0] + (alpha_ - 1.0) * s.v[1];
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return double(n) * alpha_ / th - s.v[0];
    }
    double score_slope_from_stats(const StatVec&, std::size_t n, double th) const override {
        return -double(n) * alpha_ / (th * th);
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double log_aff =
            alpha_ * (std::log(2.0) + 0.5 * (std::log(th) + std::log(th0)) -
                      std::log(th + th0));
        return h_from_log_affinity(log_aff);
    }

  private:
    double alpha_;
    std::string name_;
};

// ---------------------------------------------------------------------------

class Poisson final : public Family {
  public:
    explicit Poisson(ParamReader&) { name_ = "poisson"; }

    const std::string& name() const override { return name_; }
    std::string describe() const override { return "poisson"; }
    Interval param_space() const override { return {0.0, kInf}; }
    Interval support() const override { return {0.0, kInf}; }
    bool discrete() const override { return true; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        const long k = std::lround(x);
        if (k < 0) return -kInf;
        return double(k) * std::log(th) - th - log_factorial(k);
    }

    double score_derivative(double x, double th, int order) const override {
        switch (order) {
            case 1: return x / th - 1.0;
            case 2: return -x / (th * th);
            case 3: return 2.0 * x / (th * th * th);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double x, double lo, double) const override {
        return 2.0 * x / (lo * lo * lo);
    }

    double sample(double th, RandomStream& s) const override {
        return double(s.poisson(th));
    }
    double typical_location(double th) const override { return th; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double sum = 0.0;
        for (double x : xs) sum += x;
        if (sum <= 0.0) return {1e-10, 1.0};  // empty-count sample: boundary hunt
        const double mean = sum / double(xs.size());
        return {mean / 8.0, mean * 8.0};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            s.v[0] += x;
            s.v[1] += log_factorial(std::lround(x));
        }
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return s.v[0] * std::log(th) - double(n) * th - s.v[1];
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return s.v[0] / th - double(n);
    }
    double score_slope_from_stats(const StatVec& s, std::size_t, double th) const override {
        return -s.v[0] / (th * th);
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double d = std::sqrt(th) - std::sqrt(th0);
        return h_from_log_affinity(-0.5 * d * d);
    }

  private:
    std::string name_;
};

// ---------------------------------------------------------------------------

class BetaMean final : public Family {
  public:
    explicit BetaMean(ParamReader& pr) : s_(pr.take("s", 4.0)) {
        require(s_ > 0.0, "beta_mean: s must be > 0");
        name_ = "beta_mean";
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override {
        return "beta_mean(s=" + std::to_string(s_) + ")";
    }
    Interval param_space() const override { return {0.0, 1.0}; }
    Interval support() const override { return {0.0, 1.0}; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        if (!(x > 0.0 && x < 1.0)) return -kInf;
        const double a = s_ * th;
        const double b = s_ * (1.0 - th);
        return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
    }

    double score_derivative(double x, double th, int order) const override {
        const double a = s_ * th;
        const double b = s_ * (1.0 - th);
        switch (order) {
            case 1:
                return s_ * (std::log(x) - std::log1p(-x) - digamma(a) + digamma(b));
            case 2: return -s_ * s_ * (trigamma(a) + trigamma(b));
            case 3: return s_ * s_ * s_ * (tetragamma(b) - tetragamma(a));
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double x, double lo, double hi) const override {
        // |d3| is V-shaped around theta = 1/2, so the sup sits at an endpoint.
        return std::max(std::fabs(score_derivative(x, lo, 3)),
                        std::fabs(score_derivative(x, hi, 3)));
    }
    bool envelope_x_free() const override { return true; }

    double sample(double th, RandomStream& s) const override {
        for (;;) {
            const double x = s.beta(s_ * th, s_ * (1.0 - th));
            if (x > 0.0 && x < 1.0) return x;
        }
    }
    double typical_location(double th) const override { return th; }
    bool positive_scale() const override { return false; }

    std::pair<double, double> scan_window(std::span<const double>) const override {
        return {1e-5, 1.0 - 1e-5};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            s.v[0] += std::log(x);
            s.v[1] += std::log1p(-x);
        }
        return s;
    }
    double loglik_from_stats(const StatVec& st, std::size_t n, double th) const override {
        const double a = s_ * th;
        const double b = s_ * (1.0 - th);
        return (a - 1.0) * st.v[0] + (b - 1.0) * st.v[1] -
               double(n) * log_beta(a, b);
    }
    double score_from_stats(const StatVec& st, std::size_t n, double th) const override {
        const double a = s_ * th;
        const double b = s_ * (1.0 - th);
        return s_ * (st.v[0] - st.v[1]) -
               double(n) * s_ * (digamma(a) - digamma(b));
    }
    double score_slope_from_stats(const StatVec&, std::size_t n, double th) const override {
        const double a = s_ * th;
        const double b = s_ * (1.0 - th);
        return -double(n) * s_ * s_ * (trigamma(a) + trigamma(b));
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double mid = 0.5 * (th + th0);
        const double log_aff =
            log_beta(s_ * mid, s_ * (1.0 - mid)) -
            0.5 * (log_beta(s_ * th, s_ * (1.0 - th)) +
                   log_beta(s_ * th0, s_ * (1.0 - th0)));
        return h_from_log_affinity(log_aff);
    }

  private:
    double s_;
    std::string name_;
};

// ---------------------------------------------------------------------------

class BetaRate final : public Family {
  public:
    explicit BetaRate(ParamReader& pr)
        : alpha_(pr.take("alpha", 2.0)), beta_(pr.take("beta", 3.0)) {
        require(alpha_ > 0.0 && beta_ > 0.0, "beta_rate: alpha, beta must be > 0");
        name_ = "beta_rate";
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override {
        return "beta_rate(alpha=" + std::to_string(alpha_) +
               ",beta=" + std::to_string(beta_) + ")";
    }
    Interval param_space() const override { return {0.0, kInf}; }
    Interval support() const override { return {0.0, 1.0}; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        if (!(x > 0.0 && x < 1.0)) return -kInf;
        const double a = alpha_ * th;
        const double b = beta_ * th;
        return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - log_beta(a, b);
    }

    double score_derivative(double x, double th, int order) const override {
        const double a = alpha_ * th;
        const double b = beta_ * th;
        const double c = (alpha_ + beta_) * th;
        const double ab = alpha_ + beta_;
        switch (order) {
            case 1:
                return alpha_ * std::log(x) + beta_ * std::log1p(-x) +
                       ab * digamma(c) - alpha_ * digamma(a) - beta_ * digamma(b);
            case 2:
                return ab * ab * trigamma(c) - alpha_ * alpha_ * trigamma(a) -
                       beta_ * beta_ * trigamma(b);
            case 3:
                return ab * ab * ab * tetragamma(c) -
                       alpha_ * alpha_ * alpha_ * tetragamma(a) -
                       beta_ * beta_ * beta_ * tetragamma(b);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    bool envelope_x_free() const override { return true; }

    double sample(double th, RandomStream& s) const override {
        for (;;) {
            const double x = s.beta(alpha_ * th, beta_ * th);
            if (x > 0.0 && x < 1.0) return x;
        }
    }
    double typical_location(double) const override {
        return alpha_ / (alpha_ + beta_);
    }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double sum = 0.0, sum2 = 0.0;
        for (double x : xs) {
            sum += x;
            sum2 += x * x;
        }
        const double n = double(xs.size());
        const double var = std::max(sum2 / n - (sum / n) * (sum / n), 1e-12);
        const double mu = alpha_ / (alpha_ + beta_);
        const double guess =
            std::max((mu * (1.0 - mu) / var - 1.0) / (alpha_ + beta_), 1e-3);
        return {guess / 16.0, guess * 16.0};
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            s.v[0] += std::log(x);
            s.v[1] += std::log1p(-x);
        }
        return s;
    }
    double loglik_from_stats(const StatVec& st, std::size_t n, double th) const override {
        const double a = alpha_ * th;
        const double b = beta_ * th;
        return (a - 1.0) * st.v[0] + (b - 1.0) * st.v[1] -
               double(n) * log_beta(a, b);
    }
    double score_from_stats(const StatVec& st, std::size_t n, double th) const override {
        const double a = alpha_ * th;
        const double b = beta_ * th;
        const double c = (alpha_ + beta_) * th;
        return alpha_ * st.v[0] + beta_ * st.v[1] +
               double(n) * ((alpha_ + beta_) * digamma(c) - alpha_ * digamma(a) -
                            beta_ * digamma(b));
    }
    double score_slope_from_stats(const StatVec&, std::size_t n, double th) const override {
        return double(n) * score_derivative(0.5, th, 2);
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        const double mid = 0.5 * (th + th0);
        const double log_aff = log_beta(alpha_ * mid, beta_ * mid) -
                               0.5 * (log_beta(alpha_ * th, beta_ * th) +
                                      log_beta(alpha_ * th0, beta_ * th0));
        return h_from_log_affinity(log_aff);
    }

  private:
    double alpha_, beta_;
    std::string name_;
};

// ---------------------------------------------------------------------------

class CauchyLocation final : public Family {
  public:
    explicit CauchyLocation(ParamReader&) { name_ = "cauchy_location"; }

    const std::string& name() const override { return name_; }
    std::string describe() const override { return "cauchy_location"; }
    Interval param_space() const override { return {-kInf, kInf}; }
    Interval support() const override { return {-kInf, kInf}; }
    bool log_concave_in_theta() const override { return false; }

    double log_density(double x, double th) const override {
        const double u = x - th;
        return -kLogPi - std::log1p(u * u);
    }

    double score_derivative(double x, double th, int order) const override {
        const double u = x - th;
        const double q = 1.0 + u * u;
        switch (order) {
            case 1: return 2.0 * u / q;
            case 2: return 2.0 * (u * u - 1.0) / (q * q);
            case 3: return 4.0 * u * (u * u - 3.0) / (q * q * q);
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    double sample(double th, RandomStream& s) const override {
        return th + s.cauchy();
    }
    double typical_location(double th) const override { return th; }
    bool positive_scale() const override { return false; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        // Every score root lies inside the data hull.
        return data_hull_window(xs, 0.5);
    }

  private:
    std::string name_;
};

// ---------------------------------------------------------------------------

class QuarticLocation final : public Family {
  public:
    explicit QuarticLocation(ParamReader&) {
        name_ = "quartic_location";
        log_norm_ = std::log(2.0) + log_gamma(1.25);
    }

    const std::string& name() const override { return name_; }
    std::string describe() const override { return "quartic_location"; }
    Interval param_space() const override { return {-kInf, kInf}; }
    Interval support() const override { return {-kInf, kInf}; }
    bool log_concave_in_theta() const override { return true; }

    double log_density(double x, double th) const override {
        const double u = x - th;
        return -(u * u) * (u * u) - log_norm_;
    }

    double score_derivative(double x, double th, int order) const override {
        const double u = x - th;
        switch (order) {
            case 1: return 4.0 * u * u * u;
            case 2: return -12.0 * u * u;
            case 3: return 24.0 * u;
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    std::optional<double> envelope_sup(double x, double lo, double hi) const override {
        return 24.0 * std::max(std::fabs(x - lo), std::fabs(x - hi));
    }

    double sample(double th, RandomStream& s) const override {
        // |X - th|^4 is Gamma(1/4, 1) distributed.
        const double g = s.gamma(0.25);
        const double mag = std::pow(g, 0.25);
        return th + (s.uniform() < 0.5 ? -mag : mag);
    }
    double typical_location(double th) const override { return th; }
    bool positive_scale() const override { return false; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        return data_hull_window(xs, 0.5);
    }

    bool has_stat_reduction() const override { return true; }
    StatVec reduce(std::span<const double> xs) const override {
        StatVec s;
        for (double x : xs) {
            const double x2 = x * x;
            s.v[0] += x;
            s.v[1] += x2;
            s.v[2] += x2 * x;
            s.v[3] += x2 * x2;
        }
        return s;
    }
    double loglik_from_stats(const StatVec& s, std::size_t n, double th) const override {
        const double nn = double(n);
        const double th2 = th * th;
        const double sum4 = s.v[3] - 4.0 * th * s.v[2] + 6.0 * th2 * s.v[1] -
                            4.0 * th2 * th * s.v[0] + nn * th2 * th2;
        return -sum4 - nn * log_norm_;
    }
    double score_from_stats(const StatVec& s, std::size_t n, double th) const override {
        const double th2 = th * th;
        return 4.0 * (s.v[2] - 3.0 * th * s.v[1] + 3.0 * th2 * s.v[0] -
                      double(n) * th2 * th);
    }
    double score_slope_from_stats(const StatVec& s, std::size_t n, double th) const override {
        return -12.0 * (s.v[1] - 2.0 * th * s.v[0] + double(n) * th * th);
    }

  private:
    std::string name_;
    double log_norm_;
};

// ---------------------------------------------------------------------------

// Normal with both moments driven by theta: mean theta/(1+theta^2), variance
// ((1+theta)^3 - theta)/(1+theta^3), on theta in (-1, inf).  The Hellinger
// affinity to theta0 = 0 approaches 1 as theta grows, which is exactly the
// long-range degeneracy the distance checks are meant to expose.
class Example62 final : public Family {
  public:
    explicit Example62(ParamReader&) { name_ = "example62"; }

    const std::string& name() const override { return name_; }
    std::string describe() const override { return "example62"; }
    Interval param_space() const override { return {-1.0, kInf}; }
    Interval support() const override { return {-kInf, kInf}; }
    bool log_concave_in_theta() const override { return false; }

    static void moments(double th, double& m, double& v) {
        m = th / (1.0 + th * th);
        v = ((1.0 + th) * (1.0 + th) * (1.0 + th) - th) / (1.0 + th * th * th);
    }

    double log_density(double x, double th) const override {
        double m, v;
        moments(th, m, v);
        const double w = x - m;
        return -0.5 * std::log(v) - w * w / (2.0 * v) - kLogSqrt2Pi;
    }

    double score_derivative(double x, double th, int order) const override {
        const Jet3 ll = loglik_jet(x, th);
        switch (order) {
            case 1: return ll.f1;
            case 2: return ll.f2;
            case 3: return ll.f3;
            default: throw DomainError("score_derivative: order must be 1..3");
        }
    }

    double sample(double th, RandomStream& s) const override {
        double m, v;
        moments(th, m, v);
        return m + std::sqrt(v) * s.normal();
    }
    double typical_location(double th) const override {
        double m, v;
        moments(th, m, v);
        return m;
    }
    bool positive_scale() const override { return false; }

    std::pair<double, double> scan_window(std::span<const double> xs) const override {
        double amax = 0.0;
        for (double x : xs) amax = std::max(amax, std::fabs(x));
        return {-0.99, std::max(8.0, 4.0 * amax)};
    }

    std::optional<double> hellinger_closed_form(double th, double th0) const override {
        double m1, v1, m2, v2;
        moments(th, m1, v1);
        moments(th0, m2, v2);
        const double dm = m1 - m2;
        const double log_aff =
            0.5 * (std::log(2.0) + 0.5 * (std::log(v1) + std::log(v2)) -
                   std::log(v1 + v2)) -
            dm * dm / (4.0 * (v1 + v2));
        return h_from_log_affinity(log_aff);
    }

  private:
    static Jet3 loglik_jet(double x, double theta) {
        const Jet3 th = Jet3::variable(theta);
        const Jet3 one = Jet3::constant(1.0);
        const Jet3 th2 = th * th;
        const Jet3 m = th / (one + th2);
        const Jet3 onep = one + th;
        const Jet3 num = onep * onep * onep - th;
        const Jet3 den = one + th * th2;
        const Jet3 v = num / den;
        const Jet3 w = Jet3::constant(x) - m;
        const Jet3 ll = (-0.5) * log(v) - (0.5 * (w * w)) * reciprocal(v) -
                        Jet3::constant(kLogSqrt2Pi);
        return ll;
    }

    std::string name_;
};

// ---------------------------------------------------------------------------

template <class F>
std::unique_ptr<Family> build(const std::map<std::string, double>& params) {
    ParamReader pr(params);
    auto fam = std::make_unique<F>(pr);
    pr.finish(fam->name());
    return fam;
}

}  // namespace

std::unique_ptr<Family> make_family(const std::string& id,
                                    const std::map<std::string, double>& params) {
    if (id == "normal_location") return build<NormalLocation>(params);
    if (id == "normal_scale") return build<NormalScale>(params);
    if (id == "exp_rate") return build<ExpRate>(params);
    if (id == "weibull_scale") return build<WeibullScale>(params);
    if (id == "gamma_shape") return build<GammaShape>(params);
    if (id == "gamma_rate") return build<GammaRate>(params);
    if (id == "poisson") return build<Poisson>(params);
    if (id == "beta_mean") return build<BetaMean>(params);
    if (id == "beta_rate") return build<BetaRate>(params);
    if (id == "cauchy_location") return build<CauchyLocation>(params);
    if (id == "quartic_location") return build<QuarticLocation>(params);
    if (id == "example62") return build<Example62>(params);
    throw ConfigError("make_family: unknown family '" + id + "'");
}

std::vector<std::string> family_ids() {
    return {"beta_mean",      "beta_rate",  "cauchy_location", "example62",
            "exp_rate",       "gamma_rate", "gamma_shape",     "normal_location",
            "normal_scale",   "poisson",    "quartic_location", "weibull_scale"};
}

}  // namespace mlelab
