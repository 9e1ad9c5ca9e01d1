#include "mlelab/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mlelab/errors.hpp"
#include "mlelab/mle.hpp"
#include "mlelab/special.hpp"

namespace mlelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double kolmogorov_distance(const std::vector<double>& sorted) {
    const double m = double(sorted.size());
    double dk = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double cdf = normal_cdf(sorted[i]);
        dk = std::max(dk, double(i + 1) / m - cdf);
        dk = std::max(dk, cdf - double(i) / m);
    }
    return dk;
}

double empirical_cdf(const std::vector<double>& sorted, double z) {
    const auto it = std::upper_bound(sorted.begin(), sorted.end(), z);
    return double(it - sorted.begin()) / double(sorted.size());
}

}  // namespace

void ExperimentConfig::fill_default_z_grid() {
    if (!z_grid.empty()) return;
    if (n_grid.empty())
        throw ConfigError("config: n_grid required before the default z grid");
    const double z_max =
        std::min(3.0, omega * std::sqrt(double(n_grid.front())));
    if (!(z_max > 0.25))
        throw ConfigError("config: omega sqrt(min n) too small for the default z grid");
    const double llo = std::log(0.25);
    const double lhi = std::log(z_max);
    for (int i = 0; i < 40; ++i)
        z_grid.push_back(std::exp(llo + (lhi - llo) * double(i) / 39.0));
}

void ExperimentConfig::validate() const {
    if (family_id.empty()) throw ConfigError("config: family required");
    std::unique_ptr<Family> fam;
    try {
        fam = make_family(family_id, params);
    } catch (const Error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    const Interval space = fam->param_space();
    if (!space.contains(theta0))
        throw ConfigError("config: theta0 outside the parameter space");
    if (!(delta > 0.0) || !space.contains(theta0 - delta) ||
        !space.contains(theta0 + delta))
        throw ConfigError("config: [theta0 - delta, theta0 + delta] must lie in the parameter space");
    if (n_grid.empty()) throw ConfigError("config: n_grid required");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] == 0) throw ConfigError("config: n must be positive");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw ConfigError("config: n_grid must be strictly increasing");
    }
    if (replications < 100)
        throw ConfigError("config: replications must be at least 100");
    if (!(omega > 0.0)) throw ConfigError("config: omega must be positive");
    if (workers < 1) throw ConfigError("config: workers must be at least 1");
    if (z_grid.empty()) throw ConfigError("config: z_grid required (or fill the default)");
    const double z_cap = omega * std::sqrt(double(n_grid.front()));
    for (double z : z_grid)
        if (!(z > 0.0) || z > z_cap * (1.0 + 1e-12))
            throw ConfigError("config: z_grid must lie in (0, omega sqrt(min n)]");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (j.contains("config")) j = j.at("config");  // accept a manifest too

    ExperimentConfig cfg;
    try {
        cfg.family_id = j.at("family").get<std::string>();
        cfg.theta0 = j.at("theta0").get<double>();
        cfg.delta = j.at("delta").get<double>();
        cfg.n_grid = j.at("n_grid").get<std::vector<std::size_t>>();
        cfg.replications = j.at("replications").get<std::size_t>();
        cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        if (j.contains("params"))
            cfg.params = j.at("params").get<std::map<std::string, double>>();
        if (j.contains("z_grid"))
            cfg.z_grid = j.at("z_grid").get<std::vector<double>>();
        if (j.contains("omega")) cfg.omega = j.at("omega").get<double>();
        if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    cfg.fill_default_z_grid();
    cfg.validate();
    return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    out << "{\"delta\":" << format_number(delta);
    out << ",\"family\":\"" << family_id << "\"";
    out << ",\"master_seed\":" << master_seed;
    out << ",\"n_grid\":[";
    for (std::size_t i = 0; i < n_grid.size(); ++i)
        out << (i ? "," : "") << n_grid[i];
    out << "],\"omega\":" << format_number(omega);
    out << ",\"params\":{";
    bool first = true;
    for (const auto& [k, v] : params) {
        out << (first ? "" : ",") << "\"" << k << "\":" << format_number(v);
        first = false;
    }
    out << "},\"replications\":" << replications;
    out << ",\"theta0\":" << format_number(theta0);
    out << ",\"z_grid\":[";
    for (std::size_t i = 0; i < z_grid.size(); ++i)
        out << (i ? "," : "") << format_number(z_grid[i]);
    out << "]}";
    return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
    const std::string text = canonical_text();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<NonuniformPoint> nonuniform_profile(const KolmogorovReport& report,
                                                std::span<const double> z_grid,
                                                double omega) {
    const double z_cap = omega * std::sqrt(double(report.n));
    std::vector<NonuniformPoint> out;
    out.reserve(z_grid.size());
    for (double z : z_grid) {
        if (!(z > 0.0) || z > z_cap * (1.0 + 1e-12))
            throw RangeError("nonuniform_profile: z outside (0, omega sqrt(n)]");
        const double gap =
            std::fabs(empirical_cdf(report.standardized, z) - normal_cdf(z));
        out.push_back({z, gap, z * z * z * std::sqrt(double(report.n)) * gap});
    }
    return out;
}

KolmogorovReport report_from_standardized(std::vector<double> values,
                                          std::size_t n,
                                          std::span<const double> z_grid,
                                          double omega) {
    if (values.empty())
        throw DomainError("report_from_standardized: no values");
    std::sort(values.begin(), values.end());
    KolmogorovReport rep;
    rep.n = n;
    rep.replications = values.size();
    rep.standardized = std::move(values);
    rep.d_k = kolmogorov_distance(rep.standardized);
    rep.dkw_band = std::sqrt(std::log(2.0 / 0.05) / (2.0 * double(rep.replications)));
    std::size_t absorbed = 0;
    for (double v : rep.standardized)
        if (std::isinf(v)) ++absorbed;
    rep.boundary_rate = double(absorbed) / double(rep.replications);
    rep.z_grid.assign(z_grid.begin(), z_grid.end());
    rep.nonuniform = nonuniform_profile(rep, z_grid, omega);
    return rep;
}

std::vector<KolmogorovReport> run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto fam = make_family(config.family_id, config.params);
    const double info = fisher_information(*fam, config.theta0);
    const double scale = std::sqrt(info);
    const RandomStream root(config.master_seed);
    const int workers = std::max(1, config.workers);

    std::vector<KolmogorovReport> reports;
    reports.reserve(config.n_grid.size());
    for (std::size_t n : config.n_grid) {
        const std::size_t m = config.replications;
        std::vector<double> values(m, 0.0);
        std::atomic<std::size_t> hard_failures{0};

        auto run_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t rep = lo; rep < hi; ++rep) {
                RandomStream stream = root.child(n, rep);
                const std::vector<double> xs =
                    draw_sample(*fam, config.theta0, n, stream);
                try {
                    const MleResult r = solve_mle(*fam, xs);
                    if (r.at_boundary) {
                        values[rep] = r.side < 0 ? -kInf : kInf;
                    } else {
                        values[rep] = std::sqrt(double(n)) * scale *
                                      (r.theta_hat - config.theta0);
                    }
                } catch (const Error&) {
                    values[rep] = kInf;
                    hard_failures.fetch_add(1, std::memory_order_relaxed);
                }
            }
        };

        if (workers == 1) {
            run_range(0, m);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (m + workers - 1) / workers;
            for (int w = 0; w < workers; ++w) {
                const std::size_t lo = std::min(m, std::size_t(w) * chunk);
                const std::size_t hi = std::min(m, lo + chunk);
                if (lo < hi) pool.emplace_back(run_range, lo, hi);
            }
            for (auto& t : pool) t.join();
        }

        if (double(hard_failures.load()) > 0.01 * double(m))
            throw PropagatedSolverFailure(
                "run_experiment: more than 1% of replicates failed hard at n=" +
                std::to_string(n));

        KolmogorovReport rep =
            report_from_standardized(std::move(values), n, config.z_grid,
                                     config.omega);
        reports.push_back(std::move(rep));
    }
    return reports;
}

RateFit rate_fit(std::span<const std::pair<std::size_t, double>> n_and_dk) {
    if (n_and_dk.size() < 4)
        throw DomainError("rate_fit: need at least 4 points");
    std::vector<double> x, y;
    x.reserve(n_and_dk.size());
    y.reserve(n_and_dk.size());
    bool all_equal = true;
    for (const auto& [n, dk] : n_and_dk) {
        if (!(dk > 0.0)) throw DomainError("rate_fit: d_K must be positive");
        if (n != n_and_dk.front().first) all_equal = false;
        x.push_back(std::log(double(n)));
        y.push_back(std::log(dk));
    }
    if (all_equal) throw DegenerateFit("rate_fit: all n equal");

    const LinearFit fit = least_squares(x, y);
    RateFit rf;
    rf.slope = fit.slope;
    rf.intercept = fit.intercept;
    rf.r_squared = fit.r_squared;
    for (std::size_t i = 0; i < x.size(); ++i) rf.points.emplace_back(x[i], y[i]);
    return rf;
}

TailReport tail_probability(const Family& fam, double theta0, double delta,
                            std::span<const std::size_t> n_grid,
                            std::size_t replications, std::uint64_t seed) {
    if (replications == 0)
        throw DomainError("tail_probability: zero replications");
    if (!(delta > 0.0)) throw DomainError("tail_probability: delta must be positive");
    const RandomStream root(seed);
    TailReport report;
    bool all_positive = true;
    std::vector<double> fit_n, fit_logp;
    for (std::size_t n : n_grid) {
        std::size_t exceed = 0;
        for (std::size_t rep = 0; rep < replications; ++rep) {
            RandomStream stream = root.child(n, rep);
            const std::vector<double> xs = draw_sample(fam, theta0, n, stream);
            bool out;
            try {
                const MleResult r = solve_mle(fam, xs);
                out = r.at_boundary ||
                      std::fabs(r.theta_hat - theta0) > delta;
            } catch (const Error&) {
                out = true;
            }
            if (out) ++exceed;
        }
        TailPoint pt;
        pt.n = n;
        pt.exceed_count = exceed;
        pt.ci = wilson_interval(exceed, replications);
        pt.p_hat = pt.ci.p_hat;
        report.points.push_back(pt);
        if (exceed == 0)
            all_positive = false;
        else {
            fit_n.push_back(double(n));
            fit_logp.push_back(std::log(pt.p_hat));
        }
    }
    if (all_positive && fit_n.size() >= 2) {
        report.fit = least_squares(fit_n, fit_logp);
        report.has_fit = true;
    }
    return report;
}

}  // namespace mlelab
