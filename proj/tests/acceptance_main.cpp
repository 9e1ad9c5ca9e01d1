// End-to-end acceptance run: one line per claim, nonzero exit when any fails.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>
#include <unistd.h>

#include <mlelab/appendix.hpp>
#include <mlelab/delta.hpp>
#include <mlelab/distance.hpp>
#include <mlelab/errors.hpp>
#include <mlelab/family.hpp>
#include <mlelab/mc.hpp>
#include <mlelab/mle.hpp>
#include <mlelab/quadrature.hpp>
#include <mlelab/rng.hpp>
#include <mlelab/special.hpp>

using namespace mlelab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void criterion(const std::string& name,
               const std::function<std::string()>& body) {
    std::string note;
    bool pass = false;
    try {
        note = body();
        pass = true;
    } catch (const std::exception& e) {
        note = e.what();
    }
    std::printf("%-34s %s  %s\n", name.c_str(), pass ? "PASS" : "FAIL",
                note.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::runtime_error(msg);
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

std::string source_root() {
    const char* src = std::getenv("MLELAB_SRC");
    require(src != nullptr, "MLELAB_SRC not set");
    return src;
}

ExperimentConfig load_config(const std::string& name) {
    return ExperimentConfig::from_json_file(source_root() + "/configs/" + name);
}

// ---- criterion 1: the quadratic bracket never loses the deviation --------

std::string crit_bracket_events() {
    struct Row {
        const char* id;
        double theta0;
        double delta;
    };
    const std::vector<Row> rows{{"poisson", 2.0, 0.5},
                                {"exp_rate", 1.0, 0.5},
                                {"gamma_rate", 3.0, 0.75},
                                {"cauchy_location", 0.0, 0.5}};
    std::size_t runs = 0;
    for (const auto& row : rows) {
        auto fam = make_family(row.id);
        for (std::size_t n : {50, 200}) {
            const EventRates er =
                event_rates(*fam, row.theta0, row.delta, n, 10000,
                            0x5eedULL + n);
            require(er.violation_count == 0,
                    fmt("%s n=%zu: %zu bracket violations", row.id, n,
                        er.violation_count));
            ++runs;
        }
    }
    return fmt("0 violations across %zu runs of 10000 replicates", runs);
}

// ---- criteria 2 and 3: uniform and nonuniform Kolmogorov rates -----------

struct RateOutcome {
    std::string note2;
    std::string note3;
    bool pass3 = false;
};

RateOutcome rate_and_nonuniform(const std::string& config_name) {
    const ExperimentConfig cfg = load_config(config_name);
    const auto reports = run_experiment(cfg);

    std::vector<std::pair<std::size_t, double>> pts;
    const KolmogorovReport* rep400 = nullptr;
    for (const auto& r : reports) {
        pts.emplace_back(r.n, r.d_k);
        require(r.boundary_rate == 0.0,
                fmt("%s n=%zu: boundary rate %.3g", cfg.family_id.c_str(), r.n,
                    r.boundary_rate));
        if (r.n == 400) rep400 = &r;
    }
    const RateFit fit = rate_fit(pts);
    require(fit.slope > -0.65 && fit.slope < -0.35,
            fmt("%s slope %.4f outside [-0.65, -0.35]", cfg.family_id.c_str(),
                fit.slope));
    require(fit.r_squared >= 0.9, fmt("%s r^2 %.4f below 0.9",
                                      cfg.family_id.c_str(), fit.r_squared));
    require(rep400 != nullptr, "config lacks n = 400");

    RateOutcome out;
    out.note2 = fmt("%s slope %.3f r2 %.3f", cfg.family_id.c_str(), fit.slope,
                    fit.r_squared);

    // z^3-weighted gaps: quadrupling n at most doubles the weighted supremum
    // over z in [0.5, 3], up to binomial noise bands
    ExperimentConfig big = cfg;
    big.n_grid = {1600};
    big.z_grid.clear();
    big.fill_default_z_grid();
    const auto big_reports = run_experiment(big);
    const KolmogorovReport& rep1600 = big_reports.front();

    std::vector<double> zs;
    for (int i = 0; i < 12; ++i)
        zs.push_back(0.5 * std::pow(6.0, double(i) / 11.0));
    const double m = double(cfg.replications);
    auto max_scaled = [&](const KolmogorovReport& r) {
        double best = 0.0;
        for (const auto& p : nonuniform_profile(r, zs, cfg.omega))
            best = std::max(best, p.scaled);
        return best;
    };
    auto band = [&](std::size_t n) {
        double best = 0.0;
        for (double z : zs) {
            const double q = normal_cdf(z) * (1.0 - normal_cdf(z));
            best = std::max(best, z * z * z * std::sqrt(double(n)) * 2.0 *
                                      std::sqrt(q / m));
        }
        return best;
    };
    const double s400 = max_scaled(*rep400);
    const double s1600 = max_scaled(rep1600);
    const double bound = 2.0 * s400 + band(1600) + 2.0 * band(400);
    out.pass3 = s1600 <= bound;
    out.note3 = fmt("%s sup(1600) %.3f vs 2 sup(400) + bands %.3f",
                    cfg.family_id.c_str(), s1600, bound);
    return out;
}

// ---- criterion 4: closed hellinger forms against quadrature --------------

std::string crit_closed_forms() {
    struct Range {
        const char* id;
        double lo, hi;
    };
    // doubly-bounded spaces keep a margin from the endpoints where the mass
    // near 1 is not representable in doubles
    const std::vector<Range> ranges{
        {"normal_location", -2.0, 2.0}, {"normal_scale", 0.5, 3.0},
        {"exp_rate", 0.4, 3.5},         {"weibull_scale", 0.6, 2.5},
        {"gamma_shape", 0.7, 3.0},      {"gamma_rate", 0.8, 4.0},
        {"poisson", 0.6, 5.0},          {"beta_mean", 0.25, 0.75},
        {"beta_rate", 0.5, 2.5},        {"example62", -0.5, 2.0}};
    QuadratureSpec spec;
    spec.abs_tol = 1e-10;
    spec.rel_tol = 1e-10;
    spec.max_level = 14;
    double worst = 0.0;
    std::string worst_at = "-";
    for (const auto& rg : ranges) {
        auto fam = make_family(rg.id);
        for (int i = 0; i < 7; ++i) {
            const double a = rg.lo + (rg.hi - rg.lo) * double(i) / 6.0;
            for (int j = 0; j < 7; ++j) {
                const double b = rg.lo + (rg.hi - rg.lo) * double(j) / 6.0;
                const double closed = hellinger_closed(*fam, a, b);
                const double quad = hellinger_quadrature(*fam, a, b, spec);
                const double gap = std::fabs(closed - quad);
                if (gap > worst) {
                    worst = gap;
                    worst_at = fmt("%s(%.3g,%.3g)", rg.id, a, b);
                }
            }
        }
    }
    require(worst <= 1e-8,
            fmt("worst |closed - quadrature| %.3e at %s", worst,
                worst_at.c_str()));
    return fmt("10 families x 49 pairs, worst gap %.2e <= 1e-8", worst);
}

// ---- criterion 5: exponential remainder bound ----------------------------

std::string crit_tail_envelope() {
    auto fam = make_family("normal_location");
    const double delta = 1.0;
    const double lp = lambda_bound(*fam, 0.0, delta);
    const double lm = lambda_bound(*fam, 0.0, -delta);
    require(std::fabs(lp - std::exp(-0.125)) <= 1e-10, "lambda_+ != e^{-1/8}");
    const std::vector<std::size_t> ns{4, 9, 16, 25};
    const TailReport tr = tail_probability(*fam, 0.0, delta, ns, 20000, 77);
    for (const auto& p : tr.points) {
        const double env = remainder_envelope(lp, lm, p.n);
        require(p.p_hat <= env, fmt("n=%zu: p_hat %.4g above envelope %.4g",
                                    p.n, p.p_hat, env));
        const double truth = 2.0 * normal_cdf(-std::sqrt(double(p.n)));
        require(p.ci.lo <= truth && truth <= p.ci.hi,
                fmt("n=%zu: exact tail %.3g outside the Wilson interval "
                    "[%.3g, %.3g]",
                    p.n, truth, p.ci.lo, p.ci.hi));
    }
    return fmt("p_hat <= 2 lambda^n at n in {4,9,16,25}, lambda %.6f", lp);
}

// ---- criterion 6: distinguishability conditions --------------------------

std::string crit_distinguishability() {
    QuadratureSpec spec;
    spec.abs_tol = 1e-9;
    spec.rel_tol = 1e-9;
    spec.max_level = 14;

    auto beta = make_family("beta_rate");
    const auto grid_b = default_far_grid(*beta, 1.0);
    const ConditionVerdict vb = check_D1(*beta, 1.0, 0.25, grid_b, spec);
    require(vb.holds_on_grid, "beta_rate: gamma = 1/4 decay fails");

    auto ex = make_family("example62");
    const auto grid_e = default_far_grid(*ex, 0.0);
    for (double gamma : {0.1, 1.0}) {
        const ConditionVerdict ve = check_D1(*ex, 0.0, gamma, grid_e, spec);
        require(!ve.holds_on_grid,
                fmt("example62: decay at gamma %.2g should fail", gamma));
    }
    require(affinity_example62(100.0) > 0.999,
            "example62: far affinity must stay near 1");
    require(std::fabs(gamma_alpha(2.0) - 1.0) < 1e-14, "gamma_alpha(2) != 1");

    auto normal = make_family("normal_location");
    const ConditionVerdict d0 = check_D0(*normal, 0.0, Interval{-2.0, 2.0}, 16);
    require(d0.holds_on_grid, "normal: local separation fails");
    return "D1 holds for beta_rate, fails both ways for example62; D0 holds";
}

// ---- criterion 7: smooth bracket maps and their curvature ----------------

std::string crit_delta_maps() {
    auto worked = [](std::span<const double> x) {
        return x[0] / (1.0 + std::fabs(x[0]));
    };
    const double m_worked = estimate_m_star(worked, 1, 0.5);
    require(std::fabs(m_worked - 2.0) <= 0.04,
            fmt("worked example M* %.4f not within 2%% of 2", m_worked));

    struct Ctx {
        const char* id;
        double theta0, delta;
    };
    std::string notes;
    for (const Ctx& c : {Ctx{"poisson", 2.0, 0.5}, Ctx{"exp_rate", 1.0, 0.5}}) {
        auto fam = make_family(c.id);
        const DeltaContext ctx = make_delta_context(*fam, c.theta0, c.delta);
        for (int sign : {+1, -1}) {
            auto f = [&](std::span<const double> x) {
                return f_pm(ctx, sign, Vec3{x[0], x[1], x[2]});
            };
            const double mstar = estimate_m_star(f, 3, ctx.epsilon);
            RandomStream s(0xabcdULL + std::size_t(sign + 1));
            std::size_t checked = 0;
            for (int k = 0; k < 1000; ++k) {
                Vec3 x;
                double norm2 = 0.0;
                for (auto& v : x) {
                    v = (2.0 * s.uniform() - 1.0) * ctx.epsilon;
                    norm2 += v * v;
                }
                if (norm2 > ctx.epsilon * ctx.epsilon) continue;
                const double gap =
                    std::fabs(f_pm(ctx, sign, x) - linear_part(ctx, x));
                require(gap <= 1.05 * 0.5 * mstar * norm2 + 1e-14,
                        fmt("%s sign %+d: quadratic contact violated", c.id,
                            sign));
                ++checked;
            }
            require(checked > 300, "too few ball probes");
        }
        notes += fmt("%s eps %.3f  ", c.id, ctx.epsilon);
    }
    return fmt("M*(worked) within 2%% of 2; contact holds on balls: %s",
               notes.c_str());
}

// ---- criterion 8: location-exponential limit and product witnesses -------

std::string crit_appendix() {
    FergusonParams p{100.0, 0.1, 1.0};
    const auto mass =
        integrate([&](double u) { return ferguson_density(p, u); },
                  -std::numeric_limits<double>::infinity(),
                  std::numeric_limits<double>::infinity(), {},
                  std::vector<double>{0.0});
    require(std::fabs(mass.value - 1.0) <= 1e-8,
            fmt("density mass %.12f != 1", mass.value));
    FergusonParams far{1e4, 1e-2, 1.0};
    const double gap = ferguson_normal_gap(far);
    require(gap <= 0.01, fmt("normal gap %.4f above 0.01", gap));

    auto identity = [](double x) { return x; };
    RandomStream s(0xfe11);
    auto pois = make_family("poisson");
    std::vector<std::vector<double>> samples;
    for (int k = 0; k < 10; ++k)
        samples.push_back(draw_sample(*pois, 2.0, 50, s));
    const double res = linear_statistic_residual(*pois, identity, identity,
                                                 samples);
    require(res <= 1e-6, fmt("poisson moment-map residual %.3e", res));

    auto cauchy = make_family("cauchy_location");
    samples.clear();
    for (int k = 0; k < 10; ++k)
        samples.push_back(draw_sample(*cauchy, 0.0, 25, s));
    const double res_c = linear_statistic_residual(*cauchy, identity, identity,
                                                   samples);
    require(res_c > 0.01, fmt("cauchy residual %.3e suspiciously small", res_c));

    auto half = [](std::span<const double> x) { return x[0] > 0.0; };
    std::vector<std::function<double(RandomStream&)>> normals{
        [](RandomStream& r) { return r.normal(); },
        [](RandomStream& r) { return r.normal(); }};
    RandomStream sw(0xbeef);
    const auto w1 = find_product_subset(half, normals, sw);
    require(w1.has_value(), "no product witness for the half space");

    auto boxes = [](std::span<const double> x) {
        if (x[2] < 0.5) return true;
        if (x[1] <= 0.8) return true;
        return x[0] <= 0.6;
    };
    std::vector<std::function<double(RandomStream&)>> uniforms{
        [](RandomStream& r) { return r.uniform(); },
        [](RandomStream& r) { return r.uniform(); },
        [](RandomStream& r) { return r.uniform(); }};
    const auto w2 = find_product_subset(boxes, uniforms, sw);
    require(w2.has_value(), "no product witness for the box union");
    for (const auto& w : {*w1, *w2}) {
        const std::size_t n = w.y1.size();
        std::vector<double> v(n);
        for (std::size_t mask = 0; mask < (std::size_t(1) << n); ++mask) {
            for (std::size_t k = 0; k < n; ++k)
                v[k] = (mask >> k) & 1 ? w.y2[k] : w.y1[k];
            const bool in = n == 2 ? half(v) : boxes(v);
            require(in, "witness vertex escapes the target set");
        }
    }
    return fmt("mass-1 %.1e, gap %.4f, residuals %.1e / %.2f, 2 witnesses",
               mass.value - 1.0, gap, res, res_c);
}

// ---- criterion 9: worker-count invariance through the cli ----------------

std::string run_shell(const std::string& cmd) {
    FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
    require(pipe != nullptr, "popen failed");
    std::string out;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe))
        out.append(buf, got);
    const int status = pclose(pipe);
    require(WIFEXITED(status) && WEXITSTATUS(status) == 0,
            "cli exited nonzero: " + out);
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string crit_cli_determinism() {
    const char* bin = std::getenv("MLELAB_CLI");
    require(bin != nullptr, "MLELAB_CLI not set");
    const std::string cfg = source_root() + "/configs/demo_small.json";
    const fs::path base = fs::temp_directory_path() /
                          ("mlelab_acceptance_" + std::to_string(::getpid()));
    const fs::path d1 = base / "w1";
    const fs::path d8 = base / "w8";
    fs::remove_all(base);
    fs::create_directories(d1);
    fs::create_directories(d8);
    run_shell("MLE_LAB_WORKERS=1 " + std::string(bin) + " rate " + cfg +
              " --out " + d1.string());
    run_shell("MLE_LAB_WORKERS=8 " + std::string(bin) + " rate " + cfg +
              " --out " + d8.string());
    const std::string c1 = slurp(d1 / "results.csv");
    const std::string c8 = slurp(d8 / "results.csv");
    require(!c1.empty(), "empty results.csv");
    require(c1 == c8, "results.csv differs between 1 and 8 workers");
    require(slurp(d1 / "profile.json") == slurp(d8 / "profile.json"),
            "profile.json differs between 1 and 8 workers");
    fs::remove_all(base);
    return fmt("results.csv and profile.json byte-identical (%zu bytes)",
               c1.size());
}

}  // namespace

int main() {
    std::printf("acceptance run\n\n");

    criterion("bracket-containment", crit_bracket_events);

    RateOutcome pois_out, exp_out;
    criterion("uniform-rate-poisson", [&] {
        pois_out = rate_and_nonuniform("poisson_rate.json");
        return pois_out.note2;
    });
    criterion("uniform-rate-exponential", [&] {
        exp_out = rate_and_nonuniform("exp_rate.json");
        return exp_out.note2;
    });
    criterion("nonuniform-rate-poisson", [&] {
        require(!pois_out.note3.empty(), "poisson run did not complete");
        require(pois_out.pass3, pois_out.note3 + " : bound violated");
        return pois_out.note3;
    });
    criterion("nonuniform-rate-exponential", [&] {
        require(!exp_out.note3.empty(), "exp_rate run did not complete");
        require(exp_out.pass3, exp_out.note3 + " : bound violated");
        return exp_out.note3;
    });

    criterion("hellinger-closed-forms", crit_closed_forms);
    criterion("tail-exponential-envelope", crit_tail_envelope);
    criterion("distinguishability", crit_distinguishability);
    criterion("bracket-map-curvature", crit_delta_maps);
    criterion("appendix-constructions", crit_appendix);
    criterion("cli-worker-invariance", crit_cli_determinism);

    std::printf("\n%s (%d failure%s)\n",
                g_failures == 0 ? "acceptance: PASS" : "acceptance: FAIL",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures == 0 ? 0 : 1;
}
