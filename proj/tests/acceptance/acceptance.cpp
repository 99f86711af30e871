// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "psynth/bundled.hpp"
#include "psynth/calibrate.hpp"
#include "psynth/error.hpp"
#include "psynth/evaluate.hpp"
#include "psynth/ingest.hpp"
#include "psynth/llmclient.hpp"
#include "psynth/persona.hpp"
#include "psynth/pipeline.hpp"
#include "psynth/respond.hpp"
#include "support.hpp"

using namespace psynth;

namespace {

struct Check {
    bool ok = true;
    std::ostringstream notes;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, const char* title, const std::function<void(Check&)>& body) {
    Check c;
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.notes << " [exception: " << e.what() << "]";
    }
    std::printf("%s %d %s:%s\n", c.ok ? "PASS" : "FAIL", id, title, c.notes.str().c_str());
    std::fflush(stdout);
    if (!c.ok) {
        ++failures;
    }
}

BackendConfig det(std::uint64_t seed) {
    BackendConfig cfg;
    cfg.kind = BackendKind::deterministic;
    cfg.seed = seed;
    return cfg;
}

const BenchmarkData& fixture() {
    static const BenchmarkData data = ingest_benchmark(bundled::benchmark_fixture_csv(), default_schema());
    return data;
}

const BenchmarkData& prior() {
    static const BenchmarkData data = ingest_benchmark(bundled::naive_prior_csv(), default_schema());
    return data;
}

RunResult run(Method m, std::uint64_t seed, Exec exec = Exec::parallel, std::size_t n = 10000) {
    PipelineOptions opts;
    opts.method = m;
    opts.backend = det(seed);
    opts.backend.method = m;
    opts.n = n;
    opts.calibration.exec = exec;
    return run_method({&default_schema(), &fixture(), &prior().marginals}, opts);
}

MetricReport score(const RunResult& r, const std::string& label) {
    const auto& schema = default_schema();
    std::vector<std::pair<GroupedDistribution, std::vector<double>>> synth;
    for (const auto& q : schema.questions()) {
        const std::size_t g = schema.attribute_index(q.group_attribute);
        synth.emplace_back(synthetic_distribution(r, schema, q), synthetic_group_weights(r, schema, g));
    }
    return evaluate_against(label, synth, fixture(), schema);
}

bool rows_valid(const GroupedDistribution& g) {
    for (const auto& row : g.groups) {
        double total = 0.0;
        for (double v : row.shares) {
            if (!(v >= 0.0)) {
                return false;
            }
            total += v;
        }
        if (std::abs(total - 1.0) > 1e-9) {
            return false;
        }
    }
    return !g.groups.empty();
}

std::vector<std::vector<double>> to_nested(const MarginalTargets& t) {
    std::vector<std::vector<double>> out;
    for (std::size_t a = 0; a < t.attribute_count(); ++a) {
        out.push_back(t.shares(a));
    }
    return out;
}

// ---------------------------------------------------------------------------

void criterion_1(Check& c) {
    const auto start = std::chrono::steady_clock::now();
    const auto r = run(Method::guided_persona, 7, Exec::serial);
    const auto m = score(r, "guided-persona").pooled;
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.notes << " MAE=" << m.mae << " RMSE=" << m.rmse << " JS=" << m.js << " gap=" << m.entropy_gap
            << " V=" << m.cramers_v << " time=" << seconds << "s";
    c.require(m.mae <= 0.1, "MAE <= 0.1");
    c.require(m.rmse <= 0.3, "RMSE <= 0.3");
    c.require(m.js <= 0.01, "JS <= 0.01");
    c.require(m.entropy_gap <= 0.005, "gap <= 0.005");
    c.require(m.cramers_v >= 0.99, "V >= 0.99");
    c.require(seconds < 10.0, "runtime < 10 s");
    c.require(r.density_report && r.density_report->converged, "density raking converged");
}

void criterion_2(Check& c) {
    const auto table = enumerate_personas(default_schema());
    c.notes << " personas=" << table.size();
    c.require(table.size() == 15840 && persona_space_size(default_schema()) == 15840, "15840 personas");

    std::mt19937_64 rng(2);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto sizes = trial < 10 ? default_schema().radices() : testsupport::random_sizes(rng, 5, 3000);
        ConditionalTable cond(sizes);
        std::vector<std::size_t> prefix;
        std::function<void(std::size_t)> fill = [&](std::size_t k) {
            if (k == sizes.size()) {
                return;
            }
            const auto probs = testsupport::random_simplex(rng, sizes[k], 0.2);
            cond.set(k, prefix, probs);
            for (std::size_t cat = 0; cat < sizes[k]; ++cat) {
                if (probs[cat] > 0.0) {
                    prefix.push_back(cat);
                    fill(k + 1);
                    prefix.pop_back();
                }
            }
        };
        fill(0);
        const auto dens = density_from_conditionals(enumerate_personas(testsupport::schema_with_sizes(sizes)), cond);
        const double total = std::accumulate(dens.densities().begin(), dens.densities().end(), 0.0);
        worst = std::max(worst, std::abs(total - 1.0));
    }
    c.notes << " max|sum-1|=" << worst;
    c.require(worst <= 1e-9, "densities sum to 1 within 1e-9");
}

void criterion_3(Check& c) {
    const std::vector<std::size_t> sizes2 = {2, 2};
    MarginalTargets t2(2);
    t2.set(0, {0.6, 0.4});
    t2.set(1, {0.7, 0.3});
    const auto [fitted, rep] = fit_densities_to_marginals(enumerate_personas(testsupport::schema_with_sizes(sizes2)), t2);
    const double expect[] = {0.42, 0.18, 0.28, 0.12};
    double err2 = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        err2 = std::max(err2, std::abs(fitted.density(i) - expect[i]));
    }
    c.notes << " 2x2 err=" << err2;
    c.require(rep.converged && err2 <= 1e-6, "2x2 densities within 1e-6");

    std::mt19937_64 rng(3);
    double worst_marginal = 0.0;
    double worst_oracle = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto sizes = testsupport::random_sizes(rng, 5, 1000);
        auto seed = enumerate_personas(testsupport::schema_with_sizes(sizes));
        std::uniform_real_distribution<double> u(0.05, 1.0);
        double total = 0.0;
        for (double& d : seed.densities()) {
            d = u(rng);
            total += d;
        }
        for (double& d : seed.densities()) {
            d /= total;
        }
        MarginalTargets t(sizes.size());
        const auto shares = testsupport::random_marginals(rng, sizes);
        for (std::size_t a = 0; a < sizes.size(); ++a) {
            t.set(a, shares[a]);
        }
        const auto [out, r] = fit_densities_to_marginals(seed, t);
        const std::vector<double> got(out.densities().begin(), out.densities().end());
        for (std::size_t a = 0; a < sizes.size(); ++a) {
            const auto m = testsupport::brute_marginal(got, sizes, a);
            for (std::size_t k = 0; k < m.size(); ++k) {
                worst_marginal = std::max(worst_marginal, std::abs(m[k] - shares[a][k]));
            }
        }
        const auto oracle = testsupport::brute_ipf({seed.densities().begin(), seed.densities().end()}, sizes,
                                                   to_nested(t), 2000);
        for (std::size_t i = 0; i < got.size(); ++i) {
            worst_oracle = std::max(worst_oracle, std::abs(got[i] - oracle[i]));
        }
    }
    c.notes << " random max marginal dev=" << worst_marginal << " max |fit-oracle|=" << worst_oracle;
    c.require(worst_marginal <= 1e-6, "random marginals within 1e-6");
    c.require(worst_oracle <= 1e-6, "agrees with brute-force fixed point");
}

void criterion_4(Check& c) {
    const double h12 = entropy(std::vector<double>(12, 1.0 / 12));
    c.require(std::abs(h12 - 3.5850) <= 1e-4, "entropy(uniform-12)");
    const std::vector<double> a = {1.0, 0.0}, b = {0.0, 1.0};
    c.require(js_distance(a, b) == 1.0, "js((1,0),(0,1)) == 1");
    const std::vector<double> p = {0.5, 0.5}, q = {0.25, 0.75};
    // 50-digit evaluation of the definition.
    const double js_ref = 0.22089576884901741499;
    const double js = js_distance(p, q);
    c.require(std::abs(js - js_ref) <= 1e-9, "js((.5,.5),(.25,.75))");

    GroupedDistribution s, r;
    s.question = r.question = "q";
    s.groups = {{0, {0.1, 0.2, 0.7}}};
    r.groups = {{0, {0.2, 0.1, 0.7}}};
    const auto e = mae_rmse(s, r);
    c.require(std::abs(e.mae - 6.667) <= 1e-3 && std::abs(e.rmse - 8.165) <= 1e-3, "MAE/RMSE hand example");

    std::mt19937_64 rng(4);
    bool v_ok = true;
    bool order_ok = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t groups = 1 + trial % 9;
        const std::size_t k = 2 + trial % 5;
        GroupedDistribution x, y;
        x.question = y.question = "q";
        for (std::size_t g = 0; g < groups; ++g) {
            x.groups.push_back({g, testsupport::random_simplex(rng, k, 0.1)});
            y.groups.push_back({g, testsupport::random_simplex(rng, k, 0.1)});
        }
        const auto w = testsupport::random_simplex(rng, groups);
        v_ok = v_ok && cramers_v(x, x, w) == 1.0;
        const auto err = mae_rmse(x, y);
        order_ok = order_ok && err.mae <= err.rmse + 1e-12;
    }
    c.require(v_ok, "cramers_v(identical) == 1 exactly");
    c.require(order_ok, "MAE <= RMSE on 1000 random inputs");
    c.notes << " H12=" << h12 << " js=" << js << " MAE=" << e.mae << " RMSE=" << e.rmse;
}

void criterion_5(Check& c) {
    const auto& schema = default_schema();
    const auto [table, rep] = fit_densities_to_marginals(enumerate_personas(schema), fixture().marginals);
    const auto ps = generate_profiles(table, schema, schema.question("walking"), det(7));
    const std::vector<ProfileSet> profiles = {ps};

    const std::size_t n = 10000;
    const auto pop = sample_individuals(n, &table, profiles, det(7));
    double worst_z = 0.0;
    for (std::size_t a = 0; a < schema.attribute_count(); ++a) {
        std::vector<double> counts(schema.attribute(a).size(), 0.0);
        for (const auto& rec : pop.records) {
            counts[rec.categories[a]] += 1.0;
        }
        for (std::size_t k = 0; k < counts.size(); ++k) {
            const double p = fixture().marginals.shares(a)[k];
            const double sd = std::sqrt(p * (1 - p) / n);
            const double dev = std::abs(counts[k] / n - p);
            if (sd > 0) {
                worst_z = std::max(worst_z, dev / sd);
            } else if (dev > 0) {
                worst_z = INFINITY;
            }
        }
    }
    c.notes << " n=10000 worst |dev|/sd=" << worst_z;
    c.require(worst_z <= 3.0, "marginals within 3 sd");

    const auto big = sample_individuals(100000, &table, profiles, det(7));
    const auto empirical = aggregate_individuals(big, schema, schema.question("walking"), "Age Group");
    const auto expected = aggregate_personas(table, ps, schema, "Age Group");
    double worst = 0.0;
    for (const auto& row : expected.groups) {
        const auto* got = empirical.find(row.category);
        if (got == nullptr) {
            worst = INFINITY;
            continue;
        }
        for (std::size_t r = 0; r < row.shares.size(); ++r) {
            worst = std::max(worst, std::abs(got->shares[r] - row.shares[r]));
        }
    }
    // Binomial sd of the noisiest cell, for reading a failure against sampling noise.
    double noisiest = 0.0;
    const std::size_t g = schema.attribute_index("Age Group");
    for (const auto& row : expected.groups) {
        const double ng = 100000.0 * fixture().marginals.shares(g)[row.category];
        for (double p : row.shares) {
            noisiest = std::max(noisiest, std::sqrt(p * (1 - p) / ng));
        }
    }
    c.notes << " n=100000 max cell dev=" << worst << " (largest cell sd=" << noisiest << ")";
    c.require(worst < 0.01, "grouped responses within 0.01");
}

void criterion_6(Check& c) {
    std::mt19937_64 rng(6);
    double worst = 0.0;
    double worst_row = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto sizes = testsupport::random_sizes(rng, 4, 200);
        const std::size_t k = 2 + trial % 5;
        const std::size_t group = trial % sizes.size();
        const std::string gname = "attr" + std::to_string(group);
        const auto schema = testsupport::schema_with_sizes(sizes, {testsupport::question("q", k, gname)});
        auto table = enumerate_personas(schema);
        const auto dens = testsupport::random_simplex(rng, table.size(), 0.2);
        std::copy(dens.begin(), dens.end(), table.densities().begin());
        ProfileSet ps("q", k, table.size());
        for (std::size_t i = 0; i < table.size(); ++i) {
            const auto row = testsupport::random_simplex(rng, k, 0.3);
            std::copy(row.begin(), row.end(), ps.row(i).begin());
        }
        const auto got = aggregate_personas(table, ps, schema, gname);
        std::vector<double> sums(sizes[group] * k, 0.0);
        for (std::size_t i = 0; i < table.size(); ++i) {
            const std::size_t g = table.persona(i).categories[group];
            for (std::size_t r = 0; r < k; ++r) {
                sums[g * k + r] += table.density(i) * ps.row(i)[r];
            }
        }
        for (const auto& row : got.groups) {
            double total = 0.0, row_total = 0.0;
            for (std::size_t r = 0; r < k; ++r) {
                total += sums[row.category * k + r];
            }
            for (std::size_t r = 0; r < k; ++r) {
                worst = std::max(worst, std::abs(row.shares[r] - sums[row.category * k + r] / total));
                row_total += row.shares[r];
            }
            worst_row = std::max(worst_row, std::abs(row_total - 1.0));
        }
    }
    c.notes << " max |agg-brute|=" << worst << " max |row-1|=" << worst_row;
    c.require(worst <= 1e-12, "equal to brute force within 1e-12");
    c.require(worst_row <= 1e-9, "rows sum to 1 within 1e-9");
}

void criterion_7(Check& c) {
    std::map<Method, double> mae;
    for (Method m : kAllMethods) {
        const auto r = run(m, 7);
        const auto& schema = default_schema();
        for (const auto& q : schema.questions()) {
            c.require(rows_valid(synthetic_distribution(r, schema, q)), std::string(to_string(m)) + " rows valid");
        }
        const auto rep = score(r, std::string(display_name(m)));
        const auto& p = rep.pooled;
        c.require(std::isfinite(p.mae) && std::isfinite(p.rmse) && std::isfinite(p.js) && std::isfinite(p.cramers_v),
                  std::string(to_string(m)) + " finite metrics");
        mae[m] = p.mae;
        c.notes << " " << to_string(m) << "=" << p.mae;
    }
    c.require(mae[Method::guided] < mae[Method::structured], "guided < structured");
    c.require(mae[Method::guided_persona] < mae[Method::structured_persona], "guided-persona < structured-persona");
}

void criterion_8(Check& c) {
    ::setenv("PERSONA_SYNTH_ACCEPTANCE_KEY", "k", 1);
    testsupport::ScratchDir dir("acceptance_cache");
    LlmSettings s;
    s.api_key_env = "PERSONA_SYNTH_ACCEPTANCE_KEY";
    s.cache_dir = dir.str();
    s.backoff = std::chrono::milliseconds(1);
    const std::string body =
        R"({"Completely Agree": 60, "Rather Agree": 25, "Partly Agree": 10, "Rather Disagree": 4, "Completely Disagree": 1})";

    auto cached = std::make_shared<testsupport::MockTransport>(body);
    LlmClient client(s, cached);
    client.complete("same prompt");
    const int before = cached->calls();
    const auto again = client.complete("same prompt");
    c.require(before == 1 && cached->calls() == 1 && again.from_cache, "cache hit makes zero transport calls");

    auto flaky = std::make_shared<testsupport::MockTransport>(body);
    flaky->push({500, "oops"});
    flaky->push({503, "busy"});
    auto s2 = s;
    s2.cache_dir.clear();
    LlmClient retry_client(s2, flaky);
    const auto ex = retry_client.complete("retry prompt");
    c.require(ex.retries == 2 && flaky->calls() == 3, "retry then succeed");

    auto silent = std::make_shared<testsupport::MockTransport>(body);
    auto s3 = s;
    s3.api_key_env = "PERSONA_SYNTH_ACCEPTANCE_UNSET";
    ::unsetenv(s3.api_key_env.c_str());
    LlmClient nocred(s3, silent);
    bool failed_fast = false;
    try {
        nocred.complete("same prompt");
    } catch (const ConfigError&) {
        failed_fast = silent->calls() == 0;
    }
    c.require(failed_fast, "missing credential fails before the transport");

    const auto& q = default_schema().question("walking");
    const auto parsed = parse_distribution(body, q);
    c.require(std::abs(parsed[0] - 0.60) < 1e-12 && std::abs(parsed[4] - 0.01) < 1e-12, "parse 60/25/10/4/1");
    const auto band = parse_distribution(
        R"({"Completely Agree": 60, "Rather Agree": 25, "Partly Agree": 10, "Rather Disagree": 4, "Completely Disagree": 0.5})", q);
    c.require(std::abs(std::accumulate(band.begin(), band.end(), 0.0) - 1.0) < 1e-12, "99.5% renormalized");
    bool rejected = false;
    try {
        parse_distribution(R"({"Completely Agree": 60, "Rather Agree": 25, "Partly Agree": 10, "Rather Disagree": 4})", q);
    } catch (const ParseError&) {
        rejected = true;
    }
    c.require(rejected, "missing option rejected");
    rejected = false;
    try {
        parse_distribution(
            R"({"Completely Agree": 60, "Rather Agree": 25, "Partly Agree": 10, "Rather Disagree": 4, "Completely Disagree": 4})", q);
    } catch (const ParseError&) {
        rejected = true;
    }
    c.require(rejected, "103% rejected");
}

} // namespace

int main() {
    report(1, "guided-persona reproduction on the fixture", criterion_1);
    report(2, "persona-space cardinality and density normalization", criterion_2);
    report(3, "IPF correctness", criterion_3);
    report(4, "metric oracles", criterion_4);
    report(5, "sampling fidelity", criterion_5);
    report(6, "aggregation oracle", criterion_6);
    report(7, "tier properties with the deterministic backend", criterion_7);
    report(8, "LLM client contracts with a mock transport", criterion_8);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
