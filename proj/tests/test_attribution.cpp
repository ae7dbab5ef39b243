#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "strusr/attribution.hpp"
#include "strusr/expr_text.hpp"

using namespace strusr;

namespace {

SensitivityReport report_from(const std::vector<double>& totals)
{
    SensitivityReport r;
    for (const double t : totals) {
        Sensitivity s;
        s.total = t;
        r.entries.push_back(s);
    }
    standardize(r);
    return r;
}

}  // namespace

TEST_CASE("masking the constant 1 changes nothing")
{
    const auto& adv = find_problem("Advection");
    Rng rng(1);
    const TaylorPrior prior =
        extract_prior(ExprSource(*adv.ground_truth), select_anchors(adv, 8, rng), 5, PriorSource::AnalyticOracle);
    const PointSet pts = sample_collocation(adv, 64, rng);
    const SensitivityReport r = sensitivities(Expr(), prior, adv, pts, 0.5);
    REQUIRE(r.size() == 1);
    CHECK(r.entries[0].structural == 0.0);
    CHECK(r.entries[0].residual == 0.0);
}

TEST_CASE("ground truth: residual deltas are non-negative")
{
    const auto& heat = find_problem("Heat2D");
    Rng rng(2);
    const TaylorPrior prior =
        extract_prior(ExprSource(*heat.ground_truth), select_anchors(heat, 8, rng), 5, PriorSource::AnalyticOracle);
    const PointSet pts = sample_collocation(heat, 128, rng);
    const SensitivityReport r = sensitivities(*heat.ground_truth, prior, heat, pts, 0.5);
    CHECK(r.size() == heat.ground_truth->size());
    for (const auto& e : r.entries) CHECK(e.residual >= 0.0);
}

TEST_CASE("exhaustive masking oracle on sin(x0 - t)")
{
    const auto& adv = find_problem("Advection");
    Rng rng(3);
    const TaylorPrior prior =
        extract_prior(ExprSource(*adv.ground_truth), select_anchors(adv, 8, rng), 5, PriorSource::AnalyticOracle);
    const PointSet pts = sample_collocation(adv, 128, rng);
    const Expr f = *adv.ground_truth;
    const SensitivityReport r = sensitivities(f, prior, adv, pts, 0.5);
    REQUIRE(r.size() == 4);

    // recompute every masked variant by hand
    const std::vector<std::string> masked{"1", "sin(1)", "sin(1 - t)", "sin(x0 - 1)"};
    const double base_t = taylor_loss(f, prior);
    const double base_r = phys_loss(f, adv, pts);
    std::vector<double> oracle;
    for (std::size_t j = 0; j < 4; ++j) {
        const Expr g = parse_expr(masked[j], adv.naming());
        CHECK(mask_subtree(f, r.entries[j].handle) == g);
        const double ds = taylor_loss(g, prior) - base_t;
        const double dr = phys_loss(g, adv, pts) - base_r;
        CHECK(std::abs(r.entries[j].structural - ds) <= 1e-12 * std::max(1.0, std::abs(ds)));
        CHECK(std::abs(r.entries[j].residual - dr) <= 1e-12 * std::max(1.0, std::abs(dr)));
        oracle.push_back(0.5 * dr + 0.5 * ds);
    }
    for (std::size_t j = 0; j < 4; ++j) {
        for (std::size_t k = 0; k < 4; ++k) {
            CHECK((r.entries[j].total < r.entries[k].total) == (oracle[j] < oracle[k]));
        }
    }
}

TEST_CASE("beta endpoints")
{
    const auto& pr = find_problem("Poisson2D");
    Rng rng(4);
    const TaylorPrior prior =
        extract_prior(ExprSource(*pr.ground_truth), select_anchors(pr, 8, rng), 5, PriorSource::AnalyticOracle);
    const PointSet pts = sample_collocation(pr, 64, rng);
    const auto lib = SymbolLibrary::standard(2);
    for (int trial = 0; trial < 20; ++trial) {
        const Expr f = random_expr(lib, 5, rng);
        const SensitivityReport r1 = sensitivities(f, prior, pr, pts, 1.0);
        const SensitivityReport r0 = sensitivities(f, prior, pr, pts, 0.0);
        const SensitivityReport rh = sensitivities(f, prior, pr, pts, 0.3);
        for (std::size_t j = 0; j < r1.size(); ++j) {
            CHECK(r1.entries[j].total == r1.entries[j].residual);
            CHECK(r0.entries[j].total == r0.entries[j].structural);
            CHECK(rh.entries[j].total == 0.3 * rh.entries[j].residual + 0.7 * rh.entries[j].structural);
        }
    }
    CHECK_THROWS_AS(sensitivities(Expr(), prior, pr, pts, 1.5), std::invalid_argument);
}

TEST_CASE("sampling distribution examples")
{
    const auto uniform = sampling_distribution(report_from({2.0, 2.0, 2.0}), 1.0);
    for (const double p : uniform) CHECK(p == doctest::Approx(1.0 / 3.0));

    const auto two = sampling_distribution(report_from({0.0, 10.0}), 1.0);
    CHECK(two[0] > two[1]);
    CHECK(two[1] > 0.0);

    const auto three = sampling_distribution(report_from({-1.0, 0.0, 1.0}), 1.0);
    CHECK(std::abs(three[0] - 0.6652) < 5e-5);
    CHECK(std::abs(three[1] - 0.2447) < 5e-5);
    CHECK(std::abs(three[2] - 0.0900) < 5e-5);

    CHECK_THROWS(sampling_distribution(report_from({1.0}), 0.0));
    CHECK_THROWS(sampling_distribution(SensitivityReport{}, 1.0));
}

TEST_CASE("sampling distribution properties on random reports")
{
    Rng rng(5);
    std::uniform_int_distribution<int> len(1, 30);
    std::uniform_real_distribution<double> mag(-8.0, 8.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> totals(static_cast<std::size_t>(len(rng)));
        const double scale = std::pow(10.0, mag(rng));
        for (auto& t : totals) t = scale * unit(rng);
        const auto p = sampling_distribution(report_from(totals), 1.0);
        CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
        for (std::size_t j = 0; j < p.size(); ++j) {
            CHECK(p[j] > 0.0);
            for (std::size_t k = 0; k < p.size(); ++k) {
                if (totals[j] < totals[k]) CHECK(p[j] > p[k]);
            }
        }
        std::vector<std::size_t> perm(totals.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<double> permuted;
        for (const auto i : perm) permuted.push_back(totals[i]);
        const auto q = sampling_distribution(report_from(permuted), 1.0);
        for (std::size_t j = 0; j < q.size(); ++j) CHECK(std::abs(q[j] - p[perm[j]]) < 1e-15);
    }
}

TEST_CASE("sample_index follows the distribution")
{
    Rng rng(6);
    const std::vector<double> p{0.5, 0.3, 0.2};
    std::vector<int> counts(3, 0);
    for (int i = 0; i < 30000; ++i) ++counts[sample_index(p, rng)];
    for (std::size_t j = 0; j < 3; ++j) {
        const double sd = std::sqrt(30000 * p[j] * (1 - p[j]));
        CHECK(std::abs(counts[j] - 30000 * p[j]) < 5 * sd);
    }
}
