#include "strusr/attribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace strusr {

void standardize(SensitivityReport& report)
{
    const std::size_t n = report.entries.size();
    report.shift = 0.0;
    report.scale = 0.0;
    if (n == 0) return;
    double mean = 0.0;
    for (const auto& e : report.entries) mean += e.total;
    mean /= static_cast<double>(n);
    report.shift = mean;
    if (n < 2 || !std::isfinite(mean)) return;
    double ss = 0.0;
    for (const auto& e : report.entries) ss += (e.total - mean) * (e.total - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (std::isfinite(sd) && sd >= 1e-12) report.scale = sd;
}

SensitivityReport sensitivities(const Expr& f, const TaylorPrior* prior, const CollocationSet& points, double beta)
{
    if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("sensitivities: beta must be in [0, 1]");
    SensitivityReport report;
    report.beta = beta;
    report.base_phys_loss = points.loss(ExprSource(f));
    report.base_taylor_loss = prior ? taylor_loss(f, *prior) : 0.0;
    for (auto& h : subtrees(f)) {
        const Expr masked = mask_subtree(f, h);
        Sensitivity s;
        s.handle = std::move(h);
        if (masked == f) {
            report.entries.push_back(std::move(s));
            continue;
        }
        const ExprSource src(masked);
        s.residual = points.loss(src) - report.base_phys_loss;
        s.structural = prior ? taylor_loss(src, *prior) - report.base_taylor_loss : 0.0;
        s.total = beta * s.residual + (1.0 - beta) * s.structural;
        report.entries.push_back(std::move(s));
    }
    standardize(report);
    return report;
}

SensitivityReport sensitivities(const Expr& f, const TaylorPrior& prior, const PdeProblem& problem,
                                const PointSet& points, double beta)
{
    return sensitivities(f, &prior, CollocationSet(problem, points), beta);
}

std::vector<double> sampling_distribution(const SensitivityReport& report, double temperature)
{
    if (!(temperature > 0.0)) throw std::invalid_argument("sampling_distribution: temperature must be positive");
    const std::size_t n = report.entries.size();
    if (n == 0) throw std::invalid_argument("sampling_distribution: empty report");
    std::vector<double> p(n, 1.0 / static_cast<double>(n));
    if (report.scale == 0.0) return p;
    std::vector<double> logits(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double z = (report.entries[j].total - report.shift) / report.scale;
        logits[j] = -z / temperature;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        p[j] = std::exp(logits[j] - top);
        sum += p[j];
    }
    // keep full support even when a logit underflows
    const double floor = std::numeric_limits<double>::min();
    for (auto& v : p) v = std::max(v / sum, floor);
    return p;
}

std::size_t sample_index(std::span<const double> probabilities, Rng& rng)
{
    if (probabilities.empty()) throw std::invalid_argument("sample_index: empty distribution");
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (std::size_t j = 0; j < probabilities.size(); ++j) {
        acc += probabilities[j];
        if (u < acc) return j;
    }
    return probabilities.size() - 1;
}

}  // namespace strusr
