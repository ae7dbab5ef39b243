#include "strusr/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

namespace strusr {

std::vector<JetRequest> PdeProblem::jet_requests() const
{
    std::map<std::size_t, int> orders;
    for (const auto& t : terms) {
        auto& o = orders[t.axis];
        o = std::max(o, t.order);
    }
    std::vector<JetRequest> out;
    for (const auto& [axis, order] : orders) out.push_back({axis, order});
    return out;
}

void PdeProblem::validate() const
{
    if (box.size() != dimension()) throw std::invalid_argument(name + ": box does not match dimension");
    for (const auto& iv : box) {
        if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper) || !(iv.lower < iv.upper)) {
            throw std::invalid_argument(name + ": malformed domain interval");
        }
    }
    for (const auto& t : terms) {
        if (t.axis >= dimension() || t.order < 1 || t.order > 2) {
            throw std::invalid_argument(name + ": malformed derivative term");
        }
    }
}

PointSet sample_interior(const PdeProblem& problem, std::size_t n, double margin, Rng& rng)
{
    const std::size_t d = problem.dimension();
    std::vector<double> data(n * d);
    std::vector<std::uniform_real_distribution<double>> dists;
    for (const auto& iv : problem.box) {
        const double pad = margin * (iv.upper - iv.lower);
        dists.emplace_back(iv.lower + pad, iv.upper - pad);
    }
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < d; ++a) data[i * d + a] = dists[a](rng);
    }
    return PointSet(d, std::move(data));
}

PointSet sample_collocation(const PdeProblem& problem, std::size_t n, Rng& rng)
{
    if (n == 0) throw std::invalid_argument("sample_collocation: n must be positive");
    return sample_interior(problem, n, 0.0, rng);
}

ConditionSamples sample_conditions(const PdeProblem& problem, std::size_t n, Rng& rng)
{
    if (problem.conditions.empty()) throw std::invalid_argument(problem.name + ": no deterministic conditions");
    const std::size_t d = problem.dimension();
    std::vector<double> data(n * d);
    std::vector<double> targets(n);
    std::uniform_int_distribution<std::size_t> pick_condition(0, problem.conditions.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_axis(0, problem.spatial_dim - 1);
    std::bernoulli_distribution pick_face(0.5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Condition& cond = problem.conditions[pick_condition(rng)];
        std::span<double> p(data.data() + i * d, d);
        for (std::size_t a = 0; a < d; ++a) {
            const auto& iv = problem.box[a];
            p[a] = iv.lower + unit(rng) * (iv.upper - iv.lower);
        }
        if (cond.kind == ConditionKind::Initial) {
            if (problem.has_time) p[problem.spatial_dim] = problem.box[problem.spatial_dim].lower;
        } else {
            const std::size_t axis = pick_axis(rng);
            p[axis] = pick_face(rng) ? problem.box[axis].upper : problem.box[axis].lower;
        }
        targets[i] = eval(cond.target, p);
    }
    return {PointSet(d, std::move(data)), std::move(targets)};
}

CollocationSet::CollocationSet(const PdeProblem& problem, PointSet points)
    : problem_(&problem), points_(std::move(points)), requests_(problem.jet_requests())
{
    if (points_.empty()) throw std::invalid_argument("collocation set must not be empty");
    if (points_.dimension() != problem.dimension()) throw std::invalid_argument("collocation dimension mismatch");
    const CompiledExpr source(problem.source);
    BatchJets values;
    source.eval_batch(points_, {}, values);
    source_ = std::move(values.value);
}

std::vector<double> CollocationSet::residuals(const JetSource& f) const
{
    thread_local BatchJets jets;
    f.eval_batch(points_, requests_, jets);
    const std::size_t n = points_.size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = -source_[i];
    for (const auto& term : problem_->terms) {
        std::size_t req = 0;
        while (requests_[req].axis != term.axis) ++req;
        const double scale = term.coefficient * (term.order == 2 ? 2.0 : 1.0);
        for (std::size_t i = 0; i < n; ++i) r[i] += scale * jets.coefficient(req, term.order, i);
    }
    if (problem_->reaction_coefficient != 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            double up = 1.0;
            for (int e = 0; e < problem_->reaction_power; ++e) up *= jets.value[i];
            r[i] += problem_->reaction_coefficient * up;
        }
    }
    // an invalid jet can hide behind a zero coefficient, so check the inputs too
    for (std::size_t i = 0; i < n; ++i) {
        bool ok = std::isfinite(jets.value[i]);
        for (std::size_t q = 0; q < requests_.size() && ok; ++q) {
            for (int k = 1; k <= requests_[q].order; ++k) ok = ok && std::isfinite(jets.coefficient(q, k, i));
        }
        if (!ok) r[i] = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

double CollocationSet::loss(const JetSource& f) const
{
    const std::vector<double> r = residuals(f);
    double acc = 0.0;
    for (const double v : r) {
        const double sq = v * v;
        acc += std::isfinite(sq) ? std::min(sq, kPenalty) : kPenalty;
    }
    return acc / static_cast<double>(r.size());
}

double phys_loss(const JetSource& f, const PdeProblem& problem, const PointSet& points)
{
    return CollocationSet(problem, points).loss(f);
}

double phys_loss(const Expr& f, const PdeProblem& problem, const PointSet& points)
{
    return phys_loss(ExprSource(f), problem, points);
}

double condition_loss(const JetSource& f, const ConditionSamples& samples)
{
    if (samples.targets.empty()) throw std::invalid_argument("condition_loss: no samples");
    BatchJets values;
    f.eval_batch(samples.points, {}, values);
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.targets.size(); ++i) {
        const double diff = values.value[i] - samples.targets[i];
        const double sq = diff * diff;
        acc += std::isfinite(sq) ? std::min(sq, kPenalty) : kPenalty;
    }
    return acc / static_cast<double>(samples.targets.size());
}

PointSet mae_grid(const PdeProblem& problem, std::size_t per_axis, std::size_t cap)
{
    const std::size_t d = problem.dimension();
    std::size_t r = std::max<std::size_t>(per_axis, 2);
    auto total = [d](std::size_t res) {
        std::size_t t = 1;
        for (std::size_t a = 0; a < d; ++a) t *= res;
        return t;
    };
    while (r > 2 && total(r) > cap) --r;
    const std::size_t n = total(r);
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t rest = i;
        for (std::size_t a = 0; a < d; ++a) {
            const std::size_t idx = rest % r;
            rest /= r;
            const auto& iv = problem.box[a];
            data[i * d + a] = iv.lower + (iv.upper - iv.lower) * static_cast<double>(idx) / static_cast<double>(r - 1);
        }
    }
    return PointSet(d, std::move(data));
}

double mae(const JetSource& f, const PdeProblem& problem, std::size_t per_axis)
{
    if (!problem.ground_truth) throw std::invalid_argument(problem.name + " has no ground truth");
    const PointSet grid = mae_grid(problem, per_axis);
    BatchJets cand;
    BatchJets truth;
    f.eval_batch(grid, {}, cand);
    CompiledExpr(*problem.ground_truth).eval_batch(grid, {}, truth);
    double acc = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(cand.value[i])) return std::numeric_limits<double>::infinity();
        acc += std::abs(cand.value[i] - truth.value[i]);
    }
    return acc / static_cast<double>(grid.size());
}

double mae(const Expr& f, const PdeProblem& problem, std::size_t per_axis)
{
    return mae(ExprSource(f), problem, per_axis);
}

SelfCheck self_check(const PdeProblem& problem, std::size_t n, Rng& rng, double tolerance)
{
    SelfCheck out;
    if (!problem.ground_truth) return out;
    const CollocationSet set(problem, sample_collocation(problem, n, rng));
    const std::vector<double> r = set.residuals(ExprSource(*problem.ground_truth));
    for (const double v : r) {
        out.max_abs_residual = std::isfinite(v) ? std::max(out.max_abs_residual, std::abs(v))
                                                : std::numeric_limits<double>::infinity();
    }
    out.passed = out.max_abs_residual < tolerance;
    return out;
}

PdeProblem finalize_problem(PdeProblem p)
{
    p.validate();
    Rng rng(0x5eedc0de);
    const SelfCheck check = self_check(p, 100, rng);
    p.truth_verified = p.ground_truth.has_value() && check.passed;
    p.self_check_residual = check.max_abs_residual;
    return p;
}

}  // namespace strusr
