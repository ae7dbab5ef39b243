#include "strusr/gp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "strusr/expr_text.hpp"
#include "strusr/nelder_mead.hpp"
#include "strusr/simplify.hpp"

namespace strusr {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Runs body(i) for i in [0, n) on up to `threads` workers. Work is handed
// out dynamically; callers write results by index so the schedule never
// affects the outcome.
template <typename F>
void parallel_for(std::size_t n, std::size_t threads, F&& body)
{
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mutex;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            try {
                for (std::size_t i = next++; i < n; i = next++) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next = n;
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

std::string json_number(double v)
{
    if (!std::isfinite(v)) return "null";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool better(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib)
{
    const double fa = a.fitness(), fb = b.fitness();
    if (fa != fb) return fa < fb;
    const std::size_t ca = complexity(a.expr), cb = complexity(b.expr);
    if (ca != cb) return ca < cb;
    return ia < ib;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

void GpConfig::validate() const
{
    auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!prob(p_cross) || !prob(p_mut)) throw std::invalid_argument("GpConfig: probabilities must be in [0, 1]");
    if (!prob(beta)) throw std::invalid_argument("GpConfig: beta must be in [0, 1]");
    if (!(lambda >= 0.0) || !(physics_weight >= 0.0) || !(condition_weight >= 0.0)) {
        throw std::invalid_argument("GpConfig: loss weights must be non-negative");
    }
    if (!(temperature > 0.0)) throw std::invalid_argument("GpConfig: temperature must be positive");
    if (taylor_order < 2 || taylor_order > kMaxJetOrder) throw std::invalid_argument("GpConfig: K must be in [2, 8]");
    if (population == 0 || tournament == 0 || anchors == 0 || collocation == 0 || max_generations == 0 ||
        attribution_points == 0 || max_depth == 0 || max_size == 0 || threads == 0) {
        throw std::invalid_argument("GpConfig: sizes must be positive");
    }
    if (elitism > population) throw std::invalid_argument("GpConfig: elitism exceeds the population");
    if (init_max_depth < 1 || mutation_depth < 1) throw std::invalid_argument("GpConfig: depths must be positive");
    if (static_cast<std::size_t>(init_max_depth) > max_depth) {
        throw std::invalid_argument("GpConfig: initial depth exceeds max_depth");
    }
    if (condition_weight > 0.0 && condition_points == 0) {
        throw std::invalid_argument("GpConfig: condition_points must be positive");
    }
}

nlohmann::json GpConfig::to_json() const
{
    return {{"population", population},
            {"p_cross", p_cross},
            {"p_mut", p_mut},
            {"lambda", lambda},
            {"beta", beta},
            {"temperature", temperature},
            {"taylor_order", taylor_order},
            {"anchors", anchors},
            {"collocation", collocation},
            {"tournament", tournament},
            {"elitism", elitism},
            {"max_generations", max_generations},
            {"patience", patience},
            {"tune_constants", tune_constants},
            {"tune_budget", tune_budget},
            {"tune_top", tune_top},
            {"max_depth", max_depth},
            {"max_size", max_size},
            {"init_max_depth", init_max_depth},
            {"mutation_depth", mutation_depth},
            {"attribution_points", attribution_points},
            {"physics_weight", physics_weight},
            {"condition_weight", condition_weight},
            {"condition_points", condition_points},
            {"guided", guided},
            {"simplify", simplify},
            {"threads", threads},
            {"fitness_threshold", fitness_threshold},
            {"seed", seed}};
}

void GpConfig::apply_json(const nlohmann::json& j)
{
    const nlohmann::json known = to_json();
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw std::invalid_argument("GpConfig: unknown key '" + key + "'");
    }
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("population", population);
    get("p_cross", p_cross);
    get("p_mut", p_mut);
    get("lambda", lambda);
    get("beta", beta);
    get("temperature", temperature);
    get("taylor_order", taylor_order);
    get("anchors", anchors);
    get("collocation", collocation);
    get("tournament", tournament);
    get("elitism", elitism);
    get("max_generations", max_generations);
    get("patience", patience);
    get("tune_constants", tune_constants);
    get("tune_budget", tune_budget);
    get("tune_top", tune_top);
    get("max_depth", max_depth);
    get("max_size", max_size);
    get("init_max_depth", init_max_depth);
    get("mutation_depth", mutation_depth);
    get("attribution_points", attribution_points);
    get("physics_weight", physics_weight);
    get("condition_weight", condition_weight);
    get("condition_points", condition_points);
    get("guided", guided);
    get("simplify", simplify);
    get("threads", threads);
    get("fitness_threshold", fitness_threshold);
    get("seed", seed);
}

void Individual::set_expr(Expr e)
{
    expr = std::move(e);
    losses.reset();
    report.reset();
    tuned = false;
}

double Individual::fitness() const
{
    if (!losses) throw std::logic_error("Individual has not been evaluated");
    return losses->fitness;
}

FitnessContext::FitnessContext(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg, Rng& rng)
    : FitnessContext(problem, prior, cfg, sample_collocation(problem, cfg.collocation, rng))
{
    if (cfg.condition_weight > 0.0) conditions_ = sample_conditions(problem, cfg.condition_points, rng);
}

FitnessContext::FitnessContext(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg,
                               PointSet collocation)
    : problem_(&problem),
      prior_(prior),
      lambda_(cfg.lambda),
      beta_(cfg.beta),
      physics_weight_(cfg.physics_weight),
      condition_weight_(cfg.condition_weight),
      collocation_(problem, collocation),
      attribution_(problem, collocation.head(cfg.attribution_points))
{
    if (prior && prior->dimension() != problem.dimension()) {
        throw std::invalid_argument("prior dimension does not match the problem");
    }
}

Losses FitnessContext::evaluate(const Expr& f) const
{
    const ExprSource src(f);
    Losses l;
    l.phys = collocation_.loss(src);
    if (prior_) l.taylor = taylor_loss(src, *prior_);
    if (conditions_) l.condition = condition_loss(src, *conditions_);
    l.fitness = physics_weight_ * l.phys + condition_weight_ * l.condition;
    if (prior_) l.fitness += lambda_ * l.taylor;
    if (!std::isfinite(l.fitness)) l.fitness = kPenalty;
    return l;
}

SensitivityReport FitnessContext::attribute(const Expr& f) const
{
    return sensitivities(f, prior_, attribution_, beta_);
}

double fitness(const Individual& ind, const TaylorPrior* prior, const PdeProblem& problem, const PointSet& points,
               double lambda)
{
    const ExprSource src(ind.expr);
    double f = phys_loss(src, problem, points);
    if (prior && lambda != 0.0) f += lambda * taylor_loss(src, *prior);
    return f;
}

std::size_t tournament_select(const std::vector<Individual>& population, std::size_t k, Rng& rng)
{
    const std::size_t n = population.size();
    if (n == 0) throw std::invalid_argument("tournament_select: empty population");
    if (k == 0) throw std::invalid_argument("tournament_select: k must be positive");
    std::size_t best = n;
    auto consider = [&](std::size_t c) {
        if (best == n || better(population[c], c, population[best], best)) best = c;
    };
    if (k >= n) {
        for (std::size_t c = 0; c < n; ++c) consider(c);
        return best;
    }
    // k distinct entrants, Floyd's sampling
    std::vector<std::size_t> drawn;
    drawn.reserve(k);
    for (std::size_t j = n - k; j < n; ++j) {
        const std::size_t c = std::uniform_int_distribution<std::size_t>(0, j)(rng);
        const bool dup = std::find(drawn.begin(), drawn.end(), c) != drawn.end();
        drawn.push_back(dup ? j : c);
        consider(drawn.back());
    }
    return best;
}

SubtreeHandle sample_site(const Expr& e, const SensitivityReport* report, double temperature, Rng& rng)
{
    if (report) {
        const std::vector<double> p = sampling_distribution(*report, temperature);
        return report->entries[sample_index(p, rng)].handle;
    }
    const auto hs = subtrees(e);
    return hs[std::uniform_int_distribution<std::size_t>(0, hs.size() - 1)(rng)];
}

std::pair<Expr, Expr> crossover(const Individual& a, const Individual& b, double temperature,
                                const TreeLimits& limits, Rng& rng)
{
    for (int attempt = 0; attempt < 6; ++attempt) {
        const SubtreeHandle sa = sample_site(a.expr, a.report.get(), temperature, rng);
        const SubtreeHandle sb = sample_site(b.expr, b.report.get(), temperature, rng);
        if (auto r = swap_subtrees(a.expr, sa, b.expr, sb, limits)) return *r;
    }
    return {a.expr, b.expr};
}

Expr mutate(const Individual& ind, const SymbolLibrary& lib, double temperature, const TreeLimits& limits,
            int depth, Rng& rng)
{
    for (int attempt = 0; attempt < 6; ++attempt) {
        const SubtreeHandle s = sample_site(ind.expr, ind.report.get(), temperature, rng);
        Expr child = replace_subtree(ind.expr, s, random_expr(lib, depth, rng));
        if (limits.admits(child)) return child;
    }
    return ind.expr;
}

Expr tune_constants(const Expr& f, const std::function<double(const Expr&)>& objective, std::size_t budget)
{
    const std::vector<double> c0 = constants(f);
    if (c0.empty() || budget == 0) return f;
    std::vector<double> steps(c0.size());
    for (std::size_t i = 0; i < c0.size(); ++i) steps[i] = std::max(0.1 * std::abs(c0[i]), 0.1);
    const auto result = nelder_mead([&](std::span<const double> c) { return objective(with_constants(f, c)); }, c0,
                                    steps, budget);
    return result.x == c0 ? f : with_constants(f, result.x);
}

Expr tune_constants(const Expr& f, const PdeProblem& problem, const TaylorPrior* prior, const PointSet& points,
                    double lambda, std::size_t budget)
{
    const CollocationSet set(problem, points);
    return tune_constants(
        f,
        [&](const Expr& e) {
            const ExprSource src(e);
            double v = set.loss(src);
            if (prior && lambda != 0.0) v += lambda * taylor_loss(src, *prior);
            return v;
        },
        budget);
}

std::string to_jsonl(const GenerationRecord& r)
{
    std::string s = "{\"gen\":" + std::to_string(r.generation);
    s += ",\"best_fitness\":" + json_number(r.best_fitness);
    s += ",\"mean_fitness\":" + json_number(r.mean_fitness);
    s += ",\"best_taylor_loss\":" + json_number(r.best_taylor_loss);
    s += ",\"best_phys_loss\":" + json_number(r.best_phys_loss);
    s += ",\"best_complexity\":" + std::to_string(r.best_complexity);
    s += ",\"best_expr_text\":" + nlohmann::json(r.best_expr).dump() + "}";
    return s;
}

namespace {

struct Breeding {
    Rng rng;
    std::size_t ia = 0;
    std::size_t ib = 0;
    bool cross = false;
    bool mut_a = false;
    bool mut_b = false;
    Individual oa;
    Individual ob;
};

class Engine {
public:
    Engine(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg, const EvolveOptions& opt)
        : problem_(problem),
          cfg_(cfg),
          opt_(opt),
          lib_(SymbolLibrary::standard(problem.dimension())),
          context_(make_context(problem, prior, cfg))
    {
    }

    EvolveResult run()
    {
        std::vector<Individual> pop = initial_population();
        EvolveResult result;
        double best_so_far = std::numeric_limits<double>::infinity();
        std::size_t stagnant = 0;
        for (std::size_t gen = 0;; ++gen) {
            evaluate(pop);
            if (cfg_.tune_constants) tune(pop);
            const std::vector<std::size_t> order = ranking(pop);
            const Individual& best = pop[order.front()];

            GenerationRecord rec;
            rec.generation = gen;
            rec.best_fitness = best.fitness();
            double sum = 0.0;
            for (const auto& ind : pop) sum += ind.fitness();
            rec.mean_fitness = sum / static_cast<double>(pop.size());
            rec.best_phys_loss = best.losses->phys;
            rec.best_taylor_loss = monitored_taylor(best);
            rec.best_complexity = complexity(best.expr);
            rec.best_expr = to_string(best.expr, problem_.naming());
            result.log.push_back(rec);
            if (opt_.on_generation) opt_.on_generation(rec);

            if (rec.best_fitness < best_so_far) {
                best_so_far = rec.best_fitness;
                stagnant = 0;
            } else {
                ++stagnant;
            }
            if (rec.best_fitness < cfg_.fitness_threshold) {
                result.termination = "threshold";
            } else if (stagnant >= cfg_.patience && cfg_.patience > 0) {
                result.termination = "stagnation";
            } else if (gen + 1 >= cfg_.max_generations) {
                result.termination = "max-generations";
            }
            if (!result.termination.empty()) {
                result.best = best;
                break;
            }
            pop = breed(pop, order, gen);
        }
        result.evaluations = evaluations_;
        return result;
    }

private:
    static FitnessContext make_context(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg)
    {
        Rng rng(derive_seed(cfg.seed, 2));
        return FitnessContext(problem, prior, cfg, rng);
    }

    std::vector<Individual> initial_population()
    {
        std::vector<Individual> pop;
        if (!opt_.initial.empty()) {
            for (const auto& e : opt_.initial) {
                if (!well_formed(e, problem_.dimension())) {
                    throw std::invalid_argument("initial expression does not fit the problem dimension");
                }
                pop.emplace_back(e, 0);
            }
            return pop;
        }
        Rng rng(derive_seed(cfg_.seed, 1));
        std::uniform_int_distribution<int> depth(std::min(2, cfg_.init_max_depth), cfg_.init_max_depth);
        const TreeLimits limits = cfg_.limits();
        while (pop.size() < cfg_.population) {
            Expr e = random_expr(lib_, depth(rng), rng);
            if (cfg_.simplify) e = simplify(e);
            if (limits.admits(e)) pop.emplace_back(std::move(e), 0);
        }
        return pop;
    }

    void evaluate(std::vector<Individual>& pop)
    {
        std::vector<std::string> keys;
        std::vector<std::size_t> todo;
        std::unordered_map<std::string, std::size_t> pending;
        std::vector<std::size_t> slot(pop.size(), 0);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (pop[i].losses) continue;
            std::string key = to_string(pop[i].expr);
            if (auto it = cache_.find(key); it != cache_.end()) {
                pop[i].losses = it->second;
                continue;
            }
            auto [it, inserted] = pending.emplace(key, todo.size());
            if (inserted) {
                todo.push_back(i);
                keys.push_back(std::move(key));
            }
            slot[i] = it->second + 1;
        }
        std::vector<Losses> out(todo.size());
        parallel_for(todo.size(), cfg_.threads, [&](std::size_t k) { out[k] = context_.evaluate(pop[todo[k]].expr); });
        evaluations_ += todo.size();
        for (std::size_t k = 0; k < todo.size(); ++k) cache_.emplace(keys[k], out[k]);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (slot[i]) pop[i].losses = out[slot[i] - 1];
        }
    }

    void tune(std::vector<Individual>& pop)
    {
        const std::vector<std::size_t> order = ranking(pop);
        std::vector<std::size_t> chosen;
        std::unordered_set<std::string> seen;
        for (const std::size_t i : order) {
            if (chosen.size() >= cfg_.tune_top) break;
            if (pop[i].tuned || constants(pop[i].expr).empty()) continue;
            std::string key = to_string(pop[i].expr);
            if (stale_.count(key) || !seen.insert(key).second) continue;
            chosen.push_back(i);
        }
        std::vector<Expr> tuned(chosen.size());
        std::vector<std::size_t> counts(chosen.size(), 0);
        parallel_for(chosen.size(), cfg_.threads, [&](std::size_t k) {
            tuned[k] = tune_constants(
                pop[chosen[k]].expr,
                [&](const Expr& e) {
                    ++counts[k];
                    return context_.evaluate(e).fitness;
                },
                cfg_.tune_budget);
        });
        for (const auto c : counts) evaluations_ += c;
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            Individual& ind = pop[chosen[k]];
            if (tuned[k] == ind.expr) {
                // converged; further tuning would repeat the same search
                stale_.insert(to_string(ind.expr));
                ind.tuned = true;
                continue;
            }
            ind.set_expr(cfg_.simplify ? simplify(tuned[k]) : tuned[k]);
        }
        evaluate(pop);
    }

    std::vector<std::size_t> ranking(const std::vector<Individual>& pop) const
    {
        std::vector<std::size_t> order(pop.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return better(pop[a], a, pop[b], b); });
        return order;
    }

    double monitored_taylor(const Individual& best) const
    {
        if (context_.prior()) return best.losses->taylor;
        if (opt_.monitor_prior) return taylor_loss(best.expr, *opt_.monitor_prior);
        return 0.0;
    }

    void ensure_reports(std::vector<Individual*>& targets)
    {
        std::vector<Individual*> todo;
        for (auto* ind : targets) {
            if (!ind->report && std::find(todo.begin(), todo.end(), ind) == todo.end()) todo.push_back(ind);
        }
        std::vector<SensitivityReport> out(todo.size());
        parallel_for(todo.size(), cfg_.threads, [&](std::size_t k) { out[k] = context_.attribute(todo[k]->expr); });
        for (std::size_t k = 0; k < todo.size(); ++k) {
            todo[k]->report = std::make_shared<const SensitivityReport>(std::move(out[k]));
        }
    }

    Individual offspring(const Expr& e, const Individual& parent, std::size_t gen) const
    {
        if (e == parent.expr) return parent;
        Expr s = cfg_.simplify ? simplify(e) : e;
        if (s == parent.expr) return parent;
        return Individual(std::move(s), gen);
    }

    std::vector<Individual> breed(std::vector<Individual>& pop, const std::vector<std::size_t>& order,
                                  std::size_t gen)
    {
        std::vector<Individual> next;
        for (std::size_t e = 0; e < cfg_.elitism && e < order.size(); ++e) next.push_back(pop[order[e]]);
        const std::size_t need = cfg_.population > next.size() ? cfg_.population - next.size() : 0;
        std::vector<Breeding> pairs((need + 1) / 2);
        std::bernoulli_distribution cross(cfg_.p_cross), mut(cfg_.p_mut);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            Breeding& b = pairs[p];
            b.rng.seed(derive_seed(cfg_.seed, 1000 + gen, p));
            b.ia = tournament_select(pop, cfg_.tournament, b.rng);
            b.ib = tournament_select(pop, cfg_.tournament, b.rng);
            b.cross = cross(b.rng);
            b.mut_a = mut(b.rng);
            b.mut_b = mut(b.rng);
        }
        if (cfg_.guided) {
            std::vector<Individual*> parents;
            for (const auto& b : pairs) {
                if (!b.cross) continue;
                parents.push_back(&pop[b.ia]);
                parents.push_back(&pop[b.ib]);
            }
            ensure_reports(parents);
        }
        const TreeLimits limits = cfg_.limits();
        for (auto& b : pairs) {
            const Individual& a = pop[b.ia];
            const Individual& c = pop[b.ib];
            if (b.cross) {
                auto [ea, eb] = crossover(a, c, cfg_.temperature, limits, b.rng);
                b.oa = offspring(ea, a, gen + 1);
                b.ob = offspring(eb, c, gen + 1);
            } else {
                b.oa = a;
                b.ob = c;
            }
        }
        if (cfg_.guided) {
            std::vector<Individual*> targets;
            for (auto& b : pairs) {
                if (b.mut_a) targets.push_back(&b.oa);
                if (b.mut_b) targets.push_back(&b.ob);
            }
            ensure_reports(targets);
        }
        for (auto& b : pairs) {
            if (b.mut_a) b.oa = offspring(mutate(b.oa, lib_, cfg_.temperature, limits, cfg_.mutation_depth, b.rng),
                                          b.oa, gen + 1);
            if (b.mut_b) b.ob = offspring(mutate(b.ob, lib_, cfg_.temperature, limits, cfg_.mutation_depth, b.rng),
                                          b.ob, gen + 1);
        }
        for (auto& b : pairs) {
            if (next.size() < cfg_.population) next.push_back(std::move(b.oa));
            if (next.size() < cfg_.population) next.push_back(std::move(b.ob));
        }
        return next;
    }

    const PdeProblem& problem_;
    const GpConfig& cfg_;
    const EvolveOptions& opt_;
    SymbolLibrary lib_;
    FitnessContext context_;
    std::unordered_map<std::string, Losses> cache_;
    std::unordered_set<std::string> stale_;
    std::size_t evaluations_ = 0;
};

}  // namespace

EvolveResult evolve(const PdeProblem& problem, const TaylorPrior* prior, const GpConfig& cfg,
                    const EvolveOptions& options)
{
    cfg.validate();
    Engine engine(problem, prior, cfg, options);
    return engine.run();
}

}  // namespace strusr
