#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "strusr/bench.hpp"
#include "strusr/expr_text.hpp"
#include "strusr/gp.hpp"
#include "strusr/pde.hpp"
#include "strusr/pinn.hpp"
#include "strusr/prior.hpp"

using namespace strusr;

namespace {

// One string option per config field; values are parsed as JSON so that
// numbers, booleans and lists all work ("--population 800", "--pinn-hidden [64,64]").
struct FieldFlags {
    std::map<std::string, std::string> values;

    void add(CLI::App* app, const nlohmann::json& defaults, const std::string& prefix)
    {
        for (const auto& [key, value] : defaults.items()) {
            if (key == "seed") continue;  // --seed drives every stream
            std::string flag = "--" + prefix + key;
            for (auto& c : flag) {
                if (c == '_') c = '-';
            }
            app->add_option(flag, values[key], "default " + value.dump());
        }
    }

    nlohmann::json overrides() const
    {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [key, text] : values) {
            if (text.empty()) continue;
            try {
                j[key] = nlohmann::json::parse(text);
            } catch (const nlohmann::json::parse_error&) {
                j[key] = text;
            }
        }
        return j;
    }
};

struct SpecFlags {
    std::string problem;
    std::string prior = "analytic";
    std::string checkpoint;
    std::string config;
    std::size_t repetitions = 10;
    std::uint64_t seed = 0;
    std::size_t jobs = 1;
    std::string out;
    FieldFlags gp;
    FieldFlags pinn;

    void add(CLI::App* app, bool with_out_required)
    {
        app->add_option("--problem", problem, "registered problem name")->required();
        app->add_option("--prior", prior, "analytic | pinn | checkpoint")
            ->check(CLI::IsMember({"analytic", "pinn", "checkpoint"}));
        app->add_option("--checkpoint", checkpoint, "network JSON for --prior checkpoint");
        app->add_option("--config", config, "JSON file with GpConfig overrides");
        app->add_option("--reps", repetitions, "repetitions");
        app->add_option("--seed", seed, "base seed; repetition i uses seed + i");
        app->add_option("--jobs", jobs, "repetitions run concurrently");
        auto* o = app->add_option("--out", out, "output directory");
        if (with_out_required) o->required();
        gp.add(app, GpConfig{}.to_json(), "");
        pinn.add(app, TrainConfig{}.to_json(), "pinn-");
    }

    RunSpec build() const
    {
        RunSpec spec;
        spec.problem = problem;
        spec.prior = prior_kind_from_string(prior);
        spec.checkpoint = checkpoint;
        if (!config.empty()) {
            std::ifstream in(config);
            if (!in) throw std::runtime_error("cannot read " + config);
            spec.gp.apply_json(nlohmann::json::parse(in));
        }
        spec.gp.apply_json(gp.overrides());
        spec.pinn.seed = seed;
        spec.pinn.apply_json(pinn.overrides());
        spec.repetitions = repetitions;
        spec.seed = seed;
        spec.jobs = jobs;
        spec.out = out;
        return spec;
    }
};

std::vector<int> parse_k_list(const std::string& text)
{
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Structure-guided symbolic regression for PDE solutions"};
    app.require_subcommand(1);

    SpecFlags run_flags;
    auto* run_cmd = app.add_subcommand("run", "evolve expressions for one problem over several seeds");
    run_flags.add(run_cmd, true);

    SpecFlags k_flags;
    std::string k_list = "2,3,5,7";
    auto* k_cmd = app.add_subcommand("ablate-k", "sweep the Taylor order");
    k_flags.add(k_cmd, true);
    k_cmd->add_option("--k", k_list, "comma-separated orders in [2, 8]");

    SpecFlags mode_flags;
    auto* mode_cmd = app.add_subcommand("ablate-modes", "vanilla GP, physics-informed GP and the guided search");
    mode_flags.add(mode_cmd, true);

    std::string train_problem;
    std::string train_out;
    std::string train_prior_out;
    std::size_t train_anchors = 8;
    int train_order = 5;
    std::uint64_t train_seed = 0;
    FieldFlags train_fields;
    auto* train_cmd = app.add_subcommand("train-pinn", "train a network and save its checkpoint");
    train_cmd->add_option("--problem", train_problem)->required();
    train_cmd->add_option("--out", train_out, "checkpoint path")->required();
    train_cmd->add_option("--prior-out", train_prior_out, "also extract a prior and write it here");
    train_cmd->add_option("--anchors", train_anchors);
    train_cmd->add_option("--taylor-order", train_order);
    train_cmd->add_option("--seed", train_seed);
    train_fields.add(train_cmd, TrainConfig{}.to_json(), "pinn-");

    std::string eval_problem;
    std::string eval_text;
    std::string eval_prior;
    std::size_t eval_points = 512;
    std::uint64_t eval_seed = 0;
    auto* eval_cmd = app.add_subcommand("eval-expr", "score one expression");
    eval_cmd->add_option("--problem", eval_problem)->required();
    eval_cmd->add_option("--expr", eval_text)->required();
    eval_cmd->add_option("--prior", eval_prior, "prior JSON for the Taylor loss");
    eval_cmd->add_option("--collocation", eval_points);
    eval_cmd->add_option("--seed", eval_seed);

    auto* problems_cmd = app.add_subcommand("problems", "print the problem registry as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            const RunReport report = run(run_flags.build());
            std::cout << report.summary.dump(2) << '\n';
        } else if (k_cmd->parsed()) {
            std::cout << ablation_k(k_flags.build(), parse_k_list(k_list)).dump(2) << '\n';
        } else if (mode_cmd->parsed()) {
            const nlohmann::json out = ablation_modes(mode_flags.build());
            std::cout << nlohmann::json{{"final_median", out["final_median"]}}.dump(2) << '\n';
        } else if (train_cmd->parsed()) {
            const PdeProblem& problem = find_problem(train_problem);
            TrainConfig cfg;
            cfg.seed = train_seed;
            cfg.apply_json(train_fields.overrides());
            const TrainResult res = train(problem, cfg);
            res.model.save(train_out);
            std::printf("final_loss %.6e\n", res.final_loss);
            if (!train_prior_out.empty()) {
                GpConfig gp;
                gp.anchors = train_anchors;
                gp.taylor_order = train_order;
                build_prior(problem, res.model, PriorSource::Pinn, train_seed, gp).save(train_prior_out);
            }
        } else if (eval_cmd->parsed()) {
            const PdeProblem& problem = find_problem(eval_problem);
            const Expr e = parse_expr(eval_text, problem.naming());
            Rng rng(eval_seed);
            std::printf("expr %s\n", to_string(e, problem.naming()).c_str());
            std::printf("phys_loss %.17g\n", phys_loss(e, problem, sample_collocation(problem, eval_points, rng)));
            if (!eval_prior.empty()) std::printf("taylor_loss %.17g\n", taylor_loss(e, TaylorPrior::load(eval_prior)));
            if (problem.ground_truth) std::printf("mae %.17g\n", mae(e, problem));
        } else if (problems_cmd->parsed()) {
            std::cout << registry_json().dump(2) << '\n';
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
