// rpe — knowledge-base completion with relation path embeddings.
// Subcommands cover the whole pipeline: preprocess, train, eval-lp,
// eval-tc, inspect, export. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 numerical failure.

#include "rpe/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

int run(int argc, char** argv) {
    CLI::App app{"Relation path embedding toolkit for knowledge base completion"};
    app.require_subcommand(1);

    // ---- preprocess ----
    rpe::PreprocessOptions pre;
    auto* cmd_pre = app.add_subcommand("preprocess", "Ingest triples, mine reliable relation paths, write caches");
    cmd_pre->add_option("--train", pre.train_path, "training triples (TSV)")->required();
    cmd_pre->add_option("--valid", pre.valid_path, "validation triples (TSV)");
    cmd_pre->add_option("--test", pre.test_path, "test triples (TSV)");
    cmd_pre->add_option("--cache-dir", pre.cache_dir, "cache directory (default $RPE_CACHE_DIR or ./rpe_cache)");
    cmd_pre->add_option("--max-path-len", pre.max_path_len, "maximum relation path length")
        ->check(CLI::Range(1, 8))
        ->capture_default_str();
    cmd_pre->add_option("--eta", pre.eta, "reliable-path probability threshold, in (0,1)")->capture_default_str();
    cmd_pre->add_option("--threads", pre.threads, "mining threads")->check(CLI::Range(1, 256))->capture_default_str();

    // ---- train ----
    std::string train_config_path;
    std::string train_cache_dir;
    std::string train_out_dir = "run";
    rpe::TrainConfig base;
    std::string opt_mode = "acom";
    std::string opt_sampling = "auto";
    std::string opt_norm = "l1";
    std::string opt_init = "random";
    auto* cmd_tr = app.add_subcommand("train", "Train embeddings against the preprocessed caches");
    cmd_tr->add_option("--config", train_config_path, "flat key=value config file");
    cmd_tr->add_option("--cache-dir", train_cache_dir, "cache directory");
    cmd_tr->add_option("--out", train_out_dir, "output directory for checkpoint and logs")->capture_default_str();
    cmd_tr->add_option("--mode", opt_mode, "initial|pc|acom|mcom|pc+acom|pc+mcom");
    cmd_tr->add_option("--dim-entity", base.entity_dim, "entity embedding dimension n");
    cmd_tr->add_option("--dim-relation", base.relation_dim, "relation embedding dimension m");
    cmd_tr->add_option("--gamma1", base.gamma1, "relation margin");
    cmd_tr->add_option("--gamma2", base.gamma2, "path margin");
    cmd_tr->add_option("--alpha", base.alpha, "SGD learning rate");
    cmd_tr->add_option("--batch-size", base.batch_size, "minibatch size");
    cmd_tr->add_option("--lambda", base.lambda, "path term balance factor");
    cmd_tr->add_option("--eta", base.eta, "path threshold recorded in the config");
    cmd_tr->add_option("--epochs", base.epochs, "training epochs");
    cmd_tr->add_option("--sampling", opt_sampling, "uniform|bernoulli|type_constrained|auto");
    cmd_tr->add_option("--norm", opt_norm, "l1|l2 score distance");
    cmd_tr->add_option("--seed", base.seed, "RNG seed");
    cmd_tr->add_option("--init", opt_init, "random|warmstart");
    cmd_tr->add_option("--warm-start", base.warm_start_path, "checkpoint for warm start");
    cmd_tr->add_option("--threads", base.threads, "gradient worker threads (1 = deterministic reference)");
    cmd_tr->add_option("--checkpoint-every", base.checkpoint_every, "epochs between checkpoint snapshots");
    cmd_tr->add_flag("--early-stop", base.early_stop, "stop on validation Hits@10 plateau");

    // ---- eval-lp ----
    rpe::EvalLpOptions lp;
    std::string opt_setting = "both";
    std::string opt_tie = "optimistic";
    auto* cmd_lp = app.add_subcommand("eval-lp", "Link prediction: Mean Rank and Hits@10");
    cmd_lp->add_option("--checkpoint", lp.checkpoint, "trained checkpoint")->required();
    cmd_lp->add_option("--cache-dir", lp.cache_dir, "cache directory");
    cmd_lp->add_option("--setting", opt_setting, "raw|filter|both")->capture_default_str();
    cmd_lp->add_flag("--by-category", lp.by_category, "break Hits@10 down by relation category");
    cmd_lp->add_option("--tie", opt_tie, "optimistic|pessimistic rank ties")->capture_default_str();
    cmd_lp->add_option("--threads", lp.threads, "evaluation threads")->capture_default_str();
    cmd_lp->add_option("--out", lp.out_dir, "report directory (default: checkpoint directory)");

    // ---- eval-tc ----
    rpe::EvalTcOptions tc;
    auto* cmd_tc = app.add_subcommand("eval-tc", "Triple classification with per-relation thresholds");
    cmd_tc->add_option("--checkpoint", tc.checkpoint, "trained checkpoint")->required();
    cmd_tc->add_option("--cache-dir", tc.cache_dir, "cache directory");
    cmd_tc->add_option("--seed", tc.seed, "seed for generated negatives")->capture_default_str();
    cmd_tc->add_option("--out", tc.out_dir, "report directory (default: checkpoint directory)");

    // ---- inspect ----
    rpe::InspectOptions ins;
    auto* cmd_ins = app.add_subcommand("inspect", "Show the most reliable paths for a relation");
    cmd_ins->add_option("--relation", ins.relation, "relation surface name")->required();
    cmd_ins->add_option("--cache-dir", ins.cache_dir, "cache directory");
    cmd_ins->add_option("--top", ins.top_k, "number of paths")->capture_default_str();

    // ---- export ----
    rpe::ExportOptions exp;
    auto* cmd_exp = app.add_subcommand("export", "Dump embeddings as TSV");
    cmd_exp->add_option("--checkpoint", exp.checkpoint, "trained checkpoint")->required();
    cmd_exp->add_option("--cache-dir", exp.cache_dir, "cache directory");
    cmd_exp->add_option("--out", exp.out_dir, "output directory")->required();
    cmd_exp->add_flag("--projections", exp.projections, "also dump projection matrices");

    CLI11_PARSE(app, argc, argv);

    if (cmd_pre->parsed()) {
        rpe::cmd_preprocess(pre, std::cout);
        return 0;
    }

    if (cmd_tr->parsed()) {
        rpe::TrainConfig config = train_config_path.empty() ? rpe::TrainConfig{}
                                                            : rpe::TrainConfig::from_file(train_config_path);
        auto override_if = [&](const char* flag, auto&& apply) {
            if (cmd_tr->count(flag) > 0) apply();
        };
        override_if("--mode", [&] { config.mode = rpe::parse_mode(opt_mode); });
        override_if("--dim-entity", [&] { config.entity_dim = base.entity_dim; });
        override_if("--dim-relation", [&] { config.relation_dim = base.relation_dim; });
        override_if("--gamma1", [&] { config.gamma1 = base.gamma1; });
        override_if("--gamma2", [&] { config.gamma2 = base.gamma2; });
        override_if("--alpha", [&] { config.alpha = base.alpha; });
        override_if("--batch-size", [&] { config.batch_size = base.batch_size; });
        override_if("--lambda", [&] { config.lambda = base.lambda; });
        override_if("--eta", [&] { config.eta = base.eta; });
        override_if("--epochs", [&] { config.epochs = base.epochs; });
        override_if("--sampling", [&] {
            config.sampling = opt_sampling == "auto" ? std::nullopt
                                                     : std::optional(rpe::parse_sampling(opt_sampling));
        });
        override_if("--norm", [&] {
            if (opt_norm != "l1" && opt_norm != "l2") throw rpe::ConfigError("norm must be l1 or l2");
            config.norm = opt_norm == "l1" ? rpe::Norm::L1 : rpe::Norm::L2;
        });
        override_if("--seed", [&] { config.seed = base.seed; });
        override_if("--init", [&] {
            if (opt_init != "random" && opt_init != "warmstart")
                throw rpe::ConfigError("init must be random or warmstart");
            config.init = opt_init == "random" ? rpe::InitScheme::Random : rpe::InitScheme::WarmStart;
        });
        override_if("--warm-start", [&] {
            config.warm_start_path = base.warm_start_path;
            config.init = rpe::InitScheme::WarmStart;
        });
        override_if("--threads", [&] { config.threads = base.threads; });
        override_if("--checkpoint-every", [&] { config.checkpoint_every = base.checkpoint_every; });
        override_if("--early-stop", [&] { config.early_stop = base.early_stop; });

        rpe::TrainOptions options{train_cache_dir, train_out_dir, config};
        rpe::cmd_train(options, std::cout);
        return 0;
    }

    if (cmd_lp->parsed()) {
        if (opt_setting == "raw") {
            lp.setting = rpe::EvalSetting::Raw;
        } else if (opt_setting == "filter") {
            lp.setting = rpe::EvalSetting::Filter;
        } else if (opt_setting == "both") {
            lp.setting = rpe::EvalSetting::Both;
        } else {
            throw rpe::ConfigError("--setting must be raw, filter, or both");
        }
        if (opt_tie == "optimistic") {
            lp.tie = rpe::TieRule::Optimistic;
        } else if (opt_tie == "pessimistic") {
            lp.tie = rpe::TieRule::Pessimistic;
        } else {
            throw rpe::ConfigError("--tie must be optimistic or pessimistic");
        }
        rpe::cmd_eval_lp(lp, std::cout);
        return 0;
    }

    if (cmd_tc->parsed()) {
        rpe::cmd_eval_tc(tc, std::cout);
        return 0;
    }

    if (cmd_ins->parsed()) {
        rpe::cmd_inspect(ins, std::cout);
        return 0;
    }

    if (cmd_exp->parsed()) {
        rpe::cmd_export(exp, std::cout);
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const rpe::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const rpe::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const rpe::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
