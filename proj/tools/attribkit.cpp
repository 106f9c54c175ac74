// Command-line surface for the spoofing characterization pipeline. Each
// subcommand wraps one stage and reads/writes only the documented file
// formats; `run` chains every stage. Exit codes: 0 success, 1 usage error,
// 2 data or validation error, 3 numerical failure.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "attribkit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace attribkit;

namespace {

std::string joinpath(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

AttributeTaxonomy load_taxonomy(const std::string& path) {
  return AttributeTaxonomy::load(path);
}

std::vector<std::pair<std::string, std::string>> parse_eval_map(
    const std::vector<std::string>& pairs, bool disabled) {
  if (disabled) return {};
  if (pairs.empty()) return default_eval_map();
  std::vector<std::pair<std::string, std::string>> map;
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == p.size())
      throw ValidationError("eval-map entry '" + p +
                            "' is not of the form FROM=TO");
    map.emplace_back(p.substr(0, eq), p.substr(eq + 1));
  }
  return map;
}

// Feature tables are stored as embedding files; values come back as doubles
// either way.
Dataset load_dataset(const std::string& metadata_path,
                     const std::string& embeddings_path) {
  const auto records = read_metadata(metadata_path);
  const auto embs = read_prob_embeddings(embeddings_path);
  return make_dataset(records, embs);
}

std::vector<std::string> attribute_feature_names(const AttributeTaxonomy& tax,
                                                 std::size_t dim) {
  std::vector<std::string> names;
  if (dim != static_cast<std::size_t>(tax.total_dim())) return names;
  for (int k = 0; k < tax.total_dim(); ++k)
    names.push_back(tax.attribute_label(k));
  return names;
}

struct SynthFlags {
  SyntheticSpec spec;
  bool no_unknown = false;
  void attach(CLI::App* cmd) {
    cmd->add_option("--dim", spec.dim, "Embedding dimension")
        ->capture_default_str();
    cmd->add_option("--separation", spec.separation,
                    "Scale of class-mean directions")
        ->capture_default_str();
    cmd->add_option("--noise", spec.noise, "Per-dimension sample noise")
        ->capture_default_str();
    cmd->add_option("--attack-train", spec.per_attack.train,
                    "Train utterances per known attack")
        ->capture_default_str();
    cmd->add_option("--attack-dev", spec.per_attack.dev,
                    "Dev utterances per known attack")
        ->capture_default_str();
    cmd->add_option("--attack-eval", spec.per_attack.eval,
                    "Eval utterances per attack, unknown attacks included")
        ->capture_default_str();
    cmd->add_option("--bonafide-train", spec.bonafide.train,
                    "Bonafide train utterances")
        ->capture_default_str();
    cmd->add_option("--bonafide-dev", spec.bonafide.dev,
                    "Bonafide dev utterances")
        ->capture_default_str();
    cmd->add_option("--bonafide-eval", spec.bonafide.eval,
                    "Bonafide eval utterances")
        ->capture_default_str();
    cmd->add_option("--known", spec.known_attacks,
                    "Known attack ids (default: all not listed as unknown)")
        ->delimiter(',');
    cmd->add_option("--unknown", spec.unknown_attacks,
                    "Eval-only attack ids")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_flag("--no-unknown", no_unknown,
                  "Generate known attacks only, no eval-only extras");
  }
  SyntheticSpec resolved() const {
    auto s = spec;
    if (no_unknown) s.unknown_attacks.clear();
    return s;
  }
};

struct TrainFlags {
  TrainConfig cfg;
  void attach(CLI::App* cmd) {
    cmd->add_option("--epochs", cfg.epochs, "Training epochs")
        ->capture_default_str();
    cmd->add_option("--batch-size", cfg.batch_size, "Minibatch size")
        ->capture_default_str();
    cmd->add_option("--lr", cfg.learning_rate, "Adam base learning rate")
        ->capture_default_str();
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spoofing characterization: probabilistic attribute "
               "embeddings, decision trees, Shapley explanations"};
  app.name("attribkit");
  app.require_subcommand(1);
  app.footer("Environment: ATTRIB_TRACE_THREADS caps worker threads "
             "(0 = auto).");
  argv = app.ensure_utf8(argv);

  std::string taxonomy_path, metadata_path, embeddings_path, nets_path,
      tree_path, out_dir, task_name = "detection", kind_name = "attrib";
  std::uint64_t seed = 7;
  int shapley_runs = 5;
  std::vector<int> depth_grid;
  std::vector<std::string> eval_map_pairs;
  bool no_eval_map = false;
  bool csv_output = false;
  SynthFlags synth;
  TrainFlags train;

  const auto add_taxonomy = [&](CLI::App* cmd) {
    cmd->add_option("--taxonomy", taxonomy_path,
                    "Attribute taxonomy file")
        ->required();
  };
  const auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out_dir, "Output directory")->required();
  };
  const auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
  };
  const auto add_metadata = [&](CLI::App* cmd) {
    cmd->add_option("--metadata", metadata_path, "Utterance metadata CSV")
        ->required();
  };
  const auto add_embeddings = [&](CLI::App* cmd, const char* help) {
    cmd->add_option("--embeddings", embeddings_path, help)->required();
  };
  const auto add_task = [&](CLI::App* cmd) {
    cmd->add_option("--task", task_name, "detection or attribution")
        ->check(CLI::IsMember({"detection", "attribution"}))
        ->capture_default_str();
  };
  const auto add_eval_map = [&](CLI::App* cmd) {
    cmd->add_option("--eval-map", eval_map_pairs,
                    "Eval attack renames as FROM=TO (default A16=A04,A19=A06)")
        ->delimiter(',');
    cmd->add_flag("--no-eval-map", no_eval_map,
                  "Score eval attacks under their own ids only");
  };

  auto* gen = app.add_subcommand(
      "gen-synth", "Generate a synthetic corpus: metadata plus embeddings");
  add_taxonomy(gen);
  add_out(gen);
  add_seed(gen);
  synth.attach(gen);
  gen->add_flag("--csv", csv_output, "Write embeddings as CSV, not binary");

  auto* ta = app.add_subcommand(
      "train-attrib", "Train one attribute classifier per taxonomy set");
  add_taxonomy(ta);
  add_metadata(ta);
  add_embeddings(ta, "Countermeasure embedding file");
  add_out(ta);
  add_seed(ta);
  train.attach(ta);

  auto* em = app.add_subcommand(
      "embed", "Extract probabilistic attribute embeddings with trained nets");
  add_taxonomy(em);
  em->add_option("--nets", nets_path, "Trained net bank")->required();
  add_embeddings(em, "Countermeasure embedding file");
  add_out(em);
  em->add_flag("--csv", csv_output, "Write embeddings as CSV, not binary");

  auto* tt = app.add_subcommand(
      "train-tree", "Tune tree depth on dev and fit the final decision tree");
  add_taxonomy(tt);
  add_metadata(tt);
  add_embeddings(tt, "Feature embedding file (cm or attrib)");
  add_task(tt);
  add_out(tt);
  add_seed(tt);
  tt->add_option("--depth-grid", depth_grid,
                 "Depth candidates, 0 meaning unlimited (default 2..12,0)")
      ->delimiter(',');

  auto* ev = app.add_subcommand(
      "eval", "Score a fitted tree on the dev and eval splits");
  add_taxonomy(ev);
  add_metadata(ev);
  add_embeddings(ev, "Feature embedding file (cm or attrib)");
  ev->add_option("--tree", tree_path, "Fitted tree file")->required();
  add_task(ev);
  ev->add_option("--kind", kind_name, "Feature kind label: cm or attrib")
      ->check(CLI::IsMember({"cm", "attrib"}))
      ->capture_default_str();
  add_eval_map(ev);
  add_out(ev);

  auto* ex = app.add_subcommand(
      "explain", "Rank attributes by Shapley importance on the dev split");
  add_taxonomy(ex);
  add_metadata(ex);
  add_embeddings(ex, "Attribute embedding file");
  ex->add_option("--tree", tree_path,
                 "Fitted tree file; its stored depth cap is reused")
      ->required();
  add_task(ex);
  ex->add_option("--runs", shapley_runs, "Independently seeded tree fits")
      ->capture_default_str();
  add_seed(ex);
  add_out(ex);

  auto* run = app.add_subcommand(
      "run", "Full pipeline: synthesize, train, extract, fit, score, explain");
  add_taxonomy(run);
  add_task(run);
  run->add_option("--kind", kind_name, "Feature kind: cm or attrib")
      ->check(CLI::IsMember({"cm", "attrib"}))
      ->capture_default_str();
  add_out(run);
  add_seed(run);
  synth.attach(run);
  train.attach(run);
  run->add_option("--depth-grid", depth_grid,
                  "Depth candidates, 0 meaning unlimited (default 2..12,0)")
      ->delimiter(',');
  run->add_option("--runs", shapley_runs, "Shapley tree fits to average")
      ->capture_default_str();
  add_eval_map(run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      const auto tax = load_taxonomy(taxonomy_path);
      auto spec = synth.resolved();
      spec.seed = seed;
      const auto data = generate_synthetic(spec, tax);
      fs::create_directories(out_dir);
      write_metadata(joinpath(out_dir, "metadata.csv"), data.records);
      write_embeddings(joinpath(out_dir, csv_output ? "cm_embeddings.csv"
                                                    : "cm_embeddings.paeb"),
                       data.embeddings);
    } else if (*ta) {
      const auto tax = load_taxonomy(taxonomy_path);
      const auto records = read_metadata(metadata_path);
      const auto embs = read_embeddings(embeddings_path);
      train.cfg.seed = seed;
      auto trained = train_attribute_nets(records, embs, tax, train.cfg);
      fs::create_directories(out_dir);
      write_attrib_nets(joinpath(out_dir, "attribnets.bin"), trained.nets);
      for (int i = 0; i < tax.num_sets(); ++i) {
        const auto& name = tax.sets()[static_cast<std::size_t>(i)].name;
        write_train_log(joinpath(out_dir, "train_log_" + name + ".csv"),
                        trained.results[static_cast<std::size_t>(i)]);
      }
    } else if (*em) {
      const auto tax = load_taxonomy(taxonomy_path);
      const auto nets = read_attrib_nets(nets_path);
      const auto embs = read_embeddings(embeddings_path);
      const auto prob = extract_embeddings(nets, embs, tax);
      fs::create_directories(out_dir);
      write_prob_embeddings(
          joinpath(out_dir, csv_output ? "attrib_embeddings.csv"
                                       : "attrib_embeddings.paeb"),
          prob);
    } else if (*tt) {
      const auto tax = load_taxonomy(taxonomy_path);
      const auto ds = load_dataset(metadata_path, embeddings_path);
      const auto td = make_task_data(ds, parse_task(task_name), tax,
                                     default_eval_map());
      const auto tuning = tune_max_depth(td.train.X, td.train.y, td.dev.X,
                                         td.dev.y, td.classes, seed,
                                         depth_grid);
      TreeConfig cfg;
      cfg.max_depth = tuning.best_depth;
      cfg.seed = seed;
      const auto tree = fit_tree(td.train.X, td.train.y, td.classes, cfg);
      fs::create_directories(out_dir);
      write_depth_table(joinpath(out_dir, "depth_table.csv"), tuning);
      write_tree(joinpath(out_dir, "tree.padt"), tree);
      std::ofstream rules(joinpath(out_dir, "tree_rules.txt"));
      rules << tree.render_rules(
          attribute_feature_names(tax, ds.features.cols()));
      if (!rules)
        throw IoError("write failed: " + joinpath(out_dir, "tree_rules.txt"));
    } else if (*ev) {
      const auto tax = load_taxonomy(taxonomy_path);
      const auto ds = load_dataset(metadata_path, embeddings_path);
      const auto task = parse_task(task_name);
      const auto td = make_task_data(
          ds, task, tax, parse_eval_map(eval_map_pairs, no_eval_map));
      const auto tree = read_tree(tree_path);
      if (tree.class_names() != td.classes)
        throw ValidationError(
            "eval: tree classes do not match the metadata's task classes");
      MetricsReport report;
      report.task = task;
      report.kind = parse_kind(kind_name);
      report.feature_dim = ds.features.cols();
      report.classes = td.classes;
      report.best_depth = tree.config().max_depth;
      report.dev = score_slice(tree, td.dev);
      report.eval = score_slice(tree, td.eval);
      fs::create_directories(out_dir);
      write_report_csv(joinpath(out_dir, "report.csv"), report);
      write_report_text(joinpath(out_dir, "report.txt"), report);
    } else if (*ex) {
      const auto tax = load_taxonomy(taxonomy_path);
      const auto ds = load_dataset(metadata_path, embeddings_path);
      const auto task = parse_task(task_name);
      const auto td = make_task_data(ds, task, tax, default_eval_map());
      const auto tree = read_tree(tree_path);
      const int explain_class = task == Task::kDetection ? 1 : kPredictedClass;
      const auto report = importance_report(
          td.train.X, td.train.y, td.dev.X, td.classes, tax,
          tree.config().max_depth, shapley_runs, seed, explain_class);
      fs::create_directories(out_dir);
      write_shapley_report(joinpath(out_dir, "shapley_report.csv"), report);
      write_shapley_bars(joinpath(out_dir, "shapley_bars.csv"), report);
      write_shapley_ranked(joinpath(out_dir, "shapley_ranked.txt"), report);
    } else if (*run) {
      ExperimentConfig cfg;
      cfg.taxonomy = load_taxonomy(taxonomy_path);
      cfg.synth = synth.resolved();
      cfg.synth.seed = seed;
      cfg.task = parse_task(task_name);
      cfg.kind = parse_kind(kind_name);
      cfg.train = train.cfg;
      cfg.train.seed = seed;
      cfg.depth_grid = depth_grid;
      cfg.shapley_runs = shapley_runs;
      cfg.seed = seed;
      cfg.out_dir = out_dir;
      cfg.eval_map = parse_eval_map(eval_map_pairs, no_eval_map);
      run_experiment(cfg);
    }
  } catch (const NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
