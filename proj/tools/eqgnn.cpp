#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "eqg/classifier.hpp"
#include "eqg/datagen.hpp"
#include "eqg/discriminator.hpp"
#include "eqg/gradcheck.hpp"
#include "eqg/graph_data.hpp"
#include "eqg/trainer.hpp"
#include "eqg/two_sample.hpp"

namespace {

using namespace eqg;

void write_text_atomic(const std::string& path, const std::string& content) {
  std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, target);
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
  return out;
}

std::vector<uint64_t> parse_seeds(const std::string& csv) {
  std::vector<uint64_t> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
  return out;
}

/// Optional per-dataset training defaults in the manifest's "train" object.
/// Precedence: command-line flag > manifest value > built-in default.
void apply_manifest_train(const std::string& manifest_path, const CLI::App& cmd,
                          TrainConfig& cfg) {
  std::ifstream in(manifest_path);
  nlohmann::json j;
  in >> j;
  if (!j.contains("train")) return;
  const auto& t = j["train"];
  auto skip = [&](const std::string& flag) { return cmd.count(flag) > 0; };
  if (t.contains("lambda") && !skip("--lambda")) cfg.lambda = t["lambda"];
  if (t.contains("gamma") && !skip("--gamma")) cfg.gamma = t["gamma"];
  if (t.contains("lr") && !skip("--lr")) cfg.lr = t["lr"];
  if (t.contains("weight_decay") && !skip("--weight-decay"))
    cfg.weight_decay = t["weight_decay"];
  if (t.contains("patience") && !skip("--patience")) cfg.patience = t["patience"];
  if (t.contains("max_epochs") && !skip("--max-epochs")) cfg.max_epochs = t["max_epochs"];
  if (t.contains("variant") && !skip("--variant"))
    cfg.variant = parse_loss_variant(t["variant"].get<std::string>());
  if (t.contains("hidden1") && !skip("--hidden1")) cfg.hidden1 = t["hidden1"];
  if (t.contains("hidden2") && !skip("--hidden2")) cfg.hidden2 = t["hidden2"];
  if (t.contains("disc_hidden") && !skip("--disc-hidden")) cfg.disc_hidden = t["disc_hidden"];
  if (t.contains("smoothing") && !skip("--smoothing")) cfg.smoothing = t["smoothing"];
  if (t.contains("standardize") && !skip("--no-standardize"))
    cfg.standardize = t["standardize"];
}

void print_metrics(const MetricsReport& m) {
  std::cout << MetricsReport::csv_header() << "\n" << m.to_csv_row() << "\n";
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << "\n";
}

int cmd_gen_data(const std::string& out_dir, const SynthConfig& cfg, uint64_t seed) {
  GraphDataset ds = generate_synthetic(cfg, seed);
  write_dataset_bundle(ds, out_dir);
  std::cout << "wrote " << out_dir << "/{nodes.csv,edges.txt,manifest.json}  nodes="
            << ds.node_count << " features=" << ds.feature_dim
            << " classes=" << ds.class_count << "\n";
  return 0;
}

int cmd_train(const std::string& manifest_path, const CLI::App& cmd, TrainConfig cfg,
              const std::string& out_dir) {
  apply_manifest_train(manifest_path, cmd, cfg);
  cfg.validate();
  GraphDataset ds = load_dataset(DatasetManifest::load(manifest_path));
  Split split = make_split(ds, cfg.seed);
  TrainResult res = train(ds, split, cfg);

  std::cout << "variant=" << loss_variant_name(cfg.variant) << " lambda=" << cfg.lambda
            << " gamma=" << cfg.gamma << " seed=" << cfg.seed << " selected_epoch="
            << res.selected_epoch << " stopped_epoch=" << res.stopped_epoch << "\n";
  print_metrics(res.test_metrics);

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::filesystem::path base(out_dir);
    std::filesystem::path ck_tmp = base / "checkpoint.json.tmp";
    res.best_classifier.save_json(ck_tmp.string());
    std::filesystem::rename(ck_tmp, base / "checkpoint.json");
    write_history_csv((base / "history.csv").string(), res.history);
    write_text_atomic((base / "metrics.json").string(), res.test_metrics.to_json() + "\n");
    std::ostringstream pred;
    pred << "id,pred\n";
    for (int i = 0; i < ds.node_count; ++i)
      pred << ds.node_ids[i] << "," << res.test_pred[i] << "\n";
    write_text_atomic((base / "predictions.csv").string(), pred.str());
    std::cout << "artifacts in " << out_dir << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& manifest_path, const std::string& checkpoint,
             uint64_t seed, bool standardize) {
  GraphDataset ds = load_dataset(DatasetManifest::load(manifest_path));
  Split split = make_split(ds, seed);
  ParamCollection pc = ParamCollection::load_json(checkpoint);
  print_metrics(evaluate_checkpoint(ds, split, pc, standardize));
  return 0;
}

int cmd_grid(const std::string& manifest_path, const CLI::App& cmd, TrainConfig base,
             const std::string& seeds_csv, const std::string& lambdas_csv,
             const std::string& gammas_csv, int workers, const std::string& out_path) {
  apply_manifest_train(manifest_path, cmd, base);
  base.validate();
  GraphDataset ds = load_dataset(DatasetManifest::load(manifest_path));
  std::vector<GridCell> cells = grid_search(ds, parse_seeds(seeds_csv),
                                            parse_doubles(lambdas_csv),
                                            parse_doubles(gammas_csv), base, workers);
  std::ostringstream os;
  os << "lambda,gamma,dEO,dEO_se,dSP,dSP_se,ACC,ACC_se,F1-macro,F1-macro_se,"
        "F1-micro,F1-micro_se\n";
  char line[512];
  for (const auto& c : cells) {
    std::snprintf(line, sizeof line,
                  "%g,%g,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f,%.2f\n",
                  c.lambda, c.gamma, 100 * c.delta_eo.mean, 100 * c.delta_eo.stderr_,
                  100 * c.delta_sp.mean, 100 * c.delta_sp.stderr_, 100 * c.acc.mean,
                  100 * c.acc.stderr_, 100 * c.f1_macro.mean, 100 * c.f1_macro.stderr_,
                  100 * c.f1_micro.mean, 100 * c.f1_micro.stderr_);
    os << line;
  }
  std::cout << os.str();
  if (!out_path.empty()) write_text_atomic(out_path, os.str());
  return 0;
}

int cmd_synth(int pairs, int runs, uint64_t seed, const TwoSampleConfig& cfg,
              bool identical, const std::string& out_path) {
  SyntheticTable table = run_synthetic_table(pairs, runs, seed, cfg, identical);
  std::cout << table.to_csv();
  if (!out_path.empty()) write_text_atomic(out_path, table.to_csv());
  return 0;
}

int cmd_inspect(const std::string& manifest_path, const std::string& node_id) {
  GraphDataset ds = load_dataset(DatasetManifest::load(manifest_path));
  auto it = std::find(ds.node_ids.begin(), ds.node_ids.end(), node_id);
  if (it == ds.node_ids.end()) {
    std::cerr << "node id not found: " << node_id << "\n";
    return 1;
  }
  int i = static_cast<int>(it - ds.node_ids.begin());
  std::cout << "id=" << node_id << " index=" << i << " label=" << ds.labels[i]
            << " sensitive=" << ds.sensitive[i] << "\n";
  double mn = ds.feature_matrix.at(i, 0), mx = mn, sum = 0.0;
  for (int j = 0; j < ds.feature_dim; ++j) {
    double v = ds.feature_matrix.at(i, j);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
    sum += v;
  }
  std::cout << "features: dim=" << ds.feature_dim << " min=" << mn << " max=" << mx
            << " mean=" << sum / ds.feature_dim << "\n";
  std::cout << "neighbors:";
  const SparseCsr& a = ds.adjacency;
  for (int p = a.ptr[i]; p < a.ptr[i + 1]; ++p)
    if (a.idx[p] != i) std::cout << " " << ds.node_ids[a.idx[p]];
  std::cout << "\n";
  return 0;
}

int cmd_gradcheck(uint64_t seed, double tolerance) {
  SynthConfig scfg;
  scfg.nodes = 24;
  scfg.features = 6;
  scfg.edges = 50;
  GraphDataset ds = generate_synthetic(scfg, seed);
  Split split = make_split(ds, seed);

  Rng finit = Rng::substream(seed, "gradcheck_f");
  Rng dinit = Rng::substream(seed, "gradcheck_d");
  ClassifierShape shape{ds.feature_dim, ds.class_count, 8, 8};
  ParamCollection fpc = init_classifier(shape, finit);
  ParamCollection dpc =
      init_discriminator(disc_input_width(LossVariant::kPermutation, ds.class_count, 8),
                         8, dinit);

  ConditionalTable table =
      fit_conditional(ds.labels, ds.sensitive, split.train_idx, ds.class_count, 1.0);
  Rng dummy_rng = Rng::substream(seed, "gradcheck_dummies");
  std::vector<int> dummies =
      sample_dummies(table, ds.labels, split.train_idx, ds.node_count, dummy_rng);
  Rng bit_rng = Rng::substream(seed, "gradcheck_bits");
  PermutationBatch batch =
      build_permutation_batch(ds.sensitive, dummies, split.train_idx, bit_rng);
  double lambda = 1.0, gamma = 50.0;

  auto run = [&](bool want_f, bool want_d) {
    Tape tape;
    BoundParams fb = BoundParams::bind(tape, fpc);
    BoundParams db = BoundParams::bind(tape, dpc);
    ClassifierOut out = classifier_forward(tape, fb, ds);
    Tape::Id probs = tape.softmax_rows(out.logits);
    Tape::Id l_task = task_loss(tape, out.logits, ds.labels, split.train_idx);
    Tape::Id input = make_permutation_input(tape, ds.labels, ds.class_count, batch,
                                            probs, out.hidden);
    Tape::Id lhat = disc_forward(tape, db, &ds.adjacency, input);
    AdvLosses adv = adv_losses(tape, lhat, batch.bits, batch.rows);
    Tape::Id cov = cov_loss(tape, probs, batch.first_attr, batch.second_attr, batch.rows);
    Tape::Id total = tape.add(
        l_task, tape.scale(tape.add(adv.classifier_loss, tape.scale(cov, gamma)), lambda));
    if (want_f) {
      tape.backward(total);
      fpc.zero_grads();
      fb.pull_grads(tape);
    }
    if (want_d) {
      tape.backward(adv.disc_loss);
      dpc.zero_grads();
      db.pull_grads(tape);
    }
    return std::make_pair(tape.value(total).at(0, 0), tape.value(adv.disc_loss).at(0, 0));
  };

  run(true, false);
  GradCheckReport fr = check_gradients([&] { return run(false, false).first; }, fpc, tolerance);
  run(false, true);
  GradCheckReport dr = check_gradients([&] { return run(false, false).second; }, dpc, tolerance);

  std::cout << "classifier: max_rel_error=" << fr.max_rel_error << " worst="
            << fr.worst_param << "[" << fr.worst_index << "]\n";
  std::cout << "discriminator: max_rel_error=" << dr.max_rel_error << " worst="
            << dr.worst_param << "[" << dr.worst_index << "]\n";
  bool ok = fr.ok(tolerance) && dr.ok(tolerance);
  std::cout << (ok ? "PASS" : "FAIL") << " (tolerance " << tolerance << ")\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware graph learning toolkit"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic benchmark graph");
  std::string gen_out = "data/synth";
  uint64_t gen_seed = 1;
  SynthConfig scfg;
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--nodes", scfg.nodes, "Node count");
  gen->add_option("--features", scfg.features, "Feature dimension");
  gen->add_option("--classes", scfg.class_count, "Class count");
  gen->add_option("--edges", scfg.edges, "Undirected edge target");
  gen->add_option("--p-sensitive", scfg.p_sensitive, "P(A=1)");
  gen->add_option("--label-corr", scfg.label_corr, "Label/group correlation");
  gen->add_option("--feature-signal", scfg.feature_signal, "Label signal in features");
  gen->add_option("--sensitive-signal", scfg.sensitive_signal, "Group signal in features");
  gen->add_option("--homophily-label", scfg.homophily_label, "Same-label edge preference");
  gen->add_option("--homophily-sens", scfg.homophily_sens, "Same-group edge preference");

  // shared training options
  auto add_train_opts = [](CLI::App* c, TrainConfig& cfg, std::string& variant) {
    c->add_option("--lambda", cfg.lambda, "Adversarial weight");
    c->add_option("--gamma", cfg.gamma, "Covariance weight");
    c->add_option("--lr", cfg.lr, "Learning rate");
    c->add_option("--weight-decay", cfg.weight_decay, "L2 weight decay");
    c->add_option("--patience", cfg.patience, "Early-stopping patience");
    c->add_option("--max-epochs", cfg.max_epochs, "Epoch cap");
    c->add_option("--variant", variant,
                  "permutation|permutation_no_h|unpaired|paired|debias|sp");
    c->add_option("--hidden1", cfg.hidden1, "First conv width");
    c->add_option("--hidden2", cfg.hidden2, "Hidden representation width");
    c->add_option("--disc-hidden", cfg.disc_hidden, "Discriminator width");
    c->add_option("--smoothing", cfg.smoothing, "Sampler pseudo-count");
    c->add_flag_callback("--no-standardize", [&cfg] { cfg.standardize = false; },
                         "Skip feature standardization");
  };

  // train
  auto* tr = app.add_subcommand("train", "Train one model and report test metrics");
  std::string tr_data, tr_out, tr_variant = "permutation";
  TrainConfig tcfg;
  tr->add_option("--data", tr_data, "Dataset manifest")->required();
  tr->add_option("--seed", tcfg.seed, "Run/split seed");
  tr->add_option("--out", tr_out, "Artifact directory (checkpoint, history, metrics)");
  add_train_opts(tr, tcfg, tr_variant);

  // grid
  auto* gr = app.add_subcommand("grid", "Sweep lambda x gamma x seeds");
  std::string gr_data, gr_out, gr_variant = "permutation";
  std::string gr_seeds = "1,2,3,4,5", gr_lambdas = "0,1", gr_gammas = "50";
  int gr_workers = 0;
  TrainConfig gcfg;
  gr->add_option("--data", gr_data, "Dataset manifest")->required();
  gr->add_option("--seeds", gr_seeds, "Comma-separated seeds");
  gr->add_option("--lambdas", gr_lambdas, "Comma-separated lambda values");
  gr->add_option("--gammas", gr_gammas, "Comma-separated gamma values");
  gr->add_option("--workers", gr_workers, "Thread count (0 = hardware)");
  gr->add_option("--out", gr_out, "CSV output path");
  add_train_opts(gr, gcfg, gr_variant);

  // eval
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a split");
  std::string ev_data, ev_ck;
  uint64_t ev_seed = 1;
  bool ev_nostd = false;
  ev->add_option("--data", ev_data, "Dataset manifest")->required();
  ev->add_option("--checkpoint", ev_ck, "checkpoint.json")->required();
  ev->add_option("--seed", ev_seed, "Split seed");
  ev->add_flag("--no-standardize", ev_nostd, "Skip feature standardization");

  // synth (two-sample study)
  auto* sy = app.add_subcommand("synth", "Two-sample test study on paired Gaussians");
  int sy_pairs = 10000, sy_runs = 5;
  uint64_t sy_seed = 1;
  bool sy_identical = false;
  std::string sy_out;
  TwoSampleConfig sy_cfg;
  sy->add_option("--pairs", sy_pairs, "Pairs per side (train and test each)");
  sy->add_option("--runs", sy_runs, "Averaged repetitions");
  sy->add_option("--seed", sy_seed, "Base seed");
  sy->add_option("--epochs", sy_cfg.epochs, "Training epochs per test");
  sy->add_option("--lr", sy_cfg.lr, "Learning rate");
  sy->add_option("--perm-hidden", sy_cfg.perm_hidden, "Permutation classifier width");
  sy->add_flag("--identical", sy_identical, "Null diagnostic: both samples equal");
  sy->add_option("--out", sy_out, "CSV output path");

  // inspect-node
  auto* in = app.add_subcommand("inspect-node", "Print one node's data and neighbors");
  std::string in_data, in_id;
  in->add_option("--data", in_data, "Dataset manifest")->required();
  in->add_option("--id", in_id, "Node id")->required();

  // gradcheck
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of the objective");
  uint64_t gc_seed = 1;
  double gc_tol = 1e-4;
  gc->add_option("--seed", gc_seed, "Seed");
  gc->add_option("--tolerance", gc_tol, "Max allowed relative error");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(gen_out, scfg, gen_seed);
    if (tr->parsed()) {
      tcfg.variant = eqg::parse_loss_variant(tr_variant);
      return cmd_train(tr_data, *tr, tcfg, tr_out);
    }
    if (gr->parsed()) {
      gcfg.variant = eqg::parse_loss_variant(gr_variant);
      return cmd_grid(gr_data, *gr, gcfg, gr_seeds, gr_lambdas, gr_gammas, gr_workers,
                      gr_out);
    }
    if (ev->parsed()) return cmd_eval(ev_data, ev_ck, ev_seed, !ev_nostd);
    if (sy->parsed()) return cmd_synth(sy_pairs, sy_runs, sy_seed, sy_cfg, sy_identical, sy_out);
    if (in->parsed()) return cmd_inspect(in_data, in_id);
    if (gc->parsed()) return cmd_gradcheck(gc_seed, gc_tol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
