#include "eqg/trainer.hpp"

#include <cmath>
#include <fstream>
#include <future>
#include <stdexcept>
#include <thread>

namespace eqg {

void TrainConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("TrainConfig: lambda must be >= 0");
  if (gamma < 0.0) throw std::invalid_argument("TrainConfig: gamma must be >= 0");
  if (patience < 1) throw std::invalid_argument("TrainConfig: patience must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
}

namespace {

struct AdvIds {
  Tape::Id adv_f = -1;
  Tape::Id adv_d = -1;
  Tape::Id cov = -1;
};

// Builds the variant's adversarial (and covariance) loss nodes on one tape.
AdvIds build_adv(Tape& tape, const TrainConfig& cfg, const GraphDataset& ds,
                 const std::vector<int>& rows, const std::vector<int>& real_attr,
                 const std::vector<int>& dummy_attr, const PermutationBatch* batch,
                 Tape::Id probs, Tape::Id hidden, const BoundParams& disc) {
  AdvIds out;
  const int k = ds.class_count;
  switch (cfg.variant) {
    case LossVariant::kPermutation:
    case LossVariant::kPermutationNoH: {
      const Tape::Id h = cfg.variant == LossVariant::kPermutation ? hidden : -1;
      const Tape::Id input = make_permutation_input(tape, ds.labels, k, *batch, probs, h);
      const Tape::Id lhat = disc_forward(tape, disc, &ds.adjacency, input);
      const AdvLosses l = adv_losses(tape, lhat, batch->bits, rows);
      out.adv_d = l.disc_loss;
      out.adv_f = l.classifier_loss;
      break;
    }
    case LossVariant::kUnpaired:
    case LossVariant::kPaired: {
      const Tape::Id in_real = make_single_attr_input(tape, ds.labels, k,
                                                      to_real(real_attr), rows, probs,
                                                      hidden);
      const Tape::Id in_dummy = make_single_attr_input(tape, ds.labels, k,
                                                       to_real(dummy_attr), rows, probs,
                                                       hidden);
      const Tape::Id p_real = disc_forward(tape, disc, &ds.adjacency, in_real);
      const Tape::Id p_dummy = disc_forward(tape, disc, &ds.adjacency, in_dummy);
      const AdvLosses l = cfg.variant == LossVariant::kUnpaired
                              ? unpaired_adv_losses(tape, p_real, p_dummy, rows)
                              : paired_adv_losses(tape, p_real, p_dummy, rows);
      out.adv_d = l.disc_loss;
      out.adv_f = l.classifier_loss;
      break;
    }
    case LossVariant::kDebias: {
      const Tape::Id input = make_debias_input(tape, ds.labels, k, rows, probs);
      const Tape::Id lhat = disc_forward(tape, disc, &ds.adjacency, input);
      const AdvLosses l = attribute_adv_losses(tape, lhat, ds.sensitive, rows);
      out.adv_d = l.disc_loss;
      out.adv_f = l.classifier_loss;
      break;
    }
    case LossVariant::kSp: {
      const Tape::Id lhat = disc_forward(tape, disc, &ds.adjacency, hidden);
      const AdvLosses l = attribute_adv_losses(tape, lhat, ds.sensitive, rows);
      out.adv_d = l.disc_loss;
      out.adv_f = l.classifier_loss;
      break;
    }
  }
  if (variant_uses_dummies(cfg.variant))
    out.cov = cov_loss(tape, probs, to_real(real_attr), to_real(dummy_attr), rows);
  return out;
}

double scalar(const Tape& tape, Tape::Id id) { return tape.value(id).v[0]; }

void check_finite(double x, const char* what, int epoch) {
  if (!std::isfinite(x))
    throw std::runtime_error(std::string("training diverged: ") + what +
                             " is non-finite at epoch " + std::to_string(epoch));
}

}  // namespace

TrainResult train(const GraphDataset& dataset, const Split& split,
                  const TrainConfig& config) {
  config.validate();
  const GraphDataset ds = standardize_features(dataset, split, config.standardize);
  const bool adversarial = config.lambda > 0.0;

  const ConditionalTable table =
      fit_conditional(ds.labels, ds.sensitive, split.train_idx, ds.class_count,
                      config.smoothing);

  Rng init_f = Rng::substream(config.seed, "init_classifier");
  ParamCollection f_params = init_classifier(
      {ds.feature_dim, ds.class_count, config.hidden1, config.hidden2}, init_f);

  ParamCollection d_params;
  if (adversarial) {
    Rng init_d = Rng::substream(config.seed, "init_discriminator");
    d_params = init_discriminator(
        disc_input_width(config.variant, ds.class_count, config.hidden2),
        config.disc_hidden, init_d);
  }

  TrainResult result;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    // fresh dummies and permutation bits every epoch
    std::vector<int> dummies, val_dummies;
    PermutationBatch batch, val_batch;
    if (adversarial && variant_uses_dummies(config.variant)) {
      Rng rng_dum = Rng::substream(config.seed, "dummies", epoch);
      dummies = sample_dummies(table, ds.labels, split.train_idx, ds.node_count, rng_dum);
      Rng rng_vdum = Rng::substream(config.seed, "val_dummies", epoch);
      val_dummies =
          sample_dummies(table, ds.labels, split.val_idx, ds.node_count, rng_vdum);
      Rng rng_bits = Rng::substream(config.seed, "bits", epoch);
      batch = build_permutation_batch(ds.sensitive, dummies, split.train_idx, rng_bits);
      Rng rng_vbits = Rng::substream(config.seed, "val_bits", epoch);
      val_batch =
          build_permutation_batch(ds.sensitive, val_dummies, split.val_idx, rng_vbits);
    }

    EpochStats stats;

    // classifier step
    {
      Tape tape;
      BoundParams f = BoundParams::bind(tape, f_params);
      BoundParams d;
      if (adversarial) d = BoundParams::bind(tape, d_params);
      const ClassifierOut out = classifier_forward(tape, f, ds);
      const Tape::Id probs = tape.softmax_rows(out.logits);
      const Tape::Id l_task = task_loss(tape, out.logits, ds.labels, split.train_idx);
      Tape::Id total = l_task;
      stats.l_task = scalar(tape, l_task);
      if (adversarial) {
        const AdvIds adv = build_adv(tape, config, ds, split.train_idx, ds.sensitive,
                                     dummies, &batch, probs, out.hidden, d);
        stats.l_adv = scalar(tape, adv.adv_f);
        Tape::Id reg = adv.adv_f;
        if (adv.cov >= 0) {
          stats.l_cov = scalar(tape, adv.cov);
          reg = tape.add(reg, tape.scale(adv.cov, config.gamma));
        }
        total = tape.add(l_task, tape.scale(reg, config.lambda));
      }
      check_finite(scalar(tape, total), "classifier loss", epoch);
      tape.backward(total);
      f_params.zero_grads();
      f.pull_grads(tape);
      f_params.adam_step(config.lr, config.weight_decay);
    }

    // discriminator step, on the updated classifier outputs and this epoch's bits
    if (adversarial) {
      Tape tape;
      BoundParams f = BoundParams::bind(tape, f_params);
      BoundParams d = BoundParams::bind(tape, d_params);
      const ClassifierOut out = classifier_forward(tape, f, ds);
      const Tape::Id probs = tape.softmax_rows(out.logits);
      const AdvIds adv = build_adv(tape, config, ds, split.train_idx, ds.sensitive,
                                   dummies, &batch, probs, out.hidden, d);
      check_finite(scalar(tape, adv.adv_d), "discriminator loss", epoch);
      tape.backward(adv.adv_d);
      d_params.zero_grads();
      d.pull_grads(tape);
      d_params.adam_step(config.lr, config.weight_decay);
    }

    // validation loss: the full objective on validation rows, discriminator frozen
    {
      Tape tape;
      BoundParams f = BoundParams::bind(tape, f_params);
      BoundParams d;
      if (adversarial) d = BoundParams::bind(tape, d_params);
      const ClassifierOut out = classifier_forward(tape, f, ds);
      const Tape::Id probs = tape.softmax_rows(out.logits);
      double val = scalar(tape, task_loss(tape, out.logits, ds.labels, split.val_idx));
      if (adversarial) {
        const AdvIds adv = build_adv(tape, config, ds, split.val_idx, ds.sensitive,
                                     val_dummies, &val_batch, probs, out.hidden, d);
        double reg = scalar(tape, adv.adv_f);
        if (adv.cov >= 0) reg += config.gamma * scalar(tape, adv.cov);
        val += config.lambda * reg;
      }
      check_finite(val, "validation loss", epoch);
      stats.val_loss = val;
    }

    result.history.push_back(stats);
    result.stopped_epoch = epoch;
    if (stats.val_loss < best_val) {
      best_val = stats.val_loss;
      result.selected_epoch = epoch;
      result.best_classifier = f_params;
      epochs_since_best = 0;
    } else if (++epochs_since_best >= config.patience) {
      break;
    }
  }

  const Tensor probs = predict_probs(ds, result.best_classifier);
  result.test_pred = argmax_rows(probs);
  result.test_metrics = evaluate(take(result.test_pred, split.test_idx),
                                 take(ds.labels, split.test_idx),
                                 take(ds.sensitive, split.test_idx), ds.class_count);
  return result;
}

Tensor predict_probs(const GraphDataset& dataset, const ParamCollection& classifier) {
  Tape tape;
  ParamCollection copy = classifier;
  BoundParams f = BoundParams::bind(tape, copy);
  const ClassifierOut out = classifier_forward(tape, f, dataset);
  return tape.value(tape.softmax_rows(out.logits));
}

MetricsReport evaluate_checkpoint(const GraphDataset& dataset, const Split& split,
                                  const ParamCollection& classifier, bool standardize) {
  const GraphDataset ds = standardize_features(dataset, split, standardize);
  const std::vector<int> pred = argmax_rows(predict_probs(ds, classifier));
  return evaluate(take(pred, split.test_idx), take(ds.labels, split.test_idx),
                  take(ds.sensitive, split.test_idx), ds.class_count);
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return m;
  double ss = 0.0;
  for (double x : xs) ss += (x - m.mean) * (x - m.mean);
  m.stderr_ = std::sqrt(ss / (xs.size() - 1.0) / xs.size());
  return m;
}

std::vector<GridCell> grid_search(const GraphDataset& dataset,
                                  const std::vector<uint64_t>& seeds,
                                  const std::vector<double>& lambda_grid,
                                  const std::vector<double>& gamma_grid,
                                  const TrainConfig& base, int workers) {
  if (seeds.empty()) throw std::invalid_argument("grid_search: need at least one seed");
  if (workers <= 0)
    workers = std::max(1u, std::thread::hardware_concurrency());

  struct Job {
    double lambda, gamma;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double lam : lambda_grid)
    for (double gam : gamma_grid)
      for (uint64_t s : seeds) jobs.push_back({lam, gam, s});

  std::vector<MetricsReport> reports(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t j = next.fetch_add(1); j < jobs.size(); j = next.fetch_add(1)) {
      TrainConfig cfg = base;
      cfg.lambda = jobs[j].lambda;
      cfg.gamma = jobs[j].gamma;
      cfg.seed = jobs[j].seed;
      const Split split = make_split(dataset, jobs[j].seed);
      reports[j] = train(dataset, split, cfg).test_metrics;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::vector<GridCell> cells;
  size_t j = 0;
  for (double lam : lambda_grid)
    for (double gam : gamma_grid) {
      GridCell cell;
      cell.lambda = lam;
      cell.gamma = gam;
      std::vector<double> eo, sp, acc, f1ma, f1mi;
      for (size_t s = 0; s < seeds.size(); ++s, ++j) {
        cell.per_seed.push_back(reports[j]);
        eo.push_back(reports[j].delta_eo);
        sp.push_back(reports[j].delta_sp);
        acc.push_back(reports[j].acc);
        f1ma.push_back(reports[j].f1_macro);
        f1mi.push_back(reports[j].f1_micro);
      }
      cell.delta_eo = mean_stderr(eo);
      cell.delta_sp = mean_stderr(sp);
      cell.acc = mean_stderr(acc);
      cell.f1_macro = mean_stderr(f1ma);
      cell.f1_micro = mean_stderr(f1mi);
      cells.push_back(std::move(cell));
    }
  return cells;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write history: " + path);
  out << "epoch,l_task,l_adv,l_cov,val_loss\n";
  out.precision(10);
  for (size_t e = 0; e < history.size(); ++e)
    out << (e + 1) << "," << history[e].l_task << "," << history[e].l_adv << ","
        << history[e].l_cov << "," << history[e].val_loss << "\n";
}

}  // namespace eqg
