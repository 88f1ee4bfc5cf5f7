#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "eqg/classifier.hpp"
#include "eqg/datagen.hpp"
#include "eqg/discriminator.hpp"
#include "eqg/gradcheck.hpp"
#include "eqg/graph_data.hpp"

using namespace eqg;

namespace {

GraphDataset small_graph(uint64_t seed, int nodes = 12, int features = 4) {
  SynthConfig cfg;
  cfg.nodes = nodes;
  cfg.features = features;
  cfg.edges = nodes * 2;
  return generate_synthetic(cfg, seed);
}

Tensor dense_adj(const SparseCsr& s) {
  Tensor d(s.rows, s.cols);
  for (int i = 0; i < s.rows; ++i)
    for (int k = s.ptr[i]; k < s.ptr[i + 1]; ++k) d.at(i, s.idx[k]) = s.val[k];
  return d;
}

/// Dense re-implementation of the forward pass as an independent oracle.
std::pair<Tensor, Tensor> dense_forward(const ParamCollection& pc,
                                        const GraphDataset& ds) {
  Tensor a = dense_adj(ds.adjacency);
  auto add_bias = [](Tensor m, const Tensor& b) {
    for (int r = 0; r < m.rows; ++r)
      for (int c = 0; c < m.cols; ++c) m.at(r, c) += b.at(0, c);
    return m;
  };
  Tensor a1 = add_bias(matmul(a, matmul(ds.feature_matrix, pc.at("W1").value)),
                       pc.at("b1").value);
  for (double& x : a1.v) x = std::max(0.0, x);
  Tensor hidden = add_bias(matmul(a, matmul(a1, pc.at("W2").value)), pc.at("b2").value);
  Tensor logits = add_bias(matmul(hidden, pc.at("W_head").value), pc.at("b_head").value);
  return {logits, hidden};
}


/// A relu kink inside the finite-difference interval looks like a gradient
/// mismatch but shrinks away with the step; a wrong gradient does not.
bool fd_ok(const std::function<double()>& loss, ParamCollection& pc) {
  if (check_gradients(loss, pc, 1e-4).failures.empty()) return true;
  return check_gradients(loss, pc, 1e-4, 1e-6).failures.empty();
}

}  // namespace

TEST_CASE("classifier forward matches a dense oracle") {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    GraphDataset ds = small_graph(seed);
    Rng rng(seed);
    ParamCollection pc = init_classifier({ds.feature_dim, ds.class_count, 5, 3}, rng);
    Tape tape;
    BoundParams bp = BoundParams::bind(tape, pc);
    ClassifierOut out = classifier_forward(tape, bp, ds);
    auto [logits, hidden] = dense_forward(pc, ds);
    REQUIRE(tape.value(out.logits).same_shape(logits));
    REQUIRE(tape.value(out.hidden).same_shape(hidden));
    for (size_t i = 0; i < logits.size(); ++i)
      CHECK(tape.value(out.logits).v[i] == doctest::Approx(logits.v[i]).epsilon(1e-10));
    for (size_t i = 0; i < hidden.size(); ++i)
      CHECK(tape.value(out.hidden).v[i] == doctest::Approx(hidden.v[i]).epsilon(1e-10));
  }
}

TEST_CASE("classifier is equivariant to node relabeling") {
  GraphDataset ds = small_graph(3);
  int n = ds.node_count;
  // reversal permutation
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = n - 1 - i;

  GraphDataset pds = ds;
  for (int i = 0; i < n; ++i) {
    pds.labels[perm[i]] = ds.labels[i];
    pds.sensitive[perm[i]] = ds.sensitive[i];
    for (int c = 0; c < ds.feature_dim; ++c)
      pds.feature_matrix.at(perm[i], c) = ds.feature_matrix.at(i, c);
  }
  std::vector<std::pair<int, int>> pedges;
  for (int i = 0; i < n; ++i)
    for (int k = ds.adjacency.ptr[i]; k < ds.adjacency.ptr[i + 1]; ++k)
      if (ds.adjacency.idx[k] > i) pedges.push_back({perm[i], perm[ds.adjacency.idx[k]]});
  pds.adjacency = normalized_adjacency(n, pedges);

  Rng rng(3);
  ParamCollection pc = init_classifier({ds.feature_dim, ds.class_count, 6, 4}, rng);
  Tape t1, t2;
  BoundParams b1 = BoundParams::bind(t1, pc);
  BoundParams b2 = BoundParams::bind(t2, pc);
  const Tensor& base = t1.value(classifier_forward(t1, b1, ds).logits);
  const Tensor& permuted = t2.value(classifier_forward(t2, b2, pds).logits);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < ds.class_count; ++c)
      CHECK(permuted.at(perm[i], c) == doctest::Approx(base.at(i, c)).epsilon(1e-10));
}

TEST_CASE("classifier gradients pass finite differences") {
  for (int trial = 0; trial < 10; ++trial) {
    GraphDataset ds = small_graph(100 + trial, 8 + trial, 3);
    Rng rng(trial);
    ParamCollection pc = init_classifier({ds.feature_dim, ds.class_count, 4, 3}, rng);
    std::vector<int> rows;
    for (int i = 0; i < ds.node_count; i += 2) rows.push_back(i);

    auto run = [&](bool backward) {
      Tape tape;
      BoundParams bp = BoundParams::bind(tape, pc);
      ClassifierOut out = classifier_forward(tape, bp, ds);
      Tape::Id loss = task_loss(tape, out.logits, ds.labels, rows);
      if (backward) {
        tape.backward(loss);
        pc.zero_grads();
        bp.pull_grads(tape);
      }
      return tape.value(loss).at(0, 0);
    };
    run(true);
    CAPTURE(trial);
    CHECK(fd_ok([&] { return run(false); }, pc));
  }
}

TEST_CASE("argmax_rows picks the max column") {
  Tensor t(2, 3, {0.1, 0.7, 0.2, 0.5, 0.1, 0.4});
  CHECK(argmax_rows(t) == std::vector<int>{1, 0});
}

TEST_CASE("loss variant names roundtrip and widths are as designed") {
  for (auto v : {LossVariant::kPermutation, LossVariant::kPermutationNoH,
                 LossVariant::kUnpaired, LossVariant::kPaired, LossVariant::kDebias,
                 LossVariant::kSp})
    CHECK(parse_loss_variant(loss_variant_name(v)) == v);
  CHECK_THROWS_AS(parse_loss_variant("nonsense"), std::invalid_argument);

  const int k = 3, h = 16;
  // [onehot(Y) || first || second || Y_hat || h]
  CHECK(disc_input_width(LossVariant::kPermutation, k, h) == k + 1 + 1 + k + h);
  CHECK(disc_input_width(LossVariant::kPermutationNoH, k, h) == k + 1 + 1 + k);
  // [onehot(Y) || attr || Y_hat || h]
  CHECK(disc_input_width(LossVariant::kUnpaired, k, h) == k + 1 + k + h);
  CHECK(disc_input_width(LossVariant::kPaired, k, h) == k + 1 + k + h);
  // [onehot(Y) || Y_hat]
  CHECK(disc_input_width(LossVariant::kDebias, k, h) == k + k);
  CHECK(disc_input_width(LossVariant::kSp, k, h) == h);

  CHECK(variant_uses_dummies(LossVariant::kPermutation));
  CHECK(variant_uses_dummies(LossVariant::kUnpaired));
  CHECK(!variant_uses_dummies(LossVariant::kDebias));
  CHECK(!variant_uses_dummies(LossVariant::kSp));
}

TEST_CASE("init_discriminator rejects a zero input width") {
  Rng rng(1);
  CHECK_THROWS_AS(init_discriminator(0, 8, rng), std::invalid_argument);
}

TEST_CASE("permutation batch swaps exactly where the bit is set") {
  std::vector<int> real{1, 0, 1, 0, 1};
  std::vector<int> dummy{0, 1, 1, 1, 0};
  std::vector<int> rows{0, 1, 2, 4};
  Rng rng(7);
  PermutationBatch b = build_permutation_batch(real, dummy, rows, rng);
  CHECK(b.rows == rows);
  for (int r : rows) {
    if (b.bits[r] == 0) {
      CHECK(b.first_attr[r] == real[r]);
      CHECK(b.second_attr[r] == dummy[r]);
    } else {
      CHECK(b.first_attr[r] == dummy[r]);
      CHECK(b.second_attr[r] == real[r]);
    }
  }
  // row 3 is not in the loss set
  CHECK(b.first_attr[3] == 0.0);
  CHECK(b.second_attr[3] == 0.0);
}

TEST_CASE("identical real and dummy attributes make the bit unlearnable") {
  // when A == A~, the discriminator input is the same tensor whichever way
  // the bits fall, so its output cannot depend on the bit
  GraphDataset ds = small_graph(4);
  std::vector<int> rows;
  for (int i = 0; i < ds.node_count; ++i) rows.push_back(i);
  Rng rng(9);
  ParamCollection dpc = init_discriminator(
      disc_input_width(LossVariant::kPermutationNoH, ds.class_count, 0), 6, rng);

  Rng bits1(1), bits2(2);
  PermutationBatch b1 = build_permutation_batch(ds.sensitive, ds.sensitive, rows, bits1);
  PermutationBatch b2 = build_permutation_batch(ds.sensitive, ds.sensitive, rows, bits2);
  REQUIRE(b1.bits != b2.bits);

  auto lhat = [&](const PermutationBatch& b) {
    Tape tape;
    BoundParams d = BoundParams::bind(tape, dpc);
    Tape::Id input = make_permutation_input(tape, ds.labels, ds.class_count, b,
                                            tape.constant(Tensor(ds.node_count,
                                                                 ds.class_count)),
                                            -1);
    return tape.value(disc_forward(tape, d, &ds.adjacency, input));
  };
  Tensor p1 = lhat(b1);
  Tensor p2 = lhat(b2);
  for (size_t i = 0; i < p1.size(); ++i) CHECK(p1.v[i] == p2.v[i]);
}

TEST_CASE("adversarial losses: classifier side is the bit-flipped objective") {
  Tape tape;
  Tape::Id lhat = tape.constant(Tensor(3, 1, {0.8, 0.3, 0.6}));
  std::vector<int> bits{1, 0, 1};
  std::vector<int> rows{0, 1, 2};
  AdvLosses l = adv_losses(tape, lhat, bits, rows);
  double d_want = -(std::log(0.8) + std::log(1 - 0.3) + std::log(0.6)) / 3;
  double f_want = -(std::log(1 - 0.8) + std::log(0.3) + std::log(1 - 0.6)) / 3;
  CHECK(tape.value(l.disc_loss).at(0, 0) == doctest::Approx(d_want).epsilon(1e-12));
  CHECK(tape.value(l.classifier_loss).at(0, 0) == doctest::Approx(f_want).epsilon(1e-12));
}

TEST_CASE("paired loss is an exact zero-sum pair") {
  Tape tape;
  Tape::Id real = tape.constant(Tensor(2, 1, {0.9, 0.2}));
  Tape::Id dummy = tape.constant(Tensor(2, 1, {0.4, 0.6}));
  std::vector<int> rows{0, 1};
  AdvLosses l = paired_adv_losses(tape, real, dummy, rows);
  CHECK(tape.value(l.disc_loss).at(0, 0) ==
        doctest::Approx(-tape.value(l.classifier_loss).at(0, 0)).epsilon(1e-12));
}

TEST_CASE("covariance loss vanishes when dummies equal the real attribute") {
  Tape tape;
  Rng rng(5);
  Tensor probs(6, 2);
  for (double& x : probs.v) x = rng.uniform();
  std::vector<double> attr{1, 0, 1, 1, 0, 0};
  std::vector<int> rows{0, 1, 2, 3, 4, 5};
  Tape::Id c = cov_loss(tape, tape.constant(probs), attr, attr, rows);
  CHECK(tape.value(c).at(0, 0) == doctest::Approx(0.0).epsilon(1e-15));

  std::vector<double> other{0, 1, 1, 0, 1, 0};
  Tape::Id c2 = cov_loss(tape, tape.constant(probs), attr, other, rows);
  CHECK(tape.value(c2).at(0, 0) > 0.0);
}

TEST_CASE("every adversarial variant passes finite differences end to end") {
  for (auto variant : {LossVariant::kPermutation, LossVariant::kPermutationNoH,
                       LossVariant::kUnpaired, LossVariant::kPaired,
                       LossVariant::kDebias, LossVariant::kSp}) {
    for (int trial = 0; trial < 4; ++trial) {
      GraphDataset ds = small_graph(40 + trial, 10, 3);
      int h2 = 4;
      Rng frng(trial), drng(trial + 50);
      ParamCollection fpc = init_classifier({ds.feature_dim, ds.class_count, 4, h2}, frng);
      ParamCollection dpc = init_discriminator(
          disc_input_width(variant, ds.class_count, h2), 5, drng);
      std::vector<int> rows;
      for (int i = 0; i < ds.node_count; i += 2) rows.push_back(i);
      std::vector<int> dummy(ds.node_count);
      Rng dumr(trial + 9);
      for (int i : rows) dummy[i] = dumr.bernoulli(0.5);
      Rng bitr(trial + 17);
      PermutationBatch batch = build_permutation_batch(ds.sensitive, dummy, rows, bitr);

      auto run = [&](bool back_f, bool back_d) {
        Tape tape;
        BoundParams f = BoundParams::bind(tape, fpc);
        BoundParams d = BoundParams::bind(tape, dpc);
        ClassifierOut out = classifier_forward(tape, f, ds);
        Tape::Id probs = tape.softmax_rows(out.logits);
        AdvLosses l;
        switch (variant) {
          case LossVariant::kPermutation:
          case LossVariant::kPermutationNoH: {
            Tape::Id hid = variant == LossVariant::kPermutation ? out.hidden : -1;
            Tape::Id in = make_permutation_input(tape, ds.labels, ds.class_count,
                                                 batch, probs, hid);
            l = adv_losses(tape, disc_forward(tape, d, &ds.adjacency, in), batch.bits,
                           rows);
            break;
          }
          case LossVariant::kUnpaired:
          case LossVariant::kPaired: {
            Tape::Id in_r = make_single_attr_input(tape, ds.labels, ds.class_count,
                                                   to_real(ds.sensitive), rows, probs,
                                                   out.hidden);
            Tape::Id in_d = make_single_attr_input(tape, ds.labels, ds.class_count,
                                                   to_real(dummy), rows, probs,
                                                   out.hidden);
            Tape::Id pr = disc_forward(tape, d, &ds.adjacency, in_r);
            Tape::Id pd = disc_forward(tape, d, &ds.adjacency, in_d);
            l = variant == LossVariant::kUnpaired ? unpaired_adv_losses(tape, pr, pd, rows)
                                                  : paired_adv_losses(tape, pr, pd, rows);
            break;
          }
          case LossVariant::kDebias: {
            Tape::Id in = make_debias_input(tape, ds.labels, ds.class_count, rows, probs);
            l = attribute_adv_losses(tape, disc_forward(tape, d, &ds.adjacency, in),
                                     ds.sensitive, rows);
            break;
          }
          case LossVariant::kSp: {
            l = attribute_adv_losses(tape, disc_forward(tape, d, &ds.adjacency, out.hidden),
                                     ds.sensitive, rows);
            break;
          }
        }
        Tape::Id cov = cov_loss(tape, probs, to_real(ds.sensitive), to_real(dummy), rows);
        Tape::Id total = tape.add(l.classifier_loss, tape.scale(cov, 10.0));
        if (back_f) {
          tape.backward(total);
          fpc.zero_grads();
          f.pull_grads(tape);
        }
        if (back_d) {
          tape.backward(l.disc_loss);
          dpc.zero_grads();
          d.pull_grads(tape);
        }
        return std::make_pair(tape.value(total).at(0, 0),
                              tape.value(l.disc_loss).at(0, 0));
      };

      run(true, false);
      CAPTURE(loss_variant_name(variant));
      CAPTURE(trial);
      CHECK(fd_ok([&] { return run(false, false).first; }, fpc));
      run(false, true);
      CHECK(fd_ok([&] { return run(false, false).second; }, dpc));
    }
  }
}
