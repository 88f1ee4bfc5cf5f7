#include "eqg/discriminator.hpp"

#include <stdexcept>

namespace eqg {

LossVariant parse_loss_variant(const std::string& name) {
  if (name == "permutation") return LossVariant::kPermutation;
  if (name == "permutation_no_h") return LossVariant::kPermutationNoH;
  if (name == "unpaired") return LossVariant::kUnpaired;
  if (name == "paired") return LossVariant::kPaired;
  if (name == "debias") return LossVariant::kDebias;
  if (name == "sp") return LossVariant::kSp;
  throw std::invalid_argument("unknown loss variant: " + name);
}

std::string loss_variant_name(LossVariant v) {
  switch (v) {
    case LossVariant::kPermutation: return "permutation";
    case LossVariant::kPermutationNoH: return "permutation_no_h";
    case LossVariant::kUnpaired: return "unpaired";
    case LossVariant::kPaired: return "paired";
    case LossVariant::kDebias: return "debias";
    case LossVariant::kSp: return "sp";
  }
  return "?";
}

bool variant_uses_dummies(LossVariant v) {
  return v == LossVariant::kPermutation || v == LossVariant::kPermutationNoH ||
         v == LossVariant::kUnpaired || v == LossVariant::kPaired;
}

PermutationBatch build_permutation_batch(const std::vector<int>& real_attr,
                                         const std::vector<int>& dummy_attr,
                                         const std::vector<int>& rows, Rng& rng) {
  if (real_attr.size() != dummy_attr.size())
    throw std::invalid_argument("build_permutation_batch: sequence lengths differ");
  PermutationBatch b;
  const size_t n = real_attr.size();
  b.bits.assign(n, 0);
  b.first_attr.assign(n, 0.0);
  b.second_attr.assign(n, 0.0);
  b.rows = rows;
  for (int i : rows) {
    const int bit = rng.bernoulli(0.5);
    b.bits[i] = bit;
    b.first_attr[i] = bit == 0 ? real_attr[i] : dummy_attr[i];
    b.second_attr[i] = bit == 0 ? dummy_attr[i] : real_attr[i];
  }
  return b;
}

ParamCollection init_discriminator(int input_width, int hidden, Rng& rng) {
  if (input_width <= 0)
    throw std::invalid_argument("init_discriminator: input width must be positive, got " +
                                std::to_string(input_width));
  ParamCollection pc;
  pc.add_glorot("V1", input_width, hidden, rng);
  pc.add_zeros("c1", 1, hidden);
  pc.add_glorot("V2", hidden, hidden, rng);
  pc.add_zeros("c2", 1, hidden);
  pc.add_glorot("V_head", hidden, 1, rng);
  pc.add_zeros("c_head", 1, 1);
  return pc;
}

int disc_input_width(LossVariant v, int class_count, int hidden_width) {
  switch (v) {
    case LossVariant::kPermutation: return class_count + 2 + class_count + hidden_width;
    case LossVariant::kPermutationNoH: return class_count + 2 + class_count;
    case LossVariant::kUnpaired:
    case LossVariant::kPaired: return class_count + 1 + class_count + hidden_width;
    case LossVariant::kDebias: return class_count + class_count;
    case LossVariant::kSp: return hidden_width;
  }
  return 0;
}

namespace {

Tensor onehot_block(const std::vector<int>& labels, int class_count,
                    const std::vector<int>& rows, int extra_cols) {
  Tensor t(static_cast<int>(labels.size()), class_count + extra_cols);
  for (int i : rows) t.at(i, labels[i]) = 1.0;
  return t;
}

}  // namespace

Tape::Id make_permutation_input(Tape& tape, const std::vector<int>& labels,
                                int class_count, const PermutationBatch& batch,
                                Tape::Id probs, Tape::Id hidden) {
  Tensor block = onehot_block(labels, class_count, batch.rows, 2);
  for (int i : batch.rows) {
    block.at(i, class_count) = batch.first_attr[i];
    block.at(i, class_count + 1) = batch.second_attr[i];
  }
  std::vector<Tape::Id> parts{tape.constant(block), probs};
  if (hidden >= 0) parts.push_back(hidden);
  return tape.concat_cols(parts);
}

Tape::Id make_single_attr_input(Tape& tape, const std::vector<int>& labels,
                                int class_count, const std::vector<double>& attr,
                                const std::vector<int>& rows, Tape::Id probs,
                                Tape::Id hidden) {
  Tensor block = onehot_block(labels, class_count, rows, 1);
  for (int i : rows) block.at(i, class_count) = attr[i];
  std::vector<Tape::Id> parts{tape.constant(block), probs};
  if (hidden >= 0) parts.push_back(hidden);
  return tape.concat_cols(parts);
}

Tape::Id make_debias_input(Tape& tape, const std::vector<int>& labels, int class_count,
                           const std::vector<int>& rows, Tape::Id probs) {
  return tape.concat_cols({tape.constant(onehot_block(labels, class_count, rows, 0)),
                           probs});
}

Tape::Id disc_forward(Tape& tape, const BoundParams& params, const SparseCsr* adjacency,
                      Tape::Id input) {
  const Tape::Id z1 = tape.relu(tape.add_row(
      tape.spmm(adjacency, tape.matmul(input, params["V1"])), params["c1"]));
  const Tape::Id z2 = tape.add_row(
      tape.spmm(adjacency, tape.matmul(z1, params["V2"])), params["c2"]);
  const Tape::Id score = tape.add_row(tape.matmul(z2, params["V_head"]), params["c_head"]);
  return tape.sigmoid(score);
}

AdvLosses adv_losses(Tape& tape, Tape::Id lhat, const std::vector<int>& bits,
                     const std::vector<int>& rows) {
  std::vector<double> target(bits.size(), 0.0);
  std::vector<double> flipped(bits.size(), 0.0);
  for (size_t i = 0; i < bits.size(); ++i) {
    target[i] = static_cast<double>(bits[i]);
    flipped[i] = 1.0 - target[i];
  }
  return {tape.bce_masked(lhat, target, rows), tape.bce_masked(lhat, flipped, rows)};
}

AdvLosses unpaired_adv_losses(Tape& tape, Tape::Id lhat_real, Tape::Id lhat_dummy,
                              const std::vector<int>& rows) {
  const std::vector<double> ones(tape.value(lhat_real).rows, 1.0);
  const std::vector<double> zeros(tape.value(lhat_real).rows, 0.0);
  const Tape::Id d = tape.scale(
      tape.add(tape.bce_masked(lhat_real, ones, rows),
               tape.bce_masked(lhat_dummy, zeros, rows)),
      0.5);
  const Tape::Id f = tape.scale(
      tape.add(tape.bce_masked(lhat_real, zeros, rows),
               tape.bce_masked(lhat_dummy, ones, rows)),
      0.5);
  return {d, f};
}

AdvLosses paired_adv_losses(Tape& tape, Tape::Id lhat_real, Tape::Id lhat_dummy,
                            const std::vector<int>& rows) {
  const Tape::Id diff = tape.sub(tape.masked_mean(lhat_real, rows),
                                 tape.masked_mean(lhat_dummy, rows));
  return {tape.scale(diff, -1.0), diff};  // D maximizes the difference
}

AdvLosses attribute_adv_losses(Tape& tape, Tape::Id lhat,
                               const std::vector<int>& sensitive,
                               const std::vector<int>& rows) {
  return adv_losses(tape, lhat, sensitive, rows);
}

Tape::Id cov_loss(Tape& tape, Tape::Id probs, const std::vector<double>& real_attr,
                  const std::vector<double>& dummy_attr, const std::vector<int>& rows) {
  const Tape::Id diff = tape.sub(tape.cov_cols(probs, real_attr, rows),
                                 tape.cov_cols(probs, dummy_attr, rows));
  return tape.sum(tape.square(diff));
}

std::vector<double> to_real(const std::vector<int>& xs) {
  std::vector<double> out(xs.size());
  for (size_t i = 0; i < xs.size(); ++i) out[i] = static_cast<double>(xs[i]);
  return out;
}

}  // namespace eqg
