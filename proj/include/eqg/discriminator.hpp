#pragma once

#include <string>
#include <vector>

#include "eqg/params.hpp"
#include "eqg/rng.hpp"
#include "eqg/tape.hpp"

namespace eqg {

enum class LossVariant {
  kPermutation,     // default: paired permutation loss with h
  kPermutationNoH,  // permutation loss without the hidden block
  kUnpaired,        // real-vs-dummy binary adversary
  kPaired,          // sigmoid-difference of real/dummy scores
  kDebias,          // adversary predicts A from [Y, Y_hat]
  kSp,              // adversary predicts A from h
};

LossVariant parse_loss_variant(const std::string& name);
std::string loss_variant_name(LossVariant v);
/// Variants that consume dummy attributes (and hence admit the covariance term).
bool variant_uses_dummies(LossVariant v);

/// Per-node permutation bits and the (first, second) attribute ordering:
/// bit 0 keeps (A, A~), bit 1 swaps to (A~, A).
struct PermutationBatch {
  std::vector<int> bits;            // full length; meaningful on `rows`
  std::vector<double> first_attr;   // full length
  std::vector<double> second_attr;  // full length
  std::vector<int> rows;            // loss node set
};

PermutationBatch build_permutation_batch(const std::vector<int>& real_attr,
                                         const std::vector<int>& dummy_attr,
                                         const std::vector<int>& rows, Rng& rng);

/// Discriminator: two graph-convolution layers over the input width plus a
/// scalar sigmoid head.
ParamCollection init_discriminator(int input_width, int hidden, Rng& rng);

/// Width of the discriminator input for a variant, given K and the hidden
/// representation width.
int disc_input_width(LossVariant v, int class_count, int hidden_width);

/// [one-hot(Y) || first || second || Y_hat || h] with the label/attribute
/// blocks populated only on `rows` (zero elsewhere). Pass hidden = -1 for the
/// no-h variant.
Tape::Id make_permutation_input(Tape& tape, const std::vector<int>& labels,
                                int class_count, const PermutationBatch& batch,
                                Tape::Id probs, Tape::Id hidden);

/// [one-hot(Y) || attr || Y_hat || h] for the unpaired/paired variants.
Tape::Id make_single_attr_input(Tape& tape, const std::vector<int>& labels,
                                int class_count, const std::vector<double>& attr,
                                const std::vector<int>& rows, Tape::Id probs,
                                Tape::Id hidden);

/// [one-hot(Y) || Y_hat] (Debias) and [h] (SP-style) adversary inputs.
Tape::Id make_debias_input(Tape& tape, const std::vector<int>& labels, int class_count,
                           const std::vector<int>& rows, Tape::Id probs);

/// Per-node probability column from the discriminator.
Tape::Id disc_forward(Tape& tape, const BoundParams& params, const SparseCsr* adjacency,
                      Tape::Id input);

struct AdvLosses {
  Tape::Id disc_loss;        // minimized by the discriminator
  Tape::Id classifier_loss;  // the flipped form minimized by F
};

/// Permutation variants: BCE(l_hat, l) for D, BCE(l_hat, 1-l) for F.
AdvLosses adv_losses(Tape& tape, Tape::Id lhat, const std::vector<int>& bits,
                     const std::vector<int>& rows);

/// Unpaired: real samples target 1, dummy samples target 0 for D; flipped for F.
AdvLosses unpaired_adv_losses(Tape& tape, Tape::Id lhat_real, Tape::Id lhat_dummy,
                              const std::vector<int>& rows);

/// Paired: mean(sigma(real score) - sigma(dummy score)); D maximizes, F minimizes.
AdvLosses paired_adv_losses(Tape& tape, Tape::Id lhat_real, Tape::Id lhat_dummy,
                            const std::vector<int>& rows);

/// Debias / SP-style: adversary predicts the sensitive attribute.
AdvLosses attribute_adv_losses(Tape& tape, Tape::Id lhat,
                               const std::vector<int>& sensitive,
                               const std::vector<int>& rows);

/// || cov(Y_hat, A) - cov(Y_hat, A~) ||^2 over `rows`.
Tape::Id cov_loss(Tape& tape, Tape::Id probs, const std::vector<double>& real_attr,
                  const std::vector<double>& dummy_attr, const std::vector<int>& rows);

std::vector<double> to_real(const std::vector<int>& xs);

}  // namespace eqg
