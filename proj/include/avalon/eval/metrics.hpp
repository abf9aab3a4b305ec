#pragma once

// Scoring: confusion matrices and per-class F1 over {good, evil, merlin},
// Merlin final/anytime rates, strategy F1 and the random baseline.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "avalon/data/labels.hpp"
#include "avalon/game/rng.hpp"
#include "avalon/game/types.hpp"

namespace avalon {

inline constexpr std::array<Label, 3> kScoredLabels = {Label::Good, Label::Evil, Label::Merlin};

inline int label_index(Label l) {
  switch (l) {
    case Label::Good: return 0;
    case Label::Evil: return 1;
    case Label::Merlin: return 2;
    case Label::Unknown: break;
  }
  throw std::invalid_argument("unknown is not a scored label");
}

inline double f1_from_counts(double tp, double fp, double fn) {
  const double denom = 2 * tp + fp + fn;
  return denom > 0 ? 2 * tp / denom : 0.0;
}

// Rows are the true label, columns the prediction. An absent prediction
// (abstention or schema failure) is a recall miss that predicts nothing.
struct ConfusionMatrix {
  std::array<std::array<long, 3>, 3> counts{};
  std::array<long, 3> abstained{};

  void add(Label truth, std::optional<Label> prediction) {
    const int r = label_index(truth);
    if (prediction && *prediction != Label::Unknown) ++counts[r][label_index(*prediction)];
    else ++abstained[r];
  }

  void merge(const ConfusionMatrix& o) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) counts[r][c] += o.counts[r][c];
      abstained[r] += o.abstained[r];
    }
  }

  long row_total(int r) const { return counts[r][0] + counts[r][1] + counts[r][2] + abstained[r]; }
  long column_total(int c) const { return counts[0][c] + counts[1][c] + counts[2][c]; }

  double f1(Label l) const {
    const int k = label_index(l);
    const double tp = static_cast<double>(counts[k][k]);
    return f1_from_counts(tp, static_cast<double>(column_total(k)) - tp, static_cast<double>(row_total(k)) - tp);
  }

  // Row-normalized rates; a row without occurrences stays zero.
  std::array<std::array<double, 3>, 3> row_rates() const {
    std::array<std::array<double, 3>, 3> out{};
    for (int r = 0; r < 3; ++r) {
      const long n = row_total(r);
      for (int c = 0; c < 3; ++c) out[r][c] = n ? static_cast<double>(counts[r][c]) / static_cast<double>(n) : 0.0;
    }
    return out;
  }

  bool operator==(const ConfusionMatrix&) const = default;
};

struct F1Triple {
  double good = 0;
  double evil = 0;
  double merlin = 0;
};

using LabelRow = std::array<std::optional<Label>, kNumPlayers>;
using TruthRow = std::array<Label, kNumPlayers>;

inline ConfusionMatrix confusion_matrix(const std::vector<LabelRow>& predictions, const std::vector<TruthRow>& truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("predictions and truths differ in length: " + std::to_string(predictions.size()) +
                                " vs " + std::to_string(truths.size()));
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truths.size(); ++i)
    for (int p = 0; p < kNumPlayers; ++p) m.add(truths[i][p], predictions[i][p]);
  return m;
}

inline F1Triple f1_triple(const ConfusionMatrix& m) {
  return {m.f1(Label::Good), m.f1(Label::Evil), m.f1(Label::Merlin)};
}

// Per-class F1, pooled over every player, game and run.
inline F1Triple f1_by_group(const std::vector<LabelRow>& predictions, const std::vector<TruthRow>& truths) {
  return f1_triple(confusion_matrix(predictions, truths));
}

struct MerlinScore {
  double final = 0;
  double anytime = 0;
  bool valid = false;
};

// `picks` in round order; an absent pick (schema failure) is never correct.
inline MerlinScore merlin_final_anytime(const std::vector<std::optional<PlayerId>>& picks, PlayerId merlin) {
  MerlinScore s;
  if (picks.empty()) return s;
  s.valid = true;
  s.final = picks.back() == merlin ? 1.0 : 0.0;
  for (const auto& p : picks)
    if (p == merlin) s.anytime = 1.0;
  return s;
}

struct StrategyScores {
  std::array<double, 8> per_class{};
  double micro = 0;
  std::size_t evaluated = 0;
  std::size_t unlabeled = 0;  // excluded: no gold label
};

// Schema failures (absent predictions) count as wrong. With one prediction
// per utterance, micro precision and recall coincide with accuracy.
inline StrategyScores strategy_micro_f1(const std::vector<std::optional<Persuasion>>& predictions,
                                        const std::vector<std::optional<Persuasion>>& gold) {
  if (predictions.size() != gold.size()) throw std::invalid_argument("predictions and gold differ in length");
  StrategyScores s;
  std::array<double, 8> tp{}, fp{}, fn{};
  double correct = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (!gold[i]) {
      ++s.unlabeled;
      continue;
    }
    ++s.evaluated;
    const int g = static_cast<int>(*gold[i]);
    if (predictions[i] && *predictions[i] == *gold[i]) {
      ++tp[g];
      ++correct;
    } else {
      ++fn[g];
      if (predictions[i]) ++fp[static_cast<int>(*predictions[i])];
    }
  }
  for (int c = 0; c < 8; ++c) s.per_class[c] = f1_from_counts(tp[c], fp[c], fn[c]);
  s.micro = s.evaluated ? correct / static_cast<double>(s.evaluated) : 0.0;
  return s;
}

struct BaselineReport {
  F1Triple f1;
  double final = 0;
  double anytime = 0;
  ConfusionMatrix confusion;
  long trials = 0;
  int rounds = 0;
};

// Role guesser: a uniformly random permutation of the true label multiset.
// Merlin guesser: an independent uniform seat every round.
inline BaselineReport random_baseline(long n_trials, int n_rounds, std::uint64_t seed) {
  if (n_trials <= 0 || n_rounds <= 0) throw std::invalid_argument("trials and rounds must be positive");
  SplitMix64 rng(seed);
  BaselineReport r;
  r.trials = n_trials;
  r.rounds = n_rounds;
  long final_hits = 0, anytime_hits = 0;
  std::array<Label, kNumPlayers> base{Label::Merlin, Label::Good, Label::Good, Label::Good, Label::Evil, Label::Evil};
  for (long t = 0; t < n_trials; ++t) {
    TruthRow truth = base;
    rng.shuffle(truth.begin(), truth.end());
    TruthRow guess = truth;
    rng.shuffle(guess.begin(), guess.end());
    for (int p = 0; p < kNumPlayers; ++p) r.confusion.add(truth[p], guess[p]);

    const auto merlin = static_cast<std::uint64_t>(std::find(truth.begin(), truth.end(), Label::Merlin) - truth.begin());
    bool any = false, last = false;
    for (int k = 0; k < n_rounds; ++k) {
      last = rng.below(kNumPlayers) == merlin;
      any = any || last;
    }
    final_hits += last;
    anytime_hits += any;
  }
  r.f1 = f1_triple(r.confusion);
  r.final = static_cast<double>(final_hits) / static_cast<double>(n_trials);
  r.anytime = static_cast<double>(anytime_hits) / static_cast<double>(n_trials);
  return r;
}

}  // namespace avalon
