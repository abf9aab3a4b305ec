#pragma once

// Metrics from persisted prediction transcripts, and the tabular report.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <tuple>
#include <ostream>
#include <sstream>

#include "avalon/eval/metrics.hpp"
#include "avalon/game/serialize.hpp"

namespace avalon {

struct MetricsReport {
  std::string task;
  std::string mode;
  std::string modality;
  std::string model;
  int runs = 0;
  int games = 0;
  std::size_t queries = 0;
  double validity = 0;  // share of query chains that ended in a valid prediction

  std::optional<F1Triple> f1;
  std::optional<ConfusionMatrix> confusion;
  std::optional<double> final;
  std::optional<double> anytime;
  std::optional<StrategyScores> strategy;

  std::vector<std::pair<std::string, double>> rows() const {
    std::vector<std::pair<std::string, double>> out;
    if (f1) {
      out.emplace_back("f1_good", f1->good);
      out.emplace_back("f1_evil", f1->evil);
      out.emplace_back("f1_merlin", f1->merlin);
    }
    if (final) out.emplace_back("merlin_final", *final);
    if (anytime) out.emplace_back("merlin_anytime", *anytime);
    if (strategy) {
      out.emplace_back("strategy_micro_f1", strategy->micro);
      for (Persuasion p : kAllPersuasion)
        out.emplace_back("strategy_f1_" + std::string(persuasion_id(p)), strategy->per_class[static_cast<int>(p)]);
    }
    out.emplace_back("validity", validity);
    return out;
  }
};

struct TranscriptError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::vector<json> read_transcripts(const std::filesystem::path& path) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& e : std::filesystem::directory_iterator(path))
      if (e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  std::vector<json> out;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw TranscriptError("cannot open " + f.string());
    int n = 0;
    for (std::string line; std::getline(in, line);) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) throw TranscriptError(f.string() + ":" + std::to_string(n) + ": not a JSON object");
      out.push_back(std::move(j));
    }
  }
  return out;
}

namespace detail {

inline std::optional<Label> scored_label(const json& v) {
  if (!v.is_string()) return std::nullopt;
  auto l = parse_label(v.get<std::string>());
  if (!l || *l == Label::Unknown) return std::nullopt;
  return l;
}

inline TruthRow truth_row(const json& truth) {
  TruthRow row{};
  for (PlayerId p : all_players()) {
    auto l = scored_label(truth.at(p.key()));
    if (!l) throw TranscriptError("truth for " + p.key() + " is not a scored label");
    row[p.index()] = *l;
  }
  return row;
}

inline LabelRow prediction_row(const json& prediction) {
  LabelRow row{};
  if (prediction.is_object())
    for (PlayerId p : all_players())
      if (prediction.contains(p.key())) row[p.index()] = scored_label(prediction[p.key()]);
  return row;
}

}  // namespace detail

// Groups records by (task, mode, modality, model). Roles are scored on the
// last eval point of each (game, run); Merlin on the ordered per-round picks.
inline std::vector<MetricsReport> evaluate_transcripts(const std::vector<json>& records) {
  using Key = std::tuple<std::string, std::string, std::string, std::string>;
  std::map<Key, std::vector<const json*>> groups;
  try {
    for (const auto& r : records)
      groups[{r.at("task").get<std::string>(), r.at("mode").get<std::string>(), r.at("modality").get<std::string>(),
              r.at("model").get<std::string>()}]
          .push_back(&r);
  } catch (const json::exception& e) {
    throw TranscriptError(std::string("transcript record: ") + e.what());
  }

  std::vector<MetricsReport> out;
  for (const auto& [key, recs] : groups) {
    MetricsReport m;
    std::tie(m.task, m.mode, m.modality, m.model) = key;
    m.queries = recs.size();
    std::size_t valid = 0;
    std::set<std::string> games;
    std::set<int> runs;
    // (game, run) -> records ordered by eval point
    std::map<std::pair<std::string, int>, std::map<int, const json*>> chains;
    try {
      for (const json* r : recs) {
        valid += r->value("valid", false) ? 1 : 0;
        const std::string game = r->at("game_id").get<std::string>();
        const int run = r->at("run").get<int>();
        games.insert(game);
        runs.insert(run);
        if (m.task != "strategy") chains[{game, run}][r->at("eval_point").get<int>()] = r;
      }
      m.games = static_cast<int>(games.size());
      m.runs = static_cast<int>(runs.size());
      m.validity = recs.empty() ? 0.0 : static_cast<double>(valid) / static_cast<double>(recs.size());

      if (m.task == "roles") {
        std::vector<LabelRow> preds;
        std::vector<TruthRow> truths;
        for (const auto& [unit, steps] : chains) {
          const json& last = *steps.rbegin()->second;
          truths.push_back(detail::truth_row(last.at("truth")));
          preds.push_back(detail::prediction_row(last.at("prediction")));
        }
        m.confusion = confusion_matrix(preds, truths);
        m.f1 = f1_triple(*m.confusion);
      } else if (m.task == "merlin") {
        double final_sum = 0, any_sum = 0;
        for (const auto& [unit, steps] : chains) {
          const auto merlin = PlayerId::parse(steps.begin()->second->at("truth").at("merlin").get<std::string>());
          if (!merlin) throw TranscriptError("truth merlin is not a seat");
          std::vector<std::optional<PlayerId>> picks;
          for (const auto& [t, r] : steps) {
            const json& p = r->at("prediction");
            picks.push_back(p.is_object() && p.contains("merlin") && p["merlin"].is_string()
                                ? PlayerId::parse(p["merlin"].get<std::string>())
                                : std::nullopt);
          }
          const MerlinScore s = merlin_final_anytime(picks, *merlin);
          final_sum += s.final;
          any_sum += s.anytime;
        }
        const double n = static_cast<double>(std::max<std::size_t>(chains.size(), 1));
        m.final = final_sum / n;
        m.anytime = any_sum / n;
      } else if (m.task == "strategy") {
        std::vector<std::optional<Persuasion>> preds, gold;
        for (const json* r : recs) {
          const json& t = r->at("truth");
          gold.push_back(t.is_string() ? parse_persuasion(t.get<std::string>()) : std::nullopt);
          const json& p = r->at("prediction");
          preds.push_back(p.is_object() && p.contains("strategy") && p["strategy"].is_string()
                              ? parse_persuasion(p["strategy"].get<std::string>())
                              : std::nullopt);
        }
        m.strategy = strategy_micro_f1(preds, gold);
      } else {
        throw TranscriptError("unknown task '" + m.task + "'");
      }
    } catch (const json::exception& e) {
      throw TranscriptError(std::string("transcript record: ") + e.what());
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline void write_report_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  out << "task,mode,modality,model,runs,games,metric,value\n";
  for (const auto& r : reports)
    for (const auto& [metric, value] : r.rows())
      out << r.task << ',' << r.mode << ',' << r.modality << ',' << r.model << ',' << r.runs << ',' << r.games << ','
          << metric << ',' << value << "\n";
}

inline void write_confusion_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  out << "task,mode,modality,model,truth,pred_good,pred_evil,pred_merlin,abstained,rate_good,rate_evil,rate_merlin\n";
  for (const auto& r : reports) {
    if (!r.confusion) continue;
    const auto rates = r.confusion->row_rates();
    for (int row = 0; row < 3; ++row) {
      out << r.task << ',' << r.mode << ',' << r.modality << ',' << r.model << ','
          << label_name(kScoredLabels[row]);
      for (int c = 0; c < 3; ++c) out << ',' << r.confusion->counts[row][c];
      out << ',' << r.confusion->abstained[row];
      for (int c = 0; c < 3; ++c) out << ',' << rates[row][c];
      out << "\n";
    }
  }
}

// One row per (mode, modality, model) joining role F1 with the Merlin
// final/anytime scores; cells without data stay empty.
inline void write_table2_csv(std::ostream& out, const std::vector<MetricsReport>& reports) {
  struct Row {
    std::optional<F1Triple> f1;
    std::optional<double> final, anytime;
  };
  std::map<std::tuple<std::string, std::string, std::string>, Row> rows;
  for (const auto& r : reports) {
    if (r.task == "strategy") continue;
    Row& row = rows[{r.model, r.mode, r.modality}];
    if (r.f1) row.f1 = r.f1;
    if (r.final) row.final = r.final;
    if (r.anytime) row.anytime = r.anytime;
  }
  auto cell = [](const std::optional<double>& v) {
    if (!v) return std::string();
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << *v;
    return os.str();
  };
  out << "model,mode,modality,good,evil,merlin,final,anytime\n";
  for (const auto& [key, row] : rows) {
    const auto& [model, mode, modality] = key;
    out << model << ',' << mode << ',' << modality << ',' << cell(row.f1 ? std::optional(row.f1->good) : std::nullopt)
        << ',' << cell(row.f1 ? std::optional(row.f1->evil) : std::nullopt) << ','
        << cell(row.f1 ? std::optional(row.f1->merlin) : std::nullopt) << ',' << cell(row.final) << ','
        << cell(row.anytime) << "\n";
  }
}

}  // namespace avalon
