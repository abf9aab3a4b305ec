// avalon: testbed server, dataset tools, prediction harness and scoring.

#include <CLI11.hpp>
#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>

#include "avalon/data/export.hpp"
#include "avalon/data/split.hpp"
#include "avalon/data/stats.hpp"
#include "avalon/data/text.hpp"
#include "avalon/eval/human.hpp"
#include "avalon/eval/report.hpp"
#include "avalon/predict/http_endpoint.hpp"
#include "avalon/predict/predictor.hpp"
#include "avalon/server/bots.hpp"
#include "avalon/server/ws_server.hpp"

namespace fs = std::filesystem;
using namespace avalon;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class T, class F>
T parse_or_throw(const std::string& s, F parse, const char* what) {
  auto v = parse(s);
  if (!v) throw UsageError(std::string("unknown ") + what + " '" + s + "'");
  return *v;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw FormatError(path.string() + ": not valid JSON");
  return j;
}

// Logs from a directory, optionally restricted to one side of a manifest.
std::vector<GameLog> select_logs(const fs::path& data, const std::string& manifest, const std::string& which) {
  std::vector<GameLog> logs = read_log_dir(data);
  if (manifest.empty()) return logs;
  const SplitManifest split = load_split(manifest);
  std::vector<GameLog> out;
  for (const auto& id : split.ids(which)) {
    const GameLog* log = find_log(logs, id);
    if (!log) throw std::runtime_error("manifest names '" + id + "' but " + data.string() + " has no such game");
    out.push_back(*log);
  }
  return out;
}

// ---------------------------------------------------------------------------

struct ServeArgs {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;
  double turn_seconds = 200, vote_seconds = 30, assassination_seconds = 200;
  std::string record_dir;
  std::uint64_t seed = 0;
  int rejection_limit = 5;
};

WsServer* g_server = nullptr;

int cmd_serve(const ServeArgs& a) {
  ServerConfig cfg;
  cfg.address = a.address;
  cfg.port = a.port;
  auto ms = [](double s) { return std::chrono::milliseconds(static_cast<long long>(s * 1000)); };
  cfg.session.timing = Timing{ms(a.turn_seconds), ms(a.vote_seconds), ms(a.assassination_seconds)};
  cfg.session.seed = a.seed;
  cfg.session.rejection_limit = a.rejection_limit;
  if (!a.record_dir.empty()) cfg.session.record_dir = fs::path(a.record_dir);
  WsServer server(cfg);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  const auto dir = record_dir(cfg.session.record_dir);
  std::cerr << "listening on ws://" << a.address << ':' << server.port() << "/game/{id}"
            << " (records: " << (dir ? dir->string() : std::string("off")) << ")\n";
  server.run();
  return 0;
}

struct SimulateArgs {
  std::string scenario = "always_approve";
  int games = 1;
  std::uint64_t seed = 0;
  std::string record_dir;
};

int cmd_simulate(const SimulateArgs& a) {
  const BotScenario scenario = parse_or_throw<BotScenario>(a.scenario, parse_scenario, "scenario");
  for (int g = 0; g < a.games; ++g) {
    SessionConfig cfg;
    cfg.game_id = "sim-" + a.scenario + "-" + std::to_string(a.seed + g);
    cfg.seed = a.seed + g;
    if (!a.record_dir.empty()) cfg.record_dir = fs::path(a.record_dir);
    const ScriptedRun run = run_scripted_game(scenario, cfg);
    std::cout << cfg.game_id << ' ' << (run.final_state.winner ? alignment_name(*run.final_state.winner) : "none")
              << ' ' << win_reason_name(run.final_state.win_reason) << ' ' << run.log.events.size() << " events";
    if (run.recorded) std::cout << " -> " << run.recorded->string();
    std::cout << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_ingest(const std::vector<std::string>& inputs, const std::string& out_dir) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in))
        if (e.path().extension() == ".jsonl") files.push_back(e.path());
    } else {
      files.emplace_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  int failed = 0;
  for (const auto& f : files) {
    try {
      const GameLog log = read_log_file(f);
      std::cout << "ok " << f.string() << ' ' << log.game_id << ' ' << log.events.size() << " events "
                << log.utterances.size() << " utterances\n";
      if (!out_dir.empty()) write_log_file(fs::path(out_dir) / (log.game_id + ".jsonl"), log);
    } catch (const LogError& e) {
      ++failed;
      std::cout << "FAIL " << e.what() << "\n";
    }
  }
  std::cout << files.size() - failed << "/" << files.size() << " logs ingested\n";
  return failed ? 1 : 0;
}

std::map<std::string, PlayerId> load_name_map(const std::string& path, const GameLog& log) {
  std::map<std::string, PlayerId> m = header_name_map(log);
  if (path.empty()) return m;
  for (const auto& [name, seat] : read_json_file(path).items()) {
    auto p = seat.is_string() ? PlayerId::parse(seat.get<std::string>()) : std::nullopt;
    if (!p) throw FormatError(path + ": '" + name + "' must map to player_1..player_6");
    m[name] = *p;
  }
  return m;
}

int cmd_anonymize(const std::string& in, const std::string& out, const std::string& names) {
  const GameLog log = read_log_file(in);
  write_log_file(out, anonymize(log, load_name_map(names, log)));
  return 0;
}

int cmd_normalize(const std::string& in, const std::string& out, const std::string& dict_path,
                  const std::string& names, int max_distance, const std::string& report_path) {
  const GameLog log = read_log_file(in);
  const Dictionary dict = Dictionary::load(dict_path);
  std::map<std::string, std::string> name_map;
  for (PlayerId p : all_players()) name_map[p.alias()] = p.alias();
  if (log.names)
    for (const auto& n : *log.names) name_map[n] = n;
  if (!names.empty())
    for (const auto& [variant, canonical] : read_json_file(names).items()) name_map[variant] = canonical.get<std::string>();
  const NormalizeReport report = normalize_text(log.utterances, dict, name_map, {max_distance});
  write_log_file(out, with_texts(log, report.utterances));
  json r{{"corrections", json::array()}, {"unresolved", json::array()}};
  for (const auto& c : report.corrections) r["corrections"].push_back({{"seq", c.seq}, {"from", c.from}, {"to", c.to}});
  for (const auto& u : report.unresolved) r["unresolved"].push_back({{"seq", u.seq}, {"token", u.token}});
  if (!report_path.empty()) open_out(report_path) << r.dump(2) << "\n";
  std::cerr << report.corrections.size() << " corrections, " << report.unresolved.size()
            << " tokens left for review\n";
  return 0;
}

struct ExportArgs {
  std::string data, split, which = "train", task = "roles", mode = "round", modality = "chat+state", out;
};

int cmd_export(const ExportArgs& a) {
  const SplitManifest split = load_split(a.split);
  ExportOptions opt{parse_or_throw<Task>(a.task, parse_task, "task"),
                    parse_or_throw<ContextMode>(a.mode, parse_mode, "mode"),
                    parse_or_throw<Modality>(a.modality, parse_modality, "modality")};
  const auto examples = export_finetune_examples(split, a.which, read_log_dir(a.data), opt);
  if (a.out.empty()) {
    write_examples(std::cout, examples);
  } else {
    auto out = open_out(a.out);
    write_examples(out, examples);
  }
  std::cerr << examples.size() << " examples\n";
  return 0;
}

struct StatsArgs {
  std::string data, split, which = "test", tokenizer = "wordpunct", mode, modality = "chat+state", covariates;
};

int cmd_stats(const StatsArgs& a) {
  if (a.modality != "chat+state")
    throw UsageError("token statistics are defined over chat+state prompts");
  const auto logs = select_logs(a.data, a.split, a.which);
  const CorpusStats s = compute_corpus_stats(logs, a.tokenizer);
  json j = stats_to_json(s);
  if (!a.mode.empty()) {
    parse_or_throw<ContextMode>(a.mode, parse_mode, "mode");
    j.erase(a.mode == "round" ? "full" : "round");
  }
  std::cout << j.dump(2) << "\n";
  if (!a.covariates.empty()) {
    auto out = open_out(a.covariates);
    write_covariates_csv(out, s);
  }
  return 0;
}

int cmd_split(const std::string& data, std::size_t n_test, std::uint64_t seed, const std::string& out,
              const std::string& check) {
  const auto logs = read_log_dir(data);
  if (!check.empty()) {
    const SplitManifest m = load_split(check);
    auto problems = split_problems(m);
    for (const auto& p : release_split_problems(m, logs)) problems.push_back(p);
    const SplitComposition c = composition(m.test, logs);
    std::cout << "test: " << c.good_wins << " good wins, " << c.evil_wins << " evil wins (" << c.assassination_wins
              << " by assassination)\n";
    for (const auto& p : problems) std::cout << "problem: " << p << "\n";
    return problems.empty() ? 0 : 1;
  }
  const SplitManifest m = random_split(logs, n_test, seed);
  if (out.empty()) std::cout << split_to_json(m).dump(2) << "\n";
  else save_split(out, m);
  return 0;
}

// ---------------------------------------------------------------------------

struct PredictArgs {
  std::string task = "roles", mode = "round", modality = "chat+state";
  int runs = 10;
  std::string data, games, which = "test", endpoint = "mock:random", endpoints = "endpoints.json", out;
  unsigned in_flight = 4;
  std::uint64_t seed = 0;
  int max_attempts = 3;
};

std::unique_ptr<ModelEndpoint> make_endpoint(const std::string& name, const std::string& config_path) {
  if (name == "mock:random") return std::make_unique<MockEndpoint>(random_responder(), "mock-random");
  if (name == "mock:all-good") {
    json j = json::object();
    for (PlayerId p : all_players()) j[p.key()] = "good";
    return std::make_unique<MockEndpoint>(constant_responder(j.dump()), "mock-all-good");
  }
  const auto configs = load_endpoint_configs(config_path);
  auto it = configs.find(name);
  if (it == configs.end()) throw UsageError("endpoint '" + name + "' is not in " + config_path);
  return std::make_unique<HttpEndpoint>(it->second);
}

int cmd_predict(const PredictArgs& a) {
  PredictJob job;
  job.task = parse_or_throw<Task>(a.task, parse_task, "task");
  job.mode = parse_or_throw<ContextMode>(a.mode, parse_mode, "mode");
  job.modality = parse_or_throw<Modality>(a.modality, parse_modality, "modality");
  job.runs = a.runs;
  job.in_flight = a.in_flight;
  job.options.seed = a.seed;
  job.options.max_attempts = a.max_attempts;
  const auto logs = select_logs(a.data, a.games, a.which);
  auto endpoint = make_endpoint(a.endpoint, a.endpoints);
  const auto records = run_predictions(job, logs, *endpoint);
  std::size_t valid = 0;
  auto write = [&](std::ostream& out) {
    for (const auto& r : records) {
      valid += r.value("valid", false);
      out << r.dump() << "\n";
    }
  };
  if (a.out.empty()) {
    write(std::cout);
  } else {
    auto out = open_out(a.out);
    write(out);
  }
  std::cerr << records.size() << " queries over " << logs.size() << " games x " << a.runs << " runs, " << valid
            << " valid\n";
  return 0;
}

int cmd_evaluate(const std::string& from, const std::string& report, const std::string& human,
                 const std::string& data) {
  auto out = report.empty() ? std::ofstream() : open_out(report);
  std::ostream& os = report.empty() ? std::cout : out;
  if (!human.empty()) {
    if (data.empty()) throw UsageError("--human needs --data with the game logs");
    const auto rows = score_human_annotations(ingest_human_annotations_file(human), read_log_dir(data));
    os << "annotator,games,metric,value\n";
    for (const auto& r : rows) {
      const std::pair<const char*, double> metrics[] = {
          {"f1_good", r.f1.good},         {"f1_evil", r.f1.evil},
          {"f1_merlin", r.f1.merlin},     {"merlin_anytime", r.anytime},
          {"merlin_final_assassin_games", r.final_assassin_games},
          {"merlin_final_all_games", r.final_all_games}};
      for (const auto& [m, v] : metrics) os << r.annotator << ',' << r.games << ',' << m << ',' << v << "\n";
    }
    return 0;
  }
  const auto reports = evaluate_transcripts(read_transcripts(from));
  write_report_csv(os, reports);
  if (!report.empty()) {
    fs::path confusion = report;
    confusion.replace_filename(confusion.stem().string() + "_confusion.csv");
    auto c = open_out(confusion);
    write_confusion_csv(c, reports);
    fs::path table = report;
    table.replace_filename(table.stem().string() + "_table2.csv");
    auto t = open_out(table);
    write_table2_csv(t, reports);
  }
  for (const auto& r : reports)
    if (r.validity < 0.95)
      std::cerr << "warning: " << r.task << '/' << r.mode << '/' << r.modality << '/' << r.model << " validity "
                << r.validity << "\n";
  return 0;
}

int cmd_baseline(long trials, std::uint64_t seed, int rounds, bool as_json) {
  const BaselineReport r = random_baseline(trials, rounds, seed);
  if (as_json) {
    std::cout << json{{"trials", r.trials},       {"rounds", r.rounds},         {"seed", seed},
                      {"f1_good", r.f1.good},     {"f1_evil", r.f1.evil},       {"f1_merlin", r.f1.merlin},
                      {"merlin_final", r.final},  {"merlin_anytime", r.anytime}}
                     .dump(2)
              << "\n";
    return 0;
  }
  std::cout << std::fixed << std::setprecision(3) << "model,good,evil,merlin,final,anytime\n"
            << "random," << r.f1.good << ',' << r.f1.evil << ',' << r.f1.merlin << ',' << r.final << ','
            << r.anytime << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Avalon testbed and benchmark tools"};
  app.require_subcommand(1);

  ServeArgs serve;
  auto* s = app.add_subcommand("serve", "run the WebSocket game server");
  s->add_option("--address", serve.address);
  s->add_option("--port", serve.port);
  s->add_option("--turn-seconds", serve.turn_seconds)->check(CLI::PositiveNumber);
  s->add_option("--vote-seconds", serve.vote_seconds)->check(CLI::PositiveNumber);
  s->add_option("--assassination-seconds", serve.assassination_seconds)->check(CLI::PositiveNumber);
  s->add_option("--record-dir", serve.record_dir, "finished logs go here (AVALON_RECORD_DIR overrides)");
  s->add_option("--seed", serve.seed);
  s->add_option("--rejection-limit", serve.rejection_limit);

  SimulateArgs sim;
  auto* sm = app.add_subcommand("simulate", "play games with scripted bots");
  sm->add_option("--scenario", sim.scenario)->check(CLI::IsMember({"always_approve", "evil_fail", "silent"}));
  sm->add_option("--games", sim.games);
  sm->add_option("--seed", sim.seed);
  sm->add_option("--record-dir", sim.record_dir);

  std::vector<std::string> ingest_in;
  std::string ingest_out;
  auto* ig = app.add_subcommand("ingest", "validate and replay game logs");
  ig->add_option("logs", ingest_in, "log files or directories")->required();
  ig->add_option("--out", ingest_out, "write canonical copies here");

  std::string an_in, an_out, an_names;
  auto* an = app.add_subcommand("anonymize", "replace real names with seat aliases");
  an->add_option("input", an_in)->required()->check(CLI::ExistingFile);
  an->add_option("output", an_out)->required();
  an->add_option("--names", an_names, "JSON map of name variants to player_N");

  std::string no_in, no_out, no_dict, no_names, no_report;
  int no_dist = 2;
  auto* no = app.add_subcommand("normalize", "spell-correct utterances");
  no->add_option("input", no_in)->required()->check(CLI::ExistingFile);
  no->add_option("output", no_out)->required();
  no->add_option("--dictionary", no_dict, "word list, one 'word [count]' per line")->required();
  no->add_option("--names", no_names, "JSON map of name variants to canonical names");
  no->add_option("--max-distance", no_dist);
  no->add_option("--report", no_report, "corrections and unresolved tokens as JSON");

  ExportArgs ex;
  auto* e = app.add_subcommand("export-finetune", "write chat-format training examples");
  e->add_option("--data", ex.data)->required()->check(CLI::ExistingDirectory);
  e->add_option("--split", ex.split, "split manifest")->required()->check(CLI::ExistingFile);
  e->add_option("--which", ex.which);
  e->add_option("--task", ex.task);
  e->add_option("--mode", ex.mode);
  e->add_option("--modality", ex.modality);
  e->add_option("--out", ex.out);

  StatsArgs st;
  auto* sa = app.add_subcommand("stats", "prompt token statistics and covariates");
  sa->add_option("--data", st.data)->required()->check(CLI::ExistingDirectory);
  sa->add_option("--split", st.split, "restrict to one side of a manifest");
  sa->add_option("--which", st.which);
  sa->add_option("--mode", st.mode);
  sa->add_option("--modality", st.modality);
  sa->add_option("--tokenizer", st.tokenizer)->check(CLI::IsMember(tokenizer_ids()));
  sa->add_option("--covariates", st.covariates, "per-game covariate CSV");

  std::string sp_data, sp_out, sp_check;
  std::size_t sp_test = 6;
  std::uint64_t sp_seed = 0;
  auto* sp = app.add_subcommand("split", "draw or check a train/test manifest");
  sp->add_option("--data", sp_data)->required()->check(CLI::ExistingDirectory);
  sp->add_option("--test", sp_test);
  sp->add_option("--seed", sp_seed);
  sp->add_option("--out", sp_out);
  sp->add_option("--check", sp_check, "validate an existing manifest instead");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "query a model over game logs");
  p->add_option("--task", pr.task)->check(CLI::IsMember({"roles", "merlin", "strategy"}));
  p->add_option("--mode", pr.mode)->check(CLI::IsMember({"round", "full"}));
  p->add_option("--modality", pr.modality)->check(CLI::IsMember({"chat", "state", "chat+state"}));
  p->add_option("--runs", pr.runs)->check(CLI::PositiveNumber);
  p->add_option("--data", pr.data, "directory of game logs")->required()->check(CLI::ExistingDirectory);
  p->add_option("--games", pr.games, "split manifest selecting the games");
  p->add_option("--which", pr.which, "manifest side");
  p->add_option("--endpoint", pr.endpoint, "mock:random, mock:all-good or a name from --endpoints");
  p->add_option("--endpoints", pr.endpoints, "endpoint config JSON");
  p->add_option("--out", pr.out, "transcript file (JSONL)");
  p->add_option("--in-flight", pr.in_flight);
  p->add_option("--seed", pr.seed);
  p->add_option("--max-attempts", pr.max_attempts)->check(CLI::PositiveNumber);

  std::string ev_from, ev_report, ev_human, ev_data;
  auto* ev = app.add_subcommand("evaluate", "score transcripts or human annotations");
  ev->add_option("--from", ev_from, "transcript file or directory");
  ev->add_option("--report", ev_report, "CSV report; confusion and summary tables go next to it");
  ev->add_option("--human", ev_human, "human annotation CSV");
  ev->add_option("--data", ev_data, "game logs for --human");

  long bl_trials = 100000;
  std::uint64_t bl_seed = 7;
  int bl_rounds = 5;
  bool bl_json = false;
  auto* bl = app.add_subcommand("baseline", "Monte Carlo random guesser");
  bl->add_option("--trials", bl_trials)->check(CLI::PositiveNumber);
  bl->add_option("--seed", bl_seed);
  bl->add_option("--rounds", bl_rounds)->check(CLI::PositiveNumber);
  bl->add_flag("--json", bl_json);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*s) return cmd_serve(serve);
    if (*sm) return cmd_simulate(sim);
    if (*ig) return cmd_ingest(ingest_in, ingest_out);
    if (*an) return cmd_anonymize(an_in, an_out, an_names);
    if (*no) return cmd_normalize(no_in, no_out, no_dict, no_names, no_dist, no_report);
    if (*e) return cmd_export(ex);
    if (*sa) return cmd_stats(st);
    if (*sp) return cmd_split(sp_data, sp_test, sp_seed, sp_out, sp_check);
    if (*p) return cmd_predict(pr);
    if (*ev) {
      if (ev_from.empty() && ev_human.empty()) throw UsageError("evaluate needs --from or --human");
      return cmd_evaluate(ev_from, ev_report, ev_human, ev_data);
    }
    if (*bl) return cmd_baseline(bl_trials, bl_seed, bl_rounds, bl_json);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const AnnotationError& err) {
    std::cerr << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
