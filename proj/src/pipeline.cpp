#include "citescope/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "citescope/bootstrap.hpp"
#include "citescope/classify.hpp"
#include "citescope/corpus.hpp"
#include "citescope/featurize.hpp"
#include "citescope/fieldscan.hpp"
#include "citescope/impact.hpp"
#include "citescope/log.hpp"
#include "citescope/navsim.hpp"
#include "citescope/patternlang.hpp"
#include "citescope/selpref.hpp"
#include "citescope/topicmodel.hpp"
#include "citescope/util.hpp"

extern char** environ;

namespace citescope {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string data_file(const char* name) { return (fs::path(CITESCOPE_DATA_DIR) / name).string(); }

const char* kDefaultMeasures =
    "pct_centrality(Essential),pct_function(Background),pct_function(Motivation),pct_function(Uses),"
    "pct_function(Extends),pct_function(Continuation),pct_function(CompareContrast),pct_function(Future),"
    "incoming_per_cited(Uses)";

enum class ValueKind { Text, Path, Integer, Real, Flag, Years, Choice };

struct KeySpec {
  std::string key;
  std::string value;
  ValueKind kind;
  std::vector<std::string> choices = {};
};

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = {
      {"corpus", "corpus", ValueKind::Path},
      {"output", "out", ValueKind::Path},
      {"lexicon", data_file("lexicon.txt"), ValueKind::Path},
      {"patterns", data_file("patterns.tsv"), ValueKind::Path},
      {"connectives", data_file("connectives.txt"), ValueKind::Path},
      {"stopwords", data_file("stopwords.txt"), ValueKind::Path},
      {"bots", data_file("bots.txt"), ValueKind::Path},
      {"vectors", "", ValueKind::Path},
      {"logs", "", ValueKind::Path},
      {"seed", "1", ValueKind::Integer},
      {"workers", "0", ValueKind::Integer},
      {"years", "", ValueKind::Years},
      {"lda.topics", "100", ValueKind::Integer},
      {"lda.iterations", "1000", ValueKind::Integer},
      {"lda.alpha", "0", ValueKind::Real},
      {"lda.beta", "0.01", ValueKind::Real},
      {"lda.min_count", "5", ValueKind::Integer},
      {"lda.inference_sweeps", "100", ValueKind::Integer},
      {"lda.inference_burn_in", "20", ValueKind::Integer},
      {"bootstrap.min_len", "3", ValueKind::Integer},
      {"bootstrap.max_len", "8", ValueKind::Integer},
      {"bootstrap.max_wildcards", "2", ValueKind::Integer},
      {"bootstrap.purity", "0.51", ValueKind::Real},
      {"features.bootstrapped", "true", ValueKind::Flag},
      {"features.topics", "true", ValueKind::Flag},
      {"features.vectors", "true", ValueKind::Flag},
      {"forest.trees", "500", ValueKind::Integer},
      {"forest.min_leaf", "7", ValueKind::Integer},
      {"forest.features_per_split", "0", ValueKind::Integer},
      {"analysis.labels", "auto", ValueKind::Choice, {"auto", "gold", "predicted"}},
      {"trends.bootstrap", "1000", ValueKind::Integer},
      {"trends.measures", kDefaultMeasures, ValueKind::Text},
      {"navsim.simulations", "500", ValueKind::Integer},
      {"navsim.gap_seconds", "3600", ValueKind::Integer},
      {"navsim.max_requests", "50", ValueKind::Integer},
      {"navsim.pairs", "all", ValueKind::Choice, {"all", "first"}},
      {"impact.window", "5", ValueKind::Integer},
  };
  return specs;
}

const KeySpec* find_spec(const std::string& key) {
  for (const auto& s : key_specs()) {
    if (s.key == key) return &s;
  }
  return nullptr;
}

std::optional<std::pair<int, int>> parse_years(std::string_view s) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  try {
    std::size_t a = 0, b = 0;
    const std::string lo(s.substr(0, colon)), hi(s.substr(colon + 1));
    const int l = std::stoi(lo, &a), h = std::stoi(hi, &b);
    if (a != lo.size() || b != hi.size() || l > h) return std::nullopt;
    return std::make_pair(l, h);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void validate_value(const KeySpec& spec, const std::string& value) {
  auto bad = [&](const std::string& why) {
    throw ConfigError("config key '" + spec.key + "': " + why + " (got '" + value + "')");
  };
  switch (spec.kind) {
    case ValueKind::Integer: {
      std::size_t used = 0;
      try {
        const long long v = std::stoll(value, &used);
        if (used != value.size()) bad("expected an integer");
        if (v < 0) bad("must be non-negative");
      } catch (const std::exception&) {
        bad("expected an integer");
      }
      break;
    }
    case ValueKind::Real: {
      std::size_t used = 0;
      try {
        std::stod(value, &used);
        if (used != value.size()) bad("expected a number");
      } catch (const std::exception&) {
        bad("expected a number");
      }
      break;
    }
    case ValueKind::Flag:
      if (value != "true" && value != "false") bad("expected true or false");
      break;
    case ValueKind::Years:
      if (!value.empty() && !parse_years(value)) bad("expected LO:HI");
      break;
    case ValueKind::Choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) == spec.choices.end()) bad("unsupported value");
      break;
    case ValueKind::Text:
    case ValueKind::Path:
      break;
  }
}

}  // namespace

const std::vector<std::pair<std::string, std::string>>& config_keys() {
  static const auto keys = [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : key_specs()) out.emplace_back(s.key, s.value);
    return out;
  }();
  return keys;
}

PipelineConfig::PipelineConfig() {
  for (const auto& s : key_specs()) values_[s.key] = s.value;
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  const auto* spec = find_spec(key);
  if (!spec) throw ConfigError("unknown config key '" + key + "'");
  validate_value(*spec, value);
  values_[key] = value;
}

const std::string& PipelineConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::optional<fs::path> PipelineConfig::path(const std::string& key) const {
  const auto& v = get(key);
  if (v.empty()) return std::nullopt;
  fs::path p(v);
  return p.is_absolute() ? p : base_dir / p;
}

long long PipelineConfig::integer(const std::string& key) const { return std::stoll(get(key)); }
double PipelineConfig::real(const std::string& key) const { return std::stod(get(key)); }
bool PipelineConfig::flag(const std::string& key) const { return get(key) == "true"; }

std::string PipelineConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + '\n';
  return out;
}

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  PipelineConfig cfg;
  cfg.base_dir = base_dir;
  int line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    cfg.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot read config " + path.string() + ": " + e.what());
  }
  const auto dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  return parse_config(text, dir);
}

void apply_environment(PipelineConfig& cfg, const std::map<std::string, std::string>& env) {
  std::map<std::string, std::string> by_var;
  for (const auto& [key, value] : cfg.values()) {
    std::string var = "CITESCOPE_" + to_upper(key);
    std::replace(var.begin(), var.end(), '.', '_');
    by_var[var] = key;
  }
  for (const auto& [var, value] : env) {
    if (var.rfind("CITESCOPE_", 0) != 0) continue;
    auto it = by_var.find(var);
    if (it == by_var.end()) throw ConfigError("unknown config key in environment variable " + var);
    cfg.set(it->second, value);
  }
}

std::map<std::string, std::string> current_environment() {
  std::map<std::string, std::string> out;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq != std::string_view::npos) out[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
  }
  return out;
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> k = {"ingest",   "train-topics",      "bootstrap",       "featurize",
                                             "train",    "evaluate",          "label",           "analyze-sections",
                                             "analyze-venues", "analyze-trends", "navsim",      "impact"};
  return k;
}

namespace {

// Output directory bookkeeping: atomic writes plus a per-stage manifest of
// input and output hashes and the resolved configuration.
class Stage {
 public:
  Stage(std::string name, const PipelineConfig& cfg) : name_(std::move(name)), cfg_(cfg), out_(*cfg.path("output")) {
    fs::create_directories(out_ / "manifests");
  }

  const fs::path& out() const { return out_; }
  fs::path at(const std::string& rel) const { return out_ / rel; }

  void input(const std::string& name, std::uint64_t hash) { inputs_[name] = to_hex(hash); }
  void input_file(const std::string& name, const fs::path& path) { input(name, fnv1a(read_file(path))); }

  void emit(const std::string& rel, const std::string& contents) {
    const auto path = out_ / rel;
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_file_atomic(path, contents);
    outputs_[rel] = to_hex(fnv1a(contents));
  }
  void note(const std::string& key, json value) { notes_[key] = std::move(value); }

  void finish() {
    json js;
    js["stage"] = name_;
    js["inputs"] = inputs_;
    js["outputs"] = outputs_;
    if (!notes_.is_null()) js["notes"] = notes_;
    write_file_atomic(out_ / "manifests" / (name_ + ".json"), js.dump(2) + "\n");
    write_file_atomic(out_ / "manifests" / (name_ + ".config"), cfg_.serialize());
    log::info(name_, "wrote " + std::to_string(outputs_.size()) + " artifacts to " + out_.string());
  }

 private:
  std::string name_;
  const PipelineConfig& cfg_;
  fs::path out_;
  std::map<std::string, std::string> inputs_;
  std::map<std::string, std::string> outputs_;
  json notes_;
};

std::uint64_t seed_of(const PipelineConfig& cfg) { return static_cast<std::uint64_t>(cfg.integer("seed")); }

std::size_t workers_of(const PipelineConfig& cfg) {
  const auto w = static_cast<std::size_t>(cfg.integer("workers"));
  return w > 0 ? w : std::max(1u, std::thread::hardware_concurrency());
}

std::optional<YearRange> years_of(const PipelineConfig& cfg) {
  const auto& v = cfg.get("years");
  if (v.empty()) return std::nullopt;
  return parse_years(v);
}

fs::path require_path(const PipelineConfig& cfg, const std::string& key) {
  auto p = cfg.path(key);
  if (!p) throw ConfigError("config key '" + key + "' must be set for this subcommand");
  if (!fs::exists(*p)) throw ConfigError("config key '" + key + "': " + p->string() + " does not exist");
  return *p;
}

Corpus ingested(Stage& st) {
  const auto dir = st.at("corpus");
  if (!fs::is_directory(dir)) throw std::runtime_error("no ingested corpus in " + st.out().string() + "; run ingest first");
  Corpus c = load_corpus(dir);
  st.input("corpus", c.version_hash());
  return c;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::vector<std::string> out;
  for (const auto& line : split(read_file(path), '\n')) {
    const auto t = trim(line);
    if (!t.empty() && t.front() != '#') out.emplace_back(t);
  }
  return out;
}

std::vector<CitationContext> labeled_contexts(const Corpus& corpus) {
  std::vector<CitationContext> out;
  for (const auto& ctx : extract_contexts(corpus)) {
    if (ctx.mention().gold) out.push_back(ctx);
  }
  return out;
}

// Predicted labels fill in mentions that carry no gold label.
Corpus with_labels(Stage& st, const PipelineConfig& cfg, Corpus corpus) {
  const auto mode = cfg.get("analysis.labels");
  const auto path = st.at("labels.csv");
  const bool use = mode == "predicted" || (mode == "auto" && fs::exists(path));
  if (!use) {
    st.note("labels", "gold");
    return corpus;
  }
  if (!fs::exists(path)) throw std::runtime_error("analysis.labels = predicted but " + path.string() + " is missing");
  const auto text = read_file(path);
  st.input("labels", fnv1a(text));
  Corpus predicted = corpus;
  apply_labels(predicted, text);
  for (std::size_t p = 0; p < corpus.papers.size(); ++p) {
    auto& ms = predicted.papers[p].mentions;
    for (std::size_t m = 0; m < ms.size(); ++m) {
      if (corpus.papers[p].mentions[m].gold) ms[m].gold = corpus.papers[p].mentions[m].gold;
    }
  }
  st.note("labels", "gold, then predicted");
  return predicted;
}

LdaConfig lda_config(const PipelineConfig& cfg, std::uint64_t stream, const std::set<std::string>& stop) {
  LdaConfig lc;
  lc.topics = static_cast<std::size_t>(cfg.integer("lda.topics"));
  const double a = cfg.real("lda.alpha");
  lc.alpha = a > 0 ? a : -1.0;
  lc.beta = cfg.real("lda.beta");
  lc.iterations = static_cast<std::size_t>(cfg.integer("lda.iterations"));
  lc.min_count = static_cast<std::size_t>(cfg.integer("lda.min_count"));
  lc.seed = derive_seed(seed_of(cfg), stream);
  lc.stopwords = stop;
  return lc;
}

std::set<std::string> stopwords_of(const PipelineConfig& cfg) {
  auto p = cfg.path("stopwords");
  return p ? load_stopwords(*p) : std::set<std::string>{};
}

const char* kTopicFiles[] = {"topics/citing.json", "topics/context.json", "topics/paper.json"};

std::optional<TopicModel> maybe_model(Stage& st, const std::string& rel) {
  const auto path = st.at(rel);
  if (!fs::exists(path)) return std::nullopt;
  st.input_file(rel, path);
  return load_model(path);
}

// ---------------------------------------------------------------------------

void ingest(const PipelineConfig& cfg) {
  Stage st("ingest", cfg);
  const auto root = require_path(cfg, "corpus");
  const Corpus c = load_corpus(root);
  st.input("corpus_source", c.version_hash());
  st.emit("corpus/papers.jsonl", serialize_corpus(c));
  json issues = json::array();
  for (const auto& i : c.issues) issues.push_back({{"paper", i.paper}, {"kind", to_string(i.kind)}, {"detail", i.detail}});
  std::size_t labeled = 0;
  for (const auto& p : c.papers) {
    for (const auto& m : p.mentions) labeled += m.gold ? 1 : 0;
  }
  json report = {{"papers", c.papers.size()},
                 {"mentions", c.mention_count()},
                 {"labeled_mentions", labeled},
                 {"corpus_hash", to_hex(c.version_hash())},
                 {"issues", issues}};
  st.emit("ingest.json", report.dump(2) + "\n");
  st.finish();
}

void train_topics(const PipelineConfig& cfg) {
  Stage st("train-topics", cfg);
  const Corpus c = ingested(st);
  const auto stop = stopwords_of(cfg);
  std::array<std::vector<std::vector<std::string>>, 3> docs;
  for (const auto& ctx : extract_contexts(c)) {
    docs[0].push_back(context_document(ctx, false, stop));
    docs[1].push_back(context_document(ctx, true, stop));
  }
  for (const auto& p : c.papers) docs[2].push_back(paper_document(p, stop));
  for (std::size_t m = 0; m < 3; ++m) {
    try {
      const auto model = train_lda(docs[m], lda_config(cfg, m + 1, stop));
      st.emit(kTopicFiles[m], serialize_model(model));
    } catch (const TopicError& e) {
      if (e.kind() != TopicError::Kind::EmptyVocabulary) throw;
      log::warn("train-topics", std::string(kTopicFiles[m]) + " skipped: " + e.what());
      st.note(kTopicFiles[m], "skipped: empty vocabulary");
    }
  }
  st.finish();
}

Lexicon lexicon_of(Stage& st, const PipelineConfig& cfg) {
  const auto path = require_path(cfg, "lexicon");
  st.input_file("lexicon", path);
  return load_lexicon(path);
}

BootstrapConfig bootstrap_config(const PipelineConfig& cfg) {
  BootstrapConfig bc;
  bc.min_len = static_cast<std::size_t>(cfg.integer("bootstrap.min_len"));
  bc.max_len = static_cast<std::size_t>(cfg.integer("bootstrap.max_len"));
  bc.max_wildcards = static_cast<std::size_t>(cfg.integer("bootstrap.max_wildcards"));
  bc.purity_threshold = cfg.real("bootstrap.purity");
  try {
    bc.validate();
  } catch (const BootstrapError& e) {
    throw ConfigError(e.what());
  }
  return bc;
}

void bootstrap_stage(const PipelineConfig& cfg) {
  Stage st("bootstrap", cfg);
  const Corpus c = ingested(st);
  const auto lex = lexicon_of(st, cfg);
  const auto bc = bootstrap_config(cfg);
  InductionResult result{PatternSet(lex), {}};
  try {
    result = induce(labeled_contexts(c), lex, bc);
  } catch (const BootstrapError& e) {
    if (e.kind() != BootstrapError::Kind::NoLabeledData) throw;
    log::warn("bootstrap", e.what());
  }
  st.emit("patterns_bootstrapped.tsv", result.patterns.serialize());
  st.emit("bootstrap_stats.csv", stats_csv(result));
  st.note("patterns", result.patterns.size());
  st.finish();
}

void featurize_stage(const PipelineConfig& cfg) {
  Stage st("featurize", cfg);
  const Corpus c = ingested(st);
  const auto lex = lexicon_of(st, cfg);
  FeatureModels models;
  models.seed = seed_of(cfg);
  models.inference_sweeps = static_cast<std::size_t>(cfg.integer("lda.inference_sweeps"));
  models.inference_burn_in = static_cast<std::size_t>(cfg.integer("lda.inference_burn_in"));
  models.stopwords = stopwords_of(cfg);

  PatternSet patterns(lex);
  if (auto p = cfg.path("patterns")) {
    st.input_file("patterns", *p);
    patterns.append(load_patterns(*p, lex));
  }
  const auto boot = st.at("patterns_bootstrapped.tsv");
  if (cfg.flag("features.bootstrapped") && fs::exists(boot)) {
    st.input_file("patterns_bootstrapped", boot);
    patterns.append(load_patterns(boot, lex));
  }
  models.patterns = std::move(patterns);
  if (auto p = cfg.path("connectives")) {
    st.input_file("connectives", *p);
    models.connectives = read_lines(*p);
  }
  if (cfg.flag("features.topics")) {
    models.citing_topics = maybe_model(st, kTopicFiles[0]);
    models.context_topics = maybe_model(st, kTopicFiles[1]);
    models.paper_topics = maybe_model(st, kTopicFiles[2]);
  }
  if (cfg.flag("features.vectors")) {
    if (auto p = cfg.path("vectors")) {
      models.vectors = load_word_vectors(require_path(cfg, "vectors"));
      st.input("vectors", models.vectors->version_hash());
      const auto labeled = labeled_contexts(c);
      models.prototypes = build_prototypes(labeled, *models.vectors);
      models.centroids = build_centroids(labeled, *models.vectors);
    }
  }
  const Dataset ds = featurize(c, models);
  st.emit("features.csv", dataset_csv(ds));
  st.emit("features.csv.manifest.json", manifest_json(ds));
  st.note("rows", ds.rows.size());
  st.note("features", ds.schema.size());
  st.finish();
}

struct Task {
  std::string name;
  std::vector<std::string> classes;
  int (*label)(const Label&);
};

const std::vector<Task>& tasks() {
  static const std::vector<Task> k = [] {
    std::vector<std::string> fns, cens;
    for (Function f : kAllFunctions) fns.emplace_back(to_string(f));
    for (Centrality c : {Centrality::Essential, Centrality::Positioning}) cens.emplace_back(to_string(c));
    return std::vector<Task>{
        {"function", fns, [](const Label& l) { return static_cast<int>(index_of(l.function)); }},
        {"centrality", cens, [](const Label& l) { return static_cast<int>(index_of(l.centrality)); }}};
  }();
  return k;
}

Dataset dataset_of(Stage& st) {
  const auto path = st.at("features.csv");
  if (!fs::exists(path)) throw std::runtime_error("no feature dataset in " + st.out().string() + "; run featurize first");
  Dataset ds = load_dataset(path);
  st.input("features_schema", ds.schema.hash());
  st.input("corpus", ds.input_hash);
  return ds;
}

struct LabeledRows {
  Samples samples;
  std::vector<std::string> papers;
};

LabeledRows labeled_rows(const Dataset& ds, const Task& task) {
  LabeledRows out;
  for (const auto& row : ds.rows) {
    if (!row.gold) continue;
    out.samples.x.push_back(row.values);
    out.samples.y.push_back(task.label(*row.gold));
    out.samples.ids.push_back(row.paper_id + "#" + std::to_string(row.mention));
    out.papers.push_back(row.paper_id);
  }
  return out;
}

ForestConfig forest_config(const PipelineConfig& cfg) {
  ForestConfig fc;
  fc.n_trees = static_cast<std::size_t>(cfg.integer("forest.trees"));
  fc.min_leaf = static_cast<std::size_t>(cfg.integer("forest.min_leaf"));
  fc.features_per_split = static_cast<std::size_t>(cfg.integer("forest.features_per_split"));
  fc.seed = seed_of(cfg);
  fc.workers = workers_of(cfg);
  try {
    fc.validate();
  } catch (const ClassifyError& e) {
    throw ConfigError(e.what());
  }
  return fc;
}

void train_stage(const PipelineConfig& cfg) {
  Stage st("train", cfg);
  const Dataset ds = dataset_of(st);
  const auto fc = forest_config(cfg);
  for (const auto& task : tasks()) {
    const auto rows = labeled_rows(ds, task);
    const Forest forest = train(rows.samples, task.classes, fc, ds.schema.hash());
    st.emit("forest_" + task.name + ".json", serialize_forest(forest));
    st.note(task.name + "_rows", rows.samples.y.size());
  }
  st.finish();
}

Forest forest_for(Stage& st, const Task& task, const Dataset& ds) {
  const auto path = st.at("forest_" + task.name + ".json");
  if (!fs::exists(path)) throw std::runtime_error("no trained model " + path.string() + "; run train first");
  st.input_file("forest_" + task.name, path);
  Forest f = load_forest(path);
  f.check_schema(ds.schema.hash());
  return f;
}

int majority(const std::vector<int>& y, std::size_t classes) {
  std::vector<std::size_t> counts(classes, 0);
  for (int v : y) ++counts[static_cast<std::size_t>(v)];
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

void evaluate_stage(const PipelineConfig& cfg) {
  Stage st("evaluate", cfg);
  const Dataset ds = dataset_of(st);
  const auto fc = forest_config(cfg);
  json report;
  report["schema_hash"] = to_hex(ds.schema.hash());
  report["corpus_hash"] = to_hex(ds.input_hash);
  for (const auto& task : tasks()) {
    forest_for(st, task, ds);  // refuses models trained on another schema
    const auto rows = labeled_rows(ds, task);
    const auto preds = cv_by_paper(rows.samples, rows.papers, task.classes, fc);
    std::vector<int> forest_pred;
    for (const auto& p : preds) forest_pred.push_back(p.label);
    const auto& gold = rows.samples.y;
    const int major = majority(gold, task.classes.size());
    const auto one = one_class_baseline(gold.size(), major);
    const auto rnd = random_baseline(gold, derive_seed(seed_of(cfg), 7));
    const auto forest_report = metrics(forest_pred, gold, task.classes);
    json jt;
    jt["rows"] = gold.size();
    jt["papers"] = std::set<std::string>(rows.papers.begin(), rows.papers.end()).size();
    jt["forest"] = json::parse(report_json(forest_report));
    jt["one_class"] = json::parse(report_json(metrics(one, gold, task.classes)));
    jt["one_class"]["class"] = task.classes[static_cast<std::size_t>(major)];
    jt["random"] = json::parse(report_json(metrics(rnd, gold, task.classes)));
    jt["mcnemar_p"] = {{"one_class", mcnemar(forest_pred, one, gold)}, {"random", mcnemar(forest_pred, rnd, gold)}};
    if (task.name == "centrality") {
      const int essential = static_cast<int>(index_of(Centrality::Essential));
      auto bin = [&](const std::vector<int>& pred) {
        const auto s = binary_metrics(pred, gold, essential);
        return json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}};
      };
      jt["essential"] = {{"forest", bin(forest_pred)},
                         {"one_class_essential", bin(one_class_baseline(gold.size(), essential))}};
    }
    report[task.name] = jt;
    st.emit("confusion_" + task.name + ".csv", confusion_csv(forest_report));
  }
  st.emit("evaluation.json", report.dump(2) + "\n");
  st.finish();
}

void label_stage(const PipelineConfig& cfg) {
  Stage st("label", cfg);
  const Dataset ds = dataset_of(st);
  std::vector<Forest> forests;
  for (const auto& task : tasks()) forests.push_back(forest_for(st, task, ds));
  std::vector<MentionLabel> labels;
  for (const auto& row : ds.rows) {
    MentionLabel l;
    l.paper = row.paper_id;
    l.mention = row.mention;
    l.label.function = kAllFunctions.at(static_cast<std::size_t>(predict(forests[0], row.values).label));
    l.label.centrality = predict(forests[1], row.values).label == static_cast<int>(index_of(Centrality::Essential))
                             ? Centrality::Essential
                             : Centrality::Positioning;
    labels.push_back(l);
  }
  st.emit("labels.csv", labels_csv(labels));
  st.finish();
}

void analyze_groups(const PipelineConfig& cfg, const std::string& stage, bool sections) {
  Stage st(stage, cfg);
  const Corpus c = with_labels(st, cfg, ingested(st));
  const auto cites = filter_years(labeled_citations(c), years_of(cfg));
  const auto table = sections ? function_by_section(cites) : function_by_venue(cites);
  st.emit(sections ? "sections.csv" : "venues.csv", distribution_csv(table));
  st.note("citations", cites.size());
  st.finish();
}

void analyze_trends(const PipelineConfig& cfg) {
  Stage st("analyze-trends", cfg);
  const Corpus c = with_labels(st, cfg, ingested(st));
  const auto cites = filter_years(labeled_citations(c), years_of(cfg));
  std::vector<TrendSeries> series;
  json corr = json::array();
  for (const auto& text : split(cfg.get("trends.measures"), ',')) {
    const auto name = std::string(trim(text));
    if (name.empty()) continue;
    const auto m = parse_measure(name);
    if (!m) throw ConfigError("trends.measures: cannot parse '" + name + "'");
    auto s = yearly_series(cites, *m, static_cast<std::size_t>(cfg.integer("trends.bootstrap")), seed_of(cfg));
    std::vector<double> xs, ys;
    for (const auto& p : s.points) {
      xs.push_back(p.year);
      ys.push_back(p.value);
    }
    json jc = {{"measure", s.measure}, {"points", s.points.size()}, {"skipped_years", s.skipped_years}};
    try {
      const auto r = pearson(xs, ys);
      jc["r"] = r.r;
      jc["p"] = r.p;
    } catch (const FieldscanError& e) {
      jc["r"] = nullptr;
      jc["p"] = nullptr;
      jc["note"] = e.what();
    }
    corr.push_back(jc);
    series.push_back(std::move(s));
  }
  st.emit("trends.csv", trend_csv(series));
  st.emit("trends.json", json{{"correlations", corr}}.dump(2) + "\n");
  st.finish();
}

void navsim_stage(const PipelineConfig& cfg) {
  Stage st("navsim", cfg);
  const Corpus c = with_labels(st, cfg, ingested(st));
  const auto logs = require_path(cfg, "logs");
  std::vector<fs::path> files;
  if (fs::is_directory(logs)) {
    for (const auto& e : fs::directory_iterator(logs)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(logs);
  }
  std::vector<std::string> bots = default_bot_substrings();
  if (auto b = cfg.path("bots")) {
    st.input_file("bots", *b);
    bots = parse_bot_list(read_file(*b));
  }
  std::vector<LogRequest> requests;
  ParseStats total;
  for (const auto& f : files) {
    const auto text = read_log_file(f);
    st.input("log:" + f.filename().string(), fnv1a(text));
    auto parsed = parse_log(text, bots);
    total.lines += parsed.stats.lines;
    total.kept += parsed.stats.kept;
    total.malformed += parsed.stats.malformed;
    total.bots += parsed.stats.bots;
    total.filtered += parsed.stats.filtered;
    requests.insert(requests.end(), parsed.requests.begin(), parsed.requests.end());
  }
  SessionConfig sc;
  sc.gap_seconds = cfg.integer("navsim.gap_seconds");
  sc.max_requests = static_cast<std::size_t>(cfg.integer("navsim.max_requests"));
  auto traces = sessionize(std::move(requests), sc);
  if (cfg.get("navsim.pairs") == "first") {
    for (auto& t : traces) t.steps.resize(std::min<std::size_t>(t.steps.size(), 2));
  }
  const ReferenceIndex index(c);
  const auto observed = observed_counts(traces, index);
  const auto sim = simulate_null(traces, index, static_cast<std::size_t>(cfg.integer("navsim.simulations")), seed_of(cfg));
  const auto result = zscores(observed, sim);
  st.emit("null_model.csv", null_model_csv(result));
  json stats = {{"lines", total.lines},   {"kept", total.kept},         {"malformed", total.malformed},
                {"bots", total.bots},     {"filtered", total.filtered}, {"traces", traces.size()},
                {"steps", observed.steps}};
  st.emit("navsim.json", stats.dump(2) + "\n");
  st.finish();
}

std::vector<std::string> without_prefixes(const ImpactDesign& d, const std::vector<std::string>& prefixes) {
  std::vector<std::string> out;
  for (const auto& c : d.columns) {
    if (std::none_of(prefixes.begin(), prefixes.end(), [&](const std::string& p) { return c.rfind(p, 0) == 0; })) {
      out.push_back(c);
    }
  }
  return out;
}

void impact_stage(const PipelineConfig& cfg) {
  Stage st("impact", cfg);
  const Corpus c = with_labels(st, cfg, ingested(st));
  const CitationGraph graph(c);
  std::map<std::string, TopicDistribution> thetas;
  if (cfg.flag("features.topics")) {
    if (auto model = maybe_model(st, kTopicFiles[2])) {
      const auto stop = stopwords_of(cfg);
      for (const auto& p : c.papers) {
        thetas[p.id()] = infer(*model, paper_document(p, stop), derive_seed(seed_of(cfg), fnv1a(p.id())),
                               static_cast<std::size_t>(cfg.integer("lda.inference_sweeps")),
                               static_cast<std::size_t>(cfg.integer("lda.inference_burn_in")));
      }
    }
  }
  DesignOptions opts;
  opts.window = static_cast<int>(cfg.integer("impact.window"));
  const auto raw = build_design(c, graph, thetas, opts);
  st.emit("impact_design.csv", design_csv(raw));
  const auto design = drop_degenerate(residualize(raw));
  std::vector<std::string> warnings = design.warnings;

  std::vector<std::pair<std::string, double>> vifs;
  try {
    if (design.p() >= 2) vifs = vif(design);
  } catch (const ImpactError& e) {
    warnings.push_back(std::string("vif: ") + e.what());
  }

  std::vector<ImpactModel> models;
  std::map<std::string, std::size_t> index;
  auto fit = [&](const std::string& name, const std::vector<std::string>& cols, bool negbin) {
    try {
      const auto sub = design.select(cols);
      models.push_back(negbin ? fit_negbin(sub) : fit_poisson(sub));
      index[name] = models.size() - 1;
    } catch (const ImpactError& e) {
      warnings.push_back(name + ": " + e.what());
      log::warn("impact", name + ": " + e.what());
    }
  };
  const auto base = without_prefixes(design, {"function_", "centrality_"});
  const auto with_fn = without_prefixes(design, {"centrality_"});
  fit("baseline", base, true);
  fit("functions", with_fn, true);
  fit("full", design.columns, true);
  fit("full_poisson", design.columns, false);

  std::vector<NamedTest> tests;
  auto lr = [&](const std::string& a, const std::string& b) {
    if (!index.count(a) || !index.count(b)) return;
    tests.push_back({a + " vs " + b, lr_test(models[index[a]], models[index[b]])});
  };
  lr("baseline", "functions");
  lr("functions", "full");
  lr("full_poisson", "full");
  st.note("papers", design.n());
  st.note("excluded", raw.excluded);
  st.emit("impact.json", impact_report_json(models, vifs, tests, warnings));
  st.finish();
}

}  // namespace

void run_stage(const std::string& name, const PipelineConfig& cfg) {
  if (name == "ingest") return ingest(cfg);
  if (name == "train-topics") return train_topics(cfg);
  if (name == "bootstrap") return bootstrap_stage(cfg);
  if (name == "featurize") return featurize_stage(cfg);
  if (name == "train") return train_stage(cfg);
  if (name == "evaluate") return evaluate_stage(cfg);
  if (name == "label") return label_stage(cfg);
  if (name == "analyze-sections") return analyze_groups(cfg, name, true);
  if (name == "analyze-venues") return analyze_groups(cfg, name, false);
  if (name == "analyze-trends") return analyze_trends(cfg);
  if (name == "navsim") return navsim_stage(cfg);
  if (name == "impact") return impact_stage(cfg);
  throw ConfigError("unknown subcommand '" + name + "'");
}

}  // namespace citescope
