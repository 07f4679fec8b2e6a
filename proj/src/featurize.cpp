#include "citescope/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

using nlohmann::json;

std::string_view to_string(FeatureGroup g) {
  switch (g) {
    case FeatureGroup::Structural: return "Structural";
    case FeatureGroup::Lexical: return "Lexical";
    case FeatureGroup::Field: return "Field";
    case FeatureGroup::Usage: return "Usage";
  }
  return "?";
}

std::optional<FeatureGroup> parse_feature_group(std::string_view s) {
  for (auto g : {FeatureGroup::Structural, FeatureGroup::Lexical, FeatureGroup::Field, FeatureGroup::Usage}) {
    if (to_string(g) == s) return g;
  }
  return std::nullopt;
}

std::optional<std::size_t> Schema::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].name == name) return i;
  }
  return std::nullopt;
}

std::uint64_t Schema::hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(features.size()));
  for (const auto& f : features) {
    h.add(f.name);
    h.add(to_string(f.group));
  }
  for (const auto& [k, v] : model_hashes) {
    h.add(k);
    h.add(v);
  }
  return h.value();
}

const std::vector<std::string>& default_connectives() {
  static const std::vector<std::string> k = {
      "however",     "moreover",      "in contrast", "similarly",   "therefore",    "thus",
      "although",    "whereas",       "nevertheless", "furthermore", "additionally", "consequently",
      "conversely",  "meanwhile",     "likewise",    "instead",     "rather",       "hence",
      "besides",     "nonetheless",   "in particular", "for example", "in addition"};
  return k;
}

std::map<std::string, std::uint64_t> FeatureModels::version_hashes() const {
  std::map<std::string, std::uint64_t> out;
  if (patterns) out["patterns"] = patterns->version_hash();
  Fnv1a conn;
  for (const auto& c : connectives) conn.add(c);
  out["connectives"] = conn.value();
  if (citing_topics) out["topics_citing"] = fnv1a(serialize_model(*citing_topics));
  if (context_topics) out["topics_context"] = fnv1a(serialize_model(*context_topics));
  if (paper_topics) out["topics_paper"] = fnv1a(serialize_model(*paper_topics));
  if (vectors) out["vectors"] = vectors->version_hash();
  if (prototypes) {
    Fnv1a h;
    for (const auto& [key, p] : prototypes->entries) {
      h.add(to_string(key.first));
      h.add(key.second.text());
      h.add(static_cast<std::uint64_t>(p.count));
      for (double x : p.sum) h.add(x);
    }
    out["prototypes"] = h.value();
  }
  if (centroids) {
    Fnv1a h;
    for (std::size_t f = 0; f < kFunctionCount; ++f) {
      h.add(static_cast<std::uint64_t>(centroids->count[f]));
      for (double x : centroids->centroid[f]) h.add(x);
    }
    out["centroids"] = h.value();
  }
  Fnv1a sw;
  for (const auto& w : stopwords) sw.add(w);
  out["stopwords"] = sw.value();
  Fnv1a inf;
  inf.add(seed).add(static_cast<std::uint64_t>(inference_sweeps)).add(static_cast<std::uint64_t>(inference_burn_in));
  out["inference"] = inf.value();
  return out;
}

// ---------------------------------------------------------------------------
// Clauses, tense
// ---------------------------------------------------------------------------

std::vector<std::pair<int, int>> clauses(const Sentence& sentence) {
  std::vector<std::pair<int, int>> out;
  const int n = static_cast<int>(sentence.tokens.size());
  int depth = 0;
  int begin = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = sentence.tokens[static_cast<std::size_t>(i)];
    if (is_open_paren(t.surface) || is_open_paren(t.pos)) {
      ++depth;
    } else if (is_close_paren(t.surface) || is_close_paren(t.pos)) {
      depth = std::max(0, depth - 1);
    } else if (depth == 0 && (t.surface == "," || t.surface == ";" || t.pos == "CC")) {
      out.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  if (begin < n || out.empty()) out.emplace_back(begin, n);
  return out;
}

std::size_t clause_of(const std::vector<std::pair<int, int>>& clause_ranges, int token) {
  for (std::size_t c = 0; c < clause_ranges.size(); ++c) {
    if (token >= clause_ranges[c].first && token < clause_ranges[c].second) return c;
  }
  return clause_ranges.empty() ? 0 : clause_ranges.size() - 1;
}

Tense clause_tense(const Sentence& sentence, std::pair<int, int> range) {
  for (int i = range.first; i < range.second; ++i) {
    const auto pos = to_upper(sentence.tokens[static_cast<std::size_t>(i)].pos);
    if (pos == "MD") return Tense::Modal;
    if (pos == "VBD") return Tense::Past;
    if (pos == "VBP" || pos == "VBZ") return Tense::Present;
  }
  return Tense::None;
}

// ---------------------------------------------------------------------------
// PageRank
// ---------------------------------------------------------------------------

std::map<std::string, double> pagerank_at(const CitationGraph& graph, int year, double damping, double tol,
                                          int max_iter) {
  std::vector<std::size_t> members;
  std::vector<int> local(graph.nodes().size(), -1);
  for (std::size_t i = 0; i < graph.nodes().size(); ++i) {
    if (graph.nodes()[i].year < year) {
      local[i] = static_cast<int>(members.size());
      members.push_back(i);
    }
  }
  const std::size_t n = members.size();
  if (n == 0) return {};
  std::vector<std::vector<std::size_t>> out(n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t e : graph.out_edges(members[m])) {
      const int t = local[graph.edges()[e].cited];
      if (t >= 0) out[m].push_back(static_cast<std::size_t>(t));
    }
  }
  const double nd = static_cast<double>(n);
  std::vector<double> pr(n, 1.0 / nd), next(n);
  for (int it = 0; it < max_iter; ++it) {
    double dangling = 0;
    for (std::size_t m = 0; m < n; ++m) {
      if (out[m].empty()) dangling += pr[m];
    }
    std::fill(next.begin(), next.end(), (1.0 - damping) / nd + damping * dangling / nd);
    for (std::size_t m = 0; m < n; ++m) {
      if (out[m].empty()) continue;
      const double share = damping * pr[m] / static_cast<double>(out[m].size());
      for (std::size_t t : out[m]) next[t] += share;
    }
    double delta = 0;
    for (std::size_t m = 0; m < n; ++m) delta += std::abs(next[m] - pr[m]);
    pr.swap(next);
    if (delta < tol) break;
  }
  const double total = std::accumulate(pr.begin(), pr.end(), 0.0);
  std::map<std::string, double> result;
  for (std::size_t m = 0; m < n; ++m) result[graph.nodes()[members[m]].id] = pr[m] / total;
  return result;
}

// ---------------------------------------------------------------------------
// Usage
// ---------------------------------------------------------------------------

UsageCounts usage_counts(const Paper& paper, const std::string& bib_id) {
  UsageCounts u;
  // Sentences holding a direct mention of bib_id, per section.
  std::map<int, std::set<int>> direct_sentences;
  for (const auto& m : paper.mentions) {
    if (m.bib_id != bib_id) continue;
    ++u.direct;
    ++u.direct_by_section[index_of(paper.sections[static_cast<std::size_t>(m.section_index)].kind)];
    direct_sentences[m.section_index].insert(m.sentence_index);
  }
  u.fraction = paper.mentions.empty() ? 0.0 : static_cast<double>(u.direct) / static_cast<double>(paper.mentions.size());

  const Reference* ref = paper.find_reference(bib_id);
  if (!ref) return u;
  std::string surname;
  if (!ref->authors.empty()) {
    surname = normalize_author(ref->authors.front());
    surname = surname.substr(0, surname.find(','));
  }
  const std::string year = ref->year ? std::to_string(*ref->year) : "";
  if (surname.empty() && year.empty()) return u;

  for (const auto& [sec, sentences] : direct_sentences) {
    const auto& section = paper.sections[static_cast<std::size_t>(sec)];
    const int first = *sentences.begin();
    for (int s = first + 1; s < static_cast<int>(section.sentences.size()); ++s) {
      if (sentences.count(s)) continue;
      std::vector<TokenSpan> spans;
      for (std::size_t idx : paper.mentions_in(sec, s)) spans.push_back(paper.mentions[idx].span);
      const auto& toks = section.sentences[static_cast<std::size_t>(s)].tokens;
      bool hit = false;
      for (std::size_t i = 0; i < toks.size() && !hit; ++i) {
        const int ii = static_cast<int>(i);
        if (std::any_of(spans.begin(), spans.end(), [&](const TokenSpan& sp) { return sp.first <= ii && ii <= sp.last; })) {
          continue;
        }
        const auto w = to_lower(toks[i].surface);
        hit = (!surname.empty() && w == surname) || (!year.empty() && w == year);
      }
      if (hit) {
        ++u.indirect;
        ++u.indirect_by_section[index_of(section.kind)];
      }
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// FeatureExtractor
// ---------------------------------------------------------------------------

class FeatureExtractor::Sink {
 public:
  explicit Sink(std::vector<FeatureSpec>* names) : names_(names) {}
  explicit Sink(std::vector<double>* values) : values_(values) {}

  FeatureGroup group = FeatureGroup::Structural;

  void add(const std::string& name, double v) {
    if (names_) {
      names_->push_back({name, group});
    } else {
      values_->push_back(v);
    }
  }
  void add_optional(const std::string& name, std::optional<double> v) {
    add(name, v.value_or(0.0));
    add(name + "_missing", v ? 0.0 : 1.0);
  }

 private:
  std::vector<FeatureSpec>* names_ = nullptr;
  std::vector<double>* values_ = nullptr;
};

namespace {

std::string feature_token(std::string_view s) {
  std::string out;
  for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) ? static_cast<char>(std::tolower(c)) : '_';
  return out;
}

std::uint64_t item_seed(std::uint64_t seed, std::string_view paper_id, std::size_t mention) {
  return derive_seed(seed, Fnv1a().add(paper_id).add(static_cast<std::uint64_t>(mention)).value());
}

double frac(double num, double den) { return den >= 1 ? std::clamp(num / den, 0.0, 1.0) : 0.0; }

}  // namespace

FeatureExtractor::FeatureExtractor(const Corpus& corpus, const FeatureModels& models)
    : corpus_(corpus), models_(models), graph_(corpus) {
  if (models.patterns) matcher_.emplace(*models.patterns);
  std::set<int> years;
  for (const auto& p : corpus.papers) years.insert(p.meta.year);
  for (int y : years) pagerank_by_year_[y] = pagerank_at(graph_, y);
  if (models.paper_topics) {
    for (const auto& p : corpus.papers) {
      paper_theta_[p.id()] = infer(*models.paper_topics, paper_document(p, models.stopwords),
                                   item_seed(models.seed, p.id(), static_cast<std::size_t>(-1)),
                                   models.inference_sweeps, models.inference_burn_in);
    }
  }
  Sink names(&schema_.features);
  emit_all(nullptr, names);
  schema_.model_hashes = models.version_hashes();
}

void FeatureExtractor::emit_all(const CitationContext* ctx, Sink& out) const {
  out.group = FeatureGroup::Structural;
  structural(ctx, out);
  out.group = FeatureGroup::Lexical;
  lexical(ctx, out);
  out.group = FeatureGroup::Field;
  field(ctx, out);
  out.group = FeatureGroup::Usage;
  usage(ctx, out);
}

std::vector<double> FeatureExtractor::assemble(const CitationContext& ctx) const {
  std::vector<double> values;
  values.reserve(schema_.size());
  Sink sink(&values);
  emit_all(&ctx, sink);
  if (values.size() != schema_.size()) throw std::logic_error("feature vector length differs from schema");
  return values;
}

void FeatureExtractor::structural(const CitationContext* ctx, Sink& out) const {
  double sec_no = 0, sec_remaining = 0, sec_rel = 0, pos_paper = 0, pos_section = 0, pos_sub = 0, sub_missing = 1;
  double pos_sentence = 0, pos_clause = 0, others_sub = 0, others_sentence = 0, others_clause = 0;
  std::size_t kind = index_of(SectionKind::Other);
  if (ctx) {
    const Paper& p = *ctx->paper;
    const auto& m = ctx->mention();
    const auto& sec = p.sections[static_cast<std::size_t>(m.section_index)];
    const double sections = static_cast<double>(p.sections.size());
    sec_no = m.section_index + 1;
    sec_remaining = sections - sec_no;
    sec_rel = frac(sec_no, sections);
    kind = index_of(sec.kind);
    pos_paper = frac(static_cast<double>(p.global_sentence_index(m.section_index, m.sentence_index) + 1),
                     static_cast<double>(p.sentence_count()));
    pos_section = frac(m.sentence_index + 1, static_cast<double>(sec.sentences.size()));
    auto [b, e] = sec.has_subsections() ? sec.subsection_bounds(m.sentence_index)
                                        : std::pair<int, int>{0, static_cast<int>(sec.sentences.size())};
    sub_missing = sec.has_subsections() ? 0 : 1;
    pos_sub = frac(m.sentence_index - b + 1, e - b);

    const Sentence& s = ctx->citing();
    const auto cl = clauses(s);
    const auto my_clause = clause_of(cl, m.span.first);
    pos_sentence = frac(m.span.first + 1, static_cast<double>(s.tokens.size()));
    pos_clause = frac(m.span.first - cl[my_clause].first + 1, cl[my_clause].second - cl[my_clause].first);
    for (std::size_t i = 0; i < p.mentions.size(); ++i) {
      if (i == ctx->mention_index) continue;
      const auto& o = p.mentions[i];
      if (o.section_index != m.section_index) continue;
      if (o.sentence_index >= b && o.sentence_index < e) ++others_sub;
      if (o.sentence_index == m.sentence_index) {
        ++others_sentence;
        if (clause_of(cl, o.span.first) == my_clause) ++others_clause;
      }
    }
  }
  out.add("section_number", sec_no);
  out.add("sections_remaining", sec_remaining);
  out.add("section_relative", sec_rel);
  for (std::size_t k = 0; k < kSectionKindCount; ++k) {
    out.add("section_kind_" + feature_token(to_string(kAllSectionKinds[k])), k == kind ? 1.0 : 0.0);
  }
  out.add("position_in_paper", pos_paper);
  out.add("position_in_section", pos_section);
  out.add("position_in_subsection", pos_sub);
  out.add("subsection_missing", sub_missing);
  out.add("position_in_sentence", pos_sentence);
  out.add("position_in_clause", pos_clause);
  out.add("other_citations_subsection", others_sub);
  out.add("other_citations_sentence", others_sentence);
  out.add("other_citations_clause", others_clause);
}

void FeatureExtractor::lexical(const CitationContext* ctx, Sink& out) const {
  if (models_.patterns) {
    std::vector<char> fired(models_.patterns->size(), 0);
    if (ctx) {
      for (const auto& m : matcher_->match_context(*ctx)) fired[m.pattern_id] = 1;
    }
    for (std::size_t i = 0; i < fired.size(); ++i) {
      out.add("pattern_" + std::to_string(i), fired[matcher_->canonical_id(i)]);
    }
  }

  std::vector<std::string> words;
  if (ctx) {
    for (const auto& t : ctx->citing().tokens) words.push_back(to_lower(t.surface));
  }
  for (const auto& phrase : models_.connectives) {
    const auto parts = split_ws(to_lower(phrase));
    bool found = false;
    for (std::size_t i = 0; !parts.empty() && i + parts.size() <= words.size() && !found; ++i) {
      found = std::equal(parts.begin(), parts.end(), words.begin() + static_cast<std::ptrdiff_t>(i));
    }
    out.add("connective_" + feature_token(phrase), found ? 1.0 : 0.0);
  }

  Tense tense = Tense::None;
  double sent_len = 0, clause_len = 0;
  MentionForm form;
  if (ctx) {
    const Sentence& s = ctx->citing();
    const auto cl = clauses(s);
    const auto range = cl[clause_of(cl, ctx->mention().span.first)];
    tense = clause_tense(s, range);
    sent_len = static_cast<double>(s.tokens.size());
    clause_len = range.second - range.first;
    form = classify_mention_form(ctx->mention(), s);
  }
  out.add("tense_past", tense == Tense::Past);
  out.add("tense_present", tense == Tense::Present);
  out.add("tense_modal", tense == Tense::Modal);
  out.add("tense_none", tense == Tense::None);
  out.add("sentence_length", sent_len);
  out.add("clause_length", clause_len);
  out.add("form_nominative", ctx && form.form == CitationForm::Nominative);
  out.add("preceded_by_pascal", form.preceded_by_pascal);
  out.add("preceded_by_allcaps", form.preceded_by_allcaps);
  out.add("inside_parenthetical", form.inside_parenthetical);

  auto topic_block = [&](const std::optional<TopicModel>& model, bool extended, const std::string& prefix) {
    if (!model) return;
    TopicDistribution theta(model->K, 0.0);
    if (ctx) {
      theta = infer(*model, context_document(*ctx, extended, models_.stopwords),
                    item_seed(models_.seed ^ (extended ? 0x5bd1e995ULL : 0), ctx->paper_id(), ctx->mention_index),
                    models_.inference_sweeps, models_.inference_burn_in);
    }
    for (std::size_t k = 0; k < model->K; ++k) out.add(prefix + std::to_string(k), theta[k]);
  };
  topic_block(models_.citing_topics, false, "topic_citing_");
  topic_block(models_.context_topics, true, "topic_context_");

  if (models_.paper_topics) {
    std::optional<double> sim;
    if (ctx) {
      const Reference* ref = ctx->paper->find_reference(ctx->mention().bib_id);
      if (ref && ref->resolved_id) {
        auto cited = paper_theta_.find(*ref->resolved_id);
        auto citing = paper_theta_.find(ctx->paper_id());
        if (cited != paper_theta_.end() && citing != paper_theta_.end()) {
          sim = topic_similarity(citing->second, cited->second);
        }
      }
    }
    out.add_optional("topic_similarity_cited", sim);
  }

  FunctionScores sp, proto;
  if (ctx && models_.vectors) {
    if (models_.prototypes && ctx->citing().has_tree) sp = score(extract_paths(*ctx), *models_.prototypes, *models_.vectors);
    if (models_.centroids) proto = prototypicality(*ctx, *models_.centroids, *models_.vectors);
  }
  for (std::size_t f = 0; f < kFunctionCount; ++f) {
    out.add_optional("selpref_" + feature_token(to_string(kAllFunctions[f])),
                     sp.covered[f] ? std::optional<double>(sp.value[f]) : std::nullopt);
  }
  for (std::size_t f = 0; f < kFunctionCount; ++f) {
    out.add_optional("prototypicality_" + feature_token(to_string(kAllFunctions[f])),
                     proto.covered[f] ? std::optional<double>(proto.value[f]) : std::nullopt);
  }
}

void FeatureExtractor::field(const CitationContext* ctx, Sink& out) const {
  VenueKind citing_venue = VenueKind::Workshop;
  std::optional<VenueKind> cited_venue;
  std::optional<double> count, pagerank, year_diff, self_cite;
  if (ctx) {
    const Paper& p = *ctx->paper;
    citing_venue = p.meta.venue;
    const Reference* ref = p.find_reference(ctx->mention().bib_id);
    const Paper* cited = ref && ref->resolved_id ? corpus_.find(*ref->resolved_id) : nullptr;
    if (cited) {
      cited_venue = cited->meta.venue;
      count = 0;
      if (auto node = graph_.node_index(cited->id())) {
        for (std::size_t e : graph_.in_edges(*node)) {
          if (graph_.nodes()[graph_.edges()[e].citing].year < p.meta.year) *count += 1;
        }
      }
      const auto& pr = pagerank_by_year_.at(p.meta.year);
      if (auto it = pr.find(cited->id()); it != pr.end()) pagerank = it->second;
    }
    std::optional<int> cited_year;
    if (cited) {
      cited_year = cited->meta.year;
    } else if (ref && ref->year) {
      cited_year = ref->year;
    }
    if (cited_year) year_diff = p.meta.year - *cited_year;

    std::set<std::string> cited_authors;
    if (cited) {
      cited_authors.insert(cited->meta.authors.begin(), cited->meta.authors.end());
    } else if (ref) {
      for (const auto& a : ref->authors) cited_authors.insert(normalize_author(a));
    }
    if (!cited_authors.empty()) {
      bool shared = false;
      for (const auto& a : p.meta.authors) shared = shared || cited_authors.count(normalize_author(a));
      self_cite = shared ? 1.0 : 0.0;
    }
  }
  for (auto v : kAllVenueKinds) {
    out.add("citing_venue_" + feature_token(to_string(v)), ctx && v == citing_venue);
  }
  for (auto v : kAllVenueKinds) {
    out.add("cited_venue_" + feature_token(to_string(v)), cited_venue && v == *cited_venue);
  }
  out.add("cited_venue_missing", !cited_venue);
  out.add_optional("cited_citation_count", count);
  out.add_optional("cited_pagerank", pagerank);
  out.add_optional("year_difference", year_diff);
  out.add_optional("self_citation", self_cite);
}

void FeatureExtractor::usage(const CitationContext* ctx, Sink& out) const {
  UsageCounts u;
  if (ctx) u = usage_counts(*ctx->paper, ctx->mention().bib_id);
  out.add("direct_citations", static_cast<double>(u.direct));
  out.add("indirect_citations", static_cast<double>(u.indirect));
  for (std::size_t k = 0; k < kSectionKindCount; ++k) {
    out.add("direct_in_" + feature_token(to_string(kAllSectionKinds[k])), static_cast<double>(u.direct_by_section[k]));
  }
  for (std::size_t k = 0; k < kSectionKindCount; ++k) {
    out.add("indirect_in_" + feature_token(to_string(kAllSectionKinds[k])),
            static_cast<double>(u.indirect_by_section[k]));
  }
  out.add("bibliography_fraction", u.fraction);
}

// ---------------------------------------------------------------------------
// Datasets
// ---------------------------------------------------------------------------

Dataset featurize(const Corpus& corpus, const FeatureModels& models) {
  FeatureExtractor fx(corpus, models);
  Dataset ds;
  ds.schema = fx.schema();
  ds.input_hash = corpus.version_hash();
  for (const auto& p : corpus.papers) {
    for (const auto& ctx : extract_contexts(p)) {
      DatasetRow row;
      row.paper_id = p.id();
      row.mention = ctx.mention_index;
      row.bib_id = ctx.mention().bib_id;
      row.gold = ctx.mention().gold;
      row.values = fx.assemble(ctx);
      ds.rows.push_back(std::move(row));
    }
  }
  log::info("featurize", std::to_string(ds.rows.size()) + " rows x " + std::to_string(ds.schema.size()) + " features");
  return ds;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

const std::vector<std::string> kKeyColumns = {"paper_id", "mention", "bib_id", "function", "centrality"};

}  // namespace

std::string dataset_csv(const Dataset& ds) {
  std::string out;
  for (std::size_t i = 0; i < kKeyColumns.size(); ++i) out += (i ? "," : "") + kKeyColumns[i];
  for (const auto& f : ds.schema.features) out += "," + f.name;
  out += '\n';
  for (const auto& r : ds.rows) {
    out += csv_field(r.paper_id) + ',' + std::to_string(r.mention) + ',' + csv_field(r.bib_id) + ',';
    if (r.gold) out += std::string(to_string(r.gold->function)) + ',' + std::string(to_string(r.gold->centrality));
    else out += ',';
    for (double v : r.values) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

std::string manifest_json(const Dataset& ds) {
  json js;
  js["format"] = "citescope-features";
  js["version"] = 1;
  js["schema_hash"] = to_hex(ds.schema.hash());
  js["input_hash"] = to_hex(ds.input_hash);
  js["rows"] = ds.rows.size();
  json feats = json::array();
  for (const auto& f : ds.schema.features) feats.push_back({{"name", f.name}, {"group", to_string(f.group)}});
  js["features"] = std::move(feats);
  json hashes = json::object();
  for (const auto& [k, v] : ds.schema.model_hashes) hashes[k] = to_hex(v);
  js["model_hashes"] = std::move(hashes);
  return js.dump(1) + "\n";
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, dataset_csv(ds));
  write_file_atomic(path.string() + ".manifest.json", manifest_json(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto mismatch = [](const std::string& m) { throw FeatureError(FeatureError::Kind::SchemaMismatch, m); };
  auto malformed = [&](const std::string& m) { throw FeatureError(FeatureError::Kind::Malformed, path.string() + ": " + m); };
  Dataset ds;
  json man;
  try {
    man = json::parse(read_file(path.string() + ".manifest.json"));
    for (const auto& f : man.at("features")) {
      auto g = parse_feature_group(f.at("group").get<std::string>());
      if (!g) malformed("unknown feature group");
      ds.schema.features.push_back({f.at("name").get<std::string>(), *g});
    }
    for (const auto& [k, v] : man.at("model_hashes").items()) {
      ds.schema.model_hashes[k] = std::stoull(v.get<std::string>(), nullptr, 16);
    }
    ds.input_hash = std::stoull(man.at("input_hash").get<std::string>(), nullptr, 16);
  } catch (const json::exception& e) {
    malformed(std::string("bad manifest: ") + e.what());
  }
  if (to_hex(ds.schema.hash()) != man.value("schema_hash", "")) mismatch("manifest schema hash does not match its feature list");

  const auto text = read_file(path);
  const auto lines = split(text, '\n');
  if (lines.empty()) malformed("empty dataset");
  const auto header = parse_csv_line(lines[0]);
  if (header.size() != kKeyColumns.size() + ds.schema.size()) mismatch("dataset header width differs from manifest");
  for (std::size_t i = 0; i < ds.schema.size(); ++i) {
    if (header[kKeyColumns.size() + i] != ds.schema.features[i].name) {
      mismatch("dataset column '" + header[kKeyColumns.size() + i] + "' differs from manifest '" +
               ds.schema.features[i].name + "'");
    }
  }
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (lines[li].empty()) continue;
    const auto cols = parse_csv_line(lines[li]);
    if (cols.size() != header.size()) malformed("row " + std::to_string(li) + " has the wrong width");
    DatasetRow r;
    r.paper_id = cols[0];
    r.mention = std::stoul(cols[1]);
    r.bib_id = cols[2];
    if (!cols[3].empty()) {
      auto f = parse_function(cols[3]);
      auto c = parse_centrality(cols[4]);
      if (!f || !c) malformed("row " + std::to_string(li) + " has an unknown label");
      r.gold = Label{*f, *c};
    }
    for (std::size_t i = kKeyColumns.size(); i < cols.size(); ++i) r.values.push_back(std::stod(cols[i]));
    ds.rows.push_back(std::move(r));
  }
  return ds;
}

void check_schema(const Schema& dataset, const Schema& expected) {
  if (dataset.features != expected.features) {
    throw FeatureError(FeatureError::Kind::SchemaMismatch, "feature lists differ (" + std::to_string(dataset.size()) +
                                                               " vs " + std::to_string(expected.size()) + " features)");
  }
  if (dataset.model_hashes != expected.model_hashes || dataset.hash() != expected.hash()) {
    std::string which;
    for (const auto& [k, v] : expected.model_hashes) {
      auto it = dataset.model_hashes.find(k);
      if (it == dataset.model_hashes.end() || it->second != v) which += (which.empty() ? "" : ", ") + k;
    }
    throw FeatureError(FeatureError::Kind::SchemaMismatch, "model version hashes differ: " + which);
  }
}

}  // namespace citescope
