#include "citescope/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

using nlohmann::json;

std::string_view to_string(LoadIssue::Kind k) {
  switch (k) {
    case LoadIssue::Kind::MissingMetadata: return "MissingMetadata";
    case LoadIssue::Kind::MalformedSentence: return "MalformedSentence";
    case LoadIssue::Kind::DanglingBibId: return "DanglingBibId";
    case LoadIssue::Kind::MalformedDocument: return "MalformedDocument";
  }
  return "?";
}

CorpusError::CorpusError(LoadIssue issue)
    : std::runtime_error(std::string(to_string(issue.kind)) + " in paper '" + issue.paper +
                         "': " + issue.detail),
      issue_(std::move(issue)) {}

std::pair<int, int> Section::subsection_bounds(int sentence) const {
  const int n = static_cast<int>(sentences.size());
  if (subsection_starts.empty()) return {0, n};
  int begin = 0;
  int end = n;
  for (int start : subsection_starts) {
    if (start <= sentence) {
      begin = start;
    } else {
      end = start;
      break;
    }
  }
  return {begin, end};
}

const Reference* Paper::find_reference(std::string_view bib_id) const {
  for (const auto& r : bibliography) {
    if (r.bib_id == bib_id) return &r;
  }
  return nullptr;
}

std::size_t Paper::sentence_count() const {
  std::size_t n = 0;
  for (const auto& s : sections) n += s.sentences.size();
  return n;
}

std::size_t Paper::global_sentence_index(int section, int sentence) const {
  std::size_t n = 0;
  for (int i = 0; i < section; ++i) n += sections[static_cast<std::size_t>(i)].sentences.size();
  return n + static_cast<std::size_t>(sentence);
}

std::vector<std::size_t> Paper::mentions_in(int section, int sentence) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < mentions.size(); ++i) {
    if (mentions[i].section_index == section && mentions[i].sentence_index == sentence) {
      out.push_back(i);
    }
  }
  return out;
}

const Paper* Corpus::find(std::string_view anthology_id) const {
  for (const auto& p : papers) {
    if (p.id() == anthology_id) return &p;
  }
  return nullptr;
}

std::size_t Corpus::mention_count() const {
  std::size_t n = 0;
  for (const auto& p : papers) n += p.mentions.size();
  return n;
}

std::uint64_t Corpus::version_hash() const {
  Fnv1a h;
  for (const auto& p : papers) h.add(serialize_paper(p));
  return h.value();
}

// ---------------------------------------------------------------------------
// Section titles, venues, authors
// ---------------------------------------------------------------------------

namespace {

struct KeywordRow {
  std::vector<std::string_view> keywords;
  SectionKind kind;
};

const std::vector<KeywordRow>& section_keyword_table() {
  static const std::vector<KeywordRow> table = {
      {{"intro"}, SectionKind::Introduction},
      {{"motivat"}, SectionKind::Motivation},
      {{"related", "previous work", "background"}, SectionKind::RelatedWork},
      {{"method", "approach", "model", "system", "algorithm"}, SectionKind::Methodology},
      {{"experiment", "evaluation", "setup", "data"}, SectionKind::Evaluation},
      {{"result"}, SectionKind::Results},
      {{"discussion", "analysis"}, SectionKind::Discussion},
      {{"conclusion", "future"}, SectionKind::Conclusion},
  };
  return table;
}

bool is_roman_numeral(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == 'i' || c == 'v' || c == 'x' || c == 'l' || c == 'c';
  });
}

// Drops leading "2.", "3.1", "IV." style numbering.
std::string strip_numbering(std::string s) {
  std::size_t i = 0;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
  if (i == 0) {
    const auto dot = s.find('.');
    if (dot != std::string::npos && dot > 0 && is_roman_numeral(s.substr(0, dot))) i = dot + 1;
  }
  return std::string(trim(std::string_view(s).substr(i)));
}

}  // namespace

SectionKind canonical_section(std::string_view raw_title) {
  const std::string title = strip_numbering(to_lower(trim(raw_title)));
  for (const auto& row : section_keyword_table()) {
    for (auto kw : row.keywords) {
      if (title.find(kw) != std::string::npos) return row.kind;
    }
  }
  return SectionKind::Other;
}

VenueKind venue_kind_for(std::string_view anthology_id, bool* unknown) {
  if (unknown) *unknown = false;
  const char prefix = anthology_id.empty() ? '\0' : anthology_id.front();
  switch (prefix) {
    case 'J': return VenueKind::Journal;
    case 'P':
    case 'N':
    case 'D':
    case 'E':
    case 'C':
    case 'A': return VenueKind::Conference;
    case 'W': return VenueKind::Workshop;
    default:
      if (unknown) *unknown = true;
      return VenueKind::Workshop;
  }
}

std::string normalize_author(std::string_view name) {
  std::string surname;
  std::string given;
  const auto comma = name.find(',');
  if (comma != std::string_view::npos) {
    surname = std::string(trim(name.substr(0, comma)));
    given = std::string(trim(name.substr(comma + 1)));
  } else {
    auto parts = split_ws(name);
    if (parts.empty()) return "";
    surname = parts.back();
    if (parts.size() > 1) given = parts.front();
  }
  std::string out = to_lower(surname);
  if (!given.empty()) {
    out += ", ";
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(given.front())));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Parsing and validation
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void fail(LoadIssue::Kind kind, const std::string& paper, const std::string& detail) {
  throw CorpusError(LoadIssue{kind, paper, detail});
}

Sentence parse_sentence(const json& js, const std::string& paper_id, int section, int index) {
  Sentence s;
  s.index_in_section = index;
  const auto where = "section " + std::to_string(section) + " sentence " + std::to_string(index);
  if (!js.is_object() || !js.contains("tokens") || !js["tokens"].is_array()) {
    fail(LoadIssue::Kind::MalformedSentence, paper_id, where + ": missing tokens");
  }
  std::size_t with_head = 0;
  for (const auto& jt : js["tokens"]) {
    Token t;
    try {
      t.surface = jt.at("t").get<std::string>();
      t.pos = jt.value("pos", std::string());
      if (jt.contains("head")) {
        t.head = jt["head"].get<int>();
        ++with_head;
      }
      t.deprel = jt.value("rel", std::string());
      t.char_start = jt.at("cs").get<std::size_t>();
      t.char_end = jt.at("ce").get<std::size_t>();
    } catch (const json::exception& e) {
      fail(LoadIssue::Kind::MalformedSentence, paper_id, where + ": " + e.what());
    }
    s.tokens.push_back(std::move(t));
  }
  if (with_head != 0 && with_head != s.tokens.size()) {
    fail(LoadIssue::Kind::MalformedSentence, paper_id, where + ": partial dependency tree");
  }
  s.has_tree = with_head != 0;
  return s;
}

void validate_sentence(const Sentence& s, const std::string& paper_id, int section, int index) {
  const auto where = "section " + std::to_string(section) + " sentence " + std::to_string(index);
  const int n = static_cast<int>(s.tokens.size());
  if (n == 0) fail(LoadIssue::Kind::MalformedSentence, paper_id, where + ": empty sentence");
  int roots = 0;
  for (int i = 0; i < n; ++i) {
    const auto& t = s.tokens[static_cast<std::size_t>(i)];
    if (t.char_start >= t.char_end) {
      fail(LoadIssue::Kind::MalformedSentence, paper_id,
           where + ": empty char span at token " + std::to_string(i));
    }
    if (!s.has_tree) continue;
    if (t.head < 0 || t.head > n || t.head == i + 1) {
      fail(LoadIssue::Kind::MalformedSentence, paper_id,
           where + ": bad head at token " + std::to_string(i));
    }
    if (t.head == 0) ++roots;
  }
  if (s.has_tree && roots != 1) {
    fail(LoadIssue::Kind::MalformedSentence, paper_id,
         where + ": expected one root, found " + std::to_string(roots));
  }
}

}  // namespace

void validate_paper(const Paper& paper) {
  const auto& id = paper.id();
  if (id.empty()) fail(LoadIssue::Kind::MissingMetadata, "?", "empty anthology id");
  if (paper.meta.year < 1000 || paper.meta.year > 9999) {
    fail(LoadIssue::Kind::MissingMetadata, id, "year must have four digits");
  }
  for (std::size_t s = 0; s < paper.sections.size(); ++s) {
    const auto& sec = paper.sections[s];
    for (std::size_t i = 0; i < sec.sentences.size(); ++i) {
      validate_sentence(sec.sentences[i], id, static_cast<int>(s), static_cast<int>(i));
    }
    int prev = -1;
    for (int start : sec.subsection_starts) {
      if (start <= prev || start < 0 || start >= static_cast<int>(sec.sentences.size())) {
        fail(LoadIssue::Kind::MalformedDocument, id,
             "bad subsection start in section " + std::to_string(s));
      }
      prev = start;
    }
  }
  std::set<std::string, std::less<>> bib_ids;
  for (const auto& r : paper.bibliography) {
    if (!bib_ids.insert(r.bib_id).second) {
      fail(LoadIssue::Kind::MalformedDocument, id, "duplicate bib_id '" + r.bib_id + "'");
    }
  }
  for (std::size_t m = 0; m < paper.mentions.size(); ++m) {
    const auto& mention = paper.mentions[m];
    if (!bib_ids.contains(mention.bib_id)) {
      fail(LoadIssue::Kind::DanglingBibId, id,
           "mention " + std::to_string(m) + " cites unknown bib_id '" + mention.bib_id + "'");
    }
    if (mention.section_index < 0 ||
        mention.section_index >= static_cast<int>(paper.sections.size())) {
      fail(LoadIssue::Kind::MalformedDocument, id,
           "mention " + std::to_string(m) + " has bad section index");
    }
    const auto& sec = paper.sections[static_cast<std::size_t>(mention.section_index)];
    if (mention.sentence_index < 0 ||
        mention.sentence_index >= static_cast<int>(sec.sentences.size())) {
      fail(LoadIssue::Kind::MalformedDocument, id,
           "mention " + std::to_string(m) + " has bad sentence index");
    }
    const auto& sent = sec.sentences[static_cast<std::size_t>(mention.sentence_index)];
    if (mention.span.first < 0 || mention.span.last < mention.span.first ||
        mention.span.last >= static_cast<int>(sent.tokens.size())) {
      fail(LoadIssue::Kind::MalformedDocument, id,
           "mention " + std::to_string(m) + " token span outside its sentence");
    }
  }
}

Paper parse_paper(const json& doc, const json* index_meta) {
  Paper paper;
  if (!doc.is_object()) fail(LoadIssue::Kind::MalformedDocument, "?", "document is not an object");
  const json meta_js = doc.value("meta", json::object());
  std::string id = meta_js.value("id", std::string());
  if (id.empty() && index_meta) id = index_meta->value("id", std::string());
  if (id.empty()) fail(LoadIssue::Kind::MissingMetadata, "?", "document has no meta.id");

  // The index entry wins; the document's own meta block is the fallback.
  const json* source = nullptr;
  if (index_meta && index_meta->contains("year")) {
    source = index_meta;
  } else if (meta_js.contains("year")) {
    source = &meta_js;
  }
  if (!source) fail(LoadIssue::Kind::MissingMetadata, id, "no metadata entry with a year");

  try {
    paper.meta.anthology_id = id;
    paper.meta.title = source->value("title", std::string());
    paper.meta.year = source->at("year").get<int>();
    bool unknown = false;
    paper.meta.venue = venue_kind_for(id, &unknown);
    if (unknown) log::warn("corpus", "unknown venue prefix for '" + id + "', using Workshop");
    for (const auto& a : source->value("authors", json::array())) {
      paper.meta.authors.push_back(normalize_author(a.get<std::string>()));
    }
  } catch (const json::exception& e) {
    fail(LoadIssue::Kind::MissingMetadata, id, e.what());
  }

  try {
    int sec_index = 0;
    for (const auto& js : doc.value("sections", json::array())) {
      Section sec;
      sec.raw_title = js.value("title", std::string());
      sec.kind = canonical_section(sec.raw_title);
      sec.index = sec_index;
      int sent_index = 0;
      for (const auto& jsent : js.value("sentences", json::array())) {
        sec.sentences.push_back(parse_sentence(jsent, id, sec_index, sent_index++));
      }
      for (const auto& start : js.value("subsections", json::array())) {
        sec.subsection_starts.push_back(start.get<int>());
      }
      paper.sections.push_back(std::move(sec));
      ++sec_index;
    }

    for (const auto& jr : doc.value("bibliography", json::array())) {
      Reference r;
      r.bib_id = jr.at("id").get<std::string>();
      if (jr.contains("resolved") && jr["resolved"].is_string()) {
        r.resolved_id = jr["resolved"].get<std::string>();
      }
      r.raw = jr.value("raw", std::string());
      for (const auto& a : jr.value("authors", json::array())) r.authors.push_back(a.get<std::string>());
      if (jr.contains("year") && jr["year"].is_number_integer()) r.year = jr["year"].get<int>();
      paper.bibliography.push_back(std::move(r));
    }

    for (const auto& jm : doc.value("mentions", json::array())) {
      CitationMention m;
      m.bib_id = jm.at("bib").get<std::string>();
      m.section_index = jm.at("section").get<int>();
      m.sentence_index = jm.at("sentence").get<int>();
      m.span.first = jm.at("first").get<int>();
      m.span.last = jm.at("last").get<int>();
      const bool has_fn = jm.contains("function");
      const bool has_cent = jm.contains("centrality");
      if (has_fn != has_cent) {
        fail(LoadIssue::Kind::MalformedDocument, id, "gold label needs both function and centrality");
      }
      if (has_fn) {
        auto fn = parse_function(jm["function"].get<std::string>());
        auto cent = parse_centrality(jm["centrality"].get<std::string>());
        if (!fn || !cent) fail(LoadIssue::Kind::MalformedDocument, id, "unknown gold label spelling");
        m.gold = Label{*fn, *cent};
      }
      paper.mentions.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    fail(LoadIssue::Kind::MalformedDocument, id, e.what());
  }

  validate_paper(paper);
  for (auto& m : paper.mentions) {
    m.form = classify_mention_form(m, paper.sentence(m.section_index, m.sentence_index)).form;
  }
  return paper;
}

json paper_to_json(const Paper& paper) {
  json meta = {{"id", paper.meta.anthology_id},
               {"title", paper.meta.title},
               {"year", paper.meta.year},
               {"authors", paper.meta.authors}};
  json sections = json::array();
  for (const auto& sec : paper.sections) {
    json sentences = json::array();
    for (const auto& s : sec.sentences) {
      json tokens = json::array();
      for (const auto& t : s.tokens) {
        json jt = {{"t", t.surface}, {"pos", t.pos}, {"cs", t.char_start}, {"ce", t.char_end}};
        if (s.has_tree) {
          jt["head"] = t.head;
          jt["rel"] = t.deprel;
        }
        tokens.push_back(std::move(jt));
      }
      sentences.push_back({{"tokens", std::move(tokens)}});
    }
    json js = {{"title", sec.raw_title}, {"sentences", std::move(sentences)}};
    if (sec.has_subsections()) js["subsections"] = sec.subsection_starts;
    sections.push_back(std::move(js));
  }
  json bib = json::array();
  for (const auto& r : paper.bibliography) {
    json jr = {{"id", r.bib_id},
               {"resolved", r.resolved_id ? json(*r.resolved_id) : json(nullptr)},
               {"raw", r.raw},
               {"authors", r.authors}};
    if (r.year) jr["year"] = *r.year;
    bib.push_back(std::move(jr));
  }
  json mentions = json::array();
  for (const auto& m : paper.mentions) {
    json jm = {{"bib", m.bib_id},
               {"section", m.section_index},
               {"sentence", m.sentence_index},
               {"first", m.span.first},
               {"last", m.span.last}};
    if (m.gold) {
      jm["function"] = std::string(to_string(m.gold->function));
      jm["centrality"] = std::string(to_string(m.gold->centrality));
    }
    mentions.push_back(std::move(jm));
  }
  return {{"meta", std::move(meta)},
          {"sections", std::move(sections)},
          {"bibliography", std::move(bib)},
          {"mentions", std::move(mentions)}};
}

std::string serialize_paper(const Paper& paper) { return paper_to_json(paper).dump(); }

std::string serialize_corpus(const Corpus& corpus) {
  std::string out;
  for (const auto& p : corpus.papers) {
    out += serialize_paper(p);
    out += '\n';
  }
  return out;
}

Corpus load_corpus(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw std::runtime_error("corpus path is not a directory: " + root.string());

  std::map<std::string, json> index;
  const auto index_path = root / "metadata.jsonl";
  if (fs::exists(index_path)) {
    std::ifstream in(index_path);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto js = json::parse(line, nullptr, false);
      if (js.is_discarded() || !js.contains("id")) {
        log::warn("corpus", "skipping malformed metadata line");
        continue;
      }
      auto id = js["id"].get<std::string>();
      index[id] = std::move(js);
    }
  }

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl" &&
        entry.path().filename() != "metadata.jsonl") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  Corpus corpus;
  std::set<std::string, std::less<>> seen;
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      auto doc = json::parse(line, nullptr, false);
      if (doc.is_discarded()) {
        corpus.issues.push_back({LoadIssue::Kind::MalformedDocument, file.filename().string(),
                                 "invalid JSON"});
        continue;
      }
      const std::string id =
          doc.is_object() ? doc.value("meta", json::object()).value("id", std::string()) : "";
      const auto it = index.find(id);
      try {
        Paper p = parse_paper(doc, it == index.end() ? nullptr : &it->second);
        if (!seen.insert(p.id()).second) {
          corpus.issues.push_back({LoadIssue::Kind::MalformedDocument, p.id(), "duplicate paper id"});
          continue;
        }
        corpus.papers.push_back(std::move(p));
      } catch (const CorpusError& e) {
        corpus.issues.push_back(e.issue());
      }
    }
  }
  for (const auto& issue : corpus.issues) {
    log::warn("corpus", "skipped paper '" + issue.paper + "': " + std::string(to_string(issue.kind)) +
                            " (" + issue.detail + ")");
  }
  return corpus;
}

// ---------------------------------------------------------------------------
// Contexts and mention form
// ---------------------------------------------------------------------------

std::vector<CitationContext> extract_contexts(const Paper& paper) {
  std::vector<CitationContext> out;
  out.reserve(paper.mentions.size());
  for (std::size_t m = 0; m < paper.mentions.size(); ++m) {
    const auto& mention = paper.mentions[m];
    const auto& sec = paper.sections[static_cast<std::size_t>(mention.section_index)];
    CitationContext ctx;
    ctx.paper = &paper;
    ctx.mention_index = m;
    for (int offset = -kWindowBefore; offset <= kWindowAfter; ++offset) {
      const int idx = mention.sentence_index + offset;
      if (idx >= 0 && idx < static_cast<int>(sec.sentences.size())) {
        ctx.window[static_cast<std::size_t>(offset + kWindowBefore)] =
            &sec.sentences[static_cast<std::size_t>(idx)];
      }
    }
    out.push_back(ctx);
  }
  return out;
}

std::vector<CitationContext> extract_contexts(const Corpus& corpus) {
  std::vector<CitationContext> out;
  for (const auto& p : corpus.papers) {
    auto part = extract_contexts(p);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

bool is_open_paren(std::string_view s) { return s == "(" || s == "-LRB-" || s == "["; }
bool is_close_paren(std::string_view s) { return s == ")" || s == "-RRB-" || s == "]"; }

bool is_punctuation_tag(std::string_view pos) {
  static const std::set<std::string_view> kTags = {".", ",", ":", "``", "''", "-LRB-", "-RRB-",
                                                   "#", "$", "(", ")", "HYPH", "NFP", "PUNCT"};
  return kTags.contains(pos);
}

namespace {

bool has_lower(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool is_pascal(std::string_view s) {
  if (s.size() < 2 || !(s.front() >= 'A' && s.front() <= 'Z')) return false;
  if (std::any_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return false;
  }
  return has_lower(s.substr(1));
}

bool is_allcaps(std::string_view s) {
  int letters = 0;
  for (char c : s) {
    if (c >= 'A' && c <= 'Z') ++letters;
    if (c >= 'a' && c <= 'z') return false;
  }
  return letters >= 2;
}

bool is_year_like(std::string_view s) {
  if (s.size() < 4 || s.size() > 5) return false;
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return s.size() == 4 || std::isalpha(static_cast<unsigned char>(s[4]));
}

bool is_name_like(std::string_view s) {
  if (s.empty() || !(s.front() >= 'A' && s.front() <= 'Z')) return false;
  if (s.size() == 1) return true;
  // Second character lowercase or non-ASCII (e.g. "Dörre"); rules out "POS-tags".
  const auto c = static_cast<unsigned char>(s[1]);
  return (c >= 'a' && c <= 'z') || c >= 0x80 || c == '\'';
}

// Tokens that may sit between "(" and a mention in a parenthetical citation
// list: other author-year citations and their separators.
bool is_citation_glue(std::string_view s) {
  static const std::set<std::string_view> kGlue = {",", ";", "et", "al", "al.", "and", "&",
                                                   "e.g.", "e.g", "see", "cf.", "cf", "i.e."};
  return kGlue.contains(s) || is_year_like(s) || is_name_like(s);
}

}  // namespace

MentionForm classify_mention_form(const CitationMention& mention, const Sentence& sentence) {
  MentionForm out;
  const auto& toks = sentence.tokens;
  const int first = mention.span.first;
  const int last = mention.span.last;

  std::vector<int> open;
  for (int i = 0; i < first; ++i) {
    const auto& s = toks[static_cast<std::size_t>(i)].surface;
    if (is_open_paren(s)) {
      open.push_back(i);
    } else if (is_close_paren(s) && !open.empty()) {
      open.pop_back();
    }
  }
  const bool self_wrapped = is_open_paren(toks[static_cast<std::size_t>(first)].surface) &&
                            is_close_paren(toks[static_cast<std::size_t>(last)].surface);
  out.inside_parenthetical = self_wrapped || !open.empty();

  bool parenthetical = self_wrapped;
  if (!parenthetical && !open.empty()) {
    parenthetical = true;
    for (int i = open.back() + 1; i < first; ++i) {
      if (!is_citation_glue(toks[static_cast<std::size_t>(i)].surface)) {
        parenthetical = false;
        break;
      }
    }
  }
  out.form = parenthetical ? CitationForm::Parenthetical : CitationForm::Nominative;

  int prev = first - 1;
  while (prev >= 0 && is_open_paren(toks[static_cast<std::size_t>(prev)].surface)) --prev;
  if (prev >= 0) {
    const auto& s = toks[static_cast<std::size_t>(prev)].surface;
    out.preceded_by_pascal = is_pascal(s) && !is_allcaps(s);
    out.preceded_by_allcaps = is_allcaps(s);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph
// ---------------------------------------------------------------------------

CitationGraph::CitationGraph(const Corpus& corpus) {
  for (const auto& p : corpus.papers) {
    index_.emplace(p.id(), nodes_.size());
    nodes_.push_back({p.id(), p.meta.year});
  }
  out_.resize(nodes_.size());
  in_.resize(nodes_.size());

  std::map<std::pair<std::size_t, std::size_t>, std::vector<MentionHandle>> agg;
  for (std::size_t pi = 0; pi < corpus.papers.size(); ++pi) {
    const auto& paper = corpus.papers[pi];
    const std::size_t citing = index_.at(paper.id());
    for (std::size_t mi = 0; mi < paper.mentions.size(); ++mi) {
      const auto* ref = paper.find_reference(paper.mentions[mi].bib_id);
      if (!ref || !ref->resolved_id) continue;
      const auto it = index_.find(*ref->resolved_id);
      if (it == index_.end() || it->second == citing) continue;
      agg[{citing, it->second}].push_back({pi, mi});
    }
  }
  for (auto& [key, handles] : agg) {
    const std::size_t e = edges_.size();
    edges_.push_back({key.first, key.second, std::move(handles)});
    out_[key.first].push_back(e);
    in_[key.second].push_back(e);
  }
}

std::optional<std::size_t> CitationGraph::node_index(std::string_view id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t CitationGraph::in_degree(std::string_view id) const {
  const auto n = node_index(id);
  return n ? in_[*n].size() : 0;
}

const CitationEdge* CitationGraph::edge(std::string_view citing, std::string_view cited) const {
  const auto a = node_index(citing);
  const auto b = node_index(cited);
  if (!a || !b) return nullptr;
  for (std::size_t e : out_[*a]) {
    if (edges_[e].cited == *b) return &edges_[e];
  }
  return nullptr;
}

std::vector<std::string> CitationGraph::references_of(std::string_view id) const {
  std::vector<std::string> out;
  const auto n = node_index(id);
  if (!n) return out;
  for (std::size_t e : out_[*n]) out.push_back(nodes_[edges_[e].cited].id);
  std::sort(out.begin(), out.end());
  return out;
}

CitationGraph build_citation_graph(const Corpus& corpus) { return CitationGraph(corpus); }

}  // namespace citescope
