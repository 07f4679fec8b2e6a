#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "citescope/labels.hpp"

namespace citescope {

struct Token {
  std::string surface;
  std::string pos;       // Penn Treebank tag
  int head = 0;          // 1-based index of the governor, 0 = root
  std::string deprel;    // Universal Dependencies label
  std::size_t char_start = 0;
  std::size_t char_end = 0;

  friend bool operator==(const Token&, const Token&) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  int index_in_section = 0;
  bool has_tree = false;  // false when the source carried no head/rel fields

  std::size_t size() const { return tokens.size(); }
  friend bool operator==(const Sentence&, const Sentence&) = default;
};

struct Section {
  std::string raw_title;
  SectionKind kind = SectionKind::Other;
  int index = 0;
  std::vector<Sentence> sentences;
  // Sentence indices at which subsections begin. Empty when the source has no
  // subsection segmentation; subsection features then fall back to the section.
  std::vector<int> subsection_starts;

  bool has_subsections() const { return !subsection_starts.empty(); }
  /// Half-open sentence range [begin, end) of the subsection holding `sentence`.
  std::pair<int, int> subsection_bounds(int sentence) const;

  friend bool operator==(const Section&, const Section&) = default;
};

struct PaperMeta {
  std::string anthology_id;
  std::string title;
  int year = 0;
  VenueKind venue = VenueKind::Workshop;
  std::vector<std::string> authors;  // normalized "surname, i"

  friend bool operator==(const PaperMeta&, const PaperMeta&) = default;
};

struct Reference {
  std::string bib_id;
  std::optional<std::string> resolved_id;
  std::string raw;
  std::vector<std::string> authors;
  std::optional<int> year;

  friend bool operator==(const Reference&, const Reference&) = default;
};

/// Inclusive 0-based token range within one sentence.
struct TokenSpan {
  int first = 0;
  int last = 0;

  bool contains(int i) const { return i >= first && i <= last; }
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct CitationMention {
  std::string bib_id;
  int section_index = 0;
  int sentence_index = 0;
  TokenSpan span;
  CitationForm form = CitationForm::Nominative;
  std::optional<Label> gold;

  friend bool operator==(const CitationMention&, const CitationMention&) = default;
};

struct Paper {
  PaperMeta meta;
  std::vector<Section> sections;
  std::vector<Reference> bibliography;
  std::vector<CitationMention> mentions;

  const std::string& id() const { return meta.anthology_id; }
  const Reference* find_reference(std::string_view bib_id) const;
  const Sentence& sentence(int section, int sentence) const {
    return sections.at(static_cast<std::size_t>(section))
        .sentences.at(static_cast<std::size_t>(sentence));
  }
  std::size_t sentence_count() const;
  /// Index of a sentence when all sections are concatenated.
  std::size_t global_sentence_index(int section, int sentence) const;
  /// Indices into `mentions` of every mention located in the given sentence.
  std::vector<std::size_t> mentions_in(int section, int sentence) const;

  friend bool operator==(const Paper&, const Paper&) = default;
};

struct LoadIssue {
  enum class Kind { MissingMetadata, MalformedSentence, DanglingBibId, MalformedDocument };
  Kind kind;
  std::string paper;
  std::string detail;
};
std::string_view to_string(LoadIssue::Kind k);

class CorpusError : public std::runtime_error {
 public:
  CorpusError(LoadIssue issue);
  const LoadIssue& issue() const { return issue_; }

 private:
  LoadIssue issue_;
};

struct Corpus {
  std::vector<Paper> papers;
  std::vector<LoadIssue> issues;  // papers reported and skipped during load

  const Paper* find(std::string_view anthology_id) const;
  std::size_t mention_count() const;
  /// Stable content hash over the canonical serialization of all papers.
  std::uint64_t version_hash() const;
};

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

/// Loads every `*.jsonl` document file under `root` (sorted by name) plus the
/// `metadata.jsonl` index. Papers failing validation land in Corpus::issues.
Corpus load_corpus(const std::filesystem::path& root);

/// Parses and validates one document object. `index_meta` supplies metadata
/// from the index file when the document's own meta block is incomplete.
/// Throws CorpusError.
Paper parse_paper(const nlohmann::json& doc, const nlohmann::json* index_meta = nullptr);

/// Checks every structural invariant of a paper. Throws CorpusError.
void validate_paper(const Paper& paper);

nlohmann::json paper_to_json(const Paper& paper);
/// Canonical single-line serialization (sorted keys).
std::string serialize_paper(const Paper& paper);
std::string serialize_corpus(const Corpus& corpus);

SectionKind canonical_section(std::string_view raw_title);

/// Venue kind from the anthology id prefix. Sets `*unknown` when the prefix is
/// not in the table (the result then defaults to Workshop).
VenueKind venue_kind_for(std::string_view anthology_id, bool* unknown = nullptr);

/// "John Smith", "Smith, John", "J. Smith" -> "smith, j".
std::string normalize_author(std::string_view name);

// ---------------------------------------------------------------------------
// Citation contexts
// ---------------------------------------------------------------------------

inline constexpr int kWindowBefore = 1;
inline constexpr int kWindowAfter = 3;
inline constexpr std::size_t kWindowSize = kWindowBefore + kWindowAfter + 1;

struct CitationContext {
  const Paper* paper = nullptr;
  std::size_t mention_index = 0;
  // Offsets -1..+3 relative to the citing sentence; nullptr where the window
  // runs past the section boundary.
  std::array<const Sentence*, kWindowSize> window{};

  const CitationMention& mention() const { return paper->mentions[mention_index]; }
  const Sentence& citing() const { return *window[kWindowBefore]; }
  const Sentence* at(int offset) const {
    return window[static_cast<std::size_t>(offset + kWindowBefore)];
  }
  const std::string& paper_id() const { return paper->id(); }
};

std::vector<CitationContext> extract_contexts(const Paper& paper);
std::vector<CitationContext> extract_contexts(const Corpus& corpus);

struct MentionForm {
  CitationForm form = CitationForm::Nominative;
  bool preceded_by_pascal = false;
  bool preceded_by_allcaps = false;
  bool inside_parenthetical = false;
};

MentionForm classify_mention_form(const CitationMention& mention, const Sentence& sentence);

bool is_open_paren(std::string_view surface);
bool is_close_paren(std::string_view surface);
bool is_punctuation_tag(std::string_view pos);

// ---------------------------------------------------------------------------
// Citation graph
// ---------------------------------------------------------------------------

struct MentionHandle {
  std::size_t paper = 0;    // index into Corpus::papers
  std::size_t mention = 0;  // index into Paper::mentions

  friend bool operator==(const MentionHandle&, const MentionHandle&) = default;
};

struct CitationEdge {
  std::size_t citing = 0;  // node indices
  std::size_t cited = 0;
  std::vector<MentionHandle> mentions;
};

struct GraphNode {
  std::string id;
  int year = 0;
};

class CitationGraph {
 public:
  CitationGraph() = default;
  explicit CitationGraph(const Corpus& corpus);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<CitationEdge>& edges() const { return edges_; }
  std::optional<std::size_t> node_index(std::string_view id) const;

  /// Edge indices leaving / entering a node.
  const std::vector<std::size_t>& out_edges(std::size_t node) const { return out_[node]; }
  const std::vector<std::size_t>& in_edges(std::size_t node) const { return in_[node]; }
  std::size_t in_degree(std::string_view id) const;
  const CitationEdge* edge(std::string_view citing, std::string_view cited) const;

  /// Resolved in-corpus reference set of a paper, sorted by id.
  std::vector<std::string> references_of(std::string_view id) const;

 private:
  std::vector<GraphNode> nodes_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<CitationEdge> edges_;
  std::vector<std::vector<std::size_t>> out_;
  std::vector<std::vector<std::size_t>> in_;
};

CitationGraph build_citation_graph(const Corpus& corpus);

}  // namespace citescope
