#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/patternlang.hpp"
#include "citescope/selpref.hpp"
#include "citescope/topicmodel.hpp"

namespace citescope {

class FeatureError : public std::runtime_error {
 public:
  enum class Kind { SchemaMismatch, Malformed };
  FeatureError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class FeatureGroup { Structural, Lexical, Field, Usage };
std::string_view to_string(FeatureGroup g);
std::optional<FeatureGroup> parse_feature_group(std::string_view s);

struct FeatureSpec {
  std::string name;
  FeatureGroup group;

  friend bool operator==(const FeatureSpec&, const FeatureSpec&) = default;
};

struct Schema {
  std::vector<FeatureSpec> features;
  std::map<std::string, std::uint64_t> model_hashes;  // component -> version hash

  std::size_t size() const { return features.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::uint64_t hash() const;
};

const std::vector<std::string>& default_connectives();

/// Everything assemble() reads besides the corpus. Absent models degrade
/// their feature blocks to sentinels with missing indicators.
struct FeatureModels {
  std::optional<PatternSet> patterns;
  std::vector<std::string> connectives = default_connectives();
  std::optional<TopicModel> citing_topics;
  std::optional<TopicModel> context_topics;
  std::optional<TopicModel> paper_topics;
  std::optional<WordVectors> vectors;
  std::optional<Prototypes> prototypes;
  std::optional<SentenceCentroids> centroids;
  std::set<std::string> stopwords;
  std::uint64_t seed = 1;
  std::size_t inference_sweeps = 100;
  std::size_t inference_burn_in = 20;

  std::map<std::string, std::uint64_t> version_hashes() const;
};

// ---------------------------------------------------------------------------
// Pieces usable on their own
// ---------------------------------------------------------------------------

/// Half-open token ranges split at commas, semicolons and CC tokens outside
/// parentheses. The separator closes the clause before it.
std::vector<std::pair<int, int>> clauses(const Sentence& sentence);
std::size_t clause_of(const std::vector<std::pair<int, int>>& clause_ranges, int token);

enum class Tense { Past, Present, Modal, None };
/// Tense of the first finite verb (or modal) in a token range.
Tense clause_tense(const Sentence& sentence, std::pair<int, int> range);

/// PageRank over papers published strictly before `year`. Dangling mass is
/// spread uniformly. Empty map if no paper qualifies.
std::map<std::string, double> pagerank_at(const CitationGraph& graph, int year, double damping = 0.85,
                                          double tol = 1e-10, int max_iter = 100);

struct UsageCounts {
  std::size_t direct = 0;
  std::size_t indirect = 0;
  std::array<std::size_t, kSectionKindCount> direct_by_section{};
  std::array<std::size_t, kSectionKindCount> indirect_by_section{};
  double fraction = 0;  // direct / all direct mentions in the paper
};

/// Direct mentions of `bib_id` plus heuristic re-mentions: later sentences in
/// the same section naming the first author's surname or the bare year.
UsageCounts usage_counts(const Paper& paper, const std::string& bib_id);

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

class FeatureExtractor {
 public:
  FeatureExtractor(const Corpus& corpus, const FeatureModels& models);

  const Schema& schema() const { return schema_; }
  std::vector<double> assemble(const CitationContext& ctx) const;

 private:
  class Sink;
  // A null context only declares the feature names.
  void structural(const CitationContext* ctx, Sink& out) const;
  void lexical(const CitationContext* ctx, Sink& out) const;
  void field(const CitationContext* ctx, Sink& out) const;
  void usage(const CitationContext* ctx, Sink& out) const;
  void emit_all(const CitationContext* ctx, Sink& out) const;

  const Corpus& corpus_;
  const FeatureModels& models_;
  std::optional<Matcher> matcher_;
  CitationGraph graph_;
  std::map<int, std::map<std::string, double>> pagerank_by_year_;
  std::unordered_map<std::string, TopicDistribution> paper_theta_;
  Schema schema_;
};

struct DatasetRow {
  std::string paper_id;
  std::size_t mention = 0;
  std::string bib_id;
  std::optional<Label> gold;
  std::vector<double> values;
};

struct Dataset {
  Schema schema;
  std::uint64_t input_hash = 0;  // corpus version hash
  std::vector<DatasetRow> rows;
};

/// One row per mention of every paper, in corpus order.
Dataset featurize(const Corpus& corpus, const FeatureModels& models);

std::string dataset_csv(const Dataset& ds);
std::string manifest_json(const Dataset& ds);
/// Writes `path` and `path` + ".manifest.json".
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
/// Throws FeatureError(SchemaMismatch) if the CSV header disagrees with the manifest.
Dataset load_dataset(const std::filesystem::path& path);
/// Throws FeatureError(SchemaMismatch) unless the schemas are identical.
void check_schema(const Schema& dataset, const Schema& expected);

}  // namespace citescope
