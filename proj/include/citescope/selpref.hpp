#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/labels.hpp"

namespace citescope {

class SelprefError : public std::runtime_error {
 public:
  enum class Kind { NoDependencyTree, MalformedVectors };
  SelprefError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class WordVectors {
 public:
  WordVectors() = default;
  explicit WordVectors(std::size_t dim) : dim_(dim) {}

  /// Throws SelprefError(MalformedVectors) on a dimension mismatch.
  void add(const std::string& word, std::vector<float> vec);
  /// nullptr for out-of-vocabulary words. Lookup is by lowercased surface.
  const float* find(const std::string& word) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return index_.size(); }
  std::uint64_t version_hash() const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::string> words_;
  std::vector<float> data_;
};

/// Text format: "word f1 ... fd" per line; an optional "count dim" header is
/// detected automatically.
WordVectors parse_word_vectors(std::string_view text);
WordVectors load_word_vectors(const std::filesystem::path& path);
/// Logs a warning and returns nothing if the file is missing or unreadable.
std::optional<WordVectors> try_load_word_vectors(const std::filesystem::path& path);

struct PathStep {
  std::string label;
  bool inverse = false;  // walked from dependent up to its head

  friend bool operator==(const PathStep&, const PathStep&) = default;
  friend auto operator<=>(const PathStep&, const PathStep&) = default;
};

/// One or two labelled dependency steps, written like "nmod^-1 nmod^-1".
struct PathSignature {
  std::vector<PathStep> steps;

  std::string text() const;
  friend bool operator==(const PathSignature&, const PathSignature&) = default;
  friend auto operator<=>(const PathSignature&, const PathSignature&) = default;
};

struct PathObservation {
  PathSignature signature;
  std::string word;  // lowercased endpoint surface

  friend bool operator==(const PathObservation&, const PathObservation&) = default;
  friend auto operator<=>(const PathObservation&, const PathObservation&) = default;
};

/// Token index of the span token whose head lies outside the span.
int mention_anchor(const Sentence& sentence, const TokenSpan& span);

/// Paths of length 1 and 2 from the mention's anchor, skipping punctuation and
/// tokens inside the span. Throws SelprefError(NoDependencyTree).
std::vector<PathObservation> extract_paths(const TokenSpan& span, const Sentence& sentence);
std::vector<PathObservation> extract_paths(const CitationContext& ctx);

struct Prototype {
  std::vector<double> sum;
  std::size_t count = 0;
};

struct Prototypes {
  std::size_t dim = 0;
  std::map<std::pair<Function, PathSignature>, Prototype> entries;
  std::size_t oov = 0;  // observations skipped for lack of a vector

  const Prototype* find(Function f, const PathSignature& sig) const;
};

/// Per-function sums of endpoint word vectors. The sum is taken over the
/// observations in sorted order so the result does not depend on input order.
Prototypes build_prototypes(const std::vector<CitationContext>& labeled, const WordVectors& vectors);
Prototypes build_prototypes(const std::vector<std::pair<Function, std::vector<PathObservation>>>& observations,
                            const WordVectors& vectors);

struct FunctionScores {
  std::array<double, kFunctionCount> value{};
  std::array<bool, kFunctionCount> covered{};
};

/// Mean cosine between each observed endpoint word and the function's
/// prototype for the same path; 0 with covered = false when nothing applies.
FunctionScores score(const std::vector<PathObservation>& paths, const Prototypes& prototypes,
                     const WordVectors& vectors);

/// Per-function centroid of the mean word vectors of training citing sentences.
struct SentenceCentroids {
  std::size_t dim = 0;
  std::array<std::vector<double>, kFunctionCount> centroid;
  std::array<std::size_t, kFunctionCount> count{};
};

/// Mean vector of the in-vocabulary, non-citation tokens of a sentence; empty if none.
std::vector<double> sentence_vector(const Sentence& sentence, const std::vector<TokenSpan>& mention_spans,
                                    const WordVectors& vectors);
SentenceCentroids build_centroids(const std::vector<CitationContext>& labeled, const WordVectors& vectors);
/// Cosine of the citing sentence's mean vector with each function centroid.
FunctionScores prototypicality(const CitationContext& ctx, const SentenceCentroids& centroids,
                               const WordVectors& vectors);

}  // namespace citescope
