#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "citescope/corpus.hpp"

namespace citescope {

class TopicError : public std::runtime_error {
 public:
  enum class Kind { EmptyVocabulary, DimensionMismatch, FormatVersion, Malformed };
  TopicError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr int kTopicModelFormatVersion = 1;

struct LdaConfig {
  std::size_t topics = 100;
  double alpha = -1.0;  // negative: 50 / topics
  double beta = 0.01;
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  std::size_t min_count = 5;
  std::set<std::string> stopwords;
  // Joint log-likelihood is recorded every this many sweeps (0 disables).
  std::size_t trace_every = 10;

  double resolved_alpha() const { return alpha > 0 ? alpha : 50.0 / static_cast<double>(topics); }
};

struct TopicModel {
  std::size_t K = 0;
  std::vector<std::string> vocabulary;
  std::unordered_map<std::string, std::size_t> index;
  std::vector<double> topic_word;  // K rows of V
  double alpha = 0;
  double beta = 0;
  std::uint64_t seed = 0;
  std::size_t iterations = 0;
  std::vector<std::pair<std::size_t, double>> loglik_trace;  // (sweep, log p(w, z))

  std::size_t V() const { return vocabulary.size(); }
  double phi(std::size_t k, std::size_t w) const { return topic_word[k * vocabulary.size() + w]; }
  /// Highest-probability words of topic k.
  std::vector<std::string> top_words(std::size_t k, std::size_t n) const;
};

using TopicDistribution = std::vector<double>;

/// Lowercased content tokens: drops tokens inside mention spans, stopwords,
/// and anything without a letter.
std::vector<std::string> topic_tokens(const Sentence& s, const std::vector<TokenSpan>& mention_spans,
                                      const std::set<std::string>& stopwords);
/// Citing sentence (extended = false) or the -1..+3 window.
std::vector<std::string> context_document(const CitationContext& ctx, bool extended,
                                          const std::set<std::string>& stopwords);
std::vector<std::string> paper_document(const Paper& paper, const std::set<std::string>& stopwords);

std::set<std::string> load_stopwords(const std::filesystem::path& path);

/// Collapsed Gibbs sampling. Throws TopicError(EmptyVocabulary).
TopicModel train_lda(const std::vector<std::vector<std::string>>& docs, const LdaConfig& cfg);

/// Gibbs inference with topic_word held fixed; theta averaged over the
/// post-burn-in sweeps. Empty or fully out-of-vocabulary documents give the
/// uniform distribution.
TopicDistribution infer(const TopicModel& model, const std::vector<std::string>& doc, std::uint64_t seed,
                        std::size_t iterations = 100, std::size_t burn_in = 20);

double entropy(const TopicDistribution& theta);
/// Cosine of the two distributions. Throws TopicError(DimensionMismatch).
double topic_similarity(const TopicDistribution& a, const TopicDistribution& b);

std::string serialize_model(const TopicModel& model);
TopicModel parse_model(const std::string& text);
void save_model(const TopicModel& model, const std::filesystem::path& path);
TopicModel load_model(const std::filesystem::path& path);

}  // namespace citescope
