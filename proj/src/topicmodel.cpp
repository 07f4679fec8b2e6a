#include "citescope/topicmodel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>

#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

using nlohmann::json;

std::vector<std::string> TopicModel::top_words(std::size_t k, std::size_t n) const {
  std::vector<std::size_t> ids(V());
  std::iota(ids.begin(), ids.end(), 0);
  n = std::min(n, ids.size());
  std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n), ids.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (phi(k, a) != phi(k, b)) return phi(k, a) > phi(k, b);
                      return a < b;
                    });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(vocabulary[ids[i]]);
  return out;
}

// ---------------------------------------------------------------------------
// Documents
// ---------------------------------------------------------------------------

std::vector<std::string> topic_tokens(const Sentence& s, const std::vector<TokenSpan>& mention_spans,
                                      const std::set<std::string>& stopwords) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const int ii = static_cast<int>(i);
    const bool in_mention = std::any_of(mention_spans.begin(), mention_spans.end(),
                                        [&](const TokenSpan& sp) { return sp.first <= ii && ii <= sp.last; });
    if (in_mention) continue;
    auto w = to_lower(s.tokens[i].surface);
    if (std::none_of(w.begin(), w.end(), [](unsigned char c) { return std::isalpha(c); })) continue;
    if (stopwords.count(w)) continue;
    out.push_back(std::move(w));
  }
  return out;
}

namespace {

std::vector<TokenSpan> spans_in(const Paper& paper, int section, int sentence) {
  std::vector<TokenSpan> spans;
  for (std::size_t idx : paper.mentions_in(section, sentence)) spans.push_back(paper.mentions[idx].span);
  return spans;
}

}  // namespace

std::vector<std::string> context_document(const CitationContext& ctx, bool extended,
                                          const std::set<std::string>& stopwords) {
  std::vector<std::string> out;
  const auto& m = ctx.mention();
  const int lo = extended ? -kWindowBefore : 0;
  const int hi = extended ? kWindowAfter : 0;
  for (int off = lo; off <= hi; ++off) {
    const Sentence* s = ctx.at(off);
    if (!s) continue;
    auto part = topic_tokens(*s, spans_in(*ctx.paper, m.section_index, m.sentence_index + off), stopwords);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<std::string> paper_document(const Paper& paper, const std::set<std::string>& stopwords) {
  std::vector<std::string> out;
  for (const auto& sec : paper.sections) {
    for (std::size_t i = 0; i < sec.sentences.size(); ++i) {
      auto part = topic_tokens(sec.sentences[i], spans_in(paper, sec.index, static_cast<int>(i)), stopwords);
      out.insert(out.end(), part.begin(), part.end());
    }
  }
  return out;
}

std::set<std::string> load_stopwords(const std::filesystem::path& path) {
  std::set<std::string> out;
  for (const auto& line : split(read_file(path), '\n')) {
    auto w = trim(line);
    if (w.empty() || w.front() == '#') continue;
    out.insert(to_lower(w));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

double joint_loglik(const std::vector<int>& n_wk, const std::vector<int>& n_k, const std::vector<int>& n_dk,
                    const std::vector<int>& n_d, std::size_t K, std::size_t V, double alpha, double beta) {
  const double Kd = static_cast<double>(K);
  const double Vd = static_cast<double>(V);
  const double lg_beta = std::lgamma(beta);
  const double lg_alpha = std::lgamma(alpha);
  double ll = Kd * (std::lgamma(Vd * beta) - Vd * lg_beta);
  for (std::size_t k = 0; k < K; ++k) ll -= std::lgamma(n_k[k] + Vd * beta);
  for (int c : n_wk) {
    if (c > 0) ll += std::lgamma(c + beta) - lg_beta;
  }
  const double D = static_cast<double>(n_d.size());
  ll += D * (std::lgamma(Kd * alpha) - Kd * lg_alpha);
  for (std::size_t d = 0; d < n_d.size(); ++d) {
    ll -= std::lgamma(n_d[d] + Kd * alpha);
    for (std::size_t k = 0; k < K; ++k) {
      const int c = n_dk[d * K + k];
      if (c > 0) ll += std::lgamma(c + alpha) - lg_alpha;
    }
  }
  return ll;
}

std::size_t draw(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform01() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

}  // namespace

TopicModel train_lda(const std::vector<std::vector<std::string>>& docs, const LdaConfig& cfg) {
  if (cfg.topics < 1) throw std::invalid_argument("topic count must be >= 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& d : docs) {
    for (const auto& w : d) {
      auto lw = to_lower(w);
      if (!cfg.stopwords.count(lw)) ++freq[lw];
    }
  }
  TopicModel model;
  model.K = cfg.topics;
  model.alpha = cfg.resolved_alpha();
  model.beta = cfg.beta;
  model.seed = cfg.seed;
  model.iterations = cfg.iterations;
  for (const auto& [w, c] : freq) {
    if (c >= cfg.min_count) {
      model.index.emplace(w, model.vocabulary.size());
      model.vocabulary.push_back(w);
    }
  }
  if (model.vocabulary.empty()) {
    throw TopicError(TopicError::Kind::EmptyVocabulary, "no terms survive stopword and frequency filtering");
  }

  const std::size_t K = model.K;
  const std::size_t V = model.V();
  const std::size_t D = docs.size();
  const double alpha = model.alpha;
  const double beta = model.beta;
  const double vbeta = static_cast<double>(V) * beta;

  std::vector<std::vector<int>> words(D);
  for (std::size_t d = 0; d < D; ++d) {
    for (const auto& w : docs[d]) {
      auto it = model.index.find(to_lower(w));
      if (it != model.index.end()) words[d].push_back(static_cast<int>(it->second));
    }
  }

  Rng rng(cfg.seed);
  std::vector<std::vector<int>> z(D);
  std::vector<int> n_wk(V * K, 0), n_k(K, 0), n_dk(D * K, 0), n_d(D, 0);
  for (std::size_t d = 0; d < D; ++d) {
    z[d].resize(words[d].size());
    for (std::size_t i = 0; i < words[d].size(); ++i) {
      const auto k = rng.uniform_index(K);
      z[d][i] = static_cast<int>(k);
      ++n_wk[static_cast<std::size_t>(words[d][i]) * K + k];
      ++n_k[k];
      ++n_dk[d * K + k];
      ++n_d[d];
    }
  }

  std::vector<double> cumulative(K);
  for (std::size_t sweep = 1; sweep <= cfg.iterations; ++sweep) {
    for (std::size_t d = 0; d < D; ++d) {
      int* dk = &n_dk[d * K];
      for (std::size_t i = 0; i < words[d].size(); ++i) {
        const auto w = static_cast<std::size_t>(words[d][i]);
        int* wk = &n_wk[w * K];
        const auto old = static_cast<std::size_t>(z[d][i]);
        --wk[old];
        --n_k[old];
        --dk[old];
        double acc = 0;
        for (std::size_t k = 0; k < K; ++k) {
          acc += (dk[k] + alpha) * (wk[k] + beta) / (n_k[k] + vbeta);
          cumulative[k] = acc;
        }
        const auto k = draw(cumulative, rng);
        z[d][i] = static_cast<int>(k);
        ++wk[k];
        ++n_k[k];
        ++dk[k];
      }
    }
    if (cfg.trace_every > 0 && (sweep % cfg.trace_every == 0 || sweep == cfg.iterations)) {
      model.loglik_trace.emplace_back(sweep, joint_loglik(n_wk, n_k, n_dk, n_d, K, V, alpha, beta));
    }
  }

  model.topic_word.assign(K * V, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double denom = n_k[k] + vbeta;
    for (std::size_t w = 0; w < V; ++w) model.topic_word[k * V + w] = (n_wk[w * K + k] + beta) / denom;
  }
  log::info("topicmodel", "trained K=" + std::to_string(K) + " V=" + std::to_string(V) + " D=" + std::to_string(D) +
                              " sweeps=" + std::to_string(cfg.iterations));
  return model;
}

// ---------------------------------------------------------------------------
// Inference and helpers
// ---------------------------------------------------------------------------

TopicDistribution infer(const TopicModel& model, const std::vector<std::string>& doc, std::uint64_t seed,
                        std::size_t iterations, std::size_t burn_in) {
  const std::size_t K = model.K;
  std::vector<std::size_t> words;
  for (const auto& w : doc) {
    auto it = model.index.find(to_lower(w));
    if (it != model.index.end()) words.push_back(it->second);
  }
  if (words.empty() || K == 0) return TopicDistribution(K, K ? 1.0 / static_cast<double>(K) : 0.0);

  Rng rng(seed);
  std::vector<std::size_t> z(words.size());
  std::vector<int> n_k(K, 0);
  for (std::size_t i = 0; i < words.size(); ++i) {
    z[i] = rng.uniform_index(K);
    ++n_k[z[i]];
  }
  const double alpha = model.alpha;
  const double denom = static_cast<double>(words.size()) + static_cast<double>(K) * alpha;
  std::vector<double> cumulative(K), theta(K, 0.0);
  const std::size_t sweeps = std::max<std::size_t>(iterations, 1);
  const std::size_t first_sample = burn_in < sweeps ? burn_in + 1 : sweeps;
  for (std::size_t sweep = 1; sweep <= sweeps; ++sweep) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      --n_k[z[i]];
      double acc = 0;
      for (std::size_t k = 0; k < K; ++k) {
        acc += (n_k[k] + alpha) * model.phi(k, words[i]);
        cumulative[k] = acc;
      }
      z[i] = draw(cumulative, rng);
      ++n_k[z[i]];
    }
    if (sweep >= first_sample) {
      for (std::size_t k = 0; k < K; ++k) theta[k] += (n_k[k] + alpha) / denom;
    }
  }
  const double total = std::accumulate(theta.begin(), theta.end(), 0.0);
  for (auto& t : theta) t /= total;
  return theta;
}

double entropy(const TopicDistribution& theta) {
  double h = 0;
  for (double p : theta) {
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

double topic_similarity(const TopicDistribution& a, const TopicDistribution& b) {
  if (a.size() != b.size()) {
    throw TopicError(TopicError::Kind::DimensionMismatch, "topic distributions of different sizes: " +
                                                              std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  return cosine(std::span<const double>(a), std::span<const double>(b));
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

std::string serialize_model(const TopicModel& model) {
  json js;
  js["format"] = "citescope-lda";
  js["version"] = kTopicModelFormatVersion;
  js["K"] = model.K;
  js["alpha"] = model.alpha;
  js["beta"] = model.beta;
  js["seed"] = model.seed;
  js["iterations"] = model.iterations;
  js["vocabulary"] = model.vocabulary;
  json rows = json::array();
  for (std::size_t k = 0; k < model.K; ++k) {
    rows.push_back(std::vector<double>(model.topic_word.begin() + static_cast<std::ptrdiff_t>(k * model.V()),
                                       model.topic_word.begin() + static_cast<std::ptrdiff_t>((k + 1) * model.V())));
  }
  js["topic_word"] = std::move(rows);
  json trace = json::array();
  for (const auto& [s, ll] : model.loglik_trace) trace.push_back({s, ll});
  js["loglik_trace"] = std::move(trace);
  return js.dump() + "\n";
}

TopicModel parse_model(const std::string& text) {
  json js;
  try {
    js = json::parse(text);
  } catch (const json::exception& e) {
    throw TopicError(TopicError::Kind::Malformed, std::string("topic model is not valid JSON: ") + e.what());
  }
  if (js.value("format", "") != "citescope-lda" || js.value("version", -1) != kTopicModelFormatVersion) {
    throw TopicError(TopicError::Kind::FormatVersion,
                     "topic model format version " + js.value("version", json(-1)).dump() + " is not " +
                         std::to_string(kTopicModelFormatVersion));
  }
  try {
    TopicModel m;
    m.K = js.at("K").get<std::size_t>();
    m.alpha = js.at("alpha").get<double>();
    m.beta = js.at("beta").get<double>();
    m.seed = js.at("seed").get<std::uint64_t>();
    m.iterations = js.at("iterations").get<std::size_t>();
    m.vocabulary = js.at("vocabulary").get<std::vector<std::string>>();
    for (std::size_t i = 0; i < m.vocabulary.size(); ++i) m.index.emplace(m.vocabulary[i], i);
    const auto& rows = js.at("topic_word");
    if (rows.size() != m.K) throw TopicError(TopicError::Kind::Malformed, "topic_word row count differs from K");
    for (const auto& row : rows) {
      auto r = row.get<std::vector<double>>();
      if (r.size() != m.V()) throw TopicError(TopicError::Kind::Malformed, "topic_word row length differs from V");
      m.topic_word.insert(m.topic_word.end(), r.begin(), r.end());
    }
    for (const auto& e : js.value("loglik_trace", json::array())) {
      m.loglik_trace.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<double>());
    }
    return m;
  } catch (const json::exception& e) {
    throw TopicError(TopicError::Kind::Malformed, std::string("topic model: ") + e.what());
  }
}

void save_model(const TopicModel& model, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_model(model));
}

TopicModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace citescope
