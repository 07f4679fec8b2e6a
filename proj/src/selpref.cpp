#include "citescope/selpref.hpp"

#include <algorithm>
#include <cstdlib>

#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

// ---------------------------------------------------------------------------
// WordVectors
// ---------------------------------------------------------------------------

void WordVectors::add(const std::string& word, std::vector<float> vec) {
  if (dim_ == 0 && index_.empty()) dim_ = vec.size();
  if (vec.size() != dim_) {
    throw SelprefError(SelprefError::Kind::MalformedVectors, "vector for '" + word + "' has dimension " +
                                                                 std::to_string(vec.size()) + ", expected " +
                                                                 std::to_string(dim_));
  }
  const auto key = to_lower(word);
  // First occurrence wins, as in most pretrained vector dumps.
  if (index_.count(key)) return;
  index_.emplace(key, words_.size());
  words_.push_back(key);
  data_.insert(data_.end(), vec.begin(), vec.end());
}

const float* WordVectors::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) it = index_.find(to_lower(word));
  if (it == index_.end()) return nullptr;
  return data_.data() + it->second * dim_;
}

std::uint64_t WordVectors::version_hash() const {
  Fnv1a h;
  h.add(static_cast<std::uint64_t>(dim_));
  for (std::size_t i = 0; i < words_.size(); ++i) {
    h.add(words_[i]);
    for (std::size_t d = 0; d < dim_; ++d) h.add(static_cast<double>(data_[i * dim_ + d]));
  }
  return h.value();
}

WordVectors parse_word_vectors(std::string_view text) {
  WordVectors out;
  bool first = true;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      const bool header = fields.size() == 2 && std::all_of(fields.begin(), fields.end(), [](const std::string& f) {
                            return !f.empty() && std::all_of(f.begin(), f.end(), [](unsigned char c) { return std::isdigit(c); });
                          });
      if (header) {
        out = WordVectors(static_cast<std::size_t>(std::stoull(fields[1])));
        continue;
      }
    }
    if (fields.size() < 2) {
      throw SelprefError(SelprefError::Kind::MalformedVectors, "line " + std::to_string(line_no) + ": no vector");
    }
    std::vector<float> vec;
    vec.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      char* end = nullptr;
      const float v = std::strtof(fields[i].c_str(), &end);
      if (end == fields[i].c_str() || *end != '\0') {
        throw SelprefError(SelprefError::Kind::MalformedVectors,
                           "line " + std::to_string(line_no) + ": bad number '" + fields[i] + "'");
      }
      vec.push_back(v);
    }
    out.add(fields[0], std::move(vec));
  }
  return out;
}

WordVectors load_word_vectors(const std::filesystem::path& path) { return parse_word_vectors(read_file(path)); }

std::optional<WordVectors> try_load_word_vectors(const std::filesystem::path& path) {
  if (path.empty() || !std::filesystem::exists(path)) {
    log::warn("selpref", "word vectors not found at '" + path.string() + "'; vector features disabled");
    return std::nullopt;
  }
  try {
    return load_word_vectors(path);
  } catch (const std::exception& e) {
    log::warn("selpref", std::string("cannot load word vectors: ") + e.what() + "; vector features disabled");
    return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

std::string PathSignature::text() const {
  std::string out;
  for (const auto& s : steps) {
    if (!out.empty()) out += ' ';
    out += s.label;
    if (s.inverse) out += "^-1";
  }
  return out;
}

int mention_anchor(const Sentence& sentence, const TokenSpan& span) {
  for (int i = span.first; i <= span.last; ++i) {
    const int head = sentence.tokens[static_cast<std::size_t>(i)].head - 1;
    if (head < span.first || head > span.last) return i;
  }
  return span.first;
}

std::vector<PathObservation> extract_paths(const TokenSpan& span, const Sentence& sentence) {
  if (!sentence.has_tree) {
    throw SelprefError(SelprefError::Kind::NoDependencyTree, "sentence has no dependency tree");
  }
  const int n = static_cast<int>(sentence.tokens.size());
  std::vector<std::vector<int>> children(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int h = sentence.tokens[static_cast<std::size_t>(i)].head - 1;
    if (h >= 0 && h < n) children[static_cast<std::size_t>(h)].push_back(i);
  }
  auto tok = [&](int i) -> const Token& { return sentence.tokens[static_cast<std::size_t>(i)]; };
  auto in_span = [&](int i) { return i >= span.first && i <= span.last; };
  auto head_of = [&](int i) {
    const int h = tok(i).head - 1;
    return h >= 0 && h < n ? h : -1;
  };

  std::vector<PathObservation> out;
  auto emit = [&](std::vector<PathStep> steps, int end) {
    if (in_span(end) || is_punctuation_tag(tok(end).pos)) return;
    out.push_back({PathSignature{std::move(steps)}, to_lower(tok(end).surface)});
  };

  const int a = mention_anchor(sentence, span);
  const int parent = head_of(a);
  if (parent >= 0 && !in_span(parent)) {
    const PathStep up{tok(a).deprel, true};
    emit({up}, parent);
    const int grand = head_of(parent);
    if (grand >= 0 && !in_span(grand)) emit({up, {tok(parent).deprel, true}}, grand);
    for (int sib : children[static_cast<std::size_t>(parent)]) {
      if (sib != a && !in_span(sib)) emit({up, {tok(sib).deprel, false}}, sib);
    }
  }
  for (int c : children[static_cast<std::size_t>(a)]) {
    if (in_span(c)) continue;
    const PathStep down{tok(c).deprel, false};
    emit({down}, c);
    for (int g : children[static_cast<std::size_t>(c)]) {
      if (!in_span(g)) emit({down, {tok(g).deprel, false}}, g);
    }
  }
  return out;
}

std::vector<PathObservation> extract_paths(const CitationContext& ctx) {
  return extract_paths(ctx.mention().span, ctx.citing());
}

// ---------------------------------------------------------------------------
// Prototypes and scoring
// ---------------------------------------------------------------------------

const Prototype* Prototypes::find(Function f, const PathSignature& sig) const {
  auto it = entries.find({f, sig});
  return it == entries.end() ? nullptr : &it->second;
}

Prototypes build_prototypes(const std::vector<std::pair<Function, std::vector<PathObservation>>>& observations,
                            const WordVectors& vectors) {
  std::vector<std::pair<Function, const PathObservation*>> flat;
  for (const auto& [f, obs] : observations) {
    for (const auto& o : obs) flat.emplace_back(f, &o);
  }
  std::sort(flat.begin(), flat.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first < y.first;
    return *x.second < *y.second;
  });
  Prototypes p;
  p.dim = vectors.dim();
  for (const auto& [f, o] : flat) {
    const float* v = vectors.find(o->word);
    if (!v) {
      ++p.oov;
      continue;
    }
    auto& proto = p.entries[{f, o->signature}];
    if (proto.sum.empty()) proto.sum.assign(p.dim, 0.0);
    for (std::size_t d = 0; d < p.dim; ++d) proto.sum[d] += v[d];
    ++proto.count;
  }
  return p;
}

Prototypes build_prototypes(const std::vector<CitationContext>& labeled, const WordVectors& vectors) {
  std::vector<std::pair<Function, std::vector<PathObservation>>> obs;
  for (const auto& ctx : labeled) {
    const auto& gold = ctx.mention().gold;
    if (!gold || !ctx.citing().has_tree) continue;
    obs.emplace_back(gold->function, extract_paths(ctx));
  }
  return build_prototypes(obs, vectors);
}

FunctionScores score(const std::vector<PathObservation>& paths, const Prototypes& prototypes,
                     const WordVectors& vectors) {
  FunctionScores out;
  std::vector<double> wv(vectors.dim());
  for (std::size_t f = 0; f < kFunctionCount; ++f) {
    double total = 0;
    std::size_t n = 0;
    for (const auto& o : paths) {
      const Prototype* proto = prototypes.find(kAllFunctions[f], o.signature);
      const float* v = vectors.find(o.word);
      if (!proto || !v) continue;
      std::copy(v, v + vectors.dim(), wv.begin());
      total += cosine(wv, proto->sum);
      ++n;
    }
    out.covered[f] = n > 0;
    out.value[f] = n > 0 ? total / static_cast<double>(n) : 0.0;
  }
  return out;
}

std::vector<double> sentence_vector(const Sentence& sentence, const std::vector<TokenSpan>& mention_spans,
                                    const WordVectors& vectors) {
  std::vector<double> sum(vectors.dim(), 0.0);
  std::size_t n = 0;
  for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
    const int ii = static_cast<int>(i);
    if (std::any_of(mention_spans.begin(), mention_spans.end(),
                    [&](const TokenSpan& s) { return s.first <= ii && ii <= s.last; })) {
      continue;
    }
    const float* v = vectors.find(sentence.tokens[i].surface);
    if (!v) continue;
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += v[d];
    ++n;
  }
  if (n == 0) return {};
  for (auto& x : sum) x /= static_cast<double>(n);
  return sum;
}

namespace {

std::vector<TokenSpan> citing_spans(const CitationContext& ctx) {
  std::vector<TokenSpan> spans;
  const auto& m = ctx.mention();
  for (std::size_t idx : ctx.paper->mentions_in(m.section_index, m.sentence_index)) {
    spans.push_back(ctx.paper->mentions[idx].span);
  }
  return spans;
}

}  // namespace

SentenceCentroids build_centroids(const std::vector<CitationContext>& labeled, const WordVectors& vectors) {
  SentenceCentroids c;
  c.dim = vectors.dim();
  for (auto& v : c.centroid) v.assign(c.dim, 0.0);
  for (const auto& ctx : labeled) {
    const auto& gold = ctx.mention().gold;
    if (!gold) continue;
    auto sv = sentence_vector(ctx.citing(), citing_spans(ctx), vectors);
    if (sv.empty()) continue;
    const auto f = index_of(gold->function);
    for (std::size_t d = 0; d < c.dim; ++d) c.centroid[f][d] += sv[d];
    ++c.count[f];
  }
  for (std::size_t f = 0; f < kFunctionCount; ++f) {
    if (c.count[f] == 0) continue;
    for (auto& x : c.centroid[f]) x /= static_cast<double>(c.count[f]);
  }
  return c;
}

FunctionScores prototypicality(const CitationContext& ctx, const SentenceCentroids& centroids,
                               const WordVectors& vectors) {
  FunctionScores out;
  const auto sv = sentence_vector(ctx.citing(), citing_spans(ctx), vectors);
  if (sv.empty()) return out;
  for (std::size_t f = 0; f < kFunctionCount; ++f) {
    if (centroids.count[f] == 0) continue;
    out.value[f] = cosine(sv, centroids.centroid[f]);
    out.covered[f] = true;
  }
  return out;
}

}  // namespace citescope
