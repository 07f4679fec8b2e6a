#pragma once

// Seeded synthetic corpora with planted per-class cue phrases, and access
// logs whose readers follow labeled references.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/util.hpp"
#include "fixtures.hpp"

namespace synth {

using namespace citescope;

struct Options {
  std::size_t papers = 200;
  std::size_t mentions_per_paper = 8;
  int first_year = 2000;
  int last_year = 2014;
  double resolve_rate = 0.7;
  std::uint64_t seed = 1;
};

// Class shares of the annotated dataset (1021, 98, 365, 22, 51, 344, 68 of 1969).
inline const std::array<double, kFunctionCount> kShares = {1021, 98, 365, 22, 51, 344, 68};

// Cue sentences; CIT marks where the citation goes. word/POS tokens.
inline const std::array<std::vector<std::string>, kFunctionCount> kCues = {{
    {"see/VB CIT for/IN an/DT overview/NN of/IN TOPIC/NN ./.",
     "TOPIC/NN has/VBZ been/VBN argued/VBN to/TO matter/VB CIT ./.",
     "many/JJ systems/NNS exist/VBP ,/, such/JJ as/IN CIT ./."},
    {"inspired/VBN by/IN CIT ,/, we/PRP study/VBP TOPIC/NN ./.",
     "however/RB ,/, CIT leaves/VBZ TOPIC/NN a/DT problem/NN that/WDT we/PRP need/VBP to/TO solve/VB ./.",
     "the/DT limitations/NNS of/IN CIT motivated/VBD this/DT TOPIC/NN study/NN ./."},
    {"we/PRP use/VBP the/DT TOPIC/NN parser/NN of/IN CIT ./.",
     "following/VBG CIT ,/, we/PRP apply/VBP the/DT same/JJ TOPIC/NN features/NNS ./.",
     "our/PRP$ system/NN is/VBZ based/VBN on/IN CIT ./."},
    {"we/PRP extend/VBP the/DT TOPIC/NN model/NN of/IN CIT ./.",
     "our/PRP$ approach/NN builds/VBZ on/IN CIT by/IN adding/VBG TOPIC/NN ./.",
     "this/DT is/VBZ an/DT extension/NN of/IN CIT to/TO TOPIC/NN ./."},
    {"in/IN our/PRP$ previous/JJ work/NN CIT we/PRP studied/VBD TOPIC/NN ./.",
     "we/PRP continue/VBP our/PRP$ earlier/JJR TOPIC/NN work/NN CIT ./.",
     "as/IN in/IN our/PRP$ prior/JJ paper/NN CIT ,/, TOPIC/NN is/VBZ central/JJ ./."},
    {"our/PRP$ results/NNS are/VBP similar/JJ to/TO CIT on/IN TOPIC/NN ./.",
     "unlike/IN CIT ,/, we/PRP model/VBP TOPIC/NN jointly/RB ./.",
     "we/PRP compare/VBP our/PRP$ TOPIC/NN scores/NNS to/TO CIT ./."},
    {"in/IN future/JJ work/NN we/PRP will/MD adapt/VB CIT to/TO TOPIC/NN ./.",
     "we/PRP plan/VBP to/TO combine/VB TOPIC/NN with/IN CIT in/IN the/DT future/NN ./.",
     "future/JJ work/NN could/MD test/VB CIT on/IN TOPIC/NN ./."},
}};

inline const std::array<std::vector<std::string>, 3> kTopicWords = {{
    {"parsing", "treebank", "grammar", "dependency", "constituent", "parser", "syntax", "head"},
    {"translation", "alignment", "phrase", "decoder", "bilingual", "reordering", "bleu", "source"},
    {"sentiment", "opinion", "review", "polarity", "lexicon", "emotion", "aspect", "rating"},
}};

inline const std::vector<std::string> kSurnames = {"smith", "chen", "garcia", "kumar", "mueller", "tanaka",
                                                   "rossi", "novak", "okafor", "larsen", "dubois", "silva"};

inline std::string pick(const std::vector<std::string>& v, Rng& rng) { return v[rng.uniform_index(v.size())]; }

inline std::size_t weighted(const std::array<double, kFunctionCount>& w, Rng& rng) {
  double total = 0;
  for (double x : w) total += x;
  double u = rng.uniform01() * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (u < w[i]) return i;
    u -= w[i];
  }
  return w.size() - 1;
}

inline std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

// A filler sentence about the paper's topic.
inline std::string filler(std::size_t topic, Rng& rng) {
  const auto& w = kTopicWords[topic];
  return "the/DT " + pick(w, rng) + "/NN " + pick(w, rng) + "/NN improves/VBZ " + pick(w, rng) + "/NN and/CC " +
         pick(w, rng) + "/NN ./.";
}

struct Built {
  Corpus corpus;
  std::map<std::string, std::size_t> topic;  // dominant topic per paper
};

inline Built corpus(const Options& opt) {
  Rng rng(opt.seed);
  Built out;
  static const char* kPrefixes = "PPPNDEWWJ";
  std::vector<std::pair<std::string, int>> earlier;  // (id, year) of generated papers
  const int span = opt.last_year - opt.first_year + 1;
  for (std::size_t i = 0; i < opt.papers; ++i) {
    const int year = opt.first_year + static_cast<int>(i * static_cast<std::size_t>(span) / opt.papers);
    const char prefix = kPrefixes[rng.uniform_index(9)];
    char id[16];
    std::snprintf(id, sizeof id, "%c%02d-%04zu", prefix, year % 100, 1000 + i);
    const std::size_t topic = rng.uniform_index(kTopicWords.size());
    out.topic[id] = topic;

    std::vector<std::string> titles = {"Introduction", "Related Work", "Method", "Experiments", "Conclusion"};
    std::vector<std::vector<Sentence>> sents(titles.size());
    for (auto& s : sents) {
      for (std::size_t k = 0; k < 3; ++k) s.push_back(fixtures::sent(filler(topic, rng)));
    }
    std::vector<Reference> bib;
    std::vector<CitationMention> mentions;
    for (std::size_t m = 0; m < opt.mentions_per_paper; ++m) {
      const std::size_t fn = weighted(kShares, rng);
      const std::string bib_id = "b" + std::to_string(m);
      const std::string surname = pick(kSurnames, rng);
      const int ref_year = year - 1 - static_cast<int>(rng.uniform_index(5));
      std::optional<std::string> resolved;
      std::vector<std::pair<std::string, int>> older;
      for (const auto& e : earlier) {
        if (e.second < year) older.push_back(e);
      }
      if (!older.empty() && rng.uniform01() < opt.resolve_rate) resolved = older[rng.uniform_index(older.size())].first;
      bib.push_back(fixtures::ref(bib_id, resolved, {capitalize(surname) + ", A."}, ref_year));

      std::string cue = kCues[fn][rng.uniform_index(kCues[fn].size())];
      if (const auto tpos = cue.find("TOPIC"); tpos != std::string::npos) cue.replace(tpos, 5, pick(kTopicWords[topic], rng));
      const auto cpos = cue.find("CIT");
      const std::string before = cue.substr(0, cpos);
      const std::string cit = "(/-LRB- " + capitalize(surname) + "/NNP ,/, " + std::to_string(ref_year) + "/CD )/-RRB-";
      cue.replace(cpos, 3, cit);
      const int first = static_cast<int>(split_ws(before).size());

      // Section by class tendency.
      std::size_t sec = 0;
      switch (static_cast<Function>(fn)) {
        case Function::Uses:
        case Function::Extends: sec = 2; break;
        case Function::CompareContrast: sec = 3; break;
        case Function::Future: sec = 4; break;
        case Function::Background: sec = rng.uniform_index(2); break;
        default: sec = 0;
      }
      auto& list = sents[sec];
      const auto at = 1 + rng.uniform_index(list.size());
      list.insert(list.begin() + static_cast<std::ptrdiff_t>(at), fixtures::sent(cue));
      for (auto& mm : mentions) {
        if (mm.section_index == static_cast<int>(sec) && mm.sentence_index >= static_cast<int>(at)) ++mm.sentence_index;
      }
      const Centrality cen = (fn == index_of(Function::Uses) || fn == index_of(Function::Extends)) && rng.uniform01() < 0.8
                                 ? Centrality::Essential
                                 : (rng.uniform01() < 0.1 ? Centrality::Essential : Centrality::Positioning);
      mentions.push_back(fixtures::mention(bib_id, static_cast<int>(sec), static_cast<int>(at), first, first + 4,
                                           Label{static_cast<Function>(fn), cen}));
    }
    std::vector<Section> sections;
    for (std::size_t s = 0; s < titles.size(); ++s) sections.push_back(fixtures::section(titles[s], sents[s]));
    std::vector<std::string> authors;
    const auto n_auth = 1 + rng.uniform_index(4);
    for (std::size_t a = 0; a < n_auth; ++a) authors.push_back(capitalize(pick(kSurnames, rng)) + ", B.");
    out.corpus.papers.push_back(fixtures::paper(id, year, std::move(sections), std::move(bib), std::move(mentions), authors));
    earlier.emplace_back(id, year);
  }
  return out;
}

inline void write_corpus(const Corpus& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file_atomic(dir / "papers.jsonl", serialize_corpus(c));
}

// Apache combined log lines. Each reader opens a paper and then, with
// probability `follow_essential`, an Essential reference when one exists,
// otherwise a uniformly chosen reference.
inline std::string access_log(const Corpus& c, std::size_t readers, double follow_essential, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<const Paper*> citing;
  for (const auto& p : c.papers) {
    for (const auto& r : p.bibliography) {
      if (r.resolved_id) {
        citing.push_back(&p);
        break;
      }
    }
  }
  std::string out;
  if (citing.empty()) return out;
  auto line = [&](std::int64_t t, const std::string& paper, const std::string& ua, int status) {
    const std::int64_t day = t / 86400, rem = t % 86400;
    char ts[64];
    std::snprintf(ts, sizeof ts, "%02lld/Mar/2016:%02lld:%02lld:%02lld +0000", static_cast<long long>(1 + day % 28),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem % 3600 / 60),
                  static_cast<long long>(rem % 60));
    out += "10.1.2.3 - - [" + std::string(ts) + "] \"GET /anthology/" + paper + ".pdf HTTP/1.1\" " +
           std::to_string(status) + " 5120 \"-\" \"" + ua + "\"\n";
  };
  std::int64_t t = 0;
  for (std::size_t r = 0; r < readers; ++r) {
    const std::string ua = "Mozilla/5.0 reader-" + std::to_string(r);
    const Paper* p = citing[rng.uniform_index(citing.size())];
    t += 7;
    line(t, p->id(), ua, 200);
    std::vector<std::string> essential, any;
    for (const auto& m : p->mentions) {
      const auto* ref = p->find_reference(m.bib_id);
      if (!ref || !ref->resolved_id || !m.gold) continue;
      any.push_back(*ref->resolved_id);
      if (m.gold->centrality == Centrality::Essential) essential.push_back(*ref->resolved_id);
    }
    if (any.empty()) continue;
    const auto& pool = !essential.empty() && rng.uniform01() < follow_essential ? essential : any;
    line(t + 120, pool[rng.uniform_index(pool.size())], ua, 200);
    if (r % 10 == 0) line(t + 130, p->id(), "Googlebot/2.1", 200);
    if (r % 13 == 0) line(t + 140, p->id(), ua, 404);
  }
  return out;
}

}  // namespace synth
