#pragma once

// Hand-built papers and sentences for unit tests.

#include <string>
#include <string_view>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/util.hpp"

namespace fixtures {

using namespace citescope;

/// "we/PRP use/VBP the/DT" -> tokens without a dependency tree.
/// "follow/VB/0/root it/PRP/1/dobj" -> tokens with 1-based heads and relations.
/// Use "\/" inside the word for a literal slash is unsupported; tests avoid it.
inline Sentence sent(std::string_view spec) {
  Sentence s;
  std::size_t offset = 0;
  bool tree = false;
  for (const auto& item : split_ws(spec)) {
    auto parts = split(item, '/');
    Token t;
    t.surface = parts.at(0);
    t.pos = parts.size() > 1 ? parts[1] : "NN";
    if (parts.size() > 3) {
      t.head = std::stoi(parts[2]);
      t.deprel = parts[3];
      tree = true;
    }
    t.char_start = offset;
    t.char_end = offset + t.surface.size();
    offset = t.char_end + 1;
    s.tokens.push_back(std::move(t));
  }
  s.has_tree = tree;
  return s;
}

inline Section section(std::string title, std::vector<Sentence> sentences, int index = 0) {
  Section sec;
  sec.raw_title = std::move(title);
  sec.kind = canonical_section(sec.raw_title);
  sec.index = index;
  for (std::size_t i = 0; i < sentences.size(); ++i) sentences[i].index_in_section = static_cast<int>(i);
  sec.sentences = std::move(sentences);
  return sec;
}

inline Reference ref(std::string bib, std::optional<std::string> resolved = std::nullopt,
                     std::vector<std::string> authors = {}, std::optional<int> year = std::nullopt) {
  Reference r;
  r.bib_id = std::move(bib);
  r.resolved_id = std::move(resolved);
  r.raw = r.bib_id;
  r.authors = std::move(authors);
  r.year = year;
  return r;
}

inline CitationMention mention(std::string bib, int section, int sentence, int first, int last,
                               std::optional<Label> gold = std::nullopt) {
  CitationMention m;
  m.bib_id = std::move(bib);
  m.section_index = section;
  m.sentence_index = sentence;
  m.span = {first, last};
  m.gold = gold;
  return m;
}

inline Paper paper(std::string id, int year, std::vector<Section> sections,
                   std::vector<Reference> bib, std::vector<CitationMention> mentions,
                   std::vector<std::string> authors = {}) {
  Paper p;
  p.meta.anthology_id = id;
  p.meta.title = "title of " + id;
  p.meta.year = year;
  p.meta.venue = venue_kind_for(id);
  for (const auto& a : authors) p.meta.authors.push_back(normalize_author(a));
  for (std::size_t i = 0; i < sections.size(); ++i) sections[i].index = static_cast<int>(i);
  p.sections = std::move(sections);
  p.bibliography = std::move(bib);
  p.mentions = std::move(mentions);
  for (auto& m : p.mentions) {
    m.form = classify_mention_form(m, p.sentence(m.section_index, m.sentence_index)).form;
  }
  return p;
}

/// A section of `n` filler sentences "s<i> w/NN w/NN".
inline Section filler_section(std::string title, int n) {
  std::vector<Sentence> sents;
  for (int i = 0; i < n; ++i) sents.push_back(sent("s" + std::to_string(i) + "/NN filler/NN ./."));
  return section(std::move(title), std::move(sents));
}

}  // namespace fixtures
