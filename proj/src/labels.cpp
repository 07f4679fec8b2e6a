#include "citescope/labels.hpp"

namespace citescope {
namespace {

template <typename E, std::size_t N>
std::optional<E> parse_enum(std::string_view s, const std::array<E, N>& all) {
  for (E e : all) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Function f) {
  switch (f) {
    case Function::Background: return "Background";
    case Function::Motivation: return "Motivation";
    case Function::Uses: return "Uses";
    case Function::Extends: return "Extends";
    case Function::Continuation: return "Continuation";
    case Function::CompareContrast: return "CompareContrast";
    case Function::Future: return "Future";
  }
  return "?";
}

std::string_view to_string(Centrality c) {
  return c == Centrality::Essential ? "Essential" : "Positioning";
}

std::string_view to_string(SectionKind k) {
  switch (k) {
    case SectionKind::Introduction: return "Introduction";
    case SectionKind::Motivation: return "Motivation";
    case SectionKind::RelatedWork: return "RelatedWork";
    case SectionKind::Methodology: return "Methodology";
    case SectionKind::Evaluation: return "Evaluation";
    case SectionKind::Results: return "Results";
    case SectionKind::Discussion: return "Discussion";
    case SectionKind::Conclusion: return "Conclusion";
    case SectionKind::Other: return "Other";
  }
  return "?";
}

std::string_view to_string(VenueKind v) {
  switch (v) {
    case VenueKind::Journal: return "Journal";
    case VenueKind::Conference: return "Conference";
    case VenueKind::Workshop: return "Workshop";
  }
  return "?";
}

std::string_view to_string(CitationForm f) {
  return f == CitationForm::Nominative ? "Nominative" : "Parenthetical";
}

std::optional<Function> parse_function(std::string_view s) { return parse_enum(s, kAllFunctions); }
std::optional<Centrality> parse_centrality(std::string_view s) {
  return parse_enum(s, kAllCentralities);
}
std::optional<SectionKind> parse_section_kind(std::string_view s) {
  return parse_enum(s, kAllSectionKinds);
}
std::optional<VenueKind> parse_venue_kind(std::string_view s) {
  return parse_enum(s, kAllVenueKinds);
}

}  // namespace citescope
