#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/labels.hpp"

namespace citescope {

class FieldscanError : public std::runtime_error {
 public:
  enum class Kind { ZeroVariance, TooFewPoints, Malformed };
  FieldscanError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// One labeled mention, flattened for aggregation.
struct LabeledCitation {
  std::string paper;
  int year = 0;
  VenueKind venue = VenueKind::Workshop;
  SectionKind section = SectionKind::Other;
  std::string cited;  // resolved id, or "paper#bib" when unresolved
  Label label;
};

/// Mentions carrying a gold label, in corpus order. Unlabeled mentions are skipped.
std::vector<LabeledCitation> labeled_citations(const Corpus& corpus);

/// Predicted labels as written by the labeling step: one row per mention,
/// "paper_id,mention,function,centrality".
struct MentionLabel {
  std::string paper;
  std::size_t mention = 0;
  Label label;
};
std::string labels_csv(const std::vector<MentionLabel>& labels);
/// Overwrites the gold label of each listed mention. Throws FieldscanError(Malformed).
void apply_labels(Corpus& corpus, std::string_view csv);

using YearRange = std::pair<int, int>;  // inclusive
std::vector<LabeledCitation> filter_years(const std::vector<LabeledCitation>& cites, std::optional<YearRange> years);

struct DistributionRow {
  std::string group;
  std::size_t n = 0;
  std::array<double, kFunctionCount> share{};
};

struct DistributionTable {
  std::vector<DistributionRow> rows;  // in enum order, empty groups omitted
  const DistributionRow* find(std::string_view group) const;
};

DistributionTable function_by_section(const std::vector<LabeledCitation>& cites);
DistributionTable function_by_venue(const std::vector<LabeledCitation>& cites);

struct Measure {
  enum class Kind { PctCentrality, PctFunction, IncomingPerCited };
  Kind kind = Kind::PctFunction;
  Function function = Function::Background;
  Centrality centrality = Centrality::Essential;

  std::string name() const;
};
std::optional<Measure> parse_measure(std::string_view s);

struct TrendPoint {
  int year = 0;
  double value = 0;
  double ci68_lo = 0, ci68_hi = 0;
  double ci95_lo = 0, ci95_hi = 0;
  std::size_t papers = 0;
};

struct TrendSeries {
  std::string measure;
  std::vector<TrendPoint> points;  // ascending year
  std::vector<int> skipped_years;  // no papers, or an undefined ratio
};

/// Per-year value with percentile bootstrap intervals from resampling papers
/// within each year. Deterministic for a given seed.
TrendSeries yearly_series(const std::vector<LabeledCitation>& cites, const Measure& measure, std::size_t boot_n = 1000,
                          std::uint64_t seed = 1);

struct Correlation {
  double r = 0;
  double p = 1;
  std::size_t n = 0;
};

/// Sample Pearson r with a two-sided Student t p-value on n-2 df.
/// Throws FieldscanError(ZeroVariance) or (TooFewPoints) for n < 3.
Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// Tidy CSV: group,function,value,ci68_lo,ci68_hi,ci95_lo,ci95_hi,n
std::string distribution_csv(const DistributionTable& table);
std::string trend_csv(const std::vector<TrendSeries>& series);

}  // namespace citescope
