#include <doctest.h>

#include <cmath>
#include <numeric>

#include "citescope/fieldscan.hpp"
#include "citescope/util.hpp"
#include "fixtures.hpp"

using namespace citescope;

namespace {

LabeledCitation cite(std::string paper, int year, SectionKind s, Function f, std::string cited = "X",
                     VenueKind v = VenueKind::Conference, Centrality c = Centrality::Positioning) {
  LabeledCitation lc;
  lc.paper = std::move(paper);
  lc.year = year;
  lc.section = s;
  lc.venue = v;
  lc.cited = std::move(cited);
  lc.label = Label{f, c};
  return lc;
}

// Emits exactly counts[f] citations of each function for one group.
void plant(std::vector<LabeledCitation>& out, Rng& rng, SectionKind s, VenueKind v,
           const std::array<std::size_t, kFunctionCount>& counts) {
  for (std::size_t f = 0; f < kFunctionCount; ++f) {
    for (std::size_t i = 0; i < counts[f]; ++i) {
      out.push_back(cite("P" + std::to_string(rng.uniform_index(40)), 2000, s, kAllFunctions[f], "X", v));
    }
  }
  shuffle(out, rng);
}

}  // namespace

TEST_CASE("function by section") {
  SUBCASE("all related work is background") {
    std::vector<LabeledCitation> c = {cite("a", 2000, SectionKind::RelatedWork, Function::Background),
                                      cite("a", 2000, SectionKind::RelatedWork, Function::Background),
                                      cite("b", 2000, SectionKind::Methodology, Function::Uses),
                                      cite("b", 2000, SectionKind::Methodology, Function::Background)};
    auto t = function_by_section(c);
    REQUIRE(t.rows.size() == 2);
    const auto* rw = t.find("RelatedWork");
    REQUIRE(rw);
    CHECK(rw->share[index_of(Function::Background)] == 1.0);
    CHECK(rw->n == 2);
    CHECK(t.find("Methodology")->share[index_of(Function::Uses)] == 0.5);
    CHECK(t.find("Introduction") == nullptr);
  }
  SUBCASE("planted mixtures are recovered exactly") {
    Rng rng(4);
    std::vector<LabeledCitation> c;
    const std::array<std::size_t, kFunctionCount> intro = {12, 5, 1, 0, 0, 2, 0};
    const std::array<std::size_t, kFunctionCount> method = {4, 0, 11, 3, 2, 0, 0};
    const std::array<std::size_t, kFunctionCount> concl = {1, 0, 0, 0, 0, 1, 8};
    plant(c, rng, SectionKind::Introduction, VenueKind::Journal, intro);
    plant(c, rng, SectionKind::Methodology, VenueKind::Conference, method);
    plant(c, rng, SectionKind::Conclusion, VenueKind::Workshop, concl);
    auto t = function_by_section(c);
    REQUIRE(t.rows.size() == 3);
    for (auto [name, counts] : {std::pair{"Introduction", intro}, std::pair{"Methodology", method}, std::pair{"Conclusion", concl}}) {
      const auto* row = t.find(name);
      REQUIRE(row);
      const auto n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
      for (std::size_t f = 0; f < kFunctionCount; ++f) CHECK(row->share[f] == double(counts[f]) / double(n));
      CHECK(std::accumulate(row->share.begin(), row->share.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    // Sections map one-to-one onto venues here, so the venue table agrees.
    auto v = function_by_venue(c);
    REQUIRE(v.rows.size() == 3);
    CHECK(v.rows[0].group == "Journal");
    CHECK(v.rows[0].share == t.find("Introduction")->share);
    CHECK(v.find("Workshop")->share == t.find("Conclusion")->share);
  }
  SUBCASE("single venue") {
    std::vector<LabeledCitation> c = {cite("a", 2000, SectionKind::Other, Function::Future, "X", VenueKind::Workshop)};
    auto v = function_by_venue(c);
    REQUIRE(v.rows.size() == 1);
    CHECK(v.rows[0].share[index_of(Function::Future)] == 1.0);
  }
}

TEST_CASE("yearly series") {
  const Measure uses{Measure::Kind::PctFunction, Function::Uses};
  SUBCASE("identical papers give zero-width intervals") {
    std::vector<LabeledCitation> c;
    for (int p = 0; p < 6; ++p) {
      c.push_back(cite("p" + std::to_string(p), 2001, SectionKind::Other, Function::Uses));
      c.push_back(cite("p" + std::to_string(p), 2001, SectionKind::Other, Function::Background));
    }
    auto s = yearly_series(c, uses, 200, 3);
    REQUIRE(s.points.size() == 1);
    const auto& pt = s.points[0];
    CHECK(pt.value == 0.5);
    CHECK(pt.ci68_lo == 0.5);
    CHECK(pt.ci95_hi == 0.5);
    CHECK(pt.papers == 6);
  }
  SUBCASE("one paper in a year collapses to the point") {
    std::vector<LabeledCitation> c = {cite("a", 1999, SectionKind::Other, Function::Uses),
                                      cite("a", 1999, SectionKind::Other, Function::Future),
                                      cite("a", 1999, SectionKind::Other, Function::Future)};
    auto pt = yearly_series(c, uses).points.at(0);
    CHECK(pt.value == doctest::Approx(1.0 / 3.0));
    CHECK(pt.ci68_lo == pt.value);
    CHECK(pt.ci95_lo == pt.value);
    CHECK(pt.ci95_hi == pt.value);
  }
  SUBCASE("per-paper averaging") {
    // Paper a: 1 of 1 Uses, paper b: 1 of 3. Mean of percentages is 2/3, pooling would give 1/2.
    std::vector<LabeledCitation> c = {cite("a", 2005, SectionKind::Other, Function::Uses),
                                      cite("b", 2005, SectionKind::Other, Function::Uses),
                                      cite("b", 2005, SectionKind::Other, Function::Background),
                                      cite("b", 2005, SectionKind::Other, Function::Background)};
    CHECK(yearly_series(c, uses).points.at(0).value == doctest::Approx(2.0 / 3.0));
  }
  SUBCASE("centrality and incoming-per-cited measures") {
    std::vector<LabeledCitation> c = {
        cite("a", 2003, SectionKind::Other, Function::Uses, "X", VenueKind::Journal, Centrality::Essential),
        cite("a", 2003, SectionKind::Other, Function::Uses, "Y", VenueKind::Journal, Centrality::Positioning),
        cite("b", 2003, SectionKind::Other, Function::Uses, "X", VenueKind::Journal, Centrality::Essential),
        cite("b", 2003, SectionKind::Other, Function::Background, "Z", VenueKind::Journal, Centrality::Positioning),
        cite("c", 2004, SectionKind::Other, Function::Background, "Z"),
    };
    auto ess = yearly_series(c, Measure{Measure::Kind::PctCentrality, Function::Background, Centrality::Essential});
    CHECK(ess.points.at(0).value == 0.5);
    auto inc = yearly_series(c, Measure{Measure::Kind::IncomingPerCited, Function::Uses});
    // 2003: three Uses citations received by two distinct papers; 2004 has none.
    REQUIRE(inc.points.size() == 1);
    CHECK(inc.points[0].value == 1.5);
    CHECK(inc.skipped_years == std::vector<int>{2004});
  }
  SUBCASE("planted linear trend") {
    Rng rng(12);
    std::vector<LabeledCitation> c;
    std::vector<double> years, planted;
    for (int y = 1980; y <= 2009; ++y) {
      const double pct = 0.1 + 0.01 * (y - 1980);
      const int n_papers = 5 + int(rng.uniform_index(10));
      for (int p = 0; p < n_papers; ++p) {
        // Each paper's own percentage scatters around the trend.
        const std::string id = std::to_string(y) + "-" + std::to_string(p);
        const int hits = int(std::lround((pct + (rng.uniform01() - 0.5) * 0.06) * 100));
        for (int m = 0; m < 100; ++m) c.push_back(cite(id, y, SectionKind::Other, m < hits ? Function::Uses : Function::Background));
      }
      years.push_back(y);
      planted.push_back(pct);
    }
    auto s = yearly_series(c, uses, 500, 99);
    REQUIRE(s.points.size() == 30);
    std::vector<double> values;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& p = s.points[i];
      values.push_back(p.value);
      CHECK(p.ci95_lo <= p.ci68_lo);
      CHECK(p.ci68_lo <= p.value);
      CHECK(p.value <= p.ci68_hi);
      CHECK(p.ci68_hi <= p.ci95_hi);
      covered += planted[i] >= p.ci95_lo && planted[i] <= p.ci95_hi;
    }
    CHECK(covered >= 25);
    CHECK(pearson(years, values).r >= 0.99);
    auto again = yearly_series(c, uses, 500, 99);
    CHECK(trend_csv({again}) == trend_csv({s}));
    auto sub = yearly_series(filter_years(c, YearRange{1990, 1999}), uses, 50, 1);
    CHECK(sub.points.size() == 10);
    CHECK(sub.points.front().year == 1990);
  }
}

TEST_CASE("pearson") {
  CHECK(pearson({1, 2, 3}, {2, 4, 6}).r == 1.0);
  CHECK(pearson({1, 2, 3}, {3, 2, 1}).r == -1.0);
  // Reference values from scipy.stats.pearsonr.
  auto a = pearson({1, 2, 3, 4, 5}, {2, 1, 3, 5, 4});
  CHECK(a.r == doctest::Approx(0.8).epsilon(1e-14));
  CHECK(a.p == doctest::Approx(0.10408803866182799).epsilon(1e-10));
  auto b = pearson({1, 2, 3, 4, 5, 6, 7, 8, 9, 10}, {2, 1, 4, 3, 7, 5, 6, 9, 10, 8});
  CHECK(b.r == doctest::Approx(0.9030303030303027).epsilon(1e-12));
  CHECK(b.p == doctest::Approx(0.00034361219776328256).epsilon(1e-8));

  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(10), y(10);
    for (auto& v : x) v = rng.uniform01() * 100;
    const double slope = 0.1 + rng.uniform01() * 5, icpt = rng.uniform01() * 10 - 5;
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = slope * x[i] + icpt;
    CHECK(std::abs(pearson(x, y).r - 1.0) < 1e-12);
  }

  try {
    pearson({1, 1, 1}, {1, 2, 3});
    FAIL("expected ZeroVariance");
  } catch (const FieldscanError& e) {
    CHECK(e.kind() == FieldscanError::Kind::ZeroVariance);
  }
  CHECK_THROWS_AS(pearson({1, 2}, {1, 2}), FieldscanError);

  SUBCASE("independent uniforms rarely look correlated") {
    std::size_t quiet = 0;
    const int trials = 2000;
    for (int t = 0; t < trials; ++t) {
      std::vector<double> x(20), y(20);
      for (auto& v : x) v = rng.uniform01();
      for (auto& v : y) v = rng.uniform01();
      auto c = pearson(x, y);
      quiet += std::abs(c.r) < 0.6 && c.p > 0.001;
    }
    CHECK(double(quiet) / trials >= 0.99);
  }
}

TEST_CASE("labels overlay and corpus flattening") {
  using namespace fixtures;
  Corpus corpus;
  corpus.papers.push_back(fixtures::paper("J05-1001", 2005,
                                          {section("Related Work", {sent("see/VB A/NNP and/CC B/NNP")})},
                                          {ref("a", "P01-1"), ref("b")},
                                          {mention("a", 0, 0, 1, 1, Label{Function::Uses, Centrality::Essential}),
                                           mention("b", 0, 0, 3, 3)}));
  auto flat = labeled_citations(corpus);
  REQUIRE(flat.size() == 1);
  CHECK(flat[0].cited == "P01-1");
  CHECK(flat[0].section == SectionKind::RelatedWork);
  CHECK(flat[0].venue == VenueKind::Journal);

  const auto csv = labels_csv({{"J05-1001", 1, {Function::Future, Centrality::Positioning}},
                               {"J05-1001", 0, {Function::Background, Centrality::Positioning}}});
  apply_labels(corpus, csv);
  flat = labeled_citations(corpus);
  REQUIRE(flat.size() == 2);
  CHECK(flat[0].label.function == Function::Background);
  CHECK(flat[1].label.function == Function::Future);
  CHECK(flat[1].cited == "J05-1001#b");
  CHECK_THROWS_AS(apply_labels(corpus, "h\nJ05-1001,7,Uses,Essential\n"), FieldscanError);
  CHECK_THROWS_AS(apply_labels(corpus, "h\nJ05-1001,0,Nope,Essential\n"), FieldscanError);

  auto m = parse_measure("pct_centrality(Essential)");
  REQUIRE(m);
  CHECK(m->name() == "pct_centrality(Essential)");
  CHECK(parse_measure("incoming_per_cited(Uses)")->kind == Measure::Kind::IncomingPerCited);
  CHECK_FALSE(parse_measure("pct_function(Nope)"));
}
