#include "citescope/fieldscan.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "citescope/util.hpp"

namespace citescope {

std::vector<LabeledCitation> labeled_citations(const Corpus& corpus) {
  std::vector<LabeledCitation> out;
  for (const auto& p : corpus.papers) {
    for (const auto& m : p.mentions) {
      if (!m.gold) continue;
      LabeledCitation c;
      c.paper = p.id();
      c.year = p.meta.year;
      c.venue = p.meta.venue;
      c.section = p.sections.at(static_cast<std::size_t>(m.section_index)).kind;
      const Reference* ref = p.find_reference(m.bib_id);
      c.cited = ref && ref->resolved_id ? *ref->resolved_id : p.id() + "#" + m.bib_id;
      c.label = *m.gold;
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::string labels_csv(const std::vector<MentionLabel>& labels) {
  std::string out = "paper_id,mention,function,centrality\n";
  for (const auto& l : labels) {
    out += l.paper + ',' + std::to_string(l.mention) + ',' + std::string(to_string(l.label.function)) + ',' +
           std::string(to_string(l.label.centrality)) + '\n';
  }
  return out;
}

void apply_labels(Corpus& corpus, std::string_view csv) {
  std::map<std::string, Paper*> by_id;
  for (auto& p : corpus.papers) by_id[p.id()] = &p;
  std::size_t line_no = 0;
  for (const auto& line : split(csv, '\n')) {
    ++line_no;
    if (line_no == 1 || trim(line).empty()) continue;
    const auto f = split(line, ',');
    auto bad = [&](const std::string& why) {
      throw FieldscanError(FieldscanError::Kind::Malformed, "labels line " + std::to_string(line_no) + ": " + why);
    };
    if (f.size() != 4) bad("expected 4 fields");
    auto it = by_id.find(f[0]);
    if (it == by_id.end()) bad("unknown paper " + f[0]);
    std::size_t idx = 0;
    try {
      idx = std::stoul(f[1]);
    } catch (const std::exception&) {
      bad("bad mention index");
    }
    if (idx >= it->second->mentions.size()) bad("mention index out of range");
    auto fn = parse_function(trim(f[2]));
    auto ce = parse_centrality(trim(f[3]));
    if (!fn || !ce) bad("unknown label");
    it->second->mentions[idx].gold = Label{*fn, *ce};
  }
}

std::vector<LabeledCitation> filter_years(const std::vector<LabeledCitation>& cites, std::optional<YearRange> years) {
  if (!years) return cites;
  std::vector<LabeledCitation> out;
  std::copy_if(cites.begin(), cites.end(), std::back_inserter(out),
               [&](const LabeledCitation& c) { return c.year >= years->first && c.year <= years->second; });
  return out;
}

const DistributionRow* DistributionTable::find(std::string_view group) const {
  for (const auto& r : rows) {
    if (r.group == group) return &r;
  }
  return nullptr;
}

namespace {

template <typename Key, std::size_t N>
DistributionTable distribution(const std::vector<LabeledCitation>& cites, const std::array<Key, N>& groups,
                               Key (*key)(const LabeledCitation&)) {
  std::array<std::array<std::size_t, kFunctionCount>, N> counts{};
  for (const auto& c : cites) {
    const auto g = static_cast<std::size_t>(key(c));
    ++counts[g][index_of(c.label.function)];
  }
  DistributionTable t;
  for (std::size_t g = 0; g < N; ++g) {
    std::size_t n = 0;
    for (auto v : counts[g]) n += v;
    if (n == 0) continue;
    DistributionRow row;
    row.group = std::string(to_string(groups[g]));
    row.n = n;
    for (std::size_t f = 0; f < kFunctionCount; ++f) row.share[f] = static_cast<double>(counts[g][f]) / static_cast<double>(n);
    t.rows.push_back(std::move(row));
  }
  return t;
}

SectionKind section_of(const LabeledCitation& c) { return c.section; }
VenueKind venue_of(const LabeledCitation& c) { return c.venue; }

bool matches(const Measure& m, const Label& l) {
  return m.kind == Measure::Kind::PctCentrality ? l.centrality == m.centrality : l.function == m.function;
}

// Citations of one paper, reduced to what the measures need.
struct PaperTally {
  std::size_t total = 0;
  std::size_t hits = 0;
  std::vector<std::string> hit_cited;
};

double evaluate(const Measure& m, const std::vector<const PaperTally*>& papers, bool& defined) {
  defined = true;
  if (m.kind == Measure::Kind::IncomingPerCited) {
    std::size_t hits = 0;
    std::set<std::string> cited;
    for (const auto* p : papers) {
      hits += p->hits;
      cited.insert(p->hit_cited.begin(), p->hit_cited.end());
    }
    if (cited.empty()) {
      defined = false;
      return 0;
    }
    return static_cast<double>(hits) / static_cast<double>(cited.size());
  }
  double sum = 0;
  for (const auto* p : papers) sum += static_cast<double>(p->hits) / static_cast<double>(p->total);
  return sum / static_cast<double>(papers.size());
}

}  // namespace

DistributionTable function_by_section(const std::vector<LabeledCitation>& cites) {
  return distribution(cites, kAllSectionKinds, &section_of);
}

DistributionTable function_by_venue(const std::vector<LabeledCitation>& cites) {
  return distribution(cites, kAllVenueKinds, &venue_of);
}

std::string Measure::name() const {
  switch (kind) {
    case Kind::PctCentrality: return "pct_centrality(" + std::string(to_string(centrality)) + ")";
    case Kind::PctFunction: return "pct_function(" + std::string(to_string(function)) + ")";
    case Kind::IncomingPerCited: return "incoming_per_cited(" + std::string(to_string(function)) + ")";
  }
  return "?";
}

std::optional<Measure> parse_measure(std::string_view s) {
  const auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')') return std::nullopt;
  const auto kind = s.substr(0, open);
  const auto arg = s.substr(open + 1, s.size() - open - 2);
  Measure m;
  if (kind == "pct_centrality") {
    auto c = parse_centrality(arg);
    if (!c) return std::nullopt;
    m.kind = Measure::Kind::PctCentrality;
    m.centrality = *c;
    return m;
  }
  auto f = parse_function(arg);
  if (!f) return std::nullopt;
  m.function = *f;
  if (kind == "pct_function") {
    m.kind = Measure::Kind::PctFunction;
  } else if (kind == "incoming_per_cited") {
    m.kind = Measure::Kind::IncomingPerCited;
  } else {
    return std::nullopt;
  }
  return m;
}

TrendSeries yearly_series(const std::vector<LabeledCitation>& cites, const Measure& measure, std::size_t boot_n,
                          std::uint64_t seed) {
  std::map<int, std::map<std::string, PaperTally>> by_year;
  for (const auto& c : cites) {
    auto& t = by_year[c.year][c.paper];
    ++t.total;
    if (matches(measure, c.label)) {
      ++t.hits;
      t.hit_cited.push_back(c.cited);
    }
  }
  TrendSeries out;
  out.measure = measure.name();
  for (const auto& [year, papers] : by_year) {
    std::vector<const PaperTally*> all;
    for (const auto& [id, t] : papers) all.push_back(&t);
    bool defined = false;
    const double value = evaluate(measure, all, defined);
    if (!defined) {
      out.skipped_years.push_back(year);
      continue;
    }
    TrendPoint pt;
    pt.year = year;
    pt.value = value;
    pt.papers = all.size();

    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(year)));
    std::vector<double> boot;
    boot.reserve(boot_n);
    std::vector<const PaperTally*> draw(all.size());
    for (std::size_t b = 0; b < boot_n; ++b) {
      for (auto& d : draw) d = all[rng.uniform_index(all.size())];
      bool ok = false;
      const double v = evaluate(measure, draw, ok);
      boot.push_back(ok ? v : 0.0);
    }
    if (boot.empty()) boot.push_back(value);
    std::sort(boot.begin(), boot.end());
    // Percentile intervals, widened if needed so the point estimate stays inside.
    pt.ci68_lo = std::min(value, quantile_sorted(boot, 0.16));
    pt.ci68_hi = std::max(value, quantile_sorted(boot, 0.84));
    pt.ci95_lo = std::min(pt.ci68_lo, quantile_sorted(boot, 0.025));
    pt.ci95_hi = std::max(pt.ci68_hi, quantile_sorted(boot, 0.975));
    out.points.push_back(pt);
  }
  return out;
}

Correlation pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3) {
    throw FieldscanError(FieldscanError::Kind::TooFewPoints, "pearson needs two equal-length samples of at least 3");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) throw FieldscanError(FieldscanError::Kind::ZeroVariance, "a sample has zero variance");
  Correlation c;
  c.n = xs.size();
  c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  if (std::abs(c.r) == 1.0) {
    c.p = 0;
    return c;
  }
  const double df = n - 2;
  const double t = c.r * std::sqrt(df / (1 - c.r * c.r));
  boost::math::students_t dist(df);
  c.p = std::clamp(2 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
  return c;
}

std::string distribution_csv(const DistributionTable& table) {
  std::string out = "group,function,value,ci68_lo,ci68_hi,ci95_lo,ci95_hi,n\n";
  for (const auto& r : table.rows) {
    for (std::size_t f = 0; f < kFunctionCount; ++f) {
      out += r.group + ',' + std::string(to_string(kAllFunctions[f])) + ',' + format_double(r.share[f]) + ",,,,," +
             std::to_string(r.n) + '\n';
    }
  }
  return out;
}

std::string trend_csv(const std::vector<TrendSeries>& series) {
  std::string out = "group,function,value,ci68_lo,ci68_hi,ci95_lo,ci95_hi,n\n";
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      out += std::to_string(p.year) + ',' + s.measure + ',' + format_double(p.value) + ',' + format_double(p.ci68_lo) +
             ',' + format_double(p.ci68_hi) + ',' + format_double(p.ci95_lo) + ',' + format_double(p.ci95_hi) + ',' +
             std::to_string(p.papers) + '\n';
    }
  }
  return out;
}

}  // namespace citescope
