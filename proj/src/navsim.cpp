#include "citescope/navsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include <zlib.h>

#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

const std::vector<std::string>& default_bot_substrings() {
  static const std::vector<std::string> k = {"bot", "crawler", "spider", "slurp", "curl", "wget"};
  return k;
}

std::vector<std::string> parse_bot_list(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& line : split(text, '\n')) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    out.push_back(to_lower(t));
  }
  return out;
}

std::optional<std::string> find_paper_id(std::string_view path) {
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  for (std::size_t i = 0; i + 8 <= path.size(); ++i) {
    const char* s = path.data() + i;
    if (!(s[0] >= 'A' && s[0] <= 'Z') || !digit(s[1]) || !digit(s[2]) || s[3] != '-') continue;
    if (!digit(s[4]) || !digit(s[5]) || !digit(s[6]) || !digit(s[7])) continue;
    if (i + 8 < path.size() && digit(path[i + 8])) continue;
    if (i > 0 && std::isalnum(static_cast<unsigned char>(path[i - 1]))) continue;
    return std::string(path.substr(i, 8));
  }
  return std::nullopt;
}

namespace {

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

// "10/Oct/2000:13:55:36 -0700"
std::optional<std::int64_t> parse_clf_time(std::string_view s) {
  static const char* months[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  if (s.size() < 26 || s[2] != '/' || s[6] != '/' || s[11] != ':' || s[14] != ':' || s[17] != ':' || s[20] != ' ') {
    return std::nullopt;
  }
  auto num = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  unsigned month = 0;
  for (unsigned m = 0; m < 12; ++m) {
    if (s.substr(3, 3) == months[m]) month = m + 1;
  }
  auto d = num(0, 2), y = num(7, 4), h = num(12, 2), mi = num(15, 2), se = num(18, 2), oh = num(22, 2), om = num(24, 2);
  if (!month || !d || !y || !h || !mi || !se || !oh || !om || (s[21] != '+' && s[21] != '-')) return std::nullopt;
  if (*d < 1 || *d > 31 || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;
  const std::int64_t offset = (s[21] == '-' ? -1 : 1) * (*oh * 3600 + *om * 60);
  return days_from_civil(*y, month, static_cast<unsigned>(*d)) * 86400 + *h * 3600 + *mi * 60 + *se - offset;
}

// Reads a double-quoted field starting at s[pos] == '"'; backslash escapes honoured.
std::optional<std::string> quoted(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && s[pos] == ' ') ++pos;
  if (pos >= s.size() || s[pos] != '"') return std::nullopt;
  std::string out;
  for (++pos; pos < s.size(); ++pos) {
    if (s[pos] == '\\' && pos + 1 < s.size()) {
      out += s[++pos];
    } else if (s[pos] == '"') {
      ++pos;
      return out;
    } else {
      out += s[pos];
    }
  }
  return std::nullopt;
}

std::string token(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && s[pos] == ' ') ++pos;
  const std::size_t start = pos;
  while (pos < s.size() && s[pos] != ' ') ++pos;
  return std::string(s.substr(start, pos - start));
}

}  // namespace

ParsedLog parse_log(std::string_view text, const std::vector<std::string>& bots) {
  ParsedLog out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;
    ++out.stats.lines;

    const auto lb = line.find('[');
    const auto rb = line.find(']', lb == std::string_view::npos ? 0 : lb);
    if (lb == std::string_view::npos || rb == std::string_view::npos) {
      ++out.stats.malformed;
      continue;
    }
    const auto ts = parse_clf_time(line.substr(lb + 1, rb - lb - 1));
    std::size_t pos = rb + 1;
    const auto request = quoted(line, pos);
    const auto status_text = token(line, pos);
    token(line, pos);  // bytes
    quoted(line, pos);  // referer
    std::size_t ua_pos = pos;
    const auto agent = quoted(line, ua_pos);
    int status = 0;
    try {
      std::size_t used = 0;
      status = std::stoi(status_text, &used);
      if (used != status_text.size()) throw std::invalid_argument("status");
    } catch (const std::exception&) {
      status = -1;
    }
    if (!ts || !request || status < 0) {
      ++out.stats.malformed;
      continue;
    }
    const std::string ua = agent.value_or("");
    const std::string ua_lower = to_lower(ua);
    if (std::any_of(bots.begin(), bots.end(),
                    [&](const std::string& b) { return !b.empty() && ua_lower.find(b) != std::string::npos; })) {
      ++out.stats.bots;
      continue;
    }
    const auto parts = split_ws(*request);
    std::optional<std::string> paper;
    if (parts.size() >= 2 && parts[0] == "GET" && status == 200) paper = find_paper_id(parts[1]);
    if (!paper) {
      ++out.stats.filtered;
      continue;
    }
    out.requests.push_back(LogRequest{*ts, *paper, fnv1a(ua), status});
    ++out.stats.kept;
  }
  return out;
}

std::string read_log_file(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  if (raw.size() < 2 || static_cast<unsigned char>(raw[0]) != 0x1f || static_cast<unsigned char>(raw[1]) != 0x8b) {
    return raw;
  }
  gzFile f = gzopen(path.string().c_str(), "rb");
  if (!f) throw NavsimError(NavsimError::Kind::Io, "cannot open " + path.string());
  std::string out;
  char buf[1 << 16];
  int n;
  while ((n = gzread(f, buf, sizeof buf)) > 0) out.append(buf, static_cast<std::size_t>(n));
  const bool failed = n < 0;
  gzclose(f);
  if (failed) throw NavsimError(NavsimError::Kind::Io, "corrupt gzip stream in " + path.string());
  return out;
}

std::vector<Trace> sessionize(std::vector<LogRequest> requests, const SessionConfig& cfg) {
  std::sort(requests.begin(), requests.end(), [](const LogRequest& a, const LogRequest& b) {
    if (a.agent != b.agent) return a.agent < b.agent;
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.paper < b.paper;
  });
  std::vector<Trace> out;
  auto flush = [&](std::size_t begin, std::size_t end) {
    if (end - begin >= cfg.max_requests) return;
    Trace t;
    t.agent = requests[begin].agent;
    for (std::size_t i = begin; i < end; ++i) {
      if (!t.steps.empty() && t.steps.back().paper == requests[i].paper) continue;
      t.steps.push_back({requests[i].timestamp, requests[i].paper});
    }
    if (t.steps.size() >= 2) out.push_back(std::move(t));
  };
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= requests.size(); ++i) {
    if (i == requests.size() || requests[i].agent != requests[i - 1].agent ||
        requests[i].timestamp - requests[i - 1].timestamp > cfg.gap_seconds) {
      if (i > begin) flush(begin, i);
      begin = i;
    }
  }
  return out;
}

std::string nav_class_name(std::size_t cls) {
  if (cls < kFunctionCount) return std::string(to_string(kAllFunctions[cls]));
  return cls == kFunctionCount ? "Essential" : "Positioning";
}

ReferenceIndex::ReferenceIndex(const Corpus& corpus) {
  for (const auto& p : corpus.papers) {
    std::map<std::string, Ref> refs;
    for (const auto& m : p.mentions) {
      if (!m.gold) continue;
      const Reference* r = p.find_reference(m.bib_id);
      if (!r || !r->resolved_id || !corpus.find(*r->resolved_id)) continue;
      auto& ref = refs[*r->resolved_id];
      ref.cited = *r->resolved_id;
      ref.essential = ref.essential || m.gold->centrality == Centrality::Essential;
      ref.functions.push_back(m.gold->function);
    }
    if (refs.empty()) continue;
    auto& list = refs_[p.id()];
    for (auto& [id, ref] : refs) {
      std::sort(ref.functions.begin(), ref.functions.end());
      ref.functions.erase(std::unique(ref.functions.begin(), ref.functions.end()), ref.functions.end());
      list.push_back(std::move(ref));
    }
  }
}

const std::vector<ReferenceIndex::Ref>& ReferenceIndex::references(const std::string& paper) const {
  static const std::vector<Ref> none;
  auto it = refs_.find(paper);
  return it == refs_.end() ? none : it->second;
}

const ReferenceIndex::Ref* ReferenceIndex::find(const std::string& paper, const std::string& cited) const {
  const auto& list = references(paper);
  auto it = std::lower_bound(list.begin(), list.end(), cited, [](const Ref& r, const std::string& c) { return r.cited < c; });
  return it != list.end() && it->cited == cited ? &*it : nullptr;
}

namespace {

ScaledTally tally_of(const ReferenceIndex::Ref& ref) {
  ScaledTally t{};
  const auto share = kTallyScale / static_cast<std::int64_t>(ref.functions.size());
  for (Function f : ref.functions) t[index_of(f)] += share;
  t[ref.essential ? kFunctionCount : kFunctionCount + 1] += kTallyScale;
  return t;
}

void add(ScaledTally& into, const ScaledTally& t, std::int64_t times = 1) {
  for (std::size_t c = 0; c < kNavClassCount; ++c) into[c] += t[c] * times;
}

// Followed steps grouped by starting paper, in paper id order.
std::map<std::string, std::size_t> followed_by_start(const std::vector<Trace>& traces, const ReferenceIndex& index) {
  std::map<std::string, std::size_t> out;
  for (const auto& t : traces) {
    for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) {
      if (index.find(t.steps[i].paper, t.steps[i + 1].paper)) ++out[t.steps[i].paper];
    }
  }
  return out;
}

}  // namespace

Observed observed_counts(const std::vector<Trace>& traces, const ReferenceIndex& index) {
  Observed o;
  for (const auto& t : traces) {
    for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) {
      const auto* ref = index.find(t.steps[i].paper, t.steps[i + 1].paper);
      if (!ref) continue;
      add(o.scaled, tally_of(*ref));
      ++o.steps;
    }
  }
  return o;
}

double Simulated::mean(std::size_t cls) const {
  return static_cast<double>(static_cast<long double>(sum[cls]) / (static_cast<long double>(n_sims) * kTallyScale));
}

double Simulated::stddev(std::size_t cls) const {
  const __int128 n = static_cast<__int128>(n_sims);
  const __int128 var_n2 = n * sum_sq[cls] - sum[cls] * sum[cls];
  return static_cast<double>(std::sqrt(static_cast<long double>(var_n2)) / (static_cast<long double>(n_sims) * kTallyScale));
}

Simulated simulate_null(const std::vector<Trace>& traces, const ReferenceIndex& index, std::size_t n_sims,
                        std::uint64_t seed) {
  const auto starts = followed_by_start(traces, index);
  Simulated s;
  s.n_sims = n_sims;
  s.seed = seed;
  for (const auto& [paper, m] : starts) s.steps += m;
  if (s.steps == 0) throw NavsimError(NavsimError::Kind::NoQualifyingSteps, "no trace step follows a labeled reference");

  struct Start {
    std::size_t steps;
    std::vector<ScaledTally> tallies;
  };
  std::vector<Start> plan;
  for (const auto& [paper, m] : starts) {
    Start st{m, {}};
    for (const auto& ref : index.references(paper)) st.tallies.push_back(tally_of(ref));
    plan.push_back(std::move(st));
  }
  for (std::size_t sim = 0; sim < n_sims; ++sim) {
    Rng rng(derive_seed(seed, sim));
    ScaledTally total{};
    for (const auto& st : plan) {
      if (st.tallies.size() == 1) {
        add(total, st.tallies[0], static_cast<std::int64_t>(st.steps));
        continue;
      }
      for (std::size_t k = 0; k < st.steps; ++k) add(total, st.tallies[rng.uniform_index(st.tallies.size())]);
    }
    for (std::size_t c = 0; c < kNavClassCount; ++c) {
      s.sum[c] += total[c];
      s.sum_sq[c] += static_cast<__int128>(total[c]) * total[c];
    }
  }
  return s;
}

const ZRow* NullModelResult::find(std::string_view cls) const {
  for (const auto& r : rows) {
    if (r.cls == cls) return &r;
  }
  return nullptr;
}

NullModelResult zscores(const Observed& observed, const Simulated& simulated) {
  if (observed.steps != simulated.steps || simulated.n_sims == 0) {
    throw NavsimError(NavsimError::Kind::ClassMismatch, "observed and simulated tallies cover different steps (" +
                                                            std::to_string(observed.steps) + " vs " +
                                                            std::to_string(simulated.steps) + ")");
  }
  NullModelResult r;
  r.n_sims = simulated.n_sims;
  r.seed = simulated.seed;
  r.steps = simulated.steps;
  const __int128 n = static_cast<__int128>(simulated.n_sims);
  for (std::size_t c = 0; c < kNavClassCount; ++c) {
    if (observed.scaled[c] == 0 && simulated.sum[c] == 0) continue;
    // z = (n*obs - sum) / sqrt(n*sum_sq - sum^2), all in scaled integers.
    const __int128 num = n * observed.scaled[c] - simulated.sum[c];
    const __int128 den2 = n * simulated.sum_sq[c] - simulated.sum[c] * simulated.sum[c];
    ZRow row;
    row.cls = nav_class_name(c);
    row.observed = observed.value(c);
    row.mean = simulated.mean(c);
    row.std = simulated.stddev(c);
    if (den2 == 0) {
      row.z = num == 0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), static_cast<double>(num));
    } else {
      row.z = static_cast<double>(static_cast<long double>(num) / std::sqrt(static_cast<long double>(den2)));
    }
    r.rows.push_back(row);
  }
  return r;
}

std::string null_model_csv(const NullModelResult& result) {
  std::string out = "class,observed,mean,std,z,n_sims,seed\n";
  for (const auto& row : result.rows) {
    out += row.cls + ',' + format_double(row.observed) + ',' + format_double(row.mean) + ',' + format_double(row.std) +
           ',' + format_double(row.z) + ',' + std::to_string(result.n_sims) + ',' + std::to_string(result.seed) + '\n';
  }
  return out;
}

}  // namespace citescope
