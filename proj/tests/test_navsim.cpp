#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <zlib.h>

#include "citescope/navsim.hpp"
#include "fixtures.hpp"

using namespace citescope;
using namespace fixtures;

namespace {

std::string line(const std::string& ts, const std::string& path, int status = 200,
                 const std::string& ua = "Mozilla/5.0 (X11)", const std::string& method = "GET") {
  return "10.0.0.1 - - [" + ts + "] \"" + method + " " + path + " HTTP/1.1\" " + std::to_string(status) +
         " 1234 \"-\" \"" + ua + "\"\n";
}

LogRequest req(std::int64_t t, std::string paper, std::uint64_t agent = 7) { return {t, std::move(paper), agent, 200}; }

Label lab(Function f, Centrality c = Centrality::Positioning) { return Label{f, c}; }

// Citing paper whose references are (cited id, label) pairs, one mention each.
Paper citing(const std::string& id, const std::vector<std::pair<std::string, Label>>& cites) {
  std::vector<Sentence> sents;
  std::vector<Reference> bib;
  std::vector<CitationMention> ms;
  for (std::size_t i = 0; i < cites.size(); ++i) {
    const std::string b = "b" + std::to_string(i);
    sents.push_back(sent("see/VB X/NNP ./."));
    bib.push_back(ref(b, cites[i].first));
    ms.push_back(mention(b, 0, static_cast<int>(i), 1, 1, cites[i].second));
  }
  return paper(id, 2005, {section("Introduction", sents)}, bib, ms);
}

Corpus corpus_of(std::vector<Paper> ps, const std::vector<std::string>& extra) {
  Corpus c;
  c.papers = std::move(ps);
  for (const auto& id : extra) c.papers.push_back(paper(id, 2000, {filler_section("Introduction", 1)}, {}, {}));
  return c;
}

std::vector<Trace> repeated(const std::string& from, const std::string& to, int n) {
  std::vector<Trace> out;
  for (int i = 0; i < n; ++i) {
    Trace t;
    t.agent = static_cast<std::uint64_t>(i);
    t.steps = {{0, from}, {10, to}};
    out.push_back(t);
  }
  return out;
}

}  // namespace

TEST_CASE("log lines: bots, status, method and paper ids") {
  std::string text;
  text += line("10/Oct/2000:13:55:36 -0700", "/anthology/P99-1001.pdf");
  text += line("10/Oct/2000:13:55:40 -0700", "/anthology/P99-1002.pdf", 200, "Googlebot/2.1");
  text += line("10/Oct/2000:13:55:41 -0700", "/anthology/P99-1003.pdf", 404);
  text += line("10/Oct/2000:13:55:42 -0700", "/anthology/P99-1003.pdf", 200, "x", "POST");
  text += line("10/Oct/2000:13:55:43 -0700", "/index.html");
  text += "garbage line without structure\n";
  text += "\n";
  const auto parsed = parse_log(text);
  CHECK(parsed.stats.lines == 6);
  CHECK(parsed.stats.kept == 1);
  CHECK(parsed.stats.bots == 1);
  CHECK(parsed.stats.filtered == 3);
  CHECK(parsed.stats.malformed == 1);
  REQUIRE(parsed.requests.size() == 1);
  CHECK(parsed.requests[0].paper == "P99-1001");
  // 2000-10-10 20:55:36 UTC
  CHECK(parsed.requests[0].timestamp == 971211336);
  CHECK(parsed.requests[0].agent == fnv1a("Mozilla/5.0 (X11)"));

  CHECK(find_paper_id("/pdf/W12-0301v2.pdf") == std::optional<std::string>("W12-0301"));
  CHECK_FALSE(find_paper_id("/pdf/W12-03011.pdf"));
  CHECK_FALSE(find_paper_id("/xW12-0301"));
  CHECK(parse_bot_list("# c\nBingBot\n\n") == std::vector<std::string>{"bingbot"});
}

TEST_CASE("gzip logs read the same as plain text") {
  const std::string text = line("01/Jan/2010:00:00:00 +0000", "/P10-1001.pdf");
  const auto dir = std::filesystem::temp_directory_path() / "citescope_navsim_test";
  std::filesystem::create_directories(dir);
  const auto gz = dir / "access.log.gz";
  gzFile f = gzopen(gz.string().c_str(), "wb");
  REQUIRE(f);
  gzwrite(f, text.data(), static_cast<unsigned>(text.size()));
  gzclose(f);
  CHECK(read_log_file(gz) == text);
  write_file_atomic(dir / "access.log", text);
  CHECK(read_log_file(dir / "access.log") == text);
  CHECK(parse_log(read_log_file(gz)).requests.at(0).timestamp == 1262304000);
  std::filesystem::remove_all(dir);
}

TEST_CASE("sessionization: gaps, caps and duplicates") {
  SUBCASE("30 minute gap joins") {
    auto t = sessionize({req(0, "A"), req(1800, "B")});
    REQUIRE(t.size() == 1);
    CHECK(t[0].steps.size() == 2);
  }
  SUBCASE("61 minute gap splits and single-paper fragments vanish") {
    auto t = sessionize({req(0, "A"), req(60, "B"), req(60 + 61 * 60, "C")});
    REQUIRE(t.size() == 1);
    CHECK(t[0].steps.back().paper == "B");
  }
  SUBCASE("a gap of exactly 60 minutes stays joined") {
    auto t = sessionize({req(0, "A"), req(3600, "B")});
    REQUIRE(t.size() == 1);
  }
  SUBCASE("50 requests is too many, 49 is fine") {
    std::vector<LogRequest> r50, r49;
    for (int i = 0; i < 50; ++i) r50.push_back(req(i, i % 2 ? "A" : "B"));
    for (int i = 0; i < 49; ++i) r49.push_back(req(i, i % 2 ? "A" : "B"));
    CHECK(sessionize(r50).empty());
    REQUIRE(sessionize(r49).size() == 1);
    CHECK(sessionize(r49)[0].steps.size() == 49);
  }
  SUBCASE("repeated downloads collapse, agents stay apart, input order is irrelevant") {
    auto t = sessionize({req(5, "B", 1), req(0, "A", 1), req(1, "A", 1), req(2, "C", 2)});
    REQUIRE(t.size() == 1);
    CHECK(t[0].agent == 1);
    REQUIRE(t[0].steps.size() == 2);
    CHECK(t[0].steps[0].paper == "A");
  }
}

TEST_CASE("observed tallies split functions fractionally") {
  const auto c = corpus_of({citing("P05-1001", {{"P00-0001", lab(Function::Uses, Centrality::Essential)},
                                                {"P00-0002", lab(Function::Background)},
                                                {"P00-0002", lab(Function::Uses)},
                                                {"P00-0009", lab(Function::Future)}})},
                           {"P00-0001", "P00-0002", "P00-0003"});
  const ReferenceIndex idx(c);
  CHECK(idx.references("P05-1001").size() == 2);  // P00-0009 is not in the corpus
  Trace t;
  t.steps = {{0, "P05-1001"}, {1, "P00-0001"}, {2, "P05-1001"}, {3, "P00-0002"}, {4, "P05-1001"}, {5, "P00-0003"}};
  const auto o = observed_counts({t}, idx);
  CHECK(o.steps == 2);
  CHECK(o.value(index_of(Function::Uses)) == doctest::Approx(1.5));
  CHECK(o.value(index_of(Function::Background)) == doctest::Approx(0.5));
  CHECK(o.value(kFunctionCount) == 1.0);
  CHECK(o.value(kFunctionCount + 1) == 1.0);
  for (Function f : {Function::Motivation, Function::Extends, Function::Continuation, Function::CompareContrast,
                     Function::Future}) {
    CHECK(o.value(index_of(f)) == 0.0);
  }
}

TEST_CASE("null model: single reference gives zero spread") {
  const auto c = corpus_of({citing("P05-1001", {{"P00-0001", lab(Function::Uses)}})}, {"P00-0001"});
  const ReferenceIndex idx(c);
  const auto traces = repeated("P05-1001", "P00-0001", 5);
  const auto r = zscores(observed_counts(traces, idx), simulate_null(traces, idx, 50, 3));
  const auto* uses = r.find("Uses");
  REQUIRE(uses);
  CHECK(uses->std == 0.0);
  CHECK(uses->z == 0.0);
  CHECK(uses->mean == 5.0);
  CHECK_FALSE(r.find("Future"));
}

TEST_CASE("null model matches the binomial oracle for two references") {
  const auto c = corpus_of({citing("P05-1001", {{"P00-0001", lab(Function::Uses, Centrality::Essential)},
                                                {"P00-0002", lab(Function::Background)}})},
                           {"P00-0001", "P00-0002"});
  const ReferenceIndex idx(c);
  const auto traces = repeated("P05-1001", "P00-0001", 100);
  const auto sim = simulate_null(traces, idx, 10000, 11);
  const auto r = zscores(observed_counts(traces, idx), sim);
  // Binomial(100, 1/2): mean 50, sd 5, observed 100 -> z = 10.
  const auto* uses = r.find("Uses");
  REQUIRE(uses);
  CHECK(uses->mean == doctest::Approx(50).epsilon(0.01));
  CHECK(uses->std == doctest::Approx(5).epsilon(0.05));
  CHECK(std::abs(uses->z - 10.0) < 0.2);
  CHECK(std::abs(r.find("Background")->z + 10.0) < 0.2);
  // Essential and Positioning partition every step.
  CHECK(r.find("Essential")->z == -r.find("Positioning")->z);
  CHECK(r.find("Essential")->mean + r.find("Positioning")->mean == doctest::Approx(100));
}

TEST_CASE("null model properties: determinism, order independence, conservation") {
  const auto c = corpus_of({citing("P05-1001", {{"P00-0001", lab(Function::Uses, Centrality::Essential)},
                                                {"P00-0002", lab(Function::Background)},
                                                {"P00-0003", lab(Function::CompareContrast)}}),
                            citing("P06-1001", {{"P05-1001", lab(Function::Extends, Centrality::Essential)},
                                                {"P00-0002", lab(Function::Future)}})},
                           {"P00-0001", "P00-0002", "P00-0003"});
  const ReferenceIndex idx(c);
  std::vector<Trace> traces;
  Rng rng(5);
  const std::vector<std::string> ids = {"P06-1001", "P05-1001", "P00-0001", "P00-0002", "P00-0003"};
  for (int i = 0; i < 60; ++i) {
    Trace t;
    t.agent = static_cast<std::uint64_t>(i);
    for (int k = 0; k < 6; ++k) t.steps.push_back({k, ids[rng.uniform_index(ids.size())]});
    traces.push_back(t);
  }
  const auto a = simulate_null(traces, idx, 300, 9);
  const auto b = simulate_null(traces, idx, 300, 9);
  auto reversed = traces;
  std::reverse(reversed.begin(), reversed.end());
  const auto r = simulate_null(reversed, idx, 300, 9);
  for (std::size_t k = 0; k < kNavClassCount; ++k) {
    CHECK(a.sum[k] == b.sum[k]);
    CHECK(a.sum_sq[k] == b.sum_sq[k]);
    CHECK(a.sum[k] == r.sum[k]);
  }
  const auto o = observed_counts(traces, idx);
  REQUIRE(o.steps > 0);
  double fsum = 0, osum = 0;
  for (std::size_t k = 0; k < kFunctionCount; ++k) {
    fsum += a.mean(k);
    osum += o.value(k);
  }
  CHECK(fsum == doctest::Approx(static_cast<double>(a.steps)));
  CHECK(osum == doctest::Approx(static_cast<double>(o.steps)));
  const auto z = zscores(o, a);
  const auto* e = z.find("Essential");
  const auto* p = z.find("Positioning");
  REQUIRE(e);
  REQUIRE(p);
  CHECK(e->z == -p->z);
  CHECK(null_model_csv(z).rfind("class,observed,mean,std,z,n_sims,seed\n", 0) == 0);
}

TEST_CASE("null model errors") {
  const auto c = corpus_of({citing("P05-1001", {{"P00-0001", lab(Function::Uses)}})}, {"P00-0001"});
  const ReferenceIndex idx(c);
  CHECK_THROWS_AS(simulate_null(repeated("P00-0001", "P05-1001", 3), idx, 10, 1), NavsimError);
  const auto sim = simulate_null(repeated("P05-1001", "P00-0001", 3), idx, 10, 1);
  Observed o;
  o.steps = 2;
  try {
    zscores(o, sim);
    FAIL("expected ClassMismatch");
  } catch (const NavsimError& e) {
    CHECK(e.kind() == NavsimError::Kind::ClassMismatch);
  }
}
