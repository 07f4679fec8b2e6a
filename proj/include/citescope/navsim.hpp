#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "citescope/corpus.hpp"
#include "citescope/labels.hpp"

namespace citescope {

class NavsimError : public std::runtime_error {
 public:
  enum class Kind { NoQualifyingSteps, ClassMismatch, Io };
  NavsimError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct LogRequest {
  std::int64_t timestamp = 0;  // seconds since the epoch, UTC
  std::string paper;
  std::uint64_t agent = 0;  // hash of the user agent string
  int status = 0;
};

struct ParseStats {
  std::size_t lines = 0;
  std::size_t kept = 0;
  std::size_t malformed = 0;
  std::size_t bots = 0;
  std::size_t filtered = 0;  // not GET, not 200, or no paper id in the path
};

struct ParsedLog {
  std::vector<LogRequest> requests;
  ParseStats stats;
};

const std::vector<std::string>& default_bot_substrings();
/// One substring per line; blank lines and '#' comments ignored.
std::vector<std::string> parse_bot_list(std::string_view text);

/// First anthology id ([A-Z]dd-dddd) in a request path.
std::optional<std::string> find_paper_id(std::string_view path);

/// Apache combined log format. Keeps GET requests with status 200 whose path
/// names a paper; bot user agents (case-insensitive substring) are dropped.
ParsedLog parse_log(std::string_view text, const std::vector<std::string>& bots = default_bot_substrings());
/// Reads a plain or gzip-compressed log file.
std::string read_log_file(const std::filesystem::path& path);

struct TraceStep {
  std::int64_t timestamp = 0;
  std::string paper;
};

struct Trace {
  std::uint64_t agent = 0;
  std::vector<TraceStep> steps;
};

struct SessionConfig {
  std::int64_t gap_seconds = 3600;  // a gap of exactly this length stays joined
  std::size_t max_requests = 50;    // fragments with this many raw requests are dropped
};

/// Ordered by agent, then start time.
std::vector<Trace> sessionize(std::vector<LogRequest> requests, const SessionConfig& cfg = {});

/// Classes tallied by the null model: the seven functions, then Essential and Positioning.
inline constexpr std::size_t kNavClassCount = kFunctionCount + 2;
std::string nav_class_name(std::size_t cls);

/// Labeled references of each citing paper. A reference qualifies when it
/// resolves into the corpus and at least one of its mentions carries a label.
class ReferenceIndex {
 public:
  explicit ReferenceIndex(const Corpus& corpus);

  struct Ref {
    std::string cited;
    bool essential = false;
    std::vector<Function> functions;  // distinct, ascending
  };
  /// Empty when the paper is unknown or has no qualifying references.
  const std::vector<Ref>& references(const std::string& paper) const;
  const Ref* find(const std::string& paper, const std::string& cited) const;

 private:
  std::map<std::string, std::vector<Ref>> refs_;
};

/// Tallies scaled by 420 so that 1/k shares for k <= 7 functions stay integral.
inline constexpr std::int64_t kTallyScale = 420;
using ScaledTally = std::array<std::int64_t, kNavClassCount>;

struct Observed {
  ScaledTally scaled{};
  std::size_t steps = 0;  // consecutive pairs that followed a reference
  double value(std::size_t cls) const { return static_cast<double>(scaled[cls]) / kTallyScale; }
};

/// Consecutive pairs p_i -> p_j with p_j among p_i's qualifying references.
Observed observed_counts(const std::vector<Trace>& traces, const ReferenceIndex& index);

struct Simulated {
  std::size_t n_sims = 0;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  std::array<__int128, kNavClassCount> sum{};     // of scaled per-simulation totals
  std::array<__int128, kNavClassCount> sum_sq{};
  double mean(std::size_t cls) const;
  double stddev(std::size_t cls) const;  // population
};

/// Replays every followed step with a uniformly chosen reference of the same
/// starting paper. Throws NavsimError(NoQualifyingSteps).
Simulated simulate_null(const std::vector<Trace>& traces, const ReferenceIndex& index, std::size_t n_sims = 500,
                        std::uint64_t seed = 1);

struct ZRow {
  std::string cls;
  double observed = 0;
  double mean = 0;
  double std = 0;
  double z = 0;  // +-infinity when std = 0 and observed != mean
};

struct NullModelResult {
  std::vector<ZRow> rows;  // classes absent on both sides omitted
  std::size_t n_sims = 0;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  const ZRow* find(std::string_view cls) const;
};

/// Throws NavsimError(ClassMismatch) if the two sides count different steps.
NullModelResult zscores(const Observed& observed, const Simulated& simulated);

/// class,observed,mean,std,z,n_sims,seed
std::string null_model_csv(const NullModelResult& result);

}  // namespace citescope
