#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace citescope {

class ClassifyError : public std::runtime_error {
 public:
  enum class Kind { SingleClassData, SchemaMismatch, SinglePaper, InvalidConfig, EmptyData, FormatVersion, Malformed };
  ClassifyError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr int kForestFormatVersion = 1;

struct ForestConfig {
  std::size_t n_trees = 500;
  std::size_t min_leaf = 7;
  std::size_t features_per_split = 0;  // 0: floor(sqrt(features))
  std::uint64_t seed = 1;
  std::size_t workers = 1;  // does not affect the result

  void validate() const;
};

/// Row-major training matrix with one class index per row.
struct Samples {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
  /// Stable ids; rows are put in id order before any sampling. May be empty.
  std::vector<std::string> ids;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  std::size_t count = 0;  // training instances reaching the node
  std::vector<double> distribution;  // leaves only, one entry per class
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t leaf_count() const;
};

struct Forest {
  ForestConfig config;
  std::vector<std::string> classes;
  std::size_t n_features = 0;
  std::uint64_t schema_hash = 0;
  std::vector<Tree> trees;

  /// Throws ClassifyError(SchemaMismatch).
  void check_schema(std::uint64_t hash) const;
};

/// Class-balanced bootstrap per tree (n/k rows drawn with replacement from
/// each of the k present classes), Gini splits over a random subset of
/// features, no depth limit. Throws SingleClassData, EmptyData, InvalidConfig.
Forest train(const Samples& data, const std::vector<std::string>& classes, const ForestConfig& cfg,
             std::uint64_t schema_hash = 0);

struct Prediction {
  int label = 0;
  std::vector<double> probs;
};

/// Mean of leaf class distributions; argmax with ties to the lowest class index.
Prediction predict(const Forest& forest, std::span<const double> x);

/// Leave-one-paper-out predictions, aligned with the input rows. Throws SinglePaper.
std::vector<Prediction> cv_by_paper(const Samples& data, const std::vector<std::string>& papers,
                                    const std::vector<std::string>& classes, const ForestConfig& cfg);

// ---------------------------------------------------------------------------
// Baselines
// ---------------------------------------------------------------------------

/// Uniform over the classes seen in `gold`.
std::vector<int> random_baseline(const std::vector<int>& gold, std::uint64_t seed);
std::vector<int> one_class_baseline(std::size_t n, int cls);

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct ClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct EvalReport {
  std::vector<std::string> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [gold][pred]
  std::vector<ClassScores> per_class;
  double micro_f1 = 0;
  double macro_f1 = 0;
  double accuracy = 0;
};

EvalReport metrics(const std::vector<int>& pred, const std::vector<int>& gold, const std::vector<std::string>& classes);

struct BinaryScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};
BinaryScores binary_metrics(const std::vector<int>& pred, const std::vector<int>& gold, int positive);

/// Two-sided McNemar p-value on discordant pairs: exact binomial below 25
/// discordant pairs, otherwise chi-squared with continuity correction.
double mcnemar(const std::vector<int>& pred_a, const std::vector<int>& pred_b, const std::vector<int>& gold);
double mcnemar_from_counts(std::size_t b, std::size_t c);

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string serialize_forest(const Forest& forest);
Forest parse_forest(std::string_view text);
void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

std::string report_json(const EvalReport& report);
std::string confusion_csv(const EvalReport& report);

}  // namespace citescope
