#include "citescope/classify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <numeric>
#include <set>
#include <thread>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

using nlohmann::json;

void ForestConfig::validate() const {
  if (n_trees < 1) throw ClassifyError(ClassifyError::Kind::InvalidConfig, "n_trees must be at least 1");
  if (min_leaf < 1) throw ClassifyError(ClassifyError::Kind::InvalidConfig, "min_leaf must be at least 1");
}

std::size_t Tree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

void Forest::check_schema(std::uint64_t hash) const {
  if (hash != schema_hash) {
    throw ClassifyError(ClassifyError::Kind::SchemaMismatch,
                        "model was trained on schema " + to_hex(schema_hash) + ", data has " + to_hex(hash));
  }
}

namespace {

// Column-major view of the training rows with each value replaced by its rank
// among the column's distinct values. Split search then works on small integers.
struct RankedColumns {
  std::size_t rows = 0;
  std::vector<std::vector<std::uint32_t>> rank;  // [feature][row]
  std::vector<std::vector<double>> values;       // [feature][rank] distinct, ascending

  RankedColumns(const std::vector<const std::vector<double>*>& x, std::size_t features) : rows(x.size()) {
    rank.resize(features);
    values.resize(features);
    std::vector<double> col(rows);
    for (std::size_t f = 0; f < features; ++f) {
      for (std::size_t i = 0; i < rows; ++i) col[i] = (*x[i])[f];
      auto& v = values[f];
      v = col;
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      rank[f].resize(rows);
      for (std::size_t i = 0; i < rows; ++i) {
        rank[f][i] = static_cast<std::uint32_t>(std::lower_bound(v.begin(), v.end(), col[i]) - v.begin());
      }
    }
  }
};

struct Split {
  int feature = -1;
  std::uint32_t rank = 0;  // left when rank <= this
  double threshold = 0;
  double score = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const RankedColumns& cols, const std::vector<int>& y, std::size_t classes, const ForestConfig& cfg,
              std::size_t mtry)
      : cols_(cols), y_(y), k_(classes), cfg_(cfg), mtry_(mtry) {}

  Tree build(std::vector<std::uint32_t> sample, Rng& rng) {
    Tree tree;
    sample_ = std::move(sample);
    perm_.resize(cols_.rank.size());
    std::iota(perm_.begin(), perm_.end(), 0);
    struct Job {
      std::size_t begin, end;
      int node;
    };
    tree.nodes.emplace_back();
    std::vector<Job> stack{{0, sample_.size(), 0}};
    std::vector<double> counts(k_);
    while (!stack.empty()) {
      const Job job = stack.back();
      stack.pop_back();
      const std::size_t n = job.end - job.begin;
      std::fill(counts.begin(), counts.end(), 0.0);
      for (std::size_t i = job.begin; i < job.end; ++i) counts[static_cast<std::size_t>(y_[sample_[i]])] += 1;
      tree.nodes[static_cast<std::size_t>(job.node)].count = n;

      const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0; }) <= 1;
      std::optional<Split> split;
      if (!pure && n >= 2 * cfg_.min_leaf) split = best_split(job.begin, job.end, counts, rng);
      if (!split) {
        auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
        node.distribution.resize(k_);
        for (std::size_t c = 0; c < k_; ++c) node.distribution[c] = counts[c] / static_cast<double>(n);
        continue;
      }
      const auto& rank = cols_.rank[static_cast<std::size_t>(split->feature)];
      auto mid = std::stable_partition(sample_.begin() + static_cast<std::ptrdiff_t>(job.begin),
                                       sample_.begin() + static_cast<std::ptrdiff_t>(job.end),
                                       [&](std::uint32_t i) { return rank[i] <= split->rank; });
      const std::size_t cut = static_cast<std::size_t>(mid - sample_.begin());
      const int left = static_cast<int>(tree.nodes.size());
      tree.nodes.emplace_back();
      tree.nodes.emplace_back();
      auto& node = tree.nodes[static_cast<std::size_t>(job.node)];
      node.feature = split->feature;
      node.threshold = split->threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({cut, job.end, left + 1});
      stack.push_back({job.begin, cut, left});
    }
    return tree;
  }

 private:
  static double side_score(const double* c, std::size_t k, double n) {
    double s = 0;
    for (std::size_t i = 0; i < k; ++i) s += c[i] * c[i];
    return s / n;
  }

  std::optional<Split> best_split(std::size_t begin, std::size_t end, const std::vector<double>& totals, Rng& rng) {
    const std::size_t n = end - begin;
    const double nd = static_cast<double>(n);
    const double parent = side_score(totals.data(), k_, nd);
    const double min_leaf = static_cast<double>(cfg_.min_leaf);

    // Partial Fisher-Yates picks mtry distinct features; scanning them in
    // ascending order makes ties resolve to the lowest feature index.
    const std::size_t p = perm_.size();
    for (std::size_t i = 0; i < mtry_; ++i) std::swap(perm_[i], perm_[i + rng.uniform_index(p - i)]);
    chosen_.assign(perm_.begin(), perm_.begin() + static_cast<std::ptrdiff_t>(mtry_));
    std::sort(chosen_.begin(), chosen_.end());

    std::optional<Split> best;
    double best_score = parent * (1 + 1e-12);
    std::vector<double> left(k_), right(k_);
    for (std::size_t f : chosen_) {
      const auto& rank = cols_.rank[f];
      const auto& vals = cols_.values[f];
      const std::size_t distinct = vals.size();
      if (distinct < 2) continue;

      // Visit the node's instances grouped by rank, ascending.
      auto consider = [&](std::uint32_t lo_rank, std::uint32_t hi_rank, double n_left) {
        const double n_right = nd - n_left;
        if (n_left < min_leaf || n_right < min_leaf) return;
        for (std::size_t c = 0; c < k_; ++c) right[c] = totals[c] - left[c];
        const double s = side_score(left.data(), k_, n_left) + side_score(right.data(), k_, n_right);
        if (s > best_score) {
          best_score = s;
          const double a = vals[lo_rank], b = vals[hi_rank];
          double t = a + (b - a) / 2;
          if (!(t >= a && t < b)) t = a;
          best = Split{static_cast<int>(f), lo_rank, t, s};
        }
      };
      std::fill(left.begin(), left.end(), 0.0);
      double n_left = 0;
      if (distinct <= n) {
        hist_.assign(distinct * k_, 0.0);
        for (std::size_t i = begin; i < end; ++i) {
          const auto s = sample_[i];
          hist_[rank[s] * k_ + static_cast<std::size_t>(y_[s])] += 1;
        }
        long prev = -1;
        for (std::size_t r = 0; r < distinct; ++r) {
          const double* h = &hist_[r * k_];
          double here = 0;
          for (std::size_t c = 0; c < k_; ++c) here += h[c];
          if (here == 0) continue;
          if (prev >= 0) consider(static_cast<std::uint32_t>(prev), static_cast<std::uint32_t>(r), n_left);
          for (std::size_t c = 0; c < k_; ++c) left[c] += h[c];
          n_left += here;
          prev = static_cast<long>(r);
        }
      } else {
        order_.assign(sample_.begin() + static_cast<std::ptrdiff_t>(begin), sample_.begin() + static_cast<std::ptrdiff_t>(end));
        std::sort(order_.begin(), order_.end(), [&](std::uint32_t a, std::uint32_t b) { return rank[a] < rank[b]; });
        for (std::size_t i = 0; i < order_.size(); ++i) {
          if (i > 0 && rank[order_[i]] != rank[order_[i - 1]]) consider(rank[order_[i - 1]], rank[order_[i]], n_left);
          left[static_cast<std::size_t>(y_[order_[i]])] += 1;
          n_left += 1;
        }
      }
    }
    return best;
  }

  const RankedColumns& cols_;
  const std::vector<int>& y_;
  std::size_t k_;
  const ForestConfig& cfg_;
  std::size_t mtry_;
  std::vector<std::uint32_t> sample_;
  std::vector<std::size_t> perm_, chosen_;
  std::vector<double> hist_;
  std::vector<std::uint32_t> order_;
};

template <typename F>
void parallel_for(std::size_t n, std::size_t workers, F&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mu;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

Forest train(const Samples& data, const std::vector<std::string>& classes, const ForestConfig& cfg,
             std::uint64_t schema_hash) {
  cfg.validate();
  if (data.x.empty() || data.x.size() != data.y.size()) {
    throw ClassifyError(ClassifyError::Kind::EmptyData, "training data is empty or labels do not match rows");
  }
  const std::size_t p = data.x.front().size();
  for (const auto& row : data.x) {
    if (row.size() != p) throw ClassifyError(ClassifyError::Kind::SchemaMismatch, "rows have different widths");
  }
  for (int c : data.y) {
    if (c < 0 || static_cast<std::size_t>(c) >= classes.size()) {
      throw ClassifyError(ClassifyError::Kind::Malformed, "label index out of range");
    }
  }

  // Id order makes the result independent of the input row order.
  std::vector<std::size_t> order(data.x.size());
  std::iota(order.begin(), order.end(), 0);
  if (!data.ids.empty()) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });
  }
  std::vector<const std::vector<double>*> rows;
  std::vector<int> y;
  for (std::size_t i : order) {
    rows.push_back(&data.x[i]);
    y.push_back(data.y[i]);
  }

  std::vector<std::vector<std::uint32_t>> by_class(classes.size());
  for (std::size_t i = 0; i < y.size(); ++i) by_class[static_cast<std::size_t>(y[i])].push_back(static_cast<std::uint32_t>(i));
  std::size_t present = 0;
  for (const auto& members : by_class) present += !members.empty();
  if (present < 2) throw ClassifyError(ClassifyError::Kind::SingleClassData, "training data holds a single class");

  const RankedColumns cols(rows, p);
  std::size_t mtry = cfg.features_per_split ? cfg.features_per_split
                                            : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p))));
  mtry = std::clamp<std::size_t>(mtry, 1, std::max<std::size_t>(p, 1));

  Forest forest;
  forest.config = cfg;
  forest.classes = classes;
  forest.n_features = p;
  forest.schema_hash = schema_hash;
  forest.trees.resize(cfg.n_trees);
  const std::size_t per_class = std::max<std::size_t>(1, y.size() / present);
  parallel_for(cfg.n_trees, cfg.workers, [&](std::size_t t) {
    Rng rng(cfg.seed + t);
    std::vector<std::uint32_t> sample;
    sample.reserve(per_class * present);
    for (const auto& members : by_class) {
      if (members.empty()) continue;
      for (std::size_t j = 0; j < per_class; ++j) sample.push_back(members[rng.uniform_index(members.size())]);
    }
    TreeBuilder builder(cols, y, classes.size(), cfg, mtry);
    forest.trees[t] = builder.build(std::move(sample), rng);
  });
  return forest;
}

Prediction predict(const Forest& forest, std::span<const double> x) {
  if (x.size() != forest.n_features) {
    throw ClassifyError(ClassifyError::Kind::SchemaMismatch, "expected " + std::to_string(forest.n_features) +
                                                                 " features, got " + std::to_string(x.size()));
  }
  Prediction out;
  out.probs.assign(forest.classes.size(), 0.0);
  for (const auto& tree : forest.trees) {
    const TreeNode* node = &tree.nodes[0];
    while (node->feature >= 0) {
      node = &tree.nodes[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                                                 : node->right)];
    }
    for (std::size_t c = 0; c < out.probs.size(); ++c) out.probs[c] += node->distribution[c];
  }
  const double n = static_cast<double>(forest.trees.size());
  for (auto& p : out.probs) p /= n;
  out.label = static_cast<int>(std::max_element(out.probs.begin(), out.probs.end()) - out.probs.begin());
  return out;
}

std::vector<Prediction> cv_by_paper(const Samples& data, const std::vector<std::string>& papers,
                                    const std::vector<std::string>& classes, const ForestConfig& cfg) {
  if (papers.size() != data.x.size()) throw ClassifyError(ClassifyError::Kind::Malformed, "one paper id per row required");
  const std::set<std::string> distinct(papers.begin(), papers.end());
  if (distinct.size() < 2) {
    throw ClassifyError(ClassifyError::Kind::SinglePaper, "leave-one-paper-out needs at least two papers");
  }
  std::vector<Prediction> out(data.x.size());
  std::size_t fold = 0;
  for (const auto& held : distinct) {
    Samples train_set;
    std::vector<std::size_t> test_rows;
    for (std::size_t i = 0; i < data.x.size(); ++i) {
      if (papers[i] == held) {
        test_rows.push_back(i);
        continue;
      }
      train_set.x.push_back(data.x[i]);
      train_set.y.push_back(data.y[i]);
      if (!data.ids.empty()) train_set.ids.push_back(data.ids[i]);
    }
    std::size_t leaked = 0;
    for (std::size_t i = 0; i < data.x.size(); ++i) leaked += papers[i] == held && !std::binary_search(test_rows.begin(), test_rows.end(), i);
    if (leaked || train_set.x.size() + test_rows.size() != data.x.size()) throw std::logic_error("fold leaks its test paper");
    ForestConfig fold_cfg = cfg;
    fold_cfg.seed = derive_seed(cfg.seed, fold++);
    const Forest forest = train(train_set, classes, fold_cfg);
    for (std::size_t i : test_rows) out[i] = predict(forest, data.x[i]);
  }
  return out;
}

std::vector<int> random_baseline(const std::vector<int>& gold, std::uint64_t seed) {
  std::vector<int> present(gold.begin(), gold.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  Rng rng(seed);
  std::vector<int> out;
  out.reserve(gold.size());
  for (std::size_t i = 0; i < gold.size(); ++i) out.push_back(present[rng.uniform_index(present.size())]);
  return out;
}

std::vector<int> one_class_baseline(std::size_t n, int cls) { return std::vector<int>(n, cls); }

EvalReport metrics(const std::vector<int>& pred, const std::vector<int>& gold, const std::vector<std::string>& classes) {
  if (pred.size() != gold.size() || pred.empty()) {
    throw ClassifyError(ClassifyError::Kind::EmptyData, "predictions and gold labels must be non-empty and aligned");
  }
  const std::size_t k = classes.size();
  EvalReport r;
  r.classes = classes;
  r.confusion.assign(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    r.confusion.at(static_cast<std::size_t>(gold[i])).at(static_cast<std::size_t>(pred[i]))++;
  }
  std::size_t tp_all = 0, fp_all = 0, fn_all = 0;
  r.per_class.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t tp = r.confusion[c][c], predicted = 0, support = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += r.confusion[o][c];
      support += r.confusion[c][o];
    }
    auto& s = r.per_class[c];
    s.support = support;
    s.precision = predicted ? static_cast<double>(tp) / static_cast<double>(predicted) : 0.0;
    s.recall = support ? static_cast<double>(tp) / static_cast<double>(support) : 0.0;
    s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
    tp_all += tp;
    fp_all += predicted - tp;
    fn_all += support - tp;
    r.macro_f1 += s.f1;
  }
  r.macro_f1 /= static_cast<double>(k);
  const double micro_p = static_cast<double>(tp_all) / static_cast<double>(tp_all + fp_all);
  const double micro_r = static_cast<double>(tp_all) / static_cast<double>(tp_all + fn_all);
  r.micro_f1 = micro_p + micro_r > 0 ? 2 * micro_p * micro_r / (micro_p + micro_r) : 0.0;
  r.accuracy = static_cast<double>(tp_all) / static_cast<double>(pred.size());
  if (std::abs(r.micro_f1 - r.accuracy) > 1e-12) throw std::logic_error("micro F1 differs from accuracy");
  return r;
}

BinaryScores binary_metrics(const std::vector<int>& pred, const std::vector<int>& gold, int positive) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] == positive, g = gold[i] == positive;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  BinaryScores s;
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double mcnemar_from_counts(std::size_t b, std::size_t c) {
  const std::size_t n = b + c;
  if (n == 0) return 1.0;
  double p;
  if (n < 25) {
    boost::math::binomial_distribution<double> dist(static_cast<double>(n), 0.5);
    p = 2 * boost::math::cdf(dist, static_cast<double>(std::min(b, c)));
  } else {
    const double diff = std::max(0.0, std::abs(static_cast<double>(b) - static_cast<double>(c)) - 1.0);
    const double stat = diff * diff / static_cast<double>(n);
    p = boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(1), stat));
  }
  return std::clamp(p, 0.0, 1.0);
}

double mcnemar(const std::vector<int>& pred_a, const std::vector<int>& pred_b, const std::vector<int>& gold) {
  if (pred_a.size() != gold.size() || pred_b.size() != gold.size()) {
    throw ClassifyError(ClassifyError::Kind::Malformed, "prediction lists are not aligned");
  }
  std::size_t b = 0, c = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool a_ok = pred_a[i] == gold[i], b_ok = pred_b[i] == gold[i];
    b += a_ok && !b_ok;
    c += !a_ok && b_ok;
  }
  return mcnemar_from_counts(b, c);
}

// ---------------------------------------------------------------------------
// Files
// ---------------------------------------------------------------------------

std::string serialize_forest(const Forest& f) {
  json js;
  js["format"] = "citescope-forest";
  js["version"] = kForestFormatVersion;
  js["config"] = {{"n_trees", f.config.n_trees},
                  {"min_leaf", f.config.min_leaf},
                  {"features_per_split", f.config.features_per_split},
                  {"seed", f.config.seed}};
  js["classes"] = f.classes;
  js["n_features"] = f.n_features;
  js["schema_hash"] = to_hex(f.schema_hash);
  json trees = json::array();
  for (const auto& t : f.trees) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      if (n.feature >= 0) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.count});
      } else {
        nodes.push_back({-1, n.count, n.distribution});
      }
    }
    trees.push_back(std::move(nodes));
  }
  js["trees"] = std::move(trees);
  return js.dump() + "\n";
}

Forest parse_forest(std::string_view text) {
  Forest f;
  try {
    const json js = json::parse(text);
    if (js.at("format").get<std::string>() != "citescope-forest") {
      throw ClassifyError(ClassifyError::Kind::Malformed, "not a forest file");
    }
    if (js.at("version").get<int>() != kForestFormatVersion) {
      throw ClassifyError(ClassifyError::Kind::FormatVersion,
                          "forest format version " + std::to_string(js.at("version").get<int>()) + " is not supported");
    }
    const auto& c = js.at("config");
    f.config.n_trees = c.at("n_trees").get<std::size_t>();
    f.config.min_leaf = c.at("min_leaf").get<std::size_t>();
    f.config.features_per_split = c.at("features_per_split").get<std::size_t>();
    f.config.seed = c.at("seed").get<std::uint64_t>();
    f.classes = js.at("classes").get<std::vector<std::string>>();
    f.n_features = js.at("n_features").get<std::size_t>();
    f.schema_hash = std::stoull(js.at("schema_hash").get<std::string>(), nullptr, 16);
    for (const auto& jt : js.at("trees")) {
      Tree t;
      for (const auto& jn : jt) {
        TreeNode n;
        n.feature = jn.at(0).get<int>();
        if (n.feature >= 0) {
          n.threshold = jn.at(1).get<double>();
          n.left = jn.at(2).get<int>();
          n.right = jn.at(3).get<int>();
          n.count = jn.at(4).get<std::size_t>();
        } else {
          n.count = jn.at(1).get<std::size_t>();
          n.distribution = jn.at(2).get<std::vector<double>>();
          if (n.distribution.size() != f.classes.size()) {
            throw ClassifyError(ClassifyError::Kind::Malformed, "leaf distribution width differs from class count");
          }
        }
        t.nodes.push_back(std::move(n));
      }
      for (const auto& n : t.nodes) {
        if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(std::max(n.left, n.right)) >= t.nodes.size() ||
                               static_cast<std::size_t>(n.feature) >= f.n_features)) {
          throw ClassifyError(ClassifyError::Kind::Malformed, "tree node points outside the tree");
        }
      }
      if (t.nodes.empty()) throw ClassifyError(ClassifyError::Kind::Malformed, "empty tree");
      f.trees.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ClassifyError(ClassifyError::Kind::Malformed, std::string("bad forest file: ") + e.what());
  }
  return f;
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_forest(forest));
}

Forest load_forest(const std::filesystem::path& path) { return parse_forest(read_file(path)); }

std::string report_json(const EvalReport& r) {
  json js;
  js["micro_f1"] = r.micro_f1;
  js["macro_f1"] = r.macro_f1;
  js["accuracy"] = r.accuracy;
  json per = json::object();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& s = r.per_class[c];
    per[r.classes[c]] = {{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  }
  js["per_class"] = std::move(per);
  js["classes"] = r.classes;
  js["confusion"] = r.confusion;
  return js.dump(1) + "\n";
}

std::string confusion_csv(const EvalReport& r) {
  std::string out = "gold";
  for (const auto& c : r.classes) out += "," + c;
  out += '\n';
  for (std::size_t g = 0; g < r.classes.size(); ++g) {
    out += r.classes[g];
    for (std::size_t p = 0; p < r.classes.size(); ++p) out += "," + std::to_string(r.confusion[g][p]);
    out += '\n';
  }
  return out;
}

}  // namespace citescope
