#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "citescope/corpus.hpp"
#include "citescope/topicmodel.hpp"

namespace citescope {

class ImpactError : public std::runtime_error {
 public:
  enum class Kind { InvalidDesign, RankDeficient, SeparationSuspected, NotNested };
  ImpactError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Predictor matrix without the intercept column; one row per paper.
struct ImpactDesign {
  std::vector<std::string> paper_ids;
  std::vector<std::string> columns;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::size_t excluded = 0;  // papers without enough post-publication history
  double year_center = 0;  // mean publication year of the included papers
  std::vector<std::string> warnings;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t p() const { return static_cast<std::size_t>(x.cols()); }
  /// -1 when absent.
  int column(const std::string& name) const;
  /// Copy restricted to the named columns, in the given order.
  ImpactDesign select(const std::vector<std::string>& names) const;
};

struct DesignOptions {
  int window = 5;     // citations counted for citing year - year in [0, window]
  int last_year = 0;  // 0: latest year in the corpus
};

/// Columns: topic_1..topic_{K-1} (topic_0 is the base), topic_entropy,
/// venue_Conference, venue_Workshop (Journal is the base), year (centered),
/// authors, references, function_<F> and centrality_<C> counts over the
/// paper's labeled mentions. `thetas` may be empty (no topic columns);
/// otherwise every paper needs an entry.
ImpactDesign build_design(const Corpus& corpus, const CitationGraph& graph,
                          const std::map<std::string, TopicDistribution>& thetas, const DesignOptions& opts = {});

/// Function counts become residuals against references (+ intercept), then
/// centrality counts become residuals against the function residuals.
ImpactDesign residualize(const ImpactDesign& design);

/// Drops constant columns and columns linearly dependent on earlier ones,
/// recording a warning for each.
ImpactDesign drop_degenerate(const ImpactDesign& design);

/// VIF_j = 1/(1 - R^2_j); infinity when column j is (numerically) a linear
/// combination of the others.
std::vector<std::pair<std::string, double>> vif(const ImpactDesign& design);

struct Coefficient {
  std::string name;
  double estimate = 0;
  double se = 0;
  double z = 0;
  double p = 1;
};

struct ImpactModel {
  std::string family;                     // "negbin" or "poisson"
  std::vector<Coefficient> coefficients;  // intercept first
  double alpha = 0;
  double alpha_se = 0;
  double log_likelihood = 0;
  std::size_t n = 0;
  std::size_t k = 0;  // estimated parameters, alpha included for negbin
  int iterations = 0;
  bool converged = false;
  double last_change = 0;

  std::vector<std::string> predictors() const;  // without the intercept
  const Coefficient* find(const std::string& name) const;
};

struct FitOptions {
  int max_iterations = 200;
  double tolerance = 1e-8;
};

/// NB2 maximum likelihood (Var = mu + alpha mu^2, log link). Alternates IRLS on
/// beta with Newton steps on alpha. Non-convergence is flagged, not thrown.
/// Throws ImpactError(InvalidDesign, RankDeficient, SeparationSuspected).
ImpactModel fit_negbin(const ImpactDesign& design, const FitOptions& opts = {});
ImpactModel fit_poisson(const ImpactDesign& design, const FitOptions& opts = {});

double nb_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu, double alpha);
double poisson_log_likelihood(const Eigen::VectorXd& y, const Eigen::VectorXd& mu);

double aic(const ImpactModel& model);

struct LrTest {
  double statistic = 0;
  int df = 0;
  double p = 1;
};
/// m0 must be nested in m1 (predictor subset, same n, no more parameters).
/// Throws ImpactError(NotNested).
LrTest lr_test(const ImpactModel& m0, const ImpactModel& m1);

/// paper_id,y,<columns>
std::string design_csv(const ImpactDesign& design);

struct NamedTest {
  std::string name;
  LrTest test;
};
std::string impact_report_json(const std::vector<ImpactModel>& models,
                               const std::vector<std::pair<std::string, double>>& vifs,
                               const std::vector<NamedTest>& tests, const std::vector<std::string>& warnings);

}  // namespace citescope
