#include "citescope/impact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

#include "citescope/labels.hpp"
#include "citescope/log.hpp"
#include "citescope/util.hpp"

namespace citescope {

using nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

int ImpactDesign::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

ImpactDesign ImpactDesign::select(const std::vector<std::string>& names) const {
  ImpactDesign out = *this;
  out.columns = names;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    const int c = column(names[j]);
    if (c < 0) throw ImpactError(ImpactError::Kind::InvalidDesign, "no design column " + names[j]);
    out.x.col(static_cast<Eigen::Index>(j)) = x.col(c);
  }
  return out;
}

ImpactDesign build_design(const Corpus& corpus, const CitationGraph& graph,
                          const std::map<std::string, TopicDistribution>& thetas, const DesignOptions& opts) {
  ImpactDesign d;
  int last_year = opts.last_year;
  if (last_year == 0) {
    for (const auto& p : corpus.papers) last_year = std::max(last_year, p.meta.year);
  }
  std::size_t topics = 0;
  if (!thetas.empty()) topics = thetas.begin()->second.size();

  for (std::size_t k = 1; k < topics; ++k) d.columns.push_back("topic_" + std::to_string(k));
  if (topics > 0) d.columns.push_back("topic_entropy");
  d.columns.push_back("venue_Conference");
  d.columns.push_back("venue_Workshop");
  for (const auto* c : {"year", "authors", "references"}) d.columns.push_back(c);
  for (Function f : kAllFunctions) d.columns.push_back("function_" + std::string(to_string(f)));
  for (Centrality c : {Centrality::Essential, Centrality::Positioning}) {
    d.columns.push_back("centrality_" + std::string(to_string(c)));
  }

  std::vector<const Paper*> kept;
  for (const auto& p : corpus.papers) {
    if (p.meta.year + opts.window > last_year) {
      ++d.excluded;
      continue;
    }
    kept.push_back(&p);
  }
  const auto n = static_cast<Eigen::Index>(kept.size());
  d.x = MatrixXd::Zero(n, static_cast<Eigen::Index>(d.columns.size()));
  d.y = VectorXd::Zero(n);
  double year_sum = 0;
  for (const auto* p : kept) year_sum += p->meta.year;
  d.year_center = kept.empty() ? 0.0 : year_sum / static_cast<double>(kept.size());

  for (Eigen::Index i = 0; i < n; ++i) {
    const Paper& p = *kept[static_cast<std::size_t>(i)];
    d.paper_ids.push_back(p.id());
    Eigen::Index c = 0;
    if (topics > 0) {
      auto it = thetas.find(p.id());
      if (it == thetas.end() || it->second.size() != topics) {
        throw ImpactError(ImpactError::Kind::InvalidDesign, "no topic distribution for " + p.id());
      }
      for (std::size_t k = 1; k < topics; ++k) d.x(i, c++) = it->second[k];
      d.x(i, c++) = entropy(it->second);
    }
    d.x(i, c++) = p.meta.venue == VenueKind::Conference ? 1.0 : 0.0;
    d.x(i, c++) = p.meta.venue == VenueKind::Workshop ? 1.0 : 0.0;
    d.x(i, c++) = p.meta.year - d.year_center;
    d.x(i, c++) = static_cast<double>(p.meta.authors.size());
    d.x(i, c++) = static_cast<double>(p.bibliography.size());
    for (const auto& m : p.mentions) {
      if (!m.gold) continue;
      d.x(i, c + static_cast<Eigen::Index>(index_of(m.gold->function))) += 1;
      d.x(i, c + static_cast<Eigen::Index>(kFunctionCount) + (m.gold->centrality == Centrality::Essential ? 0 : 1)) += 1;
    }
    if (auto node = graph.node_index(p.id())) {
      for (std::size_t e : graph.in_edges(*node)) {
        const int gap = graph.nodes()[graph.edges()[e].citing].year - p.meta.year;
        if (gap >= 0 && gap <= opts.window) d.y(i) += 1;
      }
    }
  }
  return d;
}

namespace {

// Residuals of each column of `targets` after OLS on [1, regressors].
MatrixXd ols_residuals(const MatrixXd& targets, const MatrixXd& regressors, bool& rank_deficient) {
  MatrixXd a(regressors.rows(), regressors.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(regressors.cols()) = regressors;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  rank_deficient = qr.rank() < a.cols();
  // Project out the column space directly through Q so the residuals stay
  // orthogonal to the regressors even when they are collinear.
  const MatrixXd q = qr.householderQ() * MatrixXd::Identity(a.rows(), qr.rank());
  MatrixXd r = targets - q * (q.transpose() * targets);
  r -= q * (q.transpose() * r);
  return r;
}

std::vector<Eigen::Index> columns_with_prefix(const ImpactDesign& d, const std::string& prefix) {
  std::vector<Eigen::Index> out;
  for (std::size_t j = 0; j < d.columns.size(); ++j) {
    if (d.columns[j].rfind(prefix, 0) == 0) out.push_back(static_cast<Eigen::Index>(j));
  }
  return out;
}

MatrixXd gather(const MatrixXd& x, const std::vector<Eigen::Index>& cols) {
  MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
  return out;
}

void scatter(MatrixXd& x, const std::vector<Eigen::Index>& cols, const MatrixXd& values) {
  for (std::size_t j = 0; j < cols.size(); ++j) x.col(cols[j]) = values.col(static_cast<Eigen::Index>(j));
}

}  // namespace

ImpactDesign residualize(const ImpactDesign& design) {
  ImpactDesign out = design;
  const int refs = design.column("references");
  const auto fn = columns_with_prefix(design, "function_");
  const auto ce = columns_with_prefix(design, "centrality_");
  if (refs < 0 || fn.empty()) {
    throw ImpactError(ImpactError::Kind::InvalidDesign, "residualize needs references and function_ columns");
  }
  bool deficient = false;
  const MatrixXd fres = ols_residuals(gather(design.x, fn), design.x.col(refs), deficient);
  if (deficient) out.warnings.push_back("references column is constant; function counts only centered");
  scatter(out.x, fn, fres);
  if (!ce.empty()) {
    const MatrixXd cres = ols_residuals(gather(design.x, ce), fres, deficient);
    if (deficient) out.warnings.push_back("function residuals are rank deficient; centrality regressed on their span");
    scatter(out.x, ce, cres);
  }
  return out;
}

ImpactDesign drop_degenerate(const ImpactDesign& design) {
  const Eigen::Index n = design.x.rows();
  std::vector<VectorXd> basis;
  if (n > 0) basis.push_back(VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))));
  std::vector<std::string> keep;
  ImpactDesign out = design;
  for (std::size_t j = 0; j < design.columns.size(); ++j) {
    VectorXd v = design.x.col(static_cast<Eigen::Index>(j));
    const double norm0 = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) v -= b.dot(v) * b;
    }
    const double norm = v.norm();
    if (norm0 == 0 || norm <= 1e-9 * norm0) {
      out.warnings.push_back("dropped " + design.columns[j] + ": constant or collinear with earlier columns");
      continue;
    }
    basis.push_back(v / norm);
    keep.push_back(design.columns[j]);
  }
  ImpactDesign sel = out.select(keep);
  return sel;
}

std::vector<std::pair<std::string, double>> vif(const ImpactDesign& design) {
  const Eigen::Index n = design.x.rows();
  const Eigen::Index p = design.x.cols();
  if (p < 2) throw ImpactError(ImpactError::Kind::InvalidDesign, "vif needs at least two predictors");
  const double inf = std::numeric_limits<double>::infinity();
  // Centered, unit-norm columns; the Gram matrix is then the correlation matrix.
  MatrixXd z = design.x.rowwise() - design.x.colwise().mean();
  std::vector<bool> constant(static_cast<std::size_t>(p), false);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double norm = z.col(j).norm();
    if (n == 0 || norm <= 1e-12 * (1 + design.x.col(j).cwiseAbs().maxCoeff())) {
      constant[static_cast<std::size_t>(j)] = true;
      z.col(j).setZero();
    } else {
      z.col(j) /= norm;
    }
  }
  const MatrixXd c = z.transpose() * z;
  std::vector<std::pair<std::string, double>> out;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (constant[static_cast<std::size_t>(j)]) {
      out.emplace_back(design.columns[static_cast<std::size_t>(j)], inf);
      continue;
    }
    std::vector<Eigen::Index> others;
    for (Eigen::Index o = 0; o < p; ++o) {
      if (o != j && !constant[static_cast<std::size_t>(o)]) others.push_back(o);
    }
    double r2 = 0;
    if (!others.empty()) {
      const auto m = static_cast<Eigen::Index>(others.size());
      MatrixXd cc(m, m);
      VectorXd cj(m);
      for (Eigen::Index a = 0; a < m; ++a) {
        cj(a) = c(others[static_cast<std::size_t>(a)], j);
        for (Eigen::Index b = 0; b < m; ++b) {
          cc(a, b) = c(others[static_cast<std::size_t>(a)], others[static_cast<std::size_t>(b)]);
        }
      }
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(cc);
      cod.setThreshold(1e-12);
      r2 = cj.dot(cod.solve(cj));
    }
    const double resid = 1 - r2;
    out.emplace_back(design.columns[static_cast<std::size_t>(j)], resid <= 1e-10 ? inf : 1 / resid);
  }
  return out;
}

std::vector<std::string> ImpactModel::predictors() const {
  std::vector<std::string> out;
  for (std::size_t i = 1; i < coefficients.size(); ++i) out.push_back(coefficients[i].name);
  return out;
}

const Coefficient* ImpactModel::find(const std::string& name) const {
  for (const auto& c : coefficients) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

namespace {

constexpr double kAlphaFloor = 1e-8;

// log1p(x)/x, continuous at 0.
double log1p_ratio(double x) { return x == 0 ? 1.0 : std::log1p(x) / x; }

// Series for small x of ln(1+x)/x^2 - 1/(x(1+x)) and of
// -2 ln(1+x)/x^3 + 2/(x^2(1+x)) + 1/(x(1+x)^2).
double f_term(double x) {
  if (x >= 1e-2) return std::log1p(x) / (x * x) - 1 / (x * (1 + x));
  double s = 0, xp = 1;
  for (int k = 0; k < 12; ++k, xp *= -x) s += xp * (k + 1.0) / (k + 2.0);
  return s;
}

double g_term(double x) {
  if (x >= 1e-2) return -2 * std::log1p(x) / (x * x * x) + 2 / (x * x * (1 + x)) + 1 / (x * (1 + x) * (1 + x));
  double s = 0, xp = 1;
  for (int k = 0; k < 12; ++k, xp *= -x) s += xp * (-k - 2.0 / (k + 3.0));
  return s;
}

struct AlphaDerivs {
  double g = 0;  // d lnL / d alpha
  double h = 0;  // d2 lnL / d alpha2
};

AlphaDerivs alpha_derivs(const VectorXd& y, const VectorXd& mu, double alpha) {
  AlphaDerivs d;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double m = mu(i), yi = y(i), x = alpha * m;
    const auto yc = static_cast<long>(yi);
    for (long j = 1; j < yc; ++j) {
      const double t = j / (1 + alpha * j);
      d.g += t;
      d.h -= t * t;
    }
    d.g += m * m * f_term(x) - yi * m / (1 + x);
    d.h += m * m * m * g_term(x) + yi * m * m / ((1 + x) * (1 + x));
  }
  return d;
}

VectorXd mean_of(const MatrixXd& x1, const VectorXd& beta) {
  const VectorXd eta = x1 * beta;
  if (!eta.allFinite() || eta.maxCoeff() > 700) {
    throw ImpactError(ImpactError::Kind::SeparationSuspected, "linear predictor diverged; a predictor separates the counts");
  }
  return eta.array().exp();
}

double loglik(const VectorXd& y, const VectorXd& mu, double alpha) {
  return alpha == 0 ? poisson_log_likelihood(y, mu) : nb_log_likelihood(y, mu, alpha);
}

// Weighted least squares iterations for beta at fixed alpha, with step halving.
void irls(const MatrixXd& x1, const VectorXd& y, double alpha, VectorXd& beta) {
  VectorXd mu = mean_of(x1, beta);
  double ll = loglik(y, mu, alpha);
  for (int it = 0; it < 100; ++it) {
    const VectorXd w = (mu.array() / (1 + alpha * mu.array())).matrix();
    const VectorXd z = (x1 * beta).array() + (y - mu).array() / mu.array();
    const MatrixXd xtw = x1.transpose() * w.asDiagonal();
    const VectorXd target = (xtw * x1).ldlt().solve(xtw * z);
    if (!target.allFinite()) throw ImpactError(ImpactError::Kind::RankDeficient, "weighted normal equations are singular");
    VectorXd step = target - beta;
    double ll_new = -std::numeric_limits<double>::infinity();
    VectorXd cand;
    for (int half = 0; half < 40; ++half) {
      cand = beta + step;
      try {
        mu = mean_of(x1, cand);
        ll_new = loglik(y, mu, alpha);
      } catch (const ImpactError&) {
        ll_new = -std::numeric_limits<double>::infinity();
      }
      if (ll_new >= ll - 1e-12 * (1 + std::abs(ll))) break;
      step /= 2;
    }
    if (!std::isfinite(ll_new)) {
      throw ImpactError(ImpactError::Kind::SeparationSuspected, "IRLS could not find an improving step");
    }
    const double change = ll_new - ll;
    beta = cand;
    ll = ll_new;
    mu = mean_of(x1, beta);
    if (step.cwiseAbs().maxCoeff() < 1e-10 || std::abs(change) <= 1e-12 * (1 + std::abs(ll))) break;
  }
}

// Newton iterations on log(alpha) at fixed mu, with step halving and the floor.
double update_alpha(const VectorXd& y, const VectorXd& mu, double alpha, double& h_alpha) {
  double ll = nb_log_likelihood(y, mu, alpha);
  for (int it = 0; it < 100; ++it) {
    const auto d = alpha_derivs(y, mu, alpha);
    const double g = alpha * d.g;
    const double h = alpha * alpha * d.h + alpha * d.g;
    double step = h < 0 ? -g / h : (g > 0 ? 1.0 : -1.0);
    step = std::clamp(step, -3.0, 3.0);
    if (alpha <= kAlphaFloor && step < 0) break;
    double next = alpha, ll_next = ll;
    bool improved = false;
    for (int half = 0; half < 60; ++half) {
      next = std::max(kAlphaFloor, alpha * std::exp(step));
      ll_next = nb_log_likelihood(y, mu, next);
      if (ll_next >= ll) {
        improved = true;
        break;
      }
      step /= 2;
    }
    if (!improved) break;
    const double moved = std::abs(std::log(next) - std::log(alpha));
    alpha = next;
    ll = ll_next;
    if (moved < 1e-10) break;
  }
  h_alpha = alpha_derivs(y, mu, alpha).h;
  return alpha;
}

void check_inputs(const ImpactDesign& d) {
  const auto n = d.n();
  if (d.y.size() != static_cast<Eigen::Index>(n) || d.columns.size() != d.p()) {
    throw ImpactError(ImpactError::Kind::InvalidDesign, "design dimensions disagree");
  }
  if (n <= d.p() + 1) {
    throw ImpactError(ImpactError::Kind::InvalidDesign,
                      "need more rows than parameters (" + std::to_string(n) + " rows, " + std::to_string(d.p() + 1) + " coefficients)");
  }
  for (Eigen::Index i = 0; i < d.y.size(); ++i) {
    if (!(d.y(i) >= 0) || d.y(i) != std::floor(d.y(i))) {
      throw ImpactError(ImpactError::Kind::InvalidDesign, "response must be non-negative integers");
    }
  }
  if (!d.x.allFinite()) throw ImpactError(ImpactError::Kind::InvalidDesign, "design has non-finite entries");
  if (d.y.sum() == 0) throw ImpactError(ImpactError::Kind::SeparationSuspected, "all responses are zero");
}

MatrixXd with_intercept(const ImpactDesign& d) {
  MatrixXd x1(d.x.rows(), d.x.cols() + 1);
  x1.col(0).setOnes();
  x1.rightCols(d.x.cols()) = d.x;
  Eigen::ColPivHouseholderQR<MatrixXd> qr(x1);
  qr.setThreshold(1e-10);
  if (qr.rank() < x1.cols()) {
    throw ImpactError(ImpactError::Kind::RankDeficient,
                      "design has rank " + std::to_string(qr.rank()) + " < " + std::to_string(x1.cols()) + " coefficients");
  }
  return x1;
}

ImpactModel finish(const ImpactDesign& d, const MatrixXd& x1, const VectorXd& beta, double alpha, bool negbin) {
  ImpactModel m;
  m.family = negbin ? "negbin" : "poisson";
  m.alpha = negbin ? alpha : 0.0;
  m.n = d.n();
  m.k = static_cast<std::size_t>(x1.cols()) + (negbin ? 1 : 0);
  const VectorXd mu = mean_of(x1, beta);
  m.log_likelihood = loglik(d.y, mu, m.alpha);
  const VectorXd w = (mu.array() / (1 + m.alpha * mu.array())).matrix();
  const MatrixXd info = x1.transpose() * w.asDiagonal() * x1;
  const MatrixXd cov = info.ldlt().solve(MatrixXd::Identity(info.rows(), info.cols()));
  for (Eigen::Index j = 0; j < x1.cols(); ++j) {
    Coefficient c;
    c.name = j == 0 ? "intercept" : d.columns[static_cast<std::size_t>(j - 1)];
    c.estimate = beta(j);
    c.se = std::sqrt(std::max(0.0, cov(j, j)));
    c.z = c.se > 0 ? c.estimate / c.se : 0.0;
    c.p = std::erfc(std::abs(c.z) / std::sqrt(2.0));
    m.coefficients.push_back(c);
  }
  return m;
}

VectorXd start_beta(const ImpactDesign& d, Eigen::Index cols) {
  VectorXd beta = VectorXd::Zero(cols);
  beta(0) = std::log(d.y.mean());
  return beta;
}

}  // namespace

double nb_log_likelihood(const VectorXd& y, const VectorXd& mu, double alpha) {
  double ll = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double yi = y(i), m = mu(i), x = alpha * m;
    const auto yc = static_cast<long>(yi);
    for (long j = 1; j < yc; ++j) ll += std::log1p(alpha * j);
    ll += (yi > 0 ? yi * std::log(m) : 0.0) - std::lgamma(yi + 1) - yi * std::log1p(x) - m * log1p_ratio(x);
  }
  return ll;
}

double poisson_log_likelihood(const VectorXd& y, const VectorXd& mu) {
  double ll = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    ll += (y(i) > 0 ? y(i) * std::log(mu(i)) : 0.0) - mu(i) - std::lgamma(y(i) + 1);
  }
  return ll;
}

ImpactModel fit_poisson(const ImpactDesign& design, const FitOptions& opts) {
  check_inputs(design);
  const MatrixXd x1 = with_intercept(design);
  VectorXd beta = start_beta(design, x1.cols());
  double prev = loglik(design.y, mean_of(x1, beta), 0);
  int it = 0;
  bool converged = false;
  double change = 0;
  while (it < opts.max_iterations) {
    ++it;
    irls(x1, design.y, 0, beta);
    const double ll = loglik(design.y, mean_of(x1, beta), 0);
    change = std::abs(ll - prev);
    prev = ll;
    if (change < opts.tolerance) {
      converged = true;
      break;
    }
  }
  auto m = finish(design, x1, beta, 0, false);
  m.iterations = it;
  m.converged = converged;
  m.last_change = change;
  return m;
}

ImpactModel fit_negbin(const ImpactDesign& design, const FitOptions& opts) {
  check_inputs(design);
  const MatrixXd x1 = with_intercept(design);
  VectorXd beta = start_beta(design, x1.cols());
  irls(x1, design.y, 0, beta);
  VectorXd mu = mean_of(x1, beta);
  // Method of moments from the Poisson fit.
  const double excess = ((design.y - mu).array().square() - design.y.array()).sum();
  double alpha = std::max(kAlphaFloor, excess / mu.squaredNorm());

  double prev = nb_log_likelihood(design.y, mu, alpha);
  double h_alpha = 0, change = 0;
  VectorXd best_beta = beta;
  double best_alpha = alpha, best_ll = prev;
  int it = 0;
  bool converged = false;
  while (it < opts.max_iterations) {
    ++it;
    irls(x1, design.y, alpha, beta);
    mu = mean_of(x1, beta);
    alpha = update_alpha(design.y, mu, alpha, h_alpha);
    const double ll = nb_log_likelihood(design.y, mu, alpha);
    if (ll >= best_ll) {
      best_ll = ll;
      best_beta = beta;
      best_alpha = alpha;
    }
    change = std::abs(ll - prev);
    prev = ll;
    if (change < opts.tolerance) {
      converged = true;
      break;
    }
  }
  auto m = finish(design, x1, best_beta, best_alpha, true);
  const double h = alpha_derivs(design.y, mean_of(x1, best_beta), best_alpha).h;
  m.alpha_se = h < 0 ? std::sqrt(-1 / h) : 0.0;
  m.iterations = it;
  m.converged = converged;
  m.last_change = change;
  if (!converged) log::warn("impact", "negbin fit stopped after " + std::to_string(it) + " iterations");
  return m;
}

double aic(const ImpactModel& model) { return 2.0 * static_cast<double>(model.k) - 2.0 * model.log_likelihood; }

LrTest lr_test(const ImpactModel& m0, const ImpactModel& m1) {
  const auto p0 = m0.predictors(), p1 = m1.predictors();
  const std::set<std::string> full(p1.begin(), p1.end());
  const bool subset = std::all_of(p0.begin(), p0.end(), [&](const std::string& s) { return full.count(s) > 0; });
  const bool family_ok = m0.family == m1.family || (m0.family == "poisson" && m1.family == "negbin");
  if (!subset || !family_ok || m0.n != m1.n || m0.k > m1.k) {
    throw ImpactError(ImpactError::Kind::NotNested, "the first model is not nested in the second");
  }
  LrTest t;
  t.df = static_cast<int>(m1.k - m0.k);
  t.statistic = std::max(0.0, 2 * (m1.log_likelihood - m0.log_likelihood));
  if (t.df == 0) {
    t.p = 1;
  } else {
    boost::math::chi_squared dist(t.df);
    t.p = boost::math::cdf(boost::math::complement(dist, t.statistic));
  }
  return t;
}

std::string design_csv(const ImpactDesign& design) {
  std::string out = "paper_id,y";
  for (const auto& c : design.columns) out += ',' + c;
  out += '\n';
  for (Eigen::Index i = 0; i < design.x.rows(); ++i) {
    out += design.paper_ids[static_cast<std::size_t>(i)] + ',' + format_double(design.y(i));
    for (Eigen::Index j = 0; j < design.x.cols(); ++j) out += ',' + format_double(design.x(i, j));
    out += '\n';
  }
  return out;
}

std::string impact_report_json(const std::vector<ImpactModel>& models,
                               const std::vector<std::pair<std::string, double>>& vifs,
                               const std::vector<NamedTest>& tests, const std::vector<std::string>& warnings) {
  json js;
  js["format"] = "citescope-impact";
  js["models"] = json::array();
  for (const auto& m : models) {
    json jm;
    jm["family"] = m.family;
    jm["n"] = m.n;
    jm["k"] = m.k;
    jm["alpha"] = m.alpha;
    jm["alpha_se"] = m.alpha_se;
    jm["log_likelihood"] = m.log_likelihood;
    jm["aic"] = aic(m);
    jm["iterations"] = m.iterations;
    jm["converged"] = m.converged;
    jm["coefficients"] = json::array();
    for (const auto& c : m.coefficients) {
      jm["coefficients"].push_back({{"name", c.name}, {"estimate", c.estimate}, {"se", c.se}, {"z", c.z}, {"p", c.p}});
    }
    js["models"].push_back(jm);
  }
  js["vif"] = json::array();
  for (const auto& [name, v] : vifs) {
    js["vif"].push_back({{"column", name}, {"vif", std::isfinite(v) ? json(v) : json(nullptr)}, {"flagged", !(v < 10)}});
  }
  js["lr_tests"] = json::array();
  for (const auto& t : tests) {
    js["lr_tests"].push_back({{"name", t.name}, {"statistic", t.test.statistic}, {"df", t.test.df}, {"p", t.test.p}});
  }
  js["warnings"] = warnings;
  return js.dump(2) + "\n";
}

}  // namespace citescope
