#include "agboost/diagnostics.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace agboost {

namespace {

constexpr double kBoundSlack = 1e-9;

// L(f^m): row 0 is the initial model, row m >= 1 the m-th iterate.
double loss_at(const TrainTrace& trace, int m) {
  return m == 0 ? trace.initial_train_loss
                : trace.records[static_cast<std::size_t>(m - 1)].train_loss;
}

}  // namespace

bool BoundReport::all_satisfied() const {
  for (const auto& row : rows) {
    if (!row.satisfied) return false;
  }
  return true;
}

BoundReport agbm_bound(const TrainTrace& trace, double f_star_norm_sq, double l_star,
                       double eta, double gamma) {
  if (f_star_norm_sq < 0.0) throw std::invalid_argument("f_star_norm_sq must be >= 0");
  if (!(eta > 0.0) || !(gamma > 0.0)) {
    throw std::invalid_argument("eta and gamma must be positive");
  }
  const int iterates = static_cast<int>(trace.records.size());
  for (int m = 0; m <= iterates; ++m) {
    if (l_star > loss_at(trace, m) + kBoundSlack) {
      throw std::invalid_argument(
          "l_star exceeds an observed training loss; wrong optimum supplied");
    }
  }

  BoundReport report;
  report.rows.reserve(static_cast<std::size_t>(iterates) + 1);
  for (int m = 0; m <= iterates; ++m) {
    BoundRow row;
    row.m = m;
    row.lhs = loss_at(trace, m) - l_star;
    row.rhs = f_star_norm_sq / (2.0 * eta * gamma * (m + 1.0) * (m + 1.0));
    row.satisfied = row.lhs <= row.rhs + kBoundSlack;
    report.rows.push_back(row);
  }
  return report;
}

void annotate_bound(TrainTrace& trace, const BoundReport& report) {
  for (const auto& row : report.rows) {
    if (row.m >= 1 && static_cast<std::size_t>(row.m) <= trace.records.size()) {
      trace.records[static_cast<std::size_t>(row.m - 1)].bound_rhs = row.rhs;
    }
  }
}

SlopeReport fit_slope(const TrainTrace& trace, double l_star, int window_begin,
                      int window_end) {
  if (window_begin < 1 || window_end < window_begin ||
      static_cast<std::size_t>(window_end) > trace.records.size()) {
    throw std::invalid_argument("slope window out of range");
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  const int count = window_end - window_begin + 1;
  for (int m = window_begin; m <= window_end; ++m) {
    const double gap = loss_at(trace, m) - l_star;
    if (!(gap > 0.0)) {
      throw std::invalid_argument("nonpositive suboptimality at iterate " +
                                  std::to_string(m) + "; cannot fit a log-log slope");
    }
    const double x = std::log(static_cast<double>(m));
    const double y = std::log(gap);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double n = static_cast<double>(count);
  const double denom = n * sxx - sx * sx;
  SlopeReport report;
  report.window_begin = window_begin;
  report.window_end = window_end;
  report.slope = (n * sxy - sx * sy) / denom;
  report.intercept = (sy - report.slope * sx) / n;
  const double ss_tot = syy - sy * sy / n;
  const double ss_res = ss_tot - report.slope * (sxy - sx * sy / n);
  report.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return report;
}

double mca_estimate(const TrainTrace& trace) {
  if (trace.records.empty()) throw std::invalid_argument("mca_estimate: empty trace");
  bool any = false;
  double lo = 1.0;
  for (const auto& rec : trace.records) {
    if (rec.residual_norm > 0.0) {
      lo = std::min(lo, rec.cos_r);
      any = true;
    }
  }
  if (!any) {
    throw std::invalid_argument("mca_estimate: trace has no nonzero residuals");
  }
  return lo;
}

DivergenceReport detect_divergence(const TrainTrace& trace) {
  DivergenceReport report;
  if (trace.diverged) {
    report.diverged = true;
    report.first_divergent_iteration = trace.divergent_iteration;
    return report;
  }
  const double lo = trace.min_train_loss();
  if (trace.final_train_loss() > 2.0 * lo) {
    report.diverged = true;
    // First iteration that rose past twice the best loss seen so far.
    double running_min = trace.initial_train_loss;
    for (const auto& rec : trace.records) {
      if (rec.train_loss > 2.0 * running_min) {
        report.first_divergent_iteration = rec.iteration;
        break;
      }
      running_min = std::min(running_min, rec.train_loss);
    }
  }
  return report;
}

std::string to_csv(const BoundReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "m,lhs,rhs,satisfied\n";
  for (const auto& row : report.rows) {
    out << row.m << ',' << row.lhs << ',' << row.rhs << ',' << (row.satisfied ? 1 : 0)
        << '\n';
  }
  return out.str();
}

std::string summary(const BoundReport& report) {
  int violations = 0;
  double worst_ratio = 0.0;
  for (const auto& row : report.rows) {
    if (!row.satisfied) ++violations;
    if (row.rhs > 0.0) worst_ratio = std::max(worst_ratio, row.lhs / row.rhs);
  }
  std::ostringstream out;
  out << "bound report: " << report.rows.size() << " iterates, " << violations
      << " violations, worst lhs/rhs = " << worst_ratio << '\n';
  return out.str();
}

std::string summary(const SlopeReport& report) {
  std::ostringstream out;
  out << "slope report: window [" << report.window_begin << ", " << report.window_end
      << "], slope = " << report.slope << ", intercept = " << report.intercept
      << ", r^2 = " << report.r_squared << '\n';
  return out.str();
}

}  // namespace agboost
