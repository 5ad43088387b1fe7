#pragma once

// Error measurement against the oracles, C*h^p convergence-order fitting
// and the structural diagnostics used by the studies.

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mintime/csv.hpp"
#include "mintime/mtf.hpp"
#include "mintime/oracle.hpp"
#include "mintime/reachset.hpp"

namespace mintime {

struct ErrorReport {
  double linf{0.0};
  int compared{0};           // nodes entering the max-norm
  int excluded{0};           // both sides infinite or truth beyond horizon
  int finite_mismatches{0};  // exactly one side infinite
};

// Max-norm of the field error against the example's oracle. Nodes whose
// true value exceeds the horizon (or is infinite on both sides) are
// excluded; nodes where exactly one side is infinite are tallied apart so
// that coverage defects never leak into the norm silently.
inline ErrorReport linf_error(const MinTimeField& field, const std::string& id) {
  const auto& info = example_info(id);
  const double tf = time_grid(info.problem).tf;
  ErrorReport report;
  const int n1 = field.grid.count1();
  const int n2 = field.grid.count2();
  for (int i1 = 0; i1 < n1; ++i1) {
    for (int i2 = 0; i2 < n2; ++i2) {
      const double approx = field.at(i1, i2);
      const double truth = oracle_eval(id, field.grid.node(i1, i2)).value;
      const bool approx_finite = std::isfinite(approx);
      const bool truth_usable = std::isfinite(truth) && truth <= tf;
      if (approx_finite && truth_usable) {
        ++report.compared;
        report.linf = std::max(report.linf, std::abs(approx - truth));
      } else if (approx_finite != truth_usable) {
        ++report.finite_mismatches;
      } else {
        ++report.excluded;
      }
    }
  }
  return report;
}

struct ConvergenceFit {
  double c{0.0};
  double p{0.0};
  double residual{0.0};  // root-mean-square residual in log space
  std::optional<double> fixed_p;
};

// Least squares for ln e = ln C + p ln h; with fixed_p only C is fitted.
inline ConvergenceFit fit_order(const std::vector<double>& h,
                                const std::vector<double>& e,
                                std::optional<double> fixed_p = std::nullopt) {
  if (h.size() != e.size() || h.size() < 2)
    throw std::invalid_argument("fit_order needs >= 2 matching samples");
  const std::size_t n = h.size();
  std::vector<double> lh(n), le(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(h[i] > 0.0) || !(e[i] > 0.0))
      throw std::invalid_argument("fit_order needs positive h and e");
    lh[i] = std::log(h[i]);
    le[i] = std::log(e[i]);
  }
  double mh = 0.0, me = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mh += lh[i];
    me += le[i];
  }
  mh /= static_cast<double>(n);
  me /= static_cast<double>(n);

  ConvergenceFit fit;
  fit.fixed_p = fixed_p;
  double ln_c;
  if (fixed_p) {
    fit.p = *fixed_p;
    ln_c = me - fit.p * mh;
  } else {
    double cov = 0.0, var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      cov += (lh[i] - mh) * (le[i] - me);
      var += (lh[i] - mh) * (lh[i] - mh);
    }
    if (var == 0.0) throw std::invalid_argument("fit_order needs distinct h");
    fit.p = cov / var;
    ln_c = me - fit.p * mh;
  }
  fit.c = std::exp(ln_c);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = le[i] - (ln_c + fit.p * lh[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

// Outer indices j at which the tube fails to expand strictly, i.e. the
// margin of sets[j] inside sets[j+1] is <= eps.
inline std::vector<int> expansion_check(const ReachTube& tube, double eps) {
  std::vector<int> violations;
  for (std::size_t j = 0; j + 1 < tube.sets.size(); ++j) {
    if (inclusion_margin(tube.sets[j], tube.sets[j + 1]) <= eps)
      violations.push_back(static_cast<int>(j));
  }
  return violations;
}

struct StudyRung {
  double h{0.0};
  int n_r{0};
  ErrorReport error;
};

struct StudyResult {
  std::vector<StudyRung> rows;
  std::optional<ConvergenceFit> fit;
};

struct Ladder {
  std::vector<std::pair<double, int>> rungs;  // (h, N_R)
};

// Builds tube + field + error for every rung of an (h, N_R) ladder at the
// example's horizon, then fits C*h^p across the rungs.
inline StudyResult convergence_study(const std::string& id, Scheme scheme,
                                     const Ladder& ladder,
                                     const SpatialGrid& grid = SpatialGrid{}) {
  if (ladder.rungs.empty()) throw std::invalid_argument("empty ladder");
  const ExampleInfo& info = example_info(id);
  StudyResult result;
  for (const auto& [h, n_r] : ladder.rungs) {
    ControlProblem problem = info.problem;
    TimeGrid& tg = time_grid(problem);
    const double span = tg.tf - tg.t0;
    const double outer = span / (h * tg.inner_steps);
    const int k = static_cast<int>(std::lround(outer));
    if (k < 1 || std::abs(outer - k) > 1e-9)
      throw std::invalid_argument("ladder step does not divide the horizon");
    tg.outer_steps = k;
    const ReachTube tube = reach_tube(problem, scheme, make_direction_grid(n_r));
    const MinTimeField field = min_time_field(
        tube, grid, info.membership_tol, info.monotone,
        info.monotone ? FieldMode::Interpolated : FieldMode::Discrete);
    result.rows.push_back({h, n_r, linf_error(field, id)});
  }
  if (result.rows.size() >= 2) {
    std::vector<double> hs, es;
    for (const auto& row : result.rows) {
      hs.push_back(row.h);
      es.push_back(row.error.linf);
    }
    result.fit = fit_order(hs, es);
  }
  return result;
}

inline std::string study_to_csv(const StudyResult& study) {
  std::ostringstream out;
  out << "h,N_R,linf,compared,mismatches\n";
  for (const auto& row : study.rows) {
    out << fmt17(row.h) << ',' << row.n_r << ',' << fmt17(row.error.linf) << ','
        << row.error.compared << ',' << row.error.finite_mismatches << '\n';
  }
  if (study.fit) {
    out << "# fit C=" << fmt17(study.fit->c) << " p=" << fmt17(study.fit->p)
        << " residual=" << fmt17(study.fit->residual) << '\n';
  } else {
    out << "# fit none\n";
  }
  return out.str();
}

}  // namespace mintime
