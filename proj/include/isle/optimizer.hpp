#pragma once

#include <cmath>
#include <future>
#include <limits>
#include <string>
#include <vector>

#include "isle/codestream.hpp"
#include "isle/error.hpp"
#include "isle/image.hpp"
#include "isle/scorer.hpp"
#include "isle/stats.hpp"

namespace isle {

/// Smallest decomposition whose shorter side covers the model input.
inline int architecture_floor(const DecompositionPlan& plan, std::uint32_t input_size) {
  if (input_size > plan.full().min_dim()) {
    fail(ErrorKind::validation, "model input " + std::to_string(input_size) + " exceeds image resolution " +
                                    std::to_string(plan.full().min_dim()));
  }
  for (const auto& rung : plan.ladder) {
    if (rung.min_dim() >= input_size) return rung.d;
  }
  return plan.n_levels;
}

struct AssetStream {
  std::string asset_id;
  Codestream stream;
};

struct DecompositionEval {
  int d = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  double mean_payload_fraction = 1.0;  // prefix bytes / full payload bytes, averaged
  stats::AurocResult auroc;
  stats::TTestResult t_test;
  bool degenerate = false;  // zero-variance differences; p set to 1 (no label worse) or 0
  bool passes = false;
  double shapiro_w = std::numeric_limits<double>::quiet_NaN();
  double shapiro_p = std::numeric_limits<double>::quiet_NaN();
};

struct EvalReport {
  int n_levels = 0;
  double significance = 0.05;
  int d_min_architecture = 0;
  int chosen_d = 0;
  std::vector<std::string> labels;  // label columns used for pairing
  std::vector<std::string> warnings;
  stats::AurocResult reference;
  std::vector<DecompositionEval> per_decomposition;

  const DecompositionEval& at(int d) const {
    for (const auto& e : per_decomposition) {
      if (e.d == d) return e;
    }
    fail(ErrorKind::range, "decomposition " + std::to_string(d) + " was not evaluated");
  }
};

namespace detail {

/// Per-label scores for every asset decoded at `d` (d = n_levels is the reference).
inline std::vector<std::vector<double>> score_at(const std::vector<AssetStream>& streams, const ScorerSpec& spec,
                                                 int d) {
  Scorer scorer(spec);
  std::vector<std::vector<double>> out;
  out.reserve(streams.size());
  for (const auto& s : streams) out.push_back(scorer(decode_partial(s.stream, d), s.asset_id, d));
  return out;
}

inline std::vector<double> per_label_auroc(const std::vector<std::vector<double>>& scores,
                                           const std::vector<std::vector<std::uint8_t>>& truth,
                                           const std::vector<std::size_t>& columns,
                                           const std::vector<std::size_t>& score_columns) {
  std::vector<double> result;
  std::vector<double> s(scores.size());
  for (std::size_t k = 0; k < columns.size(); ++k) {
    for (std::size_t i = 0; i < scores.size(); ++i) s[i] = scores[i].at(score_columns[k]);
    result.push_back(stats::auroc(s, truth[k]));
  }
  return result;
}

}  // namespace detail

/// Picks the smallest decomposition, starting at the architecture floor, whose
/// per-label AUROCs are not significantly lower than at full resolution under
/// a paired one-tailed t-test. Falls back to the full stream.
inline EvalReport select_optimal(const std::vector<AssetStream>& streams, const LabelTable& labels,
                                 const ScorerSpec& spec, const DecompositionPlan& plan, double significance = 0.05) {
  validate(spec);
  if (streams.empty()) fail(ErrorKind::validation, "validation set is empty");
  if (!(significance >= 0.0 && significance <= 1.0)) fail(ErrorKind::validation, "significance must be in [0, 1]");
  for (const auto& s : streams) {
    if (s.stream.plan() != plan) fail(ErrorKind::validation, "stream " + s.asset_id + " does not share the plan");
    if (s.stream.max_available_d() != plan.n_levels) {
      fail(ErrorKind::validation, "stream " + s.asset_id + " is truncated; validation needs full streams");
    }
  }

  EvalReport report;
  report.n_levels = plan.n_levels;
  report.significance = significance;
  report.d_min_architecture = architecture_floor(plan, spec.input_size);

  // Ground truth per label column, in stream order; single-class columns are dropped.
  std::vector<const LabelRow*> rows;
  for (const auto& s : streams) {
    const auto* row = labels.find(s.asset_id);
    if (!row) fail(ErrorKind::validation, "no labels for asset " + s.asset_id);
    rows.push_back(row);
  }
  std::vector<std::size_t> columns, score_columns;
  std::vector<std::vector<std::uint8_t>> truth;
  for (std::size_t c = 0; c < labels.label_names.size(); ++c) {
    std::vector<std::uint8_t> col;
    for (const auto* row : rows) col.push_back(row->values[c]);
    const auto positives = std::count(col.begin(), col.end(), 1);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(col.size())) {
      report.warnings.push_back("label " + labels.label_names[c] + " has a single class; excluded");
      continue;
    }
    std::size_t score_column = c;
    if (spec.kind == ScorerKind::precomputed && !spec.precomputed->label_names.empty()) {
      const auto& names = spec.precomputed->label_names;
      auto it = std::find(names.begin(), names.end(), labels.label_names[c]);
      if (it == names.end()) fail(ErrorKind::validation, "scores lack label " + labels.label_names[c]);
      score_column = static_cast<std::size_t>(it - names.begin());
    }
    columns.push_back(c);
    score_columns.push_back(score_column);
    truth.push_back(std::move(col));
    report.labels.push_back(labels.label_names[c]);
  }
  if (columns.size() < 2) fail(ErrorKind::validation, "need at least two labels with both classes present");

  const int n = plan.n_levels;
  const int floor_d = report.d_min_architecture;
  std::vector<std::future<std::vector<std::vector<double>>>> pending;
  for (int d = floor_d; d <= n; ++d) {
    pending.push_back(std::async(std::launch::async, detail::score_at, std::cref(streams), std::cref(spec), d));
  }
  std::vector<std::vector<double>> aurocs;
  for (auto& f : pending) aurocs.push_back(detail::per_label_auroc(f.get(), truth, columns, score_columns));
  const auto& reference = aurocs.back();
  report.reference = stats::summarize_auroc(reference);

  for (int d = floor_d; d <= n; ++d) {
    const auto& candidate = aurocs[static_cast<std::size_t>(d - floor_d)];
    DecompositionEval e;
    e.d = d;
    e.width = plan.rung(d).width;
    e.height = plan.rung(d).height;
    double fraction = 0.0;
    for (const auto& s : streams) {
      const auto full = s.stream.full_payload_bytes();
      fraction += full == 0 ? 1.0 : static_cast<double>(s.stream.prefix_bytes(d)) / static_cast<double>(full);
    }
    e.mean_payload_fraction = fraction / static_cast<double>(streams.size());
    e.auroc = stats::summarize_auroc(candidate);

    std::vector<double> diff(candidate.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = candidate[i] - reference[i];
    try {
      e.t_test = stats::paired_t_test_one_tailed(candidate, reference);
    } catch (const Error& err) {
      if (err.kind() != ErrorKind::degenerate) throw;
      const bool none_worse = std::all_of(diff.begin(), diff.end(), [](double v) { return v >= 0.0; });
      e.degenerate = true;
      e.t_test.dof = static_cast<int>(diff.size()) - 1;
      e.t_test.t_statistic = std::numeric_limits<double>::quiet_NaN();
      e.t_test.p_value = none_worse ? 1.0 : 0.0;
    }
    e.passes = e.t_test.p_value >= significance;
    try {
      const auto sw = stats::shapiro_wilk(diff);
      e.shapiro_w = sw.w;
      e.shapiro_p = sw.p_value;
      if (sw.p_value <= 0.05) {
        report.warnings.push_back("d=" + std::to_string(d) + ": paired differences fail the normality check (p=" +
                                  std::to_string(sw.p_value) + ")");
      }
    } catch (const Error&) {
      // Fewer than three labels or identical differences: W is undefined.
    }
    report.per_decomposition.push_back(std::move(e));
  }

  report.chosen_d = n;
  for (const auto& e : report.per_decomposition) {
    if (e.passes) {
      report.chosen_d = e.d;
      break;
    }
  }
  return report;
}

}  // namespace isle
