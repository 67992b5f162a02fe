#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "symap/evaluation.hpp"
#include "symap/mapping.hpp"
#include "symap/text_io.hpp"
#include "symap/transferability.hpp"

namespace symap {

// All report writers use exact shortest-round-trip number formatting, so a
// rerun with equal inputs produces a byte-identical file.

inline void append_eval_rows(std::ostringstream& out, const std::string& section,
                             const std::string& fold, const EvalReport& report) {
  for (const auto& kp : report.per_keypoint)
    out << section << "," << fold << "," << kp.keypoint << ","
        << format_double(kp.mean) << "," << format_double(kp.stddev) << ","
        << report.samples << "\n";
  out << section << "," << fold << ",total," << format_double(report.total_mean)
      << "," << format_double(report.total_stddev) << "," << report.samples
      << "\n";
}

inline std::string eval_report_csv(
    const std::vector<std::pair<std::string, const EvalReport*>>& sections,
    const Provenance& provenance = {}) {
  std::ostringstream out;
  out << provenance.header("eval");
  out << "section,fold,keypoint,mean_m,stddev_m,samples\n";
  for (const auto& [name, report] : sections) {
    for (std::size_t f = 0; f < report->folds.size(); ++f)
      append_eval_rows(out, name, std::to_string(f), report->folds[f]);
    append_eval_rows(out, name, "all", *report);
  }
  return out.str();
}

inline std::string loss_report_csv(const LossReport& report,
                                   const Provenance& provenance = {}) {
  std::ostringstream out;
  out << provenance.header("loss");
  const bool dual = !report.loss_a.empty();
  for (const int d : report.degenerate_a)
    out << "# degenerate input dimension (side a): " << d << "\n";
  for (const int d : report.degenerate_b)
    out << "# degenerate input dimension (side b): " << d << "\n";
  out << (dual ? "epoch,loss_a,loss_b,loss_latent,total\n" : "epoch,total\n");
  for (std::size_t e = 0; e < report.total.size(); ++e) {
    out << e;
    if (dual)
      out << "," << format_double(report.loss_a[e]) << ","
          << format_double(report.loss_b[e]) << ","
          << format_double(report.loss_latent[e]);
    out << "," << format_double(report.total[e]) << "\n";
  }
  return out.str();
}

// Every factor next to the final value, so any row can be recomputed.
inline std::string transfer_report_csv(
    const std::vector<TransferabilityReport>& reports,
    const Provenance& provenance = {}) {
  std::ostringstream out;
  out << provenance.header("transfer");
  out << "from,to,alpha,length_ratio,sufficient_ratio,dissimilarity,"
         "transferability\n";
  for (const auto& r : reports) {
    r.validate();
    out << r.from_agent << "," << r.to_agent << "," << format_double(r.alpha)
        << "," << format_double(r.length) << "," << format_double(r.sufficient)
        << "," << format_double(r.dissim) << "," << format_double(r.value)
        << "\n";
  }
  return out.str();
}

inline std::string plan_report(const ChainPlan& plan,
                               const Provenance& provenance = {}) {
  std::ostringstream out;
  out << provenance.header("plan");
  out << "new_agent," << plan.new_agent << "," << to_string(plan.new_kind)
      << "\nobjective," << to_string(plan.objective) << "\n";
  for (const auto& audit : plan.audits) {
    out << "candidate," << audit.attach_to << ","
        << format_double(audit.objective_value) << ","
        << (audit.long_path ? "long_path" : "ok") << "\n";
    for (const auto& [counterpart, path] : audit.per_counterpart) {
      out << "route," << audit.attach_to << "," << counterpart << ","
          << format_double(path.product);
      for (const auto& node : path.nodes) out << "," << node;
      out << "\n";
    }
  }
  out << "chosen," << plan.chosen << "," << format_double(plan.chosen_value)
      << "," << (plan.chosen_long_path ? "long_path" : "ok") << "\n";
  return out.str();
}

}  // namespace symap
