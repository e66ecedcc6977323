#pragma once

#include <cmath>
#include <string>

#include "json.hpp"

#include "isle/codestream.hpp"
#include "isle/optimizer.hpp"
#include "isle/stream_service.hpp"

namespace isle {

// JSON views of reports. nlohmann::json objects keep keys sorted, so dumps
// are stable and diffable. Non-finite numbers serialize as null.

using Json = nlohmann::json;

inline Json to_json(const stats::AurocResult& r) {
  return {{"mean", r.mean}, {"per_label", r.per_label}, {"std", r.std}};
}

inline Json to_json(const EvalReport& r) {
  Json rows = Json::array();
  for (const auto& e : r.per_decomposition) {
    rows.push_back({
        {"d", e.d},
        {"width", e.width},
        {"height", e.height},
        {"mean_payload_fraction", e.mean_payload_fraction},
        {"auroc", to_json(e.auroc)},
        {"t_statistic", e.t_test.t_statistic},
        {"dof", e.t_test.dof},
        {"p_value", e.t_test.p_value},
        {"degenerate", e.degenerate},
        {"passes", e.passes},
        {"shapiro_w", e.shapiro_w},
        {"shapiro_p", e.shapiro_p},
        {"normality_ok", std::isnan(e.shapiro_p) ? Json(nullptr) : Json(e.shapiro_p > 0.05)},
    });
  }
  return {
      {"chosen_d", r.chosen_d},
      {"d_min_architecture", r.d_min_architecture},
      {"n_levels", r.n_levels},
      {"significance", r.significance},
      {"labels", r.labels},
      {"warnings", r.warnings},
      {"reference", to_json(r.reference)},
      {"per_decomposition", rows},
  };
}

inline Json to_json(const TransferMetrics& m) {
  return {
      {"data_transferred_bytes", m.bytes_transferred},
      {"decode_time_s", m.decode_time_s},
      {"images_processed", m.images_processed},
      {"throughput_images_per_s", m.throughput},
      {"wall_time_s", m.wall_time_s},
  };
}

/// Header, ladder and per-segment byte accounting of a codestream.
inline Json inspect_json(const Codestream& cs) {
  const auto plan = cs.plan();
  Json segments = Json::array();
  for (int k = 0; k <= cs.n_levels(); ++k) {
    const auto& e = cs.index[static_cast<std::size_t>(k)];
    const auto& rung = plan.rung(k);
    segments.push_back({
        {"d", k},
        {"width", rung.width},
        {"height", rung.height},
        {"offset", e.offset},
        {"length", e.length},
        {"prefix_payload_bytes", cs.prefix_bytes(k)},
        {"prefix_file_bytes", cs.metadata_bytes() + cs.prefix_bytes(k)},
        {"present", k < cs.header.present_segments},
    });
  }
  return {
      {"width", cs.header.width},
      {"height", cs.header.height},
      {"bit_depth", cs.header.bit_depth},
      {"alpha", cs.header.alpha},
      {"n_levels", cs.header.n_levels},
      {"present_segments", cs.header.present_segments},
      {"version", cs.header.version},
      {"metadata_bytes", cs.metadata_bytes()},
      {"payload_bytes", cs.payload.size()},
      {"full_payload_bytes", cs.full_payload_bytes()},
      {"segments", segments},
  };
}

inline std::string inspect_text(const Codestream& cs) {
  const auto plan = cs.plan();
  std::string out;
  out += "size        " + std::to_string(cs.header.width) + "x" + std::to_string(cs.header.height) + ", " +
         std::to_string(cs.header.bit_depth) + "-bit\n";
  out += "alpha       " + std::to_string(cs.header.alpha) + "\n";
  out += "levels      " + std::to_string(cs.header.n_levels) + "\n";
  out += "present     " + std::to_string(cs.header.present_segments) + " of " +
         std::to_string(cs.n_levels() + 1) + " segments\n";
  out += "metadata    " + std::to_string(cs.metadata_bytes()) + " bytes\n";
  out += "  d  resolution     segment     prefix\n";
  for (int k = 0; k <= cs.n_levels(); ++k) {
    const auto& rung = plan.rung(k);
    char line[160];
    std::snprintf(line, sizeof(line), "%3d  %5ux%-7u %10llu %10llu%s\n", k, rung.width, rung.height,
                  static_cast<unsigned long long>(cs.index[static_cast<std::size_t>(k)].length),
                  static_cast<unsigned long long>(cs.prefix_bytes(k)),
                  k < cs.header.present_segments ? "" : "  (absent)");
    out += line;
  }
  return out;
}

}  // namespace isle
