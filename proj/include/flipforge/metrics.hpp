#pragma once

#include "flipforge/heatmap.hpp"
#include "flipforge/imagecore.hpp"

#include <json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace flipforge {

/// Spatial and temporal tolerances, both inclusive and checked independently.
struct MatchConfig {
  double spatial_tol = 15.0;
  double temporal_tol = 6.0;
};

void validate(const MatchConfig &cfg);

struct Match {
  std::size_t gt_index = 0;
  std::size_t det_index = 0;
  double spatial_dist = 0.0;
  std::uint32_t temporal_dist = 0;
};

struct MatchResult {
  std::vector<Match> matches;
  std::vector<std::size_t> fp; // unmatched detection indices
  std::vector<std::size_t> fn; // unmatched ground-truth indices
};

struct MetricsReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Greedy closest-first one-to-one association. Every (gt, det) pair within
/// both tolerances is a candidate; candidates are taken in ascending order of
/// (spatial distance, |dt|, gt index, det index) whenever both ends are free.
MatchResult match(std::span<const MitosisEvent> gt, std::span<const Detection> det,
                  const MatchConfig &cfg = {});

MetricsReport score(const MatchResult &m);
MetricsReport score_counts(std::size_t tp, std::size_t fp, std::size_t fn);

struct SweepRow {
  double threshold = 0.0;
  MetricsReport report;
};

/// For each threshold, keeps detections with score >= threshold and scores
/// them against `gt`.
std::vector<SweepRow> sweep(std::span<const MitosisEvent> gt,
                            std::span<const Detection> det, const MatchConfig &cfg,
                            std::span<const double> thresholds);

nlohmann::json to_json(const MetricsReport &r);

// detections.json: {"detections": [{"t", "x", "y", "score"}]}
nlohmann::json detections_to_json(std::span<const Detection> det);
std::vector<Detection> detections_from_json(const nlohmann::json &doc);

} // namespace flipforge
