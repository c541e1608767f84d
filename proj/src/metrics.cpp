#include "flipforge/metrics.hpp"

#include "flipforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <tuple>

namespace flipforge {

using nlohmann::json;

void validate(const MatchConfig &cfg) {
  if (!(cfg.spatial_tol > 0.0) || !(cfg.temporal_tol > 0.0))
    throw Error(ErrorCode::InvalidConfig, "match tolerances must be positive");
}

MatchResult match(std::span<const MitosisEvent> gt, std::span<const Detection> det,
                  const MatchConfig &cfg) {
  std::vector<Match> candidates;
  for (std::size_t g = 0; g < gt.size(); ++g) {
    for (std::size_t d = 0; d < det.size(); ++d) {
      const auto dt = static_cast<std::uint32_t>(
          std::llabs(static_cast<long long>(gt[g].t) - static_cast<long long>(det[d].t)));
      if (dt > cfg.temporal_tol)
        continue;
      const double dist = std::hypot(gt[g].x - det[d].x, gt[g].y - det[d].y);
      if (dist > cfg.spatial_tol)
        continue;
      candidates.push_back({g, d, dist, dt});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Match &a, const Match &b) {
    return std::tie(a.spatial_dist, a.temporal_dist, a.gt_index, a.det_index) <
           std::tie(b.spatial_dist, b.temporal_dist, b.gt_index, b.det_index);
  });

  MatchResult result;
  std::vector<bool> gt_used(gt.size(), false), det_used(det.size(), false);
  for (const auto &c : candidates) {
    if (gt_used[c.gt_index] || det_used[c.det_index])
      continue;
    gt_used[c.gt_index] = det_used[c.det_index] = true;
    result.matches.push_back(c);
  }
  for (std::size_t g = 0; g < gt.size(); ++g)
    if (!gt_used[g])
      result.fn.push_back(g);
  for (std::size_t d = 0; d < det.size(); ++d)
    if (!det_used[d])
      result.fp.push_back(d);
  return result;
}

MetricsReport score_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  MetricsReport r{tp, fp, fn, 0.0, 0.0, 0.0};
  if (tp + fp > 0)
    r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0)
    r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

MetricsReport score(const MatchResult &m) {
  return score_counts(m.matches.size(), m.fp.size(), m.fn.size());
}

std::vector<SweepRow> sweep(std::span<const MitosisEvent> gt,
                            std::span<const Detection> det, const MatchConfig &cfg,
                            std::span<const double> thresholds) {
  std::vector<SweepRow> rows;
  for (double th : thresholds) {
    std::vector<Detection> kept;
    std::copy_if(det.begin(), det.end(), std::back_inserter(kept),
                 [th](const Detection &d) { return d.score >= th; });
    rows.push_back({th, score(match(gt, kept, cfg))});
  }
  return rows;
}

json to_json(const MetricsReport &r) {
  return {{"tp", r.tp},           {"fp", r.fp},         {"fn", r.fn},
          {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1}};
}

json detections_to_json(std::span<const Detection> det) {
  json arr = json::array();
  for (const auto &d : det)
    arr.push_back({{"t", d.t}, {"x", d.x}, {"y", d.y}, {"score", d.score}});
  return {{"detections", std::move(arr)}};
}

std::vector<Detection> detections_from_json(const json &doc) {
  std::vector<Detection> out;
  try {
    for (const auto &d : doc.at("detections")) {
      Detection det{d.at("t").get<std::uint32_t>(), d.at("x").get<double>(),
                    d.at("y").get<double>(), d.value("score", 1.0)};
      if (!(det.score >= 0.0 && det.score <= 1.0))
        throw Error(ErrorCode::MalformedAnnotations, "detection score outside [0, 1]");
      out.push_back(det);
    }
  } catch (const json::exception &e) {
    throw Error(ErrorCode::MalformedAnnotations,
                "malformed detections: " + std::string(e.what()));
  }
  return out;
}

} // namespace flipforge
