#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "crosstrack/attention.hpp"
#include "crosstrack/bbox.hpp"
#include "crosstrack/matrix.hpp"
#include "crosstrack/weights.hpp"

namespace crosstrack {

struct Detection {
    BBox box;
    std::optional<std::vector<double>> feature;
};

enum class TrackState { active, lost };

struct Tracklet {
    std::int64_t id = 0;
    std::vector<double> token; // last refined feature (memory sharing)
    BBox box;                  // last seen
    std::size_t age = 0;       // frames since last match
    TrackState state = TrackState::active;
};

struct TrackerConfig {
    std::size_t rebirth_window = 30;
    double alpha = 0.4;
    double match_threshold = 0.3;
    std::size_t max_instances = 300;
    double spawn_score = 0.4;
    std::size_t tau = 1; // fixed at 1 in inference; exposed for experiments
    std::size_t dim = 16;
    std::size_t map_width = 240;
    std::size_t map_height = 136;
    double stride = 8.0;
};

/// JSON config; unknown keys are rejected, missing keys keep defaults.
TrackerConfig load_tracker_config(const std::filesystem::path& path);

/// Geometric gate. Entry (i, j) is -inf iff the center distance d(i, j)
/// exceeds th_i = min_j d(i, j) + alpha * min(w_i, h_i); the nearest
/// tracklet to each instance is never masked.
Matrix distance_mask(const std::vector<BBox>& boxes_t,
                     const std::vector<BBox>& boxes_pool, double alpha);

/// Replaces the stored token with the refined row and revives the tracklet.
Tracklet msm_update(Tracklet tracklet, const std::vector<double>& refined_row);

struct TrackOutput {
    std::int64_t id = 0;
    BBox box;
};

/// Diagnostic record of one accepted match (pre-update tracklet geometry),
/// kept so mask compliance can be audited after the fact.
struct MatchRecord {
    std::size_t detection = 0;
    std::int64_t tracklet_id = 0;
    BBox tracklet_box;
    double affinity = 0.0;
};

struct StepResult {
    std::vector<TrackOutput> outputs;
    std::vector<MatchRecord> matches;
};

/// Stateful association loop over one detection stream. Single-threaded per
/// sequence; run independent sequences on independent states.
class TrackerState {
  public:
    TrackerState(TrackerConfig config, PipelineWeights weights);

    /// One frame: distance-mask the pool, associate via the attention
    /// forward pass, update matched tracklets (memory sharing), age and
    /// retire the rest, spawn tracks for unmatched detections scoring at
    /// least spawn_score. Returns (id, box) per tracked detection.
    StepResult step(const std::vector<Detection>& detections);

    const std::vector<Tracklet>& pool() const { return pool_; }
    std::int64_t next_id() const { return next_id_; }
    const TrackerConfig& config() const { return config_; }

  private:
    std::vector<double> materialize_feature(const Detection& det) const;

    TrackerConfig config_;
    PipelineWeights weights_;
    std::vector<Tracklet> pool_;
    std::int64_t next_id_ = 0;
};

} // namespace crosstrack
