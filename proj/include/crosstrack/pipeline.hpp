#pragma once

#include <vector>

#include "crosstrack/mot_io.hpp"
#include "crosstrack/tracker.hpp"
#include "crosstrack/weights.hpp"

namespace crosstrack {

struct TrackingRun {
    Sequence tracks;                    // per-frame (id, box) entries
    std::vector<StepResult> steps;      // per-frame diagnostics, frames order
};

/// Feeds every frame of the detection sequence through a fresh tracker.
TrackingRun run_tracker(const Sequence& detections, const TrackerConfig& config,
                        const PipelineWeights& weights);

} // namespace crosstrack
