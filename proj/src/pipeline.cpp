#include "crosstrack/pipeline.hpp"

namespace crosstrack {

TrackingRun run_tracker(const Sequence& detections, const TrackerConfig& config,
                        const PipelineWeights& weights) {
    TrackerState state(config, weights);
    TrackingRun run;
    run.tracks.frames.resize(detections.frames.size());
    run.steps.reserve(detections.frames.size());

    for (std::size_t f = 0; f < detections.frames.size(); ++f) {
        const std::size_t frame_no = detections.frames[f].frame;
        StepResult step = state.step(detections.detections(frame_no));
        SequenceFrame& out = run.tracks.frames[f];
        out.frame = frame_no;
        for (const TrackOutput& t : step.outputs) {
            BBox box = t.box;
            box.score = 1.0; // tracked output carries conf = 1
            out.entries.push_back({t.id, box, std::nullopt});
        }
        run.steps.push_back(std::move(step));
    }
    return run;
}

} // namespace crosstrack
