#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "crosstrack/mot_io.hpp"

namespace crosstrack {

struct OcclusionEvent {
    std::int64_t id = 0;
    std::size_t start = 0;    // first occluded frame (1-based)
    std::size_t duration = 0; // occluded frames [start, start + duration)
};

struct SceneConfig {
    std::size_t num_identities = 10;
    std::size_t frames = 100;
    double image_width = 1920.0;
    double image_height = 1080.0;
    double min_speed = 0.5; // pixels per frame
    double max_speed = 2.0;
    std::size_t feature_dim = 16;
    double feature_noise = 0.01; // per-frame sigma on the identity feature
    std::vector<OcclusionEvent> occlusions;
    double dropout = 0.0; // detection dropout rate in [0, 1)
    std::uint64_t seed = 1;
};

SceneConfig load_scene_config(const std::filesystem::path& path);

struct SceneData {
    Sequence detections;   // id -1, features attached, occlusions/dropout applied
    Sequence ground_truth; // 1-based identities, complete
};

/// Constant-velocity boxes bouncing off the image walls. Each identity has
/// a fixed random feature vector; detections carry it plus per-frame
/// gaussian noise. Bit-identical for a given config on any platform.
SceneData synthesize_scene(const SceneConfig& cfg);

} // namespace crosstrack
