#include "crosstrack/scene.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "crosstrack/rng.hpp"

namespace crosstrack {

namespace {

constexpr double kFeatureScale = 3.0;

struct Trajectory {
    double x, y, vx, vy, w, h;
    std::vector<double> base_feature;
};

} // namespace

SceneConfig load_scene_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open scene config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("scene config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("scene config must be a JSON object");

    SceneConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "num_identities") cfg.num_identities = value.get<std::size_t>();
        else if (key == "frames") cfg.frames = value.get<std::size_t>();
        else if (key == "image_width") cfg.image_width = value.get<double>();
        else if (key == "image_height") cfg.image_height = value.get<double>();
        else if (key == "min_speed") cfg.min_speed = value.get<double>();
        else if (key == "max_speed") cfg.max_speed = value.get<double>();
        else if (key == "feature_dim") cfg.feature_dim = value.get<std::size_t>();
        else if (key == "feature_noise") cfg.feature_noise = value.get<double>();
        else if (key == "dropout") cfg.dropout = value.get<double>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "occlusions") {
            for (const auto& ev : value) {
                cfg.occlusions.push_back({ev.at("id").get<std::int64_t>(),
                                          ev.at("start").get<std::size_t>(),
                                          ev.at("duration").get<std::size_t>()});
            }
        } else {
            throw std::runtime_error("scene config: unknown key '" + key + "'");
        }
    }
    return cfg;
}

SceneData synthesize_scene(const SceneConfig& cfg) {
    if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
        throw std::invalid_argument("scene: dropout must be in [0, 1)");
    }
    Rng rng(cfg.seed);

    std::vector<Trajectory> tracks(cfg.num_identities);
    for (Trajectory& t : tracks) {
        t.w = uniform(rng, 36.0, 64.0);
        t.h = uniform(rng, 72.0, 128.0);
        const double mx = 0.5 * t.w + 1.0;
        const double my = 0.5 * t.h + 1.0;
        t.x = uniform(rng, mx, cfg.image_width - mx);
        t.y = uniform(rng, my, cfg.image_height - my);
        const double speed = uniform(rng, cfg.min_speed, cfg.max_speed);
        const double angle = uniform(rng, 0.0, 6.283185307179586);
        t.vx = speed * std::cos(angle);
        t.vy = speed * std::sin(angle);
        t.base_feature.resize(cfg.feature_dim);
        for (double& v : t.base_feature) v = kFeatureScale * gaussian(rng);
    }

    auto occluded = [&cfg](std::int64_t id, std::size_t frame) {
        for (const OcclusionEvent& ev : cfg.occlusions) {
            if (ev.id == id && frame >= ev.start && frame < ev.start + ev.duration) {
                return true;
            }
        }
        return false;
    };

    SceneData out;
    out.detections.frames.resize(cfg.frames);
    out.ground_truth.frames.resize(cfg.frames);

    for (std::size_t frame = 1; frame <= cfg.frames; ++frame) {
        SequenceFrame& det = out.detections.frames[frame - 1];
        SequenceFrame& gt = out.ground_truth.frames[frame - 1];
        det.frame = gt.frame = frame;

        for (std::size_t k = 0; k < cfg.num_identities; ++k) {
            Trajectory& t = tracks[k];
            const std::int64_t id = static_cast<std::int64_t>(k) + 1;
            const BBox box{t.x, t.y, t.w, t.h, 1.0};
            gt.entries.push_back({id, box, std::nullopt});

            std::vector<double> feat(cfg.feature_dim);
            for (std::size_t d = 0; d < cfg.feature_dim; ++d) {
                feat[d] = t.base_feature[d] + cfg.feature_noise * gaussian(rng);
            }
            const bool dropped = cfg.dropout > 0.0 && uniform01(rng) < cfg.dropout;
            if (!occluded(id, frame) && !dropped) {
                det.entries.push_back({-1, box, std::move(feat)});
            }

            // Advance with wall bouncing; the center stays inside the image
            // by at least half a box plus one pixel.
            t.x += t.vx;
            t.y += t.vy;
            const double mx = 0.5 * t.w + 1.0;
            const double my = 0.5 * t.h + 1.0;
            if (t.x < mx) { t.x = 2.0 * mx - t.x; t.vx = -t.vx; }
            if (t.x > cfg.image_width - mx) { t.x = 2.0 * (cfg.image_width - mx) - t.x; t.vx = -t.vx; }
            if (t.y < my) { t.y = 2.0 * my - t.y; t.vy = -t.vy; }
            if (t.y > cfg.image_height - my) { t.y = 2.0 * (cfg.image_height - my) - t.y; t.vy = -t.vy; }
        }
    }
    return out;
}

} // namespace crosstrack
