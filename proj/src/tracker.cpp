#include "crosstrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace crosstrack {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGeometryScale = 10.0;

double center_distance(const BBox& a, const BBox& b) {
    const double dx = a.cx - b.cx;
    const double dy = a.cy - b.cy;
    return std::sqrt(dx * dx + dy * dy);
}

} // namespace

TrackerConfig load_tracker_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error("config file " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw std::runtime_error("config must be a JSON object");

    TrackerConfig cfg;
    for (const auto& [key, value] : j.items()) {
        if (key == "rebirth_window") cfg.rebirth_window = value.get<std::size_t>();
        else if (key == "alpha") cfg.alpha = value.get<double>();
        else if (key == "match_threshold") cfg.match_threshold = value.get<double>();
        else if (key == "max_instances") cfg.max_instances = value.get<std::size_t>();
        else if (key == "spawn_score") cfg.spawn_score = value.get<double>();
        else if (key == "tau") cfg.tau = value.get<std::size_t>();
        else if (key == "dim") cfg.dim = value.get<std::size_t>();
        else if (key == "map_width") cfg.map_width = value.get<std::size_t>();
        else if (key == "map_height") cfg.map_height = value.get<std::size_t>();
        else if (key == "stride") cfg.stride = value.get<double>();
        else throw std::runtime_error("config file: unknown key '" + key + "'");
    }
    return cfg;
}

Matrix distance_mask(const std::vector<BBox>& boxes_t,
                     const std::vector<BBox>& boxes_pool, double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("distance_mask: alpha must be positive");
    Matrix mask(boxes_t.size(), boxes_pool.size(), 0.0);
    if (mask.empty()) return mask;
    std::vector<double> dist(boxes_pool.size());
    for (std::size_t i = 0; i < boxes_t.size(); ++i) {
        double dmin = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < boxes_pool.size(); ++j) {
            dist[j] = center_distance(boxes_t[i], boxes_pool[j]);
            dmin = std::min(dmin, dist[j]);
        }
        const double th = dmin + alpha * std::min(boxes_t[i].w, boxes_t[i].h);
        for (std::size_t j = 0; j < boxes_pool.size(); ++j) {
            if (dist[j] > th) mask.at(i, j) = kNegInf;
        }
    }
    return mask;
}

Tracklet msm_update(Tracklet tracklet, const std::vector<double>& refined_row) {
    if (tracklet.token.size() != refined_row.size()) {
        throw std::invalid_argument("msm_update: token length mismatch");
    }
    tracklet.token = refined_row;
    tracklet.age = 0;
    tracklet.state = TrackState::active;
    return tracklet;
}

TrackerState::TrackerState(TrackerConfig config, PipelineWeights weights)
    : config_(config), weights_(std::move(weights)) {
    weights_.validate();
    if (weights_.dim != config_.dim) {
        throw std::invalid_argument("tracker: weight dimension does not match config dim");
    }
    if (config_.dim % 2 != 0) {
        throw std::invalid_argument("tracker: dim must be even (positional encoding)");
    }
}

std::vector<double> TrackerState::materialize_feature(const Detection& det) const {
    if (det.feature) {
        if (det.feature->size() != config_.dim) {
            throw std::invalid_argument("detection feature length does not match dim");
        }
        return *det.feature;
    }
    // Geometry embedding: normalized cx, cy, w, h tiled across D.
    const double ex = static_cast<double>(config_.map_width) * config_.stride;
    const double ey = static_cast<double>(config_.map_height) * config_.stride;
    const double base[4] = {det.box.cx / ex, det.box.cy / ey, det.box.w / ex,
                            det.box.h / ey};
    std::vector<double> feat(config_.dim);
    for (std::size_t d = 0; d < config_.dim; ++d) {
        feat[d] = kGeometryScale * base[d % 4];
    }
    return feat;
}

StepResult TrackerState::step(const std::vector<Detection>& detections) {
    if (detections.size() > config_.max_instances) {
        throw std::invalid_argument("instance cap exceeded");
    }

    const std::size_t n_det = detections.size();
    std::vector<std::vector<double>> det_features(n_det);
    std::vector<BBox> det_boxes(n_det);
    for (std::size_t i = 0; i < n_det; ++i) {
        det_features[i] = materialize_feature(detections[i]);
        det_boxes[i] = detections[i].box;
    }

    StepResult result;
    std::vector<std::optional<std::int64_t>> det_track(n_det);
    std::vector<char> tracklet_matched(pool_.size(), 0);

    // Key set: every pooled tracklet (active and lost), capped to the most
    // recently seen when over the clipping budget.
    std::vector<std::size_t> keys(pool_.size());
    std::iota(keys.begin(), keys.end(), 0);
    if (keys.size() > config_.max_instances) {
        std::stable_sort(keys.begin(), keys.end(), [&](std::size_t a, std::size_t b) {
            return pool_[a].age < pool_[b].age;
        });
        keys.resize(config_.max_instances);
        std::sort(keys.begin(), keys.end());
    }

    std::vector<std::vector<double>> refined_rows(n_det);
    bool have_refined = false;

    if (!keys.empty() && n_det > 0) {
        std::vector<BBox> key_boxes;
        key_boxes.reserve(keys.size());
        for (std::size_t k : keys) key_boxes.push_back(pool_[k].box);

        const Matrix full_mask = distance_mask(det_boxes, key_boxes, config_.alpha);

        // Columns masked for every detection cannot be matched this frame;
        // the cross-softmax rejects them, so they are left out of the keys.
        std::vector<std::size_t> live;
        for (std::size_t c = 0; c < keys.size(); ++c) {
            bool any_open = false;
            for (std::size_t i = 0; i < n_det && !any_open; ++i) {
                any_open = full_mask.at(i, c) == 0.0;
            }
            if (any_open) live.push_back(c);
        }

        if (!live.empty()) {
            Matrix mask(n_det, live.size());
            for (std::size_t i = 0; i < n_det; ++i) {
                for (std::size_t c = 0; c < live.size(); ++c) {
                    mask.at(i, c) = full_mask.at(i, live[c]);
                }
            }

            TokenMap x_t(config_.dim, config_.map_height, config_.map_width);
            for (std::size_t i = 0; i < n_det; ++i) {
                const GridPos pos =
                    box_cell(det_boxes[i], config_.stride, config_.map_width, config_.map_height);
                for (std::size_t c = 0; c < config_.dim; ++c) {
                    x_t.at(c, pos.y, pos.x) += det_features[i][c];
                }
            }
            TokenMap x_prev(config_.dim, config_.map_height, config_.map_width);
            std::vector<BBox> live_boxes;
            live_boxes.reserve(live.size());
            for (std::size_t c : live) {
                const Tracklet& t = pool_[keys[c]];
                const GridPos pos =
                    box_cell(t.box, config_.stride, config_.map_width, config_.map_height);
                for (std::size_t ch = 0; ch < config_.dim; ++ch) {
                    x_prev.at(ch, pos.y, pos.x) += t.token[ch];
                }
                live_boxes.push_back(t.box);
            }

            const ForwardResult fwd =
                forward(x_t, x_prev, det_boxes, live_boxes, weights_, &mask,
                        config_.stride, config_.max_instances);

            const TokenSet refined =
                clip_features(fwd.refined, det_boxes, config_.max_instances, config_.stride);
            for (std::size_t i = 0; i < n_det; ++i) {
                refined_rows[i].assign(&refined.rows.at(i, 0),
                                       &refined.rows.at(i, 0) + config_.dim);
            }
            have_refined = true;

            const AssignmentResult matching =
                extract_matching(fwd.affinity, config_.match_threshold);
            for (std::size_t c = 0; c < live.size(); ++c) {
                if (!matching.match[c]) continue;
                const std::size_t det_idx = *matching.match[c];
                const std::size_t pool_idx = keys[live[c]];
                Tracklet& t = pool_[pool_idx];
                result.matches.push_back(
                    {det_idx, t.id, t.box, fwd.affinity.inner.at(det_idx, c)});
                t = msm_update(std::move(t), refined_rows[det_idx]);
                t.box = det_boxes[det_idx];
                tracklet_matched[pool_idx] = 1;
                det_track[det_idx] = t.id;
            }
        }
    }

    // Age the unmatched pool; drop tracklets past the rebirth window.
    std::vector<Tracklet> survivors;
    survivors.reserve(pool_.size());
    for (std::size_t k = 0; k < pool_.size(); ++k) {
        Tracklet& t = pool_[k];
        if (!tracklet_matched[k]) {
            t.age += 1;
            t.state = TrackState::lost;
            if (t.age > config_.rebirth_window) continue;
        }
        survivors.push_back(std::move(t));
    }
    pool_ = std::move(survivors);

    // Unmatched detections spawn new identities when confident enough.
    for (std::size_t i = 0; i < n_det; ++i) {
        if (det_track[i] || detections[i].box.score < config_.spawn_score) continue;
        Tracklet t;
        t.id = next_id_++;
        t.token = have_refined ? refined_rows[i] : det_features[i];
        t.box = det_boxes[i];
        t.age = 0;
        t.state = TrackState::active;
        det_track[i] = t.id;
        pool_.push_back(std::move(t));
    }

    for (std::size_t i = 0; i < n_det; ++i) {
        if (det_track[i]) {
            result.outputs.push_back({*det_track[i], det_boxes[i]});
        }
    }
    return result;
}

} // namespace crosstrack
