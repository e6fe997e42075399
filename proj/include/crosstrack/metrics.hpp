#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "crosstrack/bbox.hpp"

namespace crosstrack {

struct FrameEntry {
    std::int64_t id = 0;
    BBox box;
};

struct FrameAnnotations {
    std::size_t frame = 0;
    std::vector<FrameEntry> entries; // ids unique within a frame
};

struct MetricsReport {
    double mota = 0.0;
    double idf1 = 0.0;
    std::size_t ids = 0; // identity switches
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t gt = 0; // total ground-truth boxes
};

/// Intersection over union of two boxes, in [0, 1].
double iou(const BBox& a, const BBox& b);

/// CLEAR MOT scoring. Frames are aligned by frame index; per frame,
/// correspondences surviving from the previous frame (still above iou_thr)
/// are kept, the remainder is matched by the exact assignment solver, and
/// FP / FN / identity switches accumulate. MOTA = 1 - (FN+FP+IDs)/GT.
/// IDF1 comes from a global identity matching over per-frame overlap counts.
/// Throws "no ground truth" when gt holds no boxes.
MetricsReport clear_mot(const std::vector<FrameAnnotations>& gt,
                        const std::vector<FrameAnnotations>& pred,
                        double iou_thr = 0.5);

std::string metrics_to_json(const MetricsReport& report);
std::string metrics_to_csv_line(const MetricsReport& report);
void write_metrics_json(const MetricsReport& report, const std::filesystem::path& path);

} // namespace crosstrack
