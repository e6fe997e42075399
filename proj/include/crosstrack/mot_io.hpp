#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "crosstrack/bbox.hpp"
#include "crosstrack/metrics.hpp"
#include "crosstrack/tracker.hpp"

namespace crosstrack {

/// One line of a MOT-format file: id -1 means a detection without identity.
/// The optional feature vector never touches the text format; it exists so
/// synthesized scenes can carry appearance through the same container.
struct SeqEntry {
    std::int64_t id = -1;
    BBox box; // box.score carries the conf column
    std::optional<std::vector<double>> feature;
};

struct SequenceFrame {
    std::size_t frame = 0;
    std::vector<SeqEntry> entries;
};

/// Frames are contiguous from 1; gaps in the source parse as empty frames.
struct Sequence {
    std::vector<SequenceFrame> frames;

    std::vector<Detection> detections(std::size_t frame_idx) const;
    std::vector<FrameAnnotations> annotations() const;
    std::size_t entry_count() const;
};

/// MOTChallenge text: frame,id,bb_left,bb_top,bb_width,bb_height,conf,x,y,z.
/// Malformed lines raise an error naming the line number.
Sequence parse_mot_file(const std::filesystem::path& path);

/// Inverse of parse for in-range values (x,y,z written as -1).
void write_mot_file(const Sequence& seq, const std::filesystem::path& path);

} // namespace crosstrack
