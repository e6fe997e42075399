#include "crosstrack/mot_io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "crosstrack/io_util.hpp"

namespace crosstrack {

std::vector<Detection> Sequence::detections(std::size_t frame_idx) const {
    std::vector<Detection> out;
    if (frame_idx == 0 || frame_idx > frames.size()) return out;
    for (const SeqEntry& e : frames[frame_idx - 1].entries) {
        out.push_back(Detection{e.box, e.feature});
    }
    return out;
}

std::vector<FrameAnnotations> Sequence::annotations() const {
    std::vector<FrameAnnotations> out;
    out.reserve(frames.size());
    for (const SequenceFrame& f : frames) {
        FrameAnnotations fa;
        fa.frame = f.frame;
        for (const SeqEntry& e : f.entries) {
            if (e.id >= 0) fa.entries.push_back({e.id, e.box});
        }
        out.push_back(std::move(fa));
    }
    return out;
}

std::size_t Sequence::entry_count() const {
    std::size_t n = 0;
    for (const SequenceFrame& f : frames) n += f.entries.size();
    return n;
}

namespace {

[[noreturn]] void malformed(std::size_t line_no, const std::string& why) {
    throw std::runtime_error("malformed MOT line " + std::to_string(line_no) + ": " + why);
}

std::vector<double> split_numeric(const std::string& line, std::size_t line_no) {
    std::vector<double> fields;
    std::size_t pos = 0;
    while (pos <= line.size()) {
        std::size_t comma = line.find(',', pos);
        if (comma == std::string::npos) comma = line.size();
        std::string token = line.substr(pos, comma - pos);
        // trim
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.front()))) {
            token.erase(token.begin());
        }
        while (!token.empty() && std::isspace(static_cast<unsigned char>(token.back()))) {
            token.pop_back();
        }
        if (token.empty()) malformed(line_no, "empty field");
        try {
            std::size_t used = 0;
            fields.push_back(std::stod(token, &used));
            if (used != token.size()) malformed(line_no, "not a number: '" + token + "'");
        } catch (const std::exception&) {
            malformed(line_no, "not a number: '" + token + "'");
        }
        pos = comma + 1;
        if (comma == line.size()) break;
    }
    return fields;
}

} // namespace

Sequence parse_mot_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());

    Sequence seq;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const std::vector<double> f = split_numeric(line, line_no);
        if (f.size() < 7 || f.size() > 10) {
            malformed(line_no, "expected 7-10 fields, got " + std::to_string(f.size()));
        }
        const double frame_d = f[0];
        if (frame_d < 1 || frame_d != std::floor(frame_d)) {
            malformed(line_no, "frame index must be a positive integer");
        }
        if (f[1] != std::floor(f[1])) malformed(line_no, "id must be an integer");
        if (f[4] <= 0 || f[5] <= 0) malformed(line_no, "box width/height must be positive");

        SeqEntry entry;
        entry.id = static_cast<std::int64_t>(f[1]);
        entry.box.w = f[4];
        entry.box.h = f[5];
        entry.box.cx = f[2] + 0.5 * f[4];
        entry.box.cy = f[3] + 0.5 * f[5];
        entry.box.score = f[6];

        const auto frame = static_cast<std::size_t>(frame_d);
        if (frame > seq.frames.size()) {
            const std::size_t old = seq.frames.size();
            seq.frames.resize(frame);
            for (std::size_t i = old; i < frame; ++i) seq.frames[i].frame = i + 1;
        }
        seq.frames[frame - 1].entries.push_back(std::move(entry));
    }
    return seq;
}

void write_mot_file(const Sequence& seq, const std::filesystem::path& path) {
    std::ostringstream os;
    char buf[256];
    for (const SequenceFrame& f : seq.frames) {
        for (const SeqEntry& e : f.entries) {
            std::snprintf(buf, sizeof(buf), "%zu,%lld,%.10g,%.10g,%.10g,%.10g,%.10g,-1,-1,-1\n",
                          f.frame, static_cast<long long>(e.id), e.box.left(), e.box.top(),
                          e.box.w, e.box.h, e.box.score);
            os << buf;
        }
    }
    write_text_atomic(os.str(), path);
}

} // namespace crosstrack
