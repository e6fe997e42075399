#include "crosstrack/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "crosstrack/assignment.hpp"
#include "crosstrack/io_util.hpp"

namespace crosstrack {

double iou(const BBox& a, const BBox& b) {
    const double ix = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
    const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top());
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.w * a.h + b.w * b.h - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

namespace {

constexpr double kForbidden = -1e9;

using FrameIndex = std::map<std::size_t, const FrameAnnotations*>;

FrameIndex index_frames(const std::vector<FrameAnnotations>& frames) {
    FrameIndex idx;
    for (const FrameAnnotations& f : frames) idx[f.frame] = &f;
    return idx;
}

} // namespace

MetricsReport clear_mot(const std::vector<FrameAnnotations>& gt,
                        const std::vector<FrameAnnotations>& pred, double iou_thr) {
    MetricsReport report;
    for (const FrameAnnotations& f : gt) report.gt += f.entries.size();
    if (report.gt == 0) throw std::invalid_argument("no ground truth");

    const FrameIndex gt_idx = index_frames(gt);
    const FrameIndex pred_idx = index_frames(pred);
    std::set<std::size_t> frames;
    for (const auto& [f, _] : gt_idx) frames.insert(f);
    for (const auto& [f, _] : pred_idx) frames.insert(f);

    std::unordered_map<std::int64_t, std::int64_t> prev_match; // gt id -> pred id, last frame
    std::unordered_map<std::int64_t, std::int64_t> last_hyp;   // gt id -> last hypothesis ever
    std::size_t pred_total = 0;
    std::map<std::pair<std::int64_t, std::int64_t>, std::size_t> overlap; // id-pair counts

    for (std::size_t frame : frames) {
        const auto git = gt_idx.find(frame);
        const auto pit = pred_idx.find(frame);
        const std::vector<FrameEntry> empty;
        const std::vector<FrameEntry>& g = git != gt_idx.end() ? git->second->entries : empty;
        const std::vector<FrameEntry>& p = pit != pred_idx.end() ? pit->second->entries : empty;
        pred_total += p.size();

        // Identity-level overlap pool for IDF1.
        for (const FrameEntry& ge : g) {
            for (const FrameEntry& pe : p) {
                if (iou(ge.box, pe.box) >= iou_thr) {
                    ++overlap[{ge.id, pe.id}];
                }
            }
        }

        std::vector<char> g_used(g.size(), 0), p_used(p.size(), 0);
        std::vector<std::pair<std::size_t, std::size_t>> pairs;

        // Continuity: keep last frame's correspondence while it still holds.
        for (std::size_t i = 0; i < g.size(); ++i) {
            const auto it = prev_match.find(g[i].id);
            if (it == prev_match.end()) continue;
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (!p_used[j] && p[j].id == it->second && iou(g[i].box, p[j].box) >= iou_thr) {
                    pairs.emplace_back(i, j);
                    g_used[i] = 1;
                    p_used[j] = 1;
                    break;
                }
            }
        }

        // Exact matching for the rest, pairs below the threshold forbidden.
        std::vector<std::size_t> g_rest, p_rest;
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!g_used[i]) g_rest.push_back(i);
        }
        for (std::size_t j = 0; j < p.size(); ++j) {
            if (!p_used[j]) p_rest.push_back(j);
        }
        if (!g_rest.empty() && !p_rest.empty()) {
            Matrix scores(g_rest.size(), p_rest.size());
            for (std::size_t a = 0; a < g_rest.size(); ++a) {
                for (std::size_t b = 0; b < p_rest.size(); ++b) {
                    const double v = iou(g[g_rest[a]].box, p[p_rest[b]].box);
                    scores.at(a, b) = v >= iou_thr ? v : kForbidden;
                }
            }
            const AssignmentResult assignment = hungarian(scores, /*maximize=*/true);
            for (std::size_t b = 0; b < p_rest.size(); ++b) {
                if (!assignment.match[b]) continue;
                const std::size_t a = *assignment.match[b];
                if (scores.at(a, b) <= kForbidden) continue; // forced, not a real match
                pairs.emplace_back(g_rest[a], p_rest[b]);
            }
        }

        prev_match.clear();
        std::size_t matched = pairs.size();
        for (const auto& [i, j] : pairs) {
            const std::int64_t gid = g[i].id;
            const std::int64_t pid = p[j].id;
            const auto it = last_hyp.find(gid);
            if (it != last_hyp.end() && it->second != pid) {
                ++report.ids;
            }
            last_hyp[gid] = pid;
            prev_match[gid] = pid;
        }
        report.fn += g.size() - matched;
        report.fp += p.size() - matched;
    }

    report.mota = 1.0 - static_cast<double>(report.fn + report.fp + report.ids) /
                            static_cast<double>(report.gt);

    // IDF1: one global bipartite matching of identities on overlap counts.
    if (!overlap.empty()) {
        std::vector<std::int64_t> gids, pids;
        std::map<std::int64_t, std::size_t> gpos, ppos;
        for (const auto& [key, count] : overlap) {
            if (!gpos.count(key.first)) {
                gpos[key.first] = gids.size();
                gids.push_back(key.first);
            }
            if (!ppos.count(key.second)) {
                ppos[key.second] = pids.size();
                pids.push_back(key.second);
            }
        }
        Matrix counts(gids.size(), pids.size(), 0.0);
        for (const auto& [key, count] : overlap) {
            counts.at(gpos[key.first], ppos[key.second]) = static_cast<double>(count);
        }
        const AssignmentResult idmatch = hungarian(counts, /*maximize=*/true);
        const double idtp = idmatch.objective;
        report.idf1 = 2.0 * idtp / static_cast<double>(report.gt + pred_total);
    } else {
        report.idf1 = 0.0;
    }
    return report;
}

std::string metrics_to_json(const MetricsReport& report) {
    nlohmann::json j;
    j["mota"] = report.mota;
    j["idf1"] = report.idf1;
    j["ids"] = report.ids;
    j["fp"] = report.fp;
    j["fn"] = report.fn;
    j["gt"] = report.gt;
    return j.dump(1) + "\n";
}

std::string metrics_to_csv_line(const MetricsReport& report) {
    std::ostringstream os;
    os << report.mota << ',' << report.idf1 << ',' << report.ids << ','
       << report.fp << ',' << report.fn << ',' << report.gt << '\n';
    return os.str();
}

void write_metrics_json(const MetricsReport& report, const std::filesystem::path& path) {
    write_text_atomic(metrics_to_json(report), path);
}

} // namespace crosstrack
