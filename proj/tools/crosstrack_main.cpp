#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "crosstrack/assignment.hpp"
#include "crosstrack/gradcheck.hpp"
#include "crosstrack/io_util.hpp"
#include "crosstrack/metrics.hpp"
#include "crosstrack/mot_io.hpp"
#include "crosstrack/pipeline.hpp"
#include "crosstrack/scene.hpp"
#include "crosstrack/tracker.hpp"
#include "crosstrack/weights.hpp"

namespace {

using namespace crosstrack;

// Sidecar feature file: [{"frame": 1, "features": [[...], ...]}, ...] with
// one feature row per detection line of that frame, in file order.
void attach_features(Sequence& seq, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open feature file " + path);
    nlohmann::json j;
    in >> j;
    for (const auto& block : j) {
        const auto frame = block.at("frame").get<std::size_t>();
        if (frame == 0 || frame > seq.frames.size()) {
            throw std::runtime_error("feature file references unknown frame " +
                                     std::to_string(frame));
        }
        auto& entries = seq.frames[frame - 1].entries;
        const auto& rows = block.at("features");
        if (rows.size() != entries.size()) {
            throw std::runtime_error("feature count mismatch at frame " +
                                     std::to_string(frame));
        }
        for (std::size_t i = 0; i < entries.size(); ++i) {
            entries[i].feature = rows[i].get<std::vector<double>>();
        }
    }
}

std::string features_to_json(const Sequence& seq) {
    nlohmann::json j = nlohmann::json::array();
    for (const SequenceFrame& f : seq.frames) {
        nlohmann::json rows = nlohmann::json::array();
        for (const SeqEntry& e : f.entries) {
            rows.push_back(e.feature ? nlohmann::json(*e.feature)
                                     : nlohmann::json(std::vector<double>{}));
        }
        j.push_back({{"frame", f.frame}, {"features", std::move(rows)}});
    }
    return j.dump() + "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Detector-free tracking core: cross-softmax association, "
                 "assignment benchmark, synthetic scenes and CLEAR scoring"};
    app.require_subcommand(1);

    // bench-assign
    auto* bench = app.add_subcommand("bench-assign", "Linear-assignment benchmark");
    std::size_t bench_n = 500, bench_trials = 10000;
    std::uint64_t bench_seed = 1;
    std::string bench_out;
    bench->add_option("--n", bench_n, "Cost map size")->check(CLI::Range(std::size_t(2), std::size_t(100000)));
    bench->add_option("--trials", bench_trials, "Trial count")->check(CLI::PositiveNumber);
    bench->add_option("--seed", bench_seed, "RNG seed");
    bench->add_option("--out", bench_out, "CSV output path");

    // track
    auto* track = app.add_subcommand("track", "Run the tracker over a MOT detection file");
    std::string track_dets, track_weights, track_config, track_out, track_feats;
    track->add_option("--dets", track_dets, "MOT detections")->required();
    track->add_option("--weights", track_weights, "JSON weight file (default: untrained dot-product weights)");
    track->add_option("--config", track_config, "JSON tracker config");
    track->add_option("--feats", track_feats, "JSON feature sidecar");
    track->add_option("--out", track_out, "Output MOT track file")->required();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Synthesize a scene");
    std::string sim_scene, sim_dets, sim_gt, sim_feats;
    sim->add_option("--scene", sim_scene, "Scene config (JSON)")->required();
    sim->add_option("--out-dets", sim_dets, "Detections output")->required();
    sim->add_option("--out-gt", sim_gt, "Ground-truth output")->required();
    sim->add_option("--out-feats", sim_feats, "Feature sidecar output (JSON)");

    // eval
    auto* eval = app.add_subcommand("eval", "CLEAR MOT scoring");
    std::string eval_gt, eval_pred, eval_out;
    double eval_iou = 0.5;
    eval->add_option("--gt", eval_gt, "Ground-truth MOT file")->required();
    eval->add_option("--pred", eval_pred, "Predicted MOT file")->required();
    eval->add_option("--out", eval_out, "Metrics JSON output");
    eval->add_option("--iou", eval_iou, "Match threshold");

    // gradcheck
    auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient suites");
    std::uint64_t grad_seed = 1;
    grad->add_option("--seed", grad_seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (bench->parsed()) {
            const BenchReport report = bench_assignment(bench_n, bench_trials, bench_seed);
            const std::string csv = bench_report_csv(report);
            if (!bench_out.empty()) {
                write_text_atomic(csv, bench_out);
            }
            std::cout << csv;
            return 0;
        }

        if (track->parsed()) {
            Sequence dets = parse_mot_file(track_dets);
            if (!track_feats.empty()) attach_features(dets, track_feats);
            TrackerConfig config;
            if (!track_config.empty()) config = load_tracker_config(track_config);
            const PipelineWeights weights = track_weights.empty()
                                                ? default_weights(config.dim)
                                                : load_weights(track_weights);
            const TrackingRun run = run_tracker(dets, config, weights);
            write_mot_file(run.tracks, track_out);
            std::cout << "tracked " << dets.frames.size() << " frames, "
                      << run.tracks.entry_count() << " outputs\n";
            return 0;
        }

        if (sim->parsed()) {
            const SceneConfig cfg = load_scene_config(sim_scene);
            const SceneData data = synthesize_scene(cfg);
            write_mot_file(data.detections, sim_dets);
            write_mot_file(data.ground_truth, sim_gt);
            if (!sim_feats.empty()) {
                write_text_atomic(features_to_json(data.detections), sim_feats);
            }
            std::cout << "synthesized " << cfg.frames << " frames, "
                      << data.detections.entry_count() << " detections\n";
            return 0;
        }

        if (eval->parsed()) {
            const Sequence gt = parse_mot_file(eval_gt);
            const Sequence pred = parse_mot_file(eval_pred);
            const MetricsReport report =
                clear_mot(gt.annotations(), pred.annotations(), eval_iou);
            if (!eval_out.empty()) write_metrics_json(report, eval_out);
            std::cout << "mota,idf1,ids,fp,fn,gt\n" << metrics_to_csv_line(report);
            return 0;
        }

        if (grad->parsed()) {
            return run_all_gradchecks(grad_seed, std::cout) ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
