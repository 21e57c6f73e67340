#include "advslam/pipeline.hpp"

namespace advslam {

namespace {

class TumSource final : public FrameSource {
public:
    TumSource(const SequenceManifest& manifest, double depth_factor, const Intrinsics& K)
        : manifest_(manifest), depth_factor_(depth_factor), K_(K) {}

    size_t size() const override { return manifest_.associations.size(); }
    double timestamp(size_t i) const override {
        return manifest_.rgb[manifest_.associations[i].rgb].timestamp;
    }
    ImageFrame rgb(size_t i) const override {
        const auto& entry = manifest_.rgb[manifest_.associations[i].rgb];
        ImageFrame f = decode_rgb(manifest_.root / entry.path);
        f.timestamp = entry.timestamp;
        return f;
    }
    DepthFrame depth(size_t i) const override {
        const auto& entry = manifest_.depth[manifest_.associations[i].depth];
        DepthFrame f = decode_depth(manifest_.root / entry.path, depth_factor_);
        f.timestamp = entry.timestamp;
        return f;
    }
    std::optional<Pose> ground_truth(size_t i) const override {
        const int gt = manifest_.associations[i].gt;
        if (gt < 0) return std::nullopt;
        return manifest_.ground_truth[gt].pose;
    }
    Intrinsics intrinsics() const override { return K_; }
    std::string description() const override { return "tum:" + manifest_.root.string(); }

private:
    SequenceManifest manifest_;
    double depth_factor_;
    Intrinsics K_;
};

class SyntheticSource final : public FrameSource {
public:
    SyntheticSource(SyntheticSequence seq, const Intrinsics& K) : seq_(std::move(seq)), K_(K) {}

    size_t size() const override { return seq_.frames.size(); }
    double timestamp(size_t i) const override { return seq_.frames[i].timestamp; }
    ImageFrame rgb(size_t i) const override { return seq_.frames[i]; }
    DepthFrame depth(size_t i) const override { return seq_.depths[i]; }
    std::optional<Pose> ground_truth(size_t i) const override {
        return seq_.ground_truth[i].pose;
    }
    Intrinsics intrinsics() const override { return K_; }
    std::string description() const override { return "synthetic"; }

private:
    SyntheticSequence seq_;
    Intrinsics K_;
};

}  // namespace

std::unique_ptr<FrameSource> make_tum_source(const SequenceManifest& manifest, double depth_factor,
                                             const Intrinsics& K) {
    return std::make_unique<TumSource>(manifest, depth_factor, K);
}

std::unique_ptr<FrameSource> make_synthetic_source(SyntheticSequence sequence,
                                                   const Intrinsics& K) {
    return std::make_unique<SyntheticSource>(std::move(sequence), K);
}

double proxy_seconds(double work_units) { return work_units * 1e-7; }

SequenceRunResult run_sequence(FrameSource& source, const SurrogateModel* model,
                               const AttackConfig& attack_cfg, AttackTarget target,
                               const Schedule& schedule, const FrontendConfig& frontend_cfg,
                               const EstimatorConfig& estimator_cfg, TimingMode timing) {
    if (source.size() == 0) throw DataError("empty frame source");
    schedule.validate();
    attack_cfg.validate();

    SequenceRunResult out;
    out.results.reserve(source.size());
    out.log.reserve(source.size());

    Tracker tracker(frontend_cfg, estimator_cfg, source.intrinsics());
    SchedulerState state(schedule.window);

    const bool attacking = target != AttackTarget::None && model != nullptr;
    const int n = static_cast<int>(source.size());
    for (int i = 0; i < n; ++i) {
        const double ts = source.timestamp(i);
        ImageFrame rgb;
        DepthFrame depth;
        try {
            rgb = source.rgb(i);
            depth = source.depth(i);
        } catch (const DataError& e) {
            throw DataError("frame " + std::to_string(i) + ", load stage: " + e.what());
        }

        PerFrameLog log;
        log.frame = i;
        log.timestamp = ts;

        const bool decide = attacking && should_attack(schedule, state, i, ts);
        if (decide) {
            const AttackRegions regions = regions_for(schedule, ts);
            log.attacked = true;
            log.pixel_fraction =
                regions.full_frame ? 1.0 : box_union_fraction(regions.boxes, rgb.width, rgb.height);

            try {
                if (target == AttackTarget::Rgb || target == AttackTarget::Both) {
                    const int true_label = surrogate_true_label(*model, rgb);
                    int label = true_label;
                    if (attack_cfg.mode == AttackMode::Targeted) {
                        label = pick_target_label(attack_cfg, static_cast<uint64_t>(i), true_label,
                                                  model->classes());
                        log.target_label = label;
                    }
                    Perturbation p = compute_perturbation(*model, rgb, label, attack_cfg);
                    if (!regions.full_frame) p = mask_perturbation(std::move(p), regions.boxes);
                    rgb = apply_perturbation(rgb, p).frame;
                }
                if (target == AttackTarget::Depth || target == AttackTarget::Both) {
                    const int true_label = surrogate_true_label_depth(*model, depth, attack_cfg);
                    int label = true_label;
                    if (attack_cfg.mode == AttackMode::Targeted) {
                        label = pick_target_label(attack_cfg, static_cast<uint64_t>(i), true_label,
                                                  model->classes());
                        log.target_label = label;
                    }
                    depth = attack_depth(*model, depth, label, attack_cfg,
                                         regions.full_frame ? nullptr : &regions.boxes);
                }
            } catch (const DataError& e) {
                throw DataError("frame " + std::to_string(i) + ", attack stage: " + e.what());
            }
        }

        TrackingResult result = tracker.track(rgb, depth);
        result.exec_time = timing == TimingMode::Wallclock ? result.wall_seconds
                                                           : proxy_seconds(result.work_units);
        state.record_execution_time(i, result.exec_time);

        log.tracked = result.outcome == TrackOutcome::Tracked;
        log.features = result.features;
        log.matches = result.matches;
        log.inliers = result.inliers;
        log.exec_time = result.exec_time;
        log.moving_average = state.moving_average();

        if (auto gt = source.ground_truth(i)) {
            out.ground_truth.timestamps.push_back(ts);
            out.ground_truth.poses.push_back(*gt);
        }
        out.results.push_back(std::move(result));
        out.log.push_back(log);
    }
    return out;
}

}  // namespace advslam
