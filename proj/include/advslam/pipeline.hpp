#ifndef ADVSLAM_PIPELINE_HPP
#define ADVSLAM_PIPELINE_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advslam/attack.hpp"
#include "advslam/config.hpp"
#include "advslam/metrics.hpp"
#include "advslam/odometry.hpp"
#include "advslam/schedule.hpp"
#include "advslam/surrogate.hpp"
#include "advslam/synthetic.hpp"

namespace advslam {

/// Uniform frame access for the tracking loop, backed by a TUM directory or an
/// in-memory synthetic sequence.
class FrameSource {
public:
    virtual ~FrameSource() = default;
    virtual size_t size() const = 0;
    virtual double timestamp(size_t i) const = 0;
    virtual ImageFrame rgb(size_t i) const = 0;
    virtual DepthFrame depth(size_t i) const = 0;
    virtual std::optional<Pose> ground_truth(size_t i) const = 0;
    virtual Intrinsics intrinsics() const = 0;
    virtual std::string description() const = 0;
};

std::unique_ptr<FrameSource> make_tum_source(const SequenceManifest& manifest, double depth_factor,
                                             const Intrinsics& K);
std::unique_ptr<FrameSource> make_synthetic_source(SyntheticSequence sequence, const Intrinsics& K);

struct PerFrameLog {
    int frame = 0;
    double timestamp = 0.0;
    bool attacked = false;
    double pixel_fraction = 0.0;  // fraction of pixels covered by the attack
    int target_label = -1;        // -1 for untargeted or unattacked frames
    bool tracked = false;
    int features = 0;
    int matches = 0;
    int inliers = 0;
    double exec_time = 0.0;
    double moving_average = 0.0;  // scheduler state after this frame
};

struct SequenceRunResult {
    std::vector<TrackingResult> results;
    std::vector<PerFrameLog> log;
    Trajectory ground_truth;  // only frames that carry ground truth
};

/// The full per-frame loop: scheduler decision, optional RGB/depth attack,
/// tracking, execution-time feedback into the scheduler. Deterministic given
/// the configs and seeds (with deterministic timing). The loop is sequential;
/// the Time-Adaptive schedule decides frame i from frame i-1's timing, so
/// frames cannot be attacked ahead of tracking under that schedule.
SequenceRunResult run_sequence(FrameSource& source, const SurrogateModel* model,
                               const AttackConfig& attack_cfg, AttackTarget target,
                               const Schedule& schedule, const FrontendConfig& frontend_cfg,
                               const EstimatorConfig& estimator_cfg, TimingMode timing);

/// Deterministic execution-time proxy derived from the tracker's work counter.
double proxy_seconds(double work_units);

}  // namespace advslam

#endif
