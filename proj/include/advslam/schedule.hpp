#ifndef ADVSLAM_SCHEDULE_HPP
#define ADVSLAM_SCHEDULE_HPP

#include <deque>
#include <string>
#include <vector>

#include "advslam/core.hpp"
#include "advslam/dataset.hpp"

namespace advslam {

enum class ScheduleVariant { AllFrames, Rate, TimeAdaptive, SpatiallyAdaptive };

struct Schedule {
    ScheduleVariant variant = ScheduleVariant::AllFrames;
    int rate_num = 1;  // F = rate_num / rate_den in (0, 1]
    int rate_den = 1;
    int window = 30;   // TimeAdaptive moving-average window; <= 0 means cumulative
    const RegionSet* regions = nullptr;  // SpatiallyAdaptive region source

    void validate() const;
    std::string name() const;
};

/// Parses "all", "rate(1/3)", "time_adaptive", "spatially_adaptive" (and the
/// bare fraction form "1/3").
Schedule parse_schedule(const std::string& text);

/// Ring buffer of per-frame tracking execution times feeding the
/// Time-Adaptive trigger. Sequential by nature; owned by one pipeline run.
class SchedulerState {
public:
    explicit SchedulerState(int window = 30);

    /// Appends the execution time of a completed frame, evicting the oldest
    /// entry at capacity. Negative times are rejected.
    void record_execution_time(int frame_index, double seconds);

    /// Arithmetic mean of the buffer contents; 0 when empty.
    double moving_average() const;
    bool has_samples() const { return !times_.empty(); }
    double last_time() const { return last_time_; }
    size_t buffer_size() const { return times_.size(); }

private:
    int window_;
    std::deque<double> times_;
    double last_time_ = 0.0;
};

/// Per-frame attack decision.
///  - AllFrames: always.
///  - Rate(p/q): frame_index mod q < p (uniform spacing).
///  - TimeAdaptive: the previous frame's execution time strictly exceeds the
///    current moving average (frame i is judged by frame i-1).
///  - SpatiallyAdaptive: the frame has at least one region.
bool should_attack(const Schedule& schedule, const SchedulerState& state, int frame_index,
                   double frame_timestamp);

/// Boxes the attack is restricted to. full_frame is true for every variant
/// except SpatiallyAdaptive, whose box list may be empty (no attack).
struct AttackRegions {
    bool full_frame = true;
    std::vector<Box> boxes;
};
AttackRegions regions_for(const Schedule& schedule, double frame_timestamp);

/// Fraction of the frame covered by the union of the clamped boxes.
double box_union_fraction(const std::vector<Box>& boxes, int frame_w, int frame_h);

struct CoverageStats {
    double frame_fraction = 0.0;  // attacked frames / all frames
    double pixel_fraction = 0.0;  // mean attacked-pixel fraction over attacked frames
};

/// Static coverage for AllFrames, Rate and SpatiallyAdaptive over the given
/// frame timestamps. TimeAdaptive coverage depends on runtime timing; use
/// coverage_from_flags on the run log instead.
CoverageStats coverage_stats(const Schedule& schedule, const std::vector<double>& frame_timestamps,
                             int frame_w, int frame_h);

/// Exact coverage from recorded per-frame attack flags and pixel fractions.
CoverageStats coverage_from_flags(const std::vector<char>& attacked,
                                  const std::vector<double>& pixel_fractions);

}  // namespace advslam

#endif
