#include "advslam/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace advslam {

void Schedule::validate() const {
    if (variant == ScheduleVariant::Rate) {
        if (rate_num < 1 || rate_den < 1 || rate_num > rate_den) {
            throw ConfigError("rate must be a rational in (0, 1]");
        }
    }
    if (variant == ScheduleVariant::TimeAdaptive && window == 0) {
        throw ConfigError("time-adaptive window must be >= 1 (or < 0 for cumulative)");
    }
    if (variant == ScheduleVariant::SpatiallyAdaptive && regions == nullptr) {
        throw ConfigError("spatially-adaptive schedule needs a region source");
    }
}

std::string Schedule::name() const {
    switch (variant) {
        case ScheduleVariant::AllFrames:
            return "all";
        case ScheduleVariant::Rate: {
            std::ostringstream os;
            os << "rate(" << rate_num << "/" << rate_den << ")";
            return os.str();
        }
        case ScheduleVariant::TimeAdaptive:
            return "time_adaptive";
        case ScheduleVariant::SpatiallyAdaptive:
            return "spatially_adaptive";
    }
    return "?";
}

Schedule parse_schedule(const std::string& text) {
    Schedule s;
    std::string t = text;
    t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }),
            t.end());
    if (t == "all" || t == "all_frames" || t == "allframes") {
        s.variant = ScheduleVariant::AllFrames;
        return s;
    }
    if (t == "time_adaptive" || t == "timeadaptive") {
        s.variant = ScheduleVariant::TimeAdaptive;
        return s;
    }
    if (t == "spatially_adaptive" || t == "spatiallyadaptive") {
        s.variant = ScheduleVariant::SpatiallyAdaptive;
        return s;
    }
    std::string frac = t;
    if (t.rfind("rate(", 0) == 0 && t.back() == ')') frac = t.substr(5, t.size() - 6);
    else if (t.rfind("rate=", 0) == 0) frac = t.substr(5);
    int num = 0, den = 1;
    const size_t slash = frac.find('/');
    try {
        if (slash == std::string::npos) {
            num = std::stoi(frac);
            den = 1;
        } else {
            num = std::stoi(frac.substr(0, slash));
            den = std::stoi(frac.substr(slash + 1));
        }
    } catch (const std::exception&) {
        throw ConfigError("cannot parse schedule '" + text + "'");
    }
    s.variant = num == den ? ScheduleVariant::AllFrames : ScheduleVariant::Rate;
    s.rate_num = num;
    s.rate_den = den;
    if (s.variant == ScheduleVariant::Rate) s.validate();
    return s;
}

SchedulerState::SchedulerState(int window) : window_(window) {}

void SchedulerState::record_execution_time(int /*frame_index*/, double seconds) {
    if (seconds < 0.0) throw DataError("negative execution time");
    times_.push_back(seconds);
    last_time_ = seconds;
    if (window_ > 0) {
        while (static_cast<int>(times_.size()) > window_) times_.pop_front();
    }
}

double SchedulerState::moving_average() const {
    if (times_.empty()) return 0.0;
    // recomputed every call; no incremental drift
    double sum = 0.0;
    for (double t : times_) sum += t;
    return sum / static_cast<double>(times_.size());
}

bool should_attack(const Schedule& schedule, const SchedulerState& state, int frame_index,
                   double frame_timestamp) {
    switch (schedule.variant) {
        case ScheduleVariant::AllFrames:
            return true;
        case ScheduleVariant::Rate:
            return frame_index % schedule.rate_den < schedule.rate_num;
        case ScheduleVariant::TimeAdaptive:
            return state.has_samples() && state.last_time() > state.moving_average();
        case ScheduleVariant::SpatiallyAdaptive:
            return schedule.regions != nullptr &&
                   !schedule.regions->boxes_for(frame_timestamp).empty();
    }
    return false;
}

AttackRegions regions_for(const Schedule& schedule, double frame_timestamp) {
    AttackRegions r;
    if (schedule.variant != ScheduleVariant::SpatiallyAdaptive) return r;
    r.full_frame = false;
    if (schedule.regions) r.boxes = schedule.regions->boxes_for(frame_timestamp);
    return r;
}

double box_union_fraction(const std::vector<Box>& boxes, int frame_w, int frame_h) {
    if (frame_w <= 0 || frame_h <= 0) return 0.0;
    // row-interval union; exact and cheap for a handful of boxes
    size_t covered = 0;
    std::vector<std::pair<int, int>> spans;
    for (int y = 0; y < frame_h; ++y) {
        spans.clear();
        for (const Box& raw : boxes) {
            const Box b = clamp_box(raw, frame_w, frame_h);
            if (b.w == 0 || b.h == 0 || y < b.y || y >= b.y + b.h) continue;
            spans.emplace_back(b.x, b.x + b.w);
        }
        if (spans.empty()) continue;
        std::sort(spans.begin(), spans.end());
        int cur_lo = spans[0].first, cur_hi = spans[0].second;
        for (size_t i = 1; i < spans.size(); ++i) {
            if (spans[i].first > cur_hi) {
                covered += static_cast<size_t>(cur_hi - cur_lo);
                cur_lo = spans[i].first;
                cur_hi = spans[i].second;
            } else {
                cur_hi = std::max(cur_hi, spans[i].second);
            }
        }
        covered += static_cast<size_t>(cur_hi - cur_lo);
    }
    return static_cast<double>(covered) / (static_cast<double>(frame_w) * frame_h);
}

CoverageStats coverage_stats(const Schedule& schedule, const std::vector<double>& frame_timestamps,
                             int frame_w, int frame_h) {
    CoverageStats st;
    const size_t n = frame_timestamps.size();
    if (n == 0) return st;
    switch (schedule.variant) {
        case ScheduleVariant::AllFrames:
            st.frame_fraction = 1.0;
            st.pixel_fraction = 1.0;
            break;
        case ScheduleVariant::Rate: {
            size_t attacked = 0;
            for (size_t i = 0; i < n; ++i) {
                if (static_cast<int>(i % schedule.rate_den) < schedule.rate_num) ++attacked;
            }
            st.frame_fraction = static_cast<double>(attacked) / n;
            st.pixel_fraction = attacked ? 1.0 : 0.0;
            break;
        }
        case ScheduleVariant::SpatiallyAdaptive: {
            if (!schedule.regions) break;
            size_t attacked = 0;
            double pixel_sum = 0.0;
            for (double ts : frame_timestamps) {
                const auto& boxes = schedule.regions->boxes_for(ts);
                if (boxes.empty()) continue;
                ++attacked;
                pixel_sum += box_union_fraction(boxes, frame_w, frame_h);
            }
            st.frame_fraction = static_cast<double>(attacked) / n;
            st.pixel_fraction = attacked ? pixel_sum / attacked : 0.0;
            break;
        }
        case ScheduleVariant::TimeAdaptive:
            throw ConfigError("time-adaptive coverage depends on runtime timing; "
                              "use coverage_from_flags on the run log");
    }
    return st;
}

CoverageStats coverage_from_flags(const std::vector<char>& attacked,
                                  const std::vector<double>& pixel_fractions) {
    CoverageStats st;
    if (attacked.empty()) return st;
    size_t count = 0;
    double pixel_sum = 0.0;
    for (size_t i = 0; i < attacked.size(); ++i) {
        if (!attacked[i]) continue;
        ++count;
        pixel_sum += i < pixel_fractions.size() ? pixel_fractions[i] : 1.0;
    }
    st.frame_fraction = static_cast<double>(count) / attacked.size();
    st.pixel_fraction = count ? pixel_sum / count : 0.0;
    return st;
}

}  // namespace advslam
