#include <doctest.h>

#include "advslam/schedule.hpp"
#include "test_util.hpp"

using namespace advslam;
using namespace advslam::test;

TEST_SUITE_BEGIN("schedule");

TEST_CASE("rate 1/3 attacks frames 0, 3, 6") {
    Schedule s = parse_schedule("rate(1/3)");
    SchedulerState state;
    std::vector<int> attacked;
    for (int i = 0; i < 9; ++i) {
        if (should_attack(s, state, i, 0.0)) attacked.push_back(i);
    }
    CHECK(attacked == std::vector<int>{0, 3, 6});
}

TEST_CASE("rate(1) decides exactly like all-frames") {
    const Schedule all = parse_schedule("all");
    const Schedule one = parse_schedule("1/1");
    SchedulerState state;
    for (int i = 0; i < 50; ++i) {
        CHECK(should_attack(all, state, i, 0.0) == should_attack(one, state, i, 0.0));
    }
}

TEST_CASE("rate presets attack ceil or floor of N*p/q frames") {
    for (int q = 1; q <= 7; ++q) {
        Schedule s;
        s.variant = q == 1 ? ScheduleVariant::AllFrames : ScheduleVariant::Rate;
        s.rate_num = 1;
        s.rate_den = q;
        SchedulerState state;
        for (int n = 1; n <= 100; ++n) {
            int count = 0;
            for (int i = 0; i < n; ++i) {
                if (should_attack(s, state, i, 0.0)) ++count;
            }
            const double exact = static_cast<double>(n) / q;
            const bool ok = count == static_cast<int>(std::floor(exact)) ||
                            count == static_cast<int>(std::ceil(exact));
            CHECK(ok);
        }
    }
}

TEST_CASE("general rationals follow the index-mod rule exactly") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int q = 2 + static_cast<int>(rng() % 8);
        const int p = 1 + static_cast<int>(rng() % q);
        Schedule s;
        s.variant = ScheduleVariant::Rate;
        s.rate_num = p;
        s.rate_den = q;
        const int n = 1 + static_cast<int>(rng() % 200);
        SchedulerState state;
        int count = 0;
        for (int i = 0; i < n; ++i) {
            if (should_attack(s, state, i, 0.0)) ++count;
        }
        CHECK(count == (n / q) * p + std::min(n % q, p));
    }
}

TEST_CASE("constant execution times never trigger the time-adaptive attack") {
    Schedule s;
    s.variant = ScheduleVariant::TimeAdaptive;
    SchedulerState state(3);
    for (int i = 0; i < 20; ++i) {
        state.record_execution_time(i, 2.0);
        CHECK_FALSE(should_attack(s, state, i + 1, 0.0));
    }
}

TEST_CASE("a slow frame above the moving average triggers the next frame") {
    Schedule s;
    s.variant = ScheduleVariant::TimeAdaptive;
    SchedulerState state(3);
    state.record_execution_time(0, 1.0);
    CHECK_FALSE(should_attack(s, state, 1, 0.0));  // 1.0 > mean(1.0) is false
    state.record_execution_time(1, 1.0);
    CHECK_FALSE(should_attack(s, state, 2, 0.0));
    state.record_execution_time(2, 4.0);
    // previous frame took 4.0 s, the window mean is (1+1+4)/3 = 2.0
    CHECK(state.moving_average() == doctest::Approx(2.0));
    CHECK(should_attack(s, state, 3, 0.0));
}

TEST_CASE("the moving average is the exact mean of a bounded buffer") {
    SchedulerState state(3);
    state.record_execution_time(0, 1.0);
    CHECK(state.moving_average() == doctest::Approx(1.0));
    state.record_execution_time(1, 2.0);
    state.record_execution_time(2, 3.0);
    CHECK(state.moving_average() == doctest::Approx(2.0));
    state.record_execution_time(3, 4.0);  // evicts the 1.0
    CHECK(state.buffer_size() == 3);
    CHECK(state.moving_average() == doctest::Approx(3.0));

    CHECK_THROWS_AS(state.record_execution_time(4, -1.0), DataError);
}

TEST_CASE("a cumulative window never evicts") {
    SchedulerState state(-1);
    for (int i = 0; i < 100; ++i) state.record_execution_time(i, 1.0 + i);
    CHECK(state.buffer_size() == 100);
    CHECK(state.moving_average() == doctest::Approx(1.0 + 99.0 / 2.0));
}

TEST_CASE("time-adaptive decisions are invariant under uniform time scaling") {
    std::mt19937_64 rng(9);
    Schedule s;
    s.variant = ScheduleVariant::TimeAdaptive;
    for (double scale : {0.001, 3.0, 1000.0}) {
        std::mt19937_64 rng_local(9);
        SchedulerState a(5), b(5);
        for (int i = 0; i < 60; ++i) {
            const double t = uniform(rng_local, 0.1, 2.0);
            a.record_execution_time(i, t);
            b.record_execution_time(i, t * scale);
            CHECK(should_attack(s, a, i + 1, 0.0) == should_attack(s, b, i + 1, 0.0));
        }
    }
}

TEST_CASE("spatially-adaptive decisions follow the region availability") {
    RegionSet regions;
    regions.add(1.0, {5, 5, 10, 10});
    regions.add(1.0, {50, 5, 10, 10});
    regions.add(3.0, {0, 0, 4, 4});

    Schedule s;
    s.variant = ScheduleVariant::SpatiallyAdaptive;
    s.regions = &regions;
    SchedulerState state;
    CHECK(should_attack(s, state, 0, 1.0));
    CHECK_FALSE(should_attack(s, state, 1, 2.0));  // no regions for this frame
    CHECK(should_attack(s, state, 2, 3.0));

    const AttackRegions r1 = regions_for(s, 1.0);
    CHECK_FALSE(r1.full_frame);
    CHECK(r1.boxes.size() == 2);
    const AttackRegions r2 = regions_for(s, 2.0);
    CHECK(r2.boxes.empty());

    const Schedule all = parse_schedule("all");
    CHECK(regions_for(all, 1.0).full_frame);
}

TEST_CASE("coverage statistics are exact") {
    std::vector<double> stamps;
    for (int i = 0; i < 10; ++i) stamps.push_back(i * 0.1);

    SUBCASE("all frames covers everything") {
        const CoverageStats st = coverage_stats(parse_schedule("all"), stamps, 100, 100);
        CHECK(st.frame_fraction == 1.0);
        CHECK(st.pixel_fraction == 1.0);
    }
    SUBCASE("rate 1/2 over 10 frames covers half") {
        const CoverageStats st = coverage_stats(parse_schedule("rate(1/2)"), stamps, 100, 100);
        CHECK(st.frame_fraction == doctest::Approx(0.5));
        CHECK(st.pixel_fraction == 1.0);
    }
    SUBCASE("overlapping boxes count their union once") {
        // two 25% boxes overlapping by 10% of the frame: union is 40%
        RegionSet regions;
        regions.add(stamps[0], {0, 0, 50, 50});    // 25%
        regions.add(stamps[0], {30, 0, 50, 50});   // 25%, overlap 20x50 = 10%
        Schedule s;
        s.variant = ScheduleVariant::SpatiallyAdaptive;
        s.regions = &regions;
        const CoverageStats st = coverage_stats(s, stamps, 100, 100);
        CHECK(st.frame_fraction == doctest::Approx(0.1));
        CHECK(st.pixel_fraction == doctest::Approx(0.40));

        // brute-force pixel-scan oracle for the union fraction
        std::vector<char> mask(100 * 100, 0);
        for (const Box& b : regions.entries().begin()->second) {
            for (int y = b.y; y < b.y + b.h; ++y)
                for (int x = b.x; x < b.x + b.w; ++x) mask[static_cast<size_t>(y) * 100 + x] = 1;
        }
        size_t covered = 0;
        for (char c : mask) covered += c;
        CHECK(box_union_fraction(regions.entries().begin()->second, 100, 100) ==
              doctest::Approx(static_cast<double>(covered) / (100.0 * 100.0)));
    }
    SUBCASE("time-adaptive coverage must come from run flags") {
        Schedule s;
        s.variant = ScheduleVariant::TimeAdaptive;
        CHECK_THROWS_AS(coverage_stats(s, stamps, 100, 100), ConfigError);
        const CoverageStats st = coverage_from_flags({1, 0, 1, 0}, {1.0, 0.0, 0.5, 0.0});
        CHECK(st.frame_fraction == doctest::Approx(0.5));
        CHECK(st.pixel_fraction == doctest::Approx(0.75));
    }
}

TEST_CASE("schedule parsing accepts the documented forms") {
    CHECK(parse_schedule("all").variant == ScheduleVariant::AllFrames);
    CHECK(parse_schedule("time_adaptive").variant == ScheduleVariant::TimeAdaptive);
    CHECK(parse_schedule("spatially_adaptive").variant == ScheduleVariant::SpatiallyAdaptive);
    const Schedule r = parse_schedule("rate(2/5)");
    CHECK(r.variant == ScheduleVariant::Rate);
    CHECK(r.rate_num == 2);
    CHECK(r.rate_den == 5);
    CHECK(parse_schedule("1/4").rate_den == 4);
    CHECK(parse_schedule("1/1").variant == ScheduleVariant::AllFrames);
    CHECK_THROWS_AS(parse_schedule("rate(5/2)"), ConfigError);
    CHECK_THROWS_AS(parse_schedule("garbage"), ConfigError);
}

TEST_SUITE_END();
