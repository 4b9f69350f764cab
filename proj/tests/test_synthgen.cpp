// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gaze/errors.hpp"
#include "gaze/parser.hpp"
#include "gaze/synthgen.hpp"
#include "support/generators.hpp"

using namespace gaze;

TEST_SUITE("synthgen") {

TEST_CASE("one-second fixation at 100 Hz yields 101 constant samples") {
    EventScript script;
    script.rate_hz = 100.0;
    script.segments = {{EventClass::Fixation, 1.0, 0.0}};
    const SyntheticTrace synthetic = generate_trace(script);
    REQUIRE(synthetic.trace.sample_count() == 101);
    for (const GazeSample& s : synthetic.trace.samples) {
        CHECK(s.yaw == 0.0);
        CHECK(s.pitch == 0.0);
    }
    REQUIRE(synthetic.ground_truth.events.size() == 1);
    CHECK(synthetic.ground_truth.events[0].event_class == EventClass::Fixation);
    CHECK(synthetic.ground_truth.events[0].start_t == 0.0);
}

TEST_CASE("planted fixation-saccade-fixation recovers within one sample") {
    EventScript script;
    script.rate_hz = 100.0;
    script.segments = {{EventClass::Fixation, 0.5, 0.0},
                       {EventClass::Saccade, 0.05, 300.0},
                       {EventClass::Fixation, 0.5, 0.0}};
    const SyntheticTrace synthetic = generate_trace(script);
    const EventSequence parsed = parse(synthetic.trace, ParserConfig{});
    REQUIRE(parsed.events.size() == 3);
    const double dt = 1.0 / script.rate_hz;
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(parsed.events[i].event_class ==
              synthetic.ground_truth.events[i].event_class);
        CHECK(std::abs(parsed.events[i].start_t -
                       synthetic.ground_truth.events[i].start_t) <= dt + 1e-12);
        CHECK(std::abs(parsed.events[i].end_t -
                       synthetic.ground_truth.events[i].end_t) <= dt + 1e-12);
    }
}

TEST_CASE("same script and seed give identical traces") {
    EventScript script;
    script.rate_hz = 100.0;
    script.noise_deg = 0.05;
    script.seed = 1234;
    script.segments = {{EventClass::Fixation, 0.3, 0.0},
                       {EventClass::Saccade, 0.05, 400.0}};
    const SyntheticTrace a = generate_trace(script);
    const SyntheticTrace b = generate_trace(script);
    REQUIRE(a.trace.sample_count() == b.trace.sample_count());
    for (std::size_t i = 0; i < a.trace.samples.size(); ++i) {
        CHECK(a.trace.samples[i].yaw == b.trace.samples[i].yaw);
        CHECK(a.trace.samples[i].pitch == b.trace.samples[i].pitch);
    }

    script.seed = 99;
    const SyntheticTrace c = generate_trace(script);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.trace.samples.size(); ++i) {
        any_difference |= a.trace.samples[i].yaw != c.trace.samples[i].yaw;
    }
    CHECK(any_difference);
}

TEST_CASE("script validation rejects forbidden speed bands") {
    const ParserConfig config;
    EventScript script;
    script.rate_hz = 100.0;

    script.segments = {{EventClass::Fixation, 0.5, 50.0}}; // >= v_low
    CHECK_THROWS_AS(validate_script(script, config), InputError);

    script.segments = {{EventClass::SmoothPursuit, 0.5, 20.0}}; // below band
    CHECK_THROWS_AS(validate_script(script, config), InputError);
    script.segments = {{EventClass::SmoothPursuit, 0.5, 100.0}}; // boundary
    CHECK_THROWS_AS(validate_script(script, config), InputError);

    script.segments = {{EventClass::Saccade, 0.05, 80.0}}; // below v_high
    CHECK_THROWS_AS(validate_script(script, config), InputError);

    script.segments = {{EventClass::SmoothPursuit, 0.5, 60.0}};
    CHECK_NOTHROW(validate_script(script, config));
}

TEST_CASE("script validation rejects degenerate structure") {
    const ParserConfig config;
    EventScript script;

    script.rate_hz = 0.0;
    script.segments = {{EventClass::Fixation, 0.5, 0.0}};
    CHECK_THROWS_AS(validate_script(script, config), InputError);

    script.rate_hz = 100.0;
    script.segments = {};
    CHECK_THROWS_AS(validate_script(script, config), InputError);

    script.segments = {{EventClass::Fixation, 0.5, 0.0},
                       {EventClass::Fixation, 0.5, 0.0}}; // adjacent same class
    CHECK_THROWS_AS(validate_script(script, config), InputError);

    script.segments = {{EventClass::Saccade, 0.01, 300.0}}; // one velocity sample
    CHECK_THROWS_AS(validate_script(script, config), InputError);
}

TEST_CASE("property: zero-noise scripts recover exactly") {
    std::mt19937_64 rng(101);
    const ParserConfig config;
    for (int round = 0; round < 15; ++round) {
        const EventScript script = test::random_script(rng, config);
        const SyntheticTrace synthetic = generate_trace(script, config);
        const EventSequence parsed = parse(synthetic.trace, config);
        REQUIRE(parsed.events.size() == synthetic.ground_truth.events.size());
        const double dt = 1.0 / script.rate_hz;
        for (std::size_t i = 0; i < parsed.events.size(); ++i) {
            CHECK(parsed.events[i].event_class ==
                  synthetic.ground_truth.events[i].event_class);
            CHECK(std::abs(parsed.events[i].start_t -
                           synthetic.ground_truth.events[i].start_t) <= dt + 1e-12);
            CHECK(std::abs(parsed.events[i].end_t -
                           synthetic.ground_truth.events[i].end_t) <= dt + 1e-12);
        }
    }
}

TEST_CASE("property: recovery survives jitter inside the band margins") {
    // Velocity perturbation from uniform jitter of amplitude a at rate r is
    // bounded by 2*sqrt(2)*a*r. Keep that bound under the smallest margin the
    // random scripts leave (10 deg/s on each side of every band).
    std::mt19937_64 rng(103);
    const ParserConfig config;
    for (int round = 0; round < 10; ++round) {
        EventScript script = test::random_script(rng, config);
        const double margin = 8.0; // conservative, under the 10 deg/s the
                                   // generator leaves
        script.noise_deg = margin / (2.0 * std::sqrt(2.0) * script.rate_hz);
        script.seed = rng();
        const SyntheticTrace synthetic = generate_trace(script, config);
        const EventSequence parsed = parse(synthetic.trace, config);
        REQUIRE(parsed.events.size() == synthetic.ground_truth.events.size());
        for (std::size_t i = 0; i < parsed.events.size(); ++i) {
            CHECK(parsed.events[i].event_class ==
                  synthetic.ground_truth.events[i].event_class);
        }
    }
}

TEST_CASE("script json round-trip") {
    namespace fs = std::filesystem;
    EventScript script;
    script.rate_hz = 200.0;
    script.noise_deg = 0.01;
    script.seed = 77;
    script.start_yaw = 1.5;
    script.segments = {{EventClass::Fixation, 0.25, 0.0},
                       {EventClass::SmoothPursuit, 0.5, 55.0}};
    const fs::path path = fs::temp_directory_path() / "script_rt.json";
    save_script(script, path);
    const EventScript loaded = load_script(path);
    CHECK(loaded.rate_hz == script.rate_hz);
    CHECK(loaded.noise_deg == script.noise_deg);
    CHECK(loaded.seed == script.seed);
    CHECK(loaded.start_yaw == script.start_yaw);
    REQUIRE(loaded.segments.size() == 2);
    CHECK(loaded.segments[1].event_class == EventClass::SmoothPursuit);
    CHECK(loaded.segments[1].speed == 55.0);

    const fs::path bad = fs::temp_directory_path() / "script_bad.json";
    { std::ofstream out(bad); out << "{\"segments\": []}"; }
    CHECK_THROWS_AS(load_script(bad), InputError);
}

} // TEST_SUITE
