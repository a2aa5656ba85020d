#include <doctest.h>

#include "spinreg/sequence.hpp"

using namespace spinreg;

namespace {

Sequence sample_sequence() {
    Sequence seq;
    PulseItem p;
    p.channel = Channel::MW;
    p.freq_mhz = Bound::fixed(7303.731986);
    p.phase_rad = Bound::swept(31.41592653589793, 0.1);
    p.rabi_mhz = 5.556;
    p.duration_us = Bound::fixed(0.045);
    seq.items.emplace_back(p);
    seq.items.emplace_back(DelayItem{Bound::swept(1.0)});
    PulseItem q = p;
    q.channel = Channel::RF;
    q.freq_mhz = Bound::fixed(5.816);
    q.phase_rad = Bound::fixed(-0.25);
    seq.items.emplace_back(q);
    seq.items.emplace_back(LaserItem{'C', Bound::fixed(10.0)});
    seq.items.emplace_back(ReadItem{});
    seq.sweep = Sweep{"tau_us", {0.0, 0.125, 1.0 / 3.0, 2.7182818284590452}};
    return seq;
}

} // namespace

TEST_SUITE("sequence") {

TEST_CASE("text serialization round-trips bit-exactly") {
    const Sequence seq = sample_sequence();
    const std::string text = sequence_to_text(seq);
    const Sequence back = sequence_from_text(text);
    CHECK(sequence_to_text(back) == text);

    REQUIRE(back.items.size() == seq.items.size());
    const auto& p0 = std::get<PulseItem>(seq.items[0]);
    const auto& p1 = std::get<PulseItem>(back.items[0]);
    CHECK(p1.freq_mhz == p0.freq_mhz);
    CHECK(p1.phase_rad == p0.phase_rad);
    CHECK(p1.rabi_mhz == p0.rabi_mhz);
    CHECK(p1.duration_us == p0.duration_us);
    REQUIRE(back.sweep.has_value());
    CHECK(back.sweep->values == seq.sweep->values);
}

TEST_CASE("unreferenced sweep parameter is a configuration error") {
    Sequence seq;
    PulseItem p;
    p.freq_mhz = Bound::fixed(1.0);
    p.duration_us = Bound::fixed(1.0);
    seq.items.emplace_back(p);
    seq.sweep = Sweep{"tau", {1.0, 2.0}};
    CHECK_THROWS_AS(seq.validate(), ConfigError);
    std::get<PulseItem>(seq.items[0]).duration_us = Bound::swept(1.0);
    CHECK_NOTHROW(seq.validate());
}

TEST_CASE("parser rejects malformed lines with line numbers") {
    CHECK_THROWS_WITH_AS(sequence_from_text("MW f=1.0 ph=0\n"),
                         doctest::Contains("line 1"), ConfigError);
    CHECK_THROWS_AS(sequence_from_text("LASER Q t=1\n"), ConfigError);
    CHECK_THROWS_AS(sequence_from_text("WAIT t=1\n"), ConfigError);
}

TEST_CASE("toggle_final_phase shifts only the last pulse by pi") {
    const Sequence seq = sample_sequence();
    const Sequence tog = toggle_final_phase(seq);
    const auto& orig = std::get<PulseItem>(seq.items[2]);
    const auto& flip = std::get<PulseItem>(tog.items[2]);
    CHECK(flip.phase_rad.offset == doctest::Approx(orig.phase_rad.offset + 3.14159265358979));
    CHECK(std::get<PulseItem>(tog.items[0]).phase_rad.offset ==
          std::get<PulseItem>(seq.items[0]).phase_rad.offset);
}

} // TEST_SUITE
