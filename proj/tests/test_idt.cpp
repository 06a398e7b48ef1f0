#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "qxs/idt.hpp"

using namespace qxs;

TEST_CASE("axis letters round-trip") {
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        CHECK(axis_from_letter(axis_letter(a)) == a);
    }
    CHECK_THROWS_AS(axis_from_letter('q'), std::invalid_argument);
}

TEST_CASE("basis families have the documented sizes") {
    CHECK(default_bases().size() == 18);
    CHECK(unsigned_bases().size() == 9);
    int negative = 0;
    for (const BasisPair& b : default_bases()) {
        if (b.sign < 0) ++negative;
    }
    CHECK(negative == 9);
}

TEST_CASE("suite generation covers bases x lengths") {
    DeviceTopology line = DeviceTopology::path(4);
    std::vector<int> lengths = {1, 2, 4, 8, 16};
    IdtSuite suite = generate_idt_suite(line, {}, lengths, default_bases());
    CHECK(suite.experiments.size() == 18 * 5);
    CHECK(suite.tomography == std::vector<int>{0, 1, 2, 3});
    CHECK(suite.segment_duration() == doctest::Approx(0.5));
    suite.validate();

    IdtSuite driven =
        generate_idt_suite(line, std::pair{1, 2}, lengths, default_bases());
    CHECK(driven.tomography == std::vector<int>{0, 3});
    CHECK(driven.segment_duration() ==
          doctest::Approx(gate_duration(GateKind::CNOT)));
    CHECK_THROWS_AS(
        generate_idt_suite(line, std::pair{0, 2}, lengths, default_bases()),
        std::invalid_argument);  // not a coupling edge
}

TEST_CASE("suite circuits prepare, idle and measure as labeled") {
    DeviceTopology line = DeviceTopology::path(2);
    IdtSuite suite =
        generate_idt_suite(line, {}, {3}, {{Axis::X, +1, Axis::X}});
    REQUIRE(suite.experiments.size() == 1);
    Circuit c = suite.circuit(0);
    // +X prep, 3 idle segments, X-basis rotation, terminal measurement:
    // noise-free expectation of every tomography qubit is +1.
    CHECK(c.qubits() == 2);
    int measures = 0;
    for (const Layer& layer : c.layers()) {
        for (const Gate& g : layer) {
            if (g.kind == GateKind::MEASURE) ++measures;
        }
    }
    CHECK(measures == 2);
    Counts counts = [&] {
        NoiseSpec none = NoiseSpec::none();
        return run_suite(suite, none, 256, 7)[0];
    }();
    CHECK(counts.at("00") == 256);
}

TEST_CASE("suite JSON round-trip") {
    DeviceTopology line = DeviceTopology::path(3);
    IdtSuite suite =
        generate_idt_suite(line, std::pair{0, 1}, {1, 2}, default_bases());
    IdtSuite back = IdtSuite::from_json(suite.to_json());
    CHECK(back.qubit_count == suite.qubit_count);
    CHECK(back.tomography == suite.tomography);
    CHECK(back.driven == suite.driven);
    CHECK(back.experiments.size() == suite.experiments.size());
    CHECK(back.to_json() == suite.to_json());
}

TEST_CASE("run_suite output is independent of the worker count") {
    DeviceTopology line = DeviceTopology::path(3);
    IdtSuite suite =
        generate_idt_suite(line, {}, {1, 4}, {{Axis::Z, +1, Axis::Z},
                                              {Axis::X, +1, Axis::Y}});
    CrosstalkModel m;
    m.idle[1].h[2] = 0.02;
    NoiseSpec spec = NoiseSpec::with_crosstalk(m);
    auto a = run_suite(suite, spec, 500, 11, 1);
    auto b = run_suite(suite, spec, 500, 11, 4);
    CHECK(a == b);
}

TEST_CASE("estimation recovers injected idle rates on a small register") {
    DeviceTopology line = DeviceTopology::path(3);
    CrosstalkModel m;
    m.idle[2].h[2] = 0.012;   // coherent Z drift
    m.idle[2].s[0] = 0.005;   // stochastic X
    NoiseSpec spec = NoiseSpec::with_crosstalk(m);

    IdtSuite suite =
        generate_idt_suite(line, {}, {1, 2, 4, 8, 16}, default_bases());
    auto counts = run_suite(suite, spec, 20000, 123);
    RateEstimate est = estimate_hsa(suite, counts);

    const HsaRates& got = est.rates.at(2);
    const HsaRates& err = est.errors.at(2);
    CHECK(std::abs(got.h[2] - 0.012) < 0.25 * 0.012);
    CHECK(std::abs(got.s[0] - 0.005) < 0.25 * 0.005);
    // Components injected as zero stay within three standard errors.
    CHECK(std::abs(got.h[0]) <= 3 * err.h[0]);
    CHECK(std::abs(got.h[1]) <= 3 * err.h[1]);
    CHECK(std::abs(got.a[2]) <= 3 * err.a[2]);
    // A quiet qubit reads as quiet.
    const HsaRates& quiet = est.rates.at(0);
    const HsaRates& quiet_err = est.errors.at(0);
    CHECK(std::abs(quiet.h[2]) <= 3 * quiet_err.h[2]);
    CHECK(std::abs(quiet.s[0]) <= 4 * quiet_err.s[0]);
}

TEST_CASE("affine offsets are separated from decay by the prep sign") {
    DeviceTopology line = DeviceTopology::path(2);
    CrosstalkModel m;
    m.idle[1].a[0] = 0.008;  // transverse displacement
    NoiseSpec spec = NoiseSpec::with_crosstalk(m);
    IdtSuite suite =
        generate_idt_suite(line, {}, {1, 2, 4, 8, 16}, default_bases());
    auto counts = run_suite(suite, spec, 20000, 9);
    RateEstimate est = estimate_hsa(suite, counts);
    const HsaRates& got = est.rates.at(1);
    const HsaRates& err = est.errors.at(1);
    CHECK(std::abs(got.a[0] - 0.008) < 0.3 * 0.008);
    CHECK(std::abs(got.h[0]) <= 3 * err.h[0]);
}

TEST_CASE("crosstalk entries are driven-minus-baseline with clipped s") {
    RateEstimate baseline, driven;
    HsaRates b;
    b.h[0] = 0.001;
    b.s[2] = 0.004;
    baseline.rates[5] = b;
    HsaRates d;
    d.h[0] = 0.011;
    d.s[2] = 0.001;  // below baseline: difference clips to zero
    d.s[0] = 0.003;
    driven.rates[5] = d;

    auto entry = build_crosstalk_entry(baseline, driven);
    REQUIRE(entry.count(5) == 1);
    CHECK(entry.at(5).h[0] == doctest::Approx(0.010));
    CHECK(entry.at(5).s[2] == doctest::Approx(0.0));
    CHECK(entry.at(5).s[0] == doctest::Approx(0.003));
}

TEST_CASE("estimate serialization includes rates and errors") {
    RateEstimate est;
    est.rates[3].h[1] = 0.02;
    est.errors[3].h[1] = 0.001;
    std::string j = estimate_to_json(est);
    CHECK(j.find("\"3\"") != std::string::npos);
    CHECK(j.find("0.02") != std::string::npos);
}
