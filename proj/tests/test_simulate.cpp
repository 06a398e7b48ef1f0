#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "qxs/device.hpp"
#include "qxs/simulate.hpp"

using namespace qxs;

TEST_CASE("statevector matches hand-computed amplitudes") {
    Circuit bell(2, 0);
    bell.append(Gate::h(0));
    bell.append(Gate::cnot(0, 1));
    Eigen::VectorXcd psi = statevector(bell);
    double r = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(psi(0) - std::complex<double>(r, 0)) < 1e-12);
    CHECK(std::abs(psi(3) - std::complex<double>(r, 0)) < 1e-12);
    CHECK(std::abs(psi(1)) < 1e-12);
    CHECK(std::abs(psi(2)) < 1e-12);
}

TEST_CASE("noise-free density evolution equals the statevector outer product") {
    Circuit c(3, 0);
    c.append(Gate::h(0));
    c.append(Gate::rz(0, 0.7));
    c.append(Gate::cnot(0, 2));
    c.append({GateKind::T, {2}, {}, {}});
    c.append(Gate::cnot(2, 1));
    c.append(Gate::rx(1, -0.3));
    Eigen::VectorXcd psi = statevector(c);
    DensityMatrix rho = simulate_state(c, NoiseSpec::none(), true);
    CHECK((rho.data() - psi * psi.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(state_fidelity(psi, rho) == doctest::Approx(1.0));
}

TEST_CASE("simulate_state rejects measurement gates") {
    Circuit c(1, 1);
    c.append(Gate::measure(0, 0));
    CHECK_THROWS_AS(simulate_state(c, NoiseSpec::none()),
                    std::invalid_argument);
}

TEST_CASE("premeasure state drops only the trailing measurement layer") {
    Circuit c(2, 2);
    c.append(Gate::h(0));
    c.append_layer({Gate::measure(0, 0), Gate::measure(1, 1)});
    DensityMatrix rho = simulate_premeasure_state(c, NoiseSpec::none());
    CHECK(prob_one(rho, 0) == doctest::Approx(0.5));
    CHECK(prob_one(rho, 1) == doctest::Approx(0.0));

    Circuit mid(1, 1);
    mid.append(Gate::measure(0, 0));
    mid.append_layer(Gate::h(0));
    CHECK_THROWS_AS(simulate_premeasure_state(mid, NoiseSpec::none()),
                    std::invalid_argument);
}

TEST_CASE("terminal-measurement counts follow the exact distribution") {
    Circuit bell(2, 2);
    bell.append(Gate::h(0));
    bell.append(Gate::cnot(0, 1));
    bell.append_layer({Gate::measure(0, 0), Gate::measure(1, 1)});
    const long long shots = 20000;
    Counts counts = simulate_counts(bell, NoiseSpec::none(), shots, 5);
    long long total = 0;
    for (const auto& [k, v] : counts) total += v;
    CHECK(total == shots);
    CHECK(counts.count("01") == 0);
    CHECK(counts.count("10") == 0);
    // Binomial sigma at p = 0.5 is ~71 shots; allow 5 sigma.
    CHECK(std::abs(counts["00"] - shots / 2) < 360);
}

TEST_CASE("counts are deterministic in the seed") {
    Circuit c(2, 2);
    c.append(Gate::h(0));
    c.append(Gate::rx(1, 0.8));
    c.append_layer({Gate::measure(0, 0), Gate::measure(1, 1)});
    Counts a = simulate_counts(c, NoiseSpec::none(), 512, 99);
    Counts b = simulate_counts(c, NoiseSpec::none(), 512, 99);
    Counts d = simulate_counts(c, NoiseSpec::none(), 512, 100);
    CHECK(a == b);
    CHECK(a != d);
}

TEST_CASE("mid-circuit measurement takes the per-shot trajectory path") {
    // Measure-and-reuse: after measuring |+> the qubit is in the recorded
    // basis state, so a following X flips it deterministically.
    Circuit c(1, 2);
    c.append(Gate::h(0));
    c.append(Gate::measure(0, 0));
    c.append_layer(Gate::x(0));
    c.append_layer(Gate::measure(0, 1));
    Counts counts = simulate_counts(c, NoiseSpec::none(), 2000, 17);
    long long total = 0;
    for (const auto& [key, v] : counts) {
        // Second bit is always the complement of the first.
        CHECK(key.size() == 2);
        CHECK(key[1] == (key[0] == '0' ? '1' : '0'));
        total += v;
    }
    CHECK(total == 2000);
    CHECK(std::abs(counts["01"] - 1000) < 250);
}

TEST_CASE("reset returns the qubit to |0> mid-circuit") {
    Circuit c(1, 1);
    c.append(Gate::h(0));
    c.append_layer(Gate::reset(0));
    c.append_layer(Gate::measure(0, 0));
    Counts counts = simulate_counts(c, NoiseSpec::none(), 500, 3);
    CHECK(counts["0"] == 500);
}

TEST_CASE("readout flips bias the recorded bits") {
    BaselineNoise b;
    b.t1 = {1e9};
    b.t2 = {1e9};
    b.readout_flip = {0.25};
    Circuit c(1, 1);
    c.append(Gate::measure(0, 0));  // state stays |0>
    Counts counts =
        simulate_counts(c, NoiseSpec::with_baseline(b), 20000, 21);
    // P(read 1) = 0.25; 5 sigma ~ 0.0153.
    CHECK(std::abs(double(counts["1"]) / 20000.0 - 0.25) < 0.016);
}

TEST_CASE("simulate dispatches on circuit content") {
    Circuit unitary(1, 0);
    unitary.append(Gate::h(0));
    SimResult r1 = simulate(unitary, NoiseSpec::none(), 100, 1);
    CHECK(r1.state.has_value());
    CHECK_FALSE(r1.counts.has_value());

    Circuit measured(1, 1);
    measured.append(Gate::h(0));
    measured.append_layer(Gate::measure(0, 0));
    SimResult r2 = simulate(measured, NoiseSpec::none(), 100, 1);
    CHECK(r2.counts.has_value());
    CHECK_FALSE(r2.state.has_value());
}

TEST_CASE("noisy evolution stays physical under debug checks") {
    CrosstalkModel model = synth_default_model(DeviceTopology::path(4),
                                               0.05, 0.5, 3);
    Circuit c(4, 0);
    c.append(Gate::h(0));
    for (int i = 0; i < 3; ++i) c.append_layer(Gate::cnot(2, 3));
    // debug_checks re-validates hermiticity/trace/PSD after every layer.
    DensityMatrix rho =
        simulate_state(c, NoiseSpec::with_crosstalk(model), true);
    rho.check_physical();
    CHECK(rho.trace_real() == doctest::Approx(1.0));
}

TEST_CASE("simulator refuses registers beyond the qubit limit") {
    Circuit big(kMaxSimQubits + 1, 0);
    big.append(Gate::h(0));
    CHECK_THROWS_AS(simulate_state(big, NoiseSpec::none()),
                    std::invalid_argument);
}
