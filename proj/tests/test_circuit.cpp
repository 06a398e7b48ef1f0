#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "qxs/circuit.hpp"

using namespace qxs;

TEST_CASE("gate kind names round-trip") {
    for (GateKind k :
         {GateKind::H, GateKind::X, GateKind::Y, GateKind::Z, GateKind::S,
          GateKind::T, GateKind::RX, GateKind::RY, GateKind::RZ,
          GateKind::CNOT, GateKind::MEASURE, GateKind::RESET,
          GateKind::IDLE}) {
        CHECK(gate_kind_from_name(gate_kind_name(k)) == k);
    }
    CHECK_THROWS_AS(gate_kind_from_name("swap"), std::invalid_argument);
}

TEST_CASE("gate validation rejects malformed gates") {
    Circuit c(2, 1);
    CHECK_THROWS_AS(c.append({GateKind::CNOT, {0, 0}, {}, {}}),
                    std::invalid_argument);  // repeated operand
    CHECK_THROWS_AS(c.append({GateKind::H, {2}, {}, {}}),
                    std::invalid_argument);  // out of range
    CHECK_THROWS_AS(c.append({GateKind::RX, {0}, {}, {}}),
                    std::invalid_argument);  // missing angle
    CHECK_THROWS_AS(c.append({GateKind::H, {0}, 1.0, {}}),
                    std::invalid_argument);  // angle on non-rotation
    CHECK_THROWS_AS(c.append({GateKind::MEASURE, {0}, {}, 5}),
                    std::invalid_argument);  // cbit out of range
    CHECK_THROWS_AS(c.append({GateKind::H, {0}, {}, 0}),
                    std::invalid_argument);  // cbit on non-measure
}

TEST_CASE("append packs independent gates into one layer") {
    Circuit c(3);
    c.append(Gate::h(0));
    c.append(Gate::h(1));
    CHECK(c.depth() == 1);
    c.append(Gate::cnot(0, 1));  // conflicts, new layer
    CHECK(c.depth() == 2);
    c.append(Gate::h(2));  // fits beside the CNOT
    CHECK(c.depth() == 2);
    CHECK(c.gate_count() == 4);
}

TEST_CASE("append_layer rejects overlapping operands") {
    Circuit c(2);
    Layer bad = {Gate::h(0), Gate::cnot(0, 1)};
    CHECK_THROWS_AS(c.append_layer(bad), std::invalid_argument);
}

TEST_CASE("layer durations follow the slowest gate") {
    CHECK(layer_duration({Gate::h(0)}) == doctest::Approx(0.5));
    CHECK(layer_duration({Gate::h(0), Gate::cnot(1, 2)}) ==
          doctest::Approx(1.0));
    CHECK(layer_duration({Gate::measure(0, 0)}) == doctest::Approx(2.0));
    // Empty layers still take a single-qubit slot.
    CHECK(layer_duration({}) == doctest::Approx(0.5));
}

TEST_CASE("idle_qubits ignores explicit IDLE placeholders") {
    Layer l = {Gate::cnot(0, 1), Gate::idle(2)};
    auto idle = idle_qubits(l, 4);
    CHECK(idle == std::vector<int>{2, 3});
}

TEST_CASE("mid-circuit measurement detection") {
    Circuit terminal(2, 2);
    terminal.append(Gate::h(0));
    terminal.append_layer({Gate::measure(0, 0), Gate::measure(1, 1)});
    CHECK_FALSE(terminal.has_mid_circuit_measurement());

    Circuit mid(2, 1);
    mid.append(Gate::measure(0, 0));
    mid.append_layer(Gate::h(0));
    CHECK(mid.has_mid_circuit_measurement());

    Circuit with_reset(1, 0);
    with_reset.append(Gate::reset(0));
    CHECK(with_reset.has_mid_circuit_measurement());
}

TEST_CASE("JSON round-trip preserves structure and angles") {
    Circuit c(3, 3);
    c.append(Gate::h(0));
    c.append(Gate::rz(1, 0.1234567890123));
    c.append_layer(Gate::cnot(0, 2));
    c.append_layer({Gate::measure(0, 0), Gate::measure(2, 2)});
    Circuit back = Circuit::from_json(c.to_json());
    CHECK(back.qubits() == c.qubits());
    CHECK(back.cbits() == c.cbits());
    CHECK(back.depth() == c.depth());
    CHECK(back.to_json() == c.to_json());
}

TEST_CASE("from_json rejects malformed documents") {
    CHECK_THROWS(Circuit::from_json("{\"qubits\": 1}"));
    CHECK_THROWS(Circuit::from_json(
        R"({"qubits":1,"layers":[[{"kind":"nope","operands":[0]}]]})"));
}

TEST_CASE("remapped relabels operands") {
    Circuit c(2);
    c.append(Gate::cnot(0, 1));
    Circuit r = c.remapped({3, 1}, 4);
    CHECK(r.qubits() == 4);
    CHECK(r.layers()[0][0].operands == std::vector<int>{3, 1});
    CHECK_THROWS_AS(c.remapped({0}, 4), std::invalid_argument);
}

TEST_CASE("rotation unitaries match their matrix exponentials at angle pi") {
    // RX(pi) = -iX, RY(pi) = -iY, RZ(pi) = -iZ.
    const std::complex<double> mi(0, -1);
    Matrix2c rx = gate_unitary_1q(GateKind::RX, 3.14159265358979323846);
    Matrix2c x = gate_unitary_1q(GateKind::X);
    CHECK((rx - mi * x).cwiseAbs().maxCoeff() < 1e-12);
    Matrix2c rz = gate_unitary_1q(GateKind::RZ, 3.14159265358979323846);
    Matrix2c z = gate_unitary_1q(GateKind::Z);
    CHECK((rz - mi * z).cwiseAbs().maxCoeff() < 1e-12);
}
