#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace qxs {

struct DeviceTopology {
    int qubit_count = 0;
    std::set<std::pair<int, int>> edges;  // stored with first < second
    std::string name;

    bool has_edge(int a, int b) const;
    std::vector<int> neighbors(int q) const;
    /// BFS shortest path length; -1 when disconnected.
    int distance(int a, int b) const;
    /// min over edge endpoints of distance to q.
    int distance_to_edge(int q, int a, int b) const;
    void validate() const;

    static DeviceTopology path(int n);
};

struct Calibration {
    std::vector<double> frequency_ghz;
    std::vector<double> t1_us;
    std::vector<double> t2_us;
    std::map<std::pair<int, int>, double> cx_error;  // fraction, key a<b
    std::vector<double> readout_flip;                // fraction

    bool edge_is_dead(int a, int b) const;
    void validate(const DeviceTopology& topo) const;
};

/// Microseconds per abstract time unit (one CNOT).
inline constexpr double kTimeUnitUs = 0.3;

struct Device {
    DeviceTopology topology;
    Calibration calibration;
};

Device load_device(const std::string& path);
std::string device_to_json(const Device& dev);
Device device_from_json(const std::string& text);

/// The bundled 27-qubit heavy-hex device.
Device bundled_device();

/// Number of idle qubits on the shortest coupling-graph path between the two
/// disjoint sets: min over (a,b) of distance(a,b) - 1, floored at 0.
int separation_radius(const DeviceTopology& topo, const std::vector<int>& a,
                      const std::vector<int>& b);

/// Connectivity requirement of a logical circuit: every listed logical pair
/// must map onto a coupling edge.
struct CircuitShape {
    int qubit_count = 0;
    std::set<std::pair<int, int>> edges;  // logical, first < second

    /// A line of n logical qubits with consecutive adjacency.
    static CircuitShape line(int n);
};

struct PlacementConstraints {
    std::vector<int> forbidden;  // placements must keep min_radius from these
    int min_radius = 0;
    bool exclude_dead_edges = true;
};

using Placement = std::vector<int>;  // logical qubit -> physical qubit

/// All injective, connectivity-respecting placements meeting the
/// constraints, in lexicographic order of the physical index tuple.
std::vector<Placement> enumerate_placements(const DeviceTopology& topo,
                                            const CircuitShape& shape,
                                            const PlacementConstraints& cons,
                                            const Calibration* cal = nullptr);

}  // namespace qxs
