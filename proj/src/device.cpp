#include "qxs/device.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qxs {

bool DeviceTopology::has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return edges.count({a, b}) > 0;
}

std::vector<int> DeviceTopology::neighbors(int q) const {
    std::vector<int> out;
    for (const auto& [a, b] : edges) {
        if (a == q) out.push_back(b);
        if (b == q) out.push_back(a);
    }
    std::sort(out.begin(), out.end());
    return out;
}

int DeviceTopology::distance(int a, int b) const {
    if (a == b) return 0;
    std::vector<int> dist(qubit_count, -1);
    std::deque<int> queue{a};
    dist[a] = 0;
    while (!queue.empty()) {
        int q = queue.front();
        queue.pop_front();
        for (int nb : neighbors(q)) {
            if (dist[nb] == -1) {
                dist[nb] = dist[q] + 1;
                if (nb == b) return dist[nb];
                queue.push_back(nb);
            }
        }
    }
    return -1;
}

int DeviceTopology::distance_to_edge(int q, int a, int b) const {
    int da = distance(q, a), db = distance(q, b);
    if (da == -1) return db;
    if (db == -1) return da;
    return std::min(da, db);
}

void DeviceTopology::validate() const {
    if (qubit_count <= 0) throw std::invalid_argument("empty topology");
    for (const auto& [a, b] : edges) {
        if (a == b) throw std::invalid_argument("self loop in topology");
        if (a > b) throw std::invalid_argument("edge stored out of order");
        if (a < 0 || b >= qubit_count) {
            throw std::invalid_argument("edge endpoint out of range");
        }
    }
    // Connectivity via BFS from qubit 0.
    std::vector<bool> seen(qubit_count, false);
    std::deque<int> queue{0};
    seen[0] = true;
    int count = 1;
    while (!queue.empty()) {
        int q = queue.front();
        queue.pop_front();
        for (int nb : neighbors(q)) {
            if (!seen[nb]) {
                seen[nb] = true;
                ++count;
                queue.push_back(nb);
            }
        }
    }
    if (count != qubit_count) throw std::invalid_argument("disconnected graph");
}

DeviceTopology DeviceTopology::path(int n) {
    DeviceTopology t;
    t.qubit_count = n;
    t.name = "path" + std::to_string(n);
    for (int i = 0; i + 1 < n; ++i) t.edges.insert({i, i + 1});
    return t;
}

bool Calibration::edge_is_dead(int a, int b) const {
    if (a > b) std::swap(a, b);
    auto it = cx_error.find({a, b});
    return it != cx_error.end() && it->second >= 1.0;
}

void Calibration::validate(const DeviceTopology& topo) const {
    std::size_t n = static_cast<std::size_t>(topo.qubit_count);
    if (t1_us.size() != n || t2_us.size() != n || frequency_ghz.size() != n) {
        throw std::invalid_argument("calibration arrays wrong length");
    }
    for (std::size_t q = 0; q < n; ++q) {
        if (t1_us[q] <= 0 || t2_us[q] <= 0) {
            throw std::invalid_argument("non-positive T1/T2");
        }
        if (t2_us[q] > 2.0 * t1_us[q] + 1e-9) {
            throw std::invalid_argument("T2 exceeds 2*T1");
        }
    }
    for (const auto& [edge, err] : cx_error) {
        if (!topo.has_edge(edge.first, edge.second)) {
            throw std::invalid_argument("CX error on non-edge");
        }
        if (err < 0 || err > 1.0) {
            throw std::invalid_argument("CX error out of range");
        }
    }
}

std::string device_to_json(const Device& dev) {
    nlohmann::ordered_json doc;
    doc["n"] = dev.topology.qubit_count;
    doc["name"] = dev.topology.name;
    doc["edges"] = nlohmann::json::array();
    for (const auto& [a, b] : dev.topology.edges) {
        doc["edges"].push_back({a, b});
    }
    nlohmann::ordered_json cal;
    cal["frequency_ghz"] = dev.calibration.frequency_ghz;
    cal["t1_us"] = dev.calibration.t1_us;
    cal["t2_us"] = dev.calibration.t2_us;
    nlohmann::ordered_json cx = nlohmann::ordered_json::object();
    for (const auto& [edge, err] : dev.calibration.cx_error) {
        cx[std::to_string(edge.first) + "," + std::to_string(edge.second)] = err;
    }
    cal["cx_error"] = cx;
    cal["readout_flip"] = dev.calibration.readout_flip;
    doc["cal"] = cal;
    return doc.dump(2);
}

Device device_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    Device dev;
    dev.topology.qubit_count = doc.at("n").get<int>();
    dev.topology.name = doc.value("name", "device");
    for (const auto& e : doc.at("edges")) {
        int a = e.at(0).get<int>(), b = e.at(1).get<int>();
        if (a > b) std::swap(a, b);
        dev.topology.edges.insert({a, b});
    }
    const auto& cal = doc.at("cal");
    dev.calibration.frequency_ghz =
        cal.at("frequency_ghz").get<std::vector<double>>();
    dev.calibration.t1_us = cal.at("t1_us").get<std::vector<double>>();
    dev.calibration.t2_us = cal.at("t2_us").get<std::vector<double>>();
    for (auto it = cal.at("cx_error").begin(); it != cal.at("cx_error").end();
         ++it) {
        auto comma = it.key().find(',');
        int a = std::stoi(it.key().substr(0, comma));
        int b = std::stoi(it.key().substr(comma + 1));
        if (a > b) std::swap(a, b);
        dev.calibration.cx_error[{a, b}] = it.value().get<double>();
    }
    if (cal.contains("readout_flip")) {
        dev.calibration.readout_flip =
            cal.at("readout_flip").get<std::vector<double>>();
    }
    dev.topology.validate();
    dev.calibration.validate(dev.topology);
    return dev;
}

Device load_device(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open device file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return device_from_json(ss.str());
}

int separation_radius(const DeviceTopology& topo, const std::vector<int>& a,
                      const std::vector<int>& b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("empty set");
    for (int qa : a) {
        for (int qb : b) {
            if (qa == qb) throw std::invalid_argument("overlapping sets");
        }
    }
    int best = -1;
    for (int qa : a) {
        for (int qb : b) {
            int d = topo.distance(qa, qb);
            if (d >= 0 && (best == -1 || d < best)) best = d;
        }
    }
    if (best == -1) throw std::invalid_argument("sets not connected");
    return std::max(0, best - 1);
}

CircuitShape CircuitShape::line(int n) {
    CircuitShape s;
    s.qubit_count = n;
    for (int i = 0; i + 1 < n; ++i) s.edges.insert({i, i + 1});
    return s;
}

namespace {

void place_recursive(const DeviceTopology& topo, const CircuitShape& shape,
                     const PlacementConstraints& cons, const Calibration* cal,
                     Placement& partial, std::vector<bool>& used,
                     std::vector<Placement>& out) {
    int logical = static_cast<int>(partial.size());
    if (logical == shape.qubit_count) {
        if (!cons.forbidden.empty() && cons.min_radius > 0) {
            if (separation_radius(topo, partial, cons.forbidden) <
                cons.min_radius) {
                return;
            }
        }
        out.push_back(partial);
        return;
    }
    for (int phys = 0; phys < topo.qubit_count; ++phys) {
        if (used[phys]) continue;
        bool forbidden_overlap =
            std::find(cons.forbidden.begin(), cons.forbidden.end(), phys) !=
            cons.forbidden.end();
        if (forbidden_overlap) continue;
        bool ok = true;
        for (const auto& [la, lb] : shape.edges) {
            int other = -1;
            if (la == logical && lb < logical) other = lb;
            if (lb == logical && la < logical) other = la;
            if (other == -1) continue;
            if (!topo.has_edge(phys, partial[other])) {
                ok = false;
                break;
            }
            if (cons.exclude_dead_edges && cal &&
                cal->edge_is_dead(phys, partial[other])) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        partial.push_back(phys);
        used[phys] = true;
        place_recursive(topo, shape, cons, cal, partial, used, out);
        used[phys] = false;
        partial.pop_back();
    }
}

}  // namespace

std::vector<Placement> enumerate_placements(const DeviceTopology& topo,
                                            const CircuitShape& shape,
                                            const PlacementConstraints& cons,
                                            const Calibration* cal) {
    std::vector<Placement> out;
    Placement partial;
    std::vector<bool> used(topo.qubit_count, false);
    place_recursive(topo, shape, cons, cal, partial, used, out);
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Transcription of the bundled 27-qubit heavy-hex device.
const char* kBundledDeviceJson = R"JSON(
{
  "n": 27,
  "name": "heavyhex27",
  "edges": [[0,1],[1,2],[1,4],[2,3],[3,5],[4,7],[5,8],[6,7],[7,10],[8,9],
            [8,11],[10,12],[11,14],[12,13],[12,15],[13,14],[14,16],[15,18],
            [16,19],[17,18],[18,21],[19,20],[19,22],[21,23],[22,25],[23,24],
            [24,25],[25,26]],
  "cal": {
    "frequency_ghz": [5.04,5.16,5.26,5.10,5.07,5.21,5.02,4.92,5.03,4.87,4.82,
                      5.16,4.72,4.96,5.05,4.92,4.88,5.22,4.97,5.00,5.10,4.84,
                      4.92,4.92,4.99,4.81,5.02],
    "t1_us": [218.8,194.7,222.7,186.1,189.8,154.8,73.6,291.0,235.8,181.0,
              167.5,146.1,289.3,79.7,261.5,204.2,187.2,58.1,183.7,268.5,67.2,
              200.2,197.4,144.4,206.6,176.0,115.1],
    "t2_us": [190.7,124.2,292.7,28.4,14.4,203.4,147.2,162.8,315.4,110.2,
              124.4,144.1,305.9,21.5,26.7,41.8,230.8,44.0,188.5,194.4,44.2,
              34.2,98.7,245.5,34.4,101.6,22.4],
    "cx_error": {
      "0,1": 0.008, "1,2": 0.003, "1,4": 0.006, "2,3": 0.007, "3,5": 0.006,
      "4,7": 0.013, "5,8": 1.0, "6,7": 0.006, "7,10": 0.005, "8,9": 0.008,
      "8,11": 0.005, "10,12": 0.005, "11,14": 0.008, "12,13": 0.03,
      "12,15": 0.007, "13,14": 0.013, "14,16": 0.014, "15,18": 0.014,
      "16,19": 0.009, "17,18": 0.012, "18,21": 0.005, "19,20": 1.0,
      "19,22": 0.011, "21,23": 0.009, "22,25": 0.006, "23,24": 0.007,
      "24,25": 0.017, "25,26": 0.007
    },
    "readout_flip": [0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,
                     0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,0.01,
                     0.01,0.01,0.01,0.01,0.01]
  }
}
)JSON";

}  // namespace

Device bundled_device() {
    static Device dev = device_from_json(kBundledDeviceJson);
    return dev;
}

}  // namespace qxs
