#include "qxs/idt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "qxs/parallel.hpp"
#include "qxs/simulate.hpp"

namespace qxs {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Drift cap below which the linear model of expectation vs time is trusted.
constexpr double kSmallAngleDrift = 0.3;

struct LineFit {
    double slope = 0;
    double slope_var = 0;
    double intercept = 0;
    double ssr = 0;  // sum of squared residuals
    int points = 0;
};

/// One expectation sample with its shot-noise variance.
struct FitPoint {
    double t = 0;
    double y = 0;
    double var = 0;
};

/// OLS fit of y = intercept + slope * t. The slope variance is the larger
/// of the residual-based estimate and the propagated shot noise; the
/// residual estimate alone is unreliable at few points.
LineFit fit_line(const std::vector<FitPoint>& pts) {
    LineFit out;
    out.points = static_cast<int>(pts.size());
    double n = double(pts.size());
    double st = 0, sy = 0;
    for (const FitPoint& p : pts) {
        st += p.t;
        sy += p.y;
    }
    double tbar = st / n, ybar = sy / n;
    double stt = 0, sty = 0;
    for (const FitPoint& p : pts) {
        stt += (p.t - tbar) * (p.t - tbar);
        sty += (p.t - tbar) * (p.y - ybar);
    }
    if (stt <= 0) throw std::invalid_argument("degenerate fit: no time spread");
    out.slope = sty / stt;
    out.intercept = ybar - out.slope * tbar;
    double shot_var = 0;
    for (const FitPoint& p : pts) {
        double r = p.y - (out.intercept + out.slope * p.t);
        out.ssr += r * r;
        shot_var += p.var * (p.t - tbar) * (p.t - tbar);
    }
    shot_var /= stt * stt;
    double resid_var =
        pts.size() > 2 ? (out.ssr / (n - 2.0)) / stt : 0.0;
    out.slope_var = std::max(shot_var, resid_var);
    return out;
}

/// Fits all points, then refits on the prefix still inside the small-angle
/// regime implied by the first-pass slope.
LineFit fit_small_angle(std::vector<FitPoint> pts) {
    std::sort(pts.begin(), pts.end(),
              [](const FitPoint& a, const FitPoint& b) { return a.t < b.t; });
    LineFit first = fit_line(pts);
    double m = std::abs(first.slope);
    if (m * pts.back().t <= kSmallAngleDrift) return first;
    std::vector<FitPoint> kept;
    for (const FitPoint& p : pts) {
        if (m * p.t <= kSmallAngleDrift) kept.push_back(p);
    }
    std::size_t min_keep = 3;
    while (kept.size() < min_keep && kept.size() < pts.size()) {
        kept.push_back(pts[kept.size()]);
    }
    return fit_line(kept);
}

struct SlopeStat {
    double value = 0;
    double var = 0;
};

SlopeStat average(const std::vector<SlopeStat>& xs) {
    SlopeStat out;
    if (xs.empty()) return out;
    for (const SlopeStat& x : xs) {
        out.value += x.value;
        out.var += x.var;
    }
    double k = double(xs.size());
    out.value /= k;
    out.var /= k * k;
    return out;
}

int axis_index(Axis a) { return static_cast<int>(a); }

}  // namespace

char axis_letter(Axis a) {
    switch (a) {
        case Axis::X: return 'X';
        case Axis::Y: return 'Y';
        case Axis::Z: return 'Z';
    }
    throw std::invalid_argument("bad axis");
}

Axis axis_from_letter(char c) {
    switch (c) {
        case 'X': return Axis::X;
        case 'Y': return Axis::Y;
        case 'Z': return Axis::Z;
    }
    throw std::invalid_argument(std::string("bad axis letter: ") + c);
}

std::vector<BasisPair> default_bases() {
    std::vector<BasisPair> out;
    for (Axis p : {Axis::X, Axis::Y, Axis::Z}) {
        for (int sign : {+1, -1}) {
            for (Axis m : {Axis::X, Axis::Y, Axis::Z}) {
                out.push_back({p, sign, m});
            }
        }
    }
    return out;
}

std::vector<BasisPair> unsigned_bases() {
    std::vector<BasisPair> out;
    for (Axis p : {Axis::X, Axis::Y, Axis::Z}) {
        for (Axis m : {Axis::X, Axis::Y, Axis::Z}) {
            out.push_back({p, +1, m});
        }
    }
    return out;
}

double IdtSuite::segment_duration() const {
    return driven ? gate_duration(GateKind::CNOT)
                  : gate_duration(GateKind::IDLE);
}

void IdtSuite::validate() const {
    if (qubit_count < 1) throw std::invalid_argument("empty suite register");
    if (tomography.empty()) {
        throw std::invalid_argument("no tomography qubits");
    }
    for (int q : tomography) {
        if (q < 0 || q >= qubit_count) {
            throw std::invalid_argument("tomography qubit out of range");
        }
        if (driven && (q == driven->first || q == driven->second)) {
            throw std::invalid_argument(
                "tomography and driven qubits overlap");
        }
    }
    for (const IdtExperiment& e : experiments) {
        if (e.length < 0) throw std::invalid_argument("negative idle length");
        if (e.basis.sign != 1 && e.basis.sign != -1) {
            throw std::invalid_argument("prep sign must be +1 or -1");
        }
    }
}

Circuit IdtSuite::circuit(std::size_t index) const {
    if (index >= experiments.size()) {
        throw std::invalid_argument("experiment index out of range");
    }
    const IdtExperiment& e = experiments[index];
    Circuit c(qubit_count, static_cast<int>(tomography.size()));

    auto layer_on_all = [&](GateKind kind, std::optional<double> angle = {}) {
        Layer l;
        for (int q : tomography) {
            Gate g{kind, {q}, angle, {}};
            l.push_back(g);
        }
        c.append_layer(l);
    };

    // Prep: rotate |0> to the signed eigenstate of the prep axis.
    if (e.basis.sign < 0) layer_on_all(GateKind::X);
    if (e.basis.prep == Axis::X) {
        layer_on_all(GateKind::H);
    } else if (e.basis.prep == Axis::Y) {
        layer_on_all(GateKind::H);
        layer_on_all(GateKind::S);
    }

    for (int rep = 0; rep < e.length; ++rep) {
        if (driven) {
            c.append_layer(Gate::cnot(driven->first, driven->second));
        } else {
            layer_on_all(GateKind::IDLE);
        }
    }

    // Rotate the measurement axis onto Z.
    if (e.basis.meas == Axis::X) {
        layer_on_all(GateKind::H);
    } else if (e.basis.meas == Axis::Y) {
        layer_on_all(GateKind::RZ, -kPi / 2.0);
        layer_on_all(GateKind::H);
    }

    Layer meas;
    for (std::size_t i = 0; i < tomography.size(); ++i) {
        meas.push_back(Gate::measure(tomography[i], static_cast<int>(i)));
    }
    c.append_layer(meas);
    return c;
}

std::string IdtSuite::to_json() const {
    nlohmann::ordered_json doc;
    doc["qubits"] = qubit_count;
    doc["tomography"] = tomography;
    if (driven) {
        doc["driven"] = {driven->first, driven->second};
    } else {
        doc["driven"] = nullptr;
    }
    doc["experiments"] = nlohmann::ordered_json::array();
    for (const IdtExperiment& e : experiments) {
        nlohmann::ordered_json item;
        item["prep"] = std::string(1, axis_letter(e.basis.prep));
        item["sign"] = e.basis.sign;
        item["meas"] = std::string(1, axis_letter(e.basis.meas));
        item["length"] = e.length;
        doc["experiments"].push_back(item);
    }
    return doc.dump(2);
}

IdtSuite IdtSuite::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    IdtSuite suite;
    suite.qubit_count = doc.at("qubits").get<int>();
    suite.tomography = doc.at("tomography").get<std::vector<int>>();
    if (!doc.at("driven").is_null()) {
        auto pair = doc.at("driven").get<std::vector<int>>();
        if (pair.size() != 2) throw std::invalid_argument("bad driven pair");
        suite.driven = {pair[0], pair[1]};
    }
    for (const auto& item : doc.at("experiments")) {
        IdtExperiment e;
        e.basis.prep = axis_from_letter(item.at("prep").get<std::string>().at(0));
        e.basis.sign = item.at("sign").get<int>();
        e.basis.meas = axis_from_letter(item.at("meas").get<std::string>().at(0));
        e.length = item.at("length").get<int>();
        suite.experiments.push_back(e);
    }
    suite.validate();
    return suite;
}

IdtSuite generate_idt_suite(const DeviceTopology& topo,
                            std::optional<std::pair<int, int>> driven,
                            const std::vector<int>& lengths,
                            const std::vector<BasisPair>& bases,
                            const std::vector<int>& tomography) {
    if (lengths.empty()) throw std::invalid_argument("no idle lengths");
    if (bases.empty()) throw std::invalid_argument("no basis pairs");
    if (driven && !topo.has_edge(driven->first, driven->second)) {
        throw std::invalid_argument("driven pair is not a coupling edge");
    }
    IdtSuite suite;
    suite.qubit_count = topo.qubit_count;
    suite.driven = driven;
    suite.tomography = tomography;
    std::sort(suite.tomography.begin(), suite.tomography.end());
    for (const BasisPair& b : bases) {
        for (int len : lengths) {
            suite.experiments.push_back({b, len});
        }
    }
    suite.validate();
    return suite;
}

IdtSuite generate_idt_suite(const DeviceTopology& topo,
                            std::optional<std::pair<int, int>> driven,
                            const std::vector<int>& lengths,
                            const std::vector<BasisPair>& bases) {
    std::vector<int> tomography;
    for (int q = 0; q < topo.qubit_count; ++q) {
        if (driven && (q == driven->first || q == driven->second)) continue;
        tomography.push_back(q);
    }
    return generate_idt_suite(topo, driven, lengths, bases, tomography);
}

std::vector<Counts> run_suite(const IdtSuite& suite, const NoiseSpec& noise,
                              long long shots, std::uint64_t seed,
                              int workers) {
    suite.validate();
    if (shots < 1) throw std::invalid_argument("shots must be >= 1");
    std::vector<Counts> out(suite.experiments.size());
    parallel_for(suite.experiments.size(), workers, [&](std::size_t i) {
        out[i] = simulate_counts(suite.circuit(i), noise, shots,
                                 mix64(seed ^ mix64(i)));
    });
    return out;
}

RateEstimate estimate_hsa(const IdtSuite& suite,
                          const std::vector<Counts>& results) {
    suite.validate();
    if (results.size() != suite.experiments.size()) {
        throw std::invalid_argument("results do not align with suite");
    }
    {
        std::vector<int> distinct;
        for (const IdtExperiment& e : suite.experiments) {
            distinct.push_back(e.length);
        }
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()),
                       distinct.end());
        if (distinct.size() < 2) {
            throw std::invalid_argument("need at least 2 distinct lengths");
        }
    }

    double dt = suite.segment_duration();
    RateEstimate est;
    double residual_sum = 0;
    int residual_points = 0;

    for (std::size_t qi = 0; qi < suite.tomography.size(); ++qi) {
        int q = suite.tomography[qi];
        // (prep, sign, meas) -> (t, expectation) points.
        std::map<std::tuple<int, int, int>, std::vector<FitPoint>> series;
        for (std::size_t i = 0; i < suite.experiments.size(); ++i) {
            const IdtExperiment& e = suite.experiments[i];
            long long zeros = 0, ones = 0;
            for (const auto& [bits, n] : results[i]) {
                if (bits.size() <= qi) {
                    throw std::invalid_argument("short bitstring in results");
                }
                (bits[qi] == '0' ? zeros : ones) += n;
            }
            long long total = zeros + ones;
            if (total == 0) throw std::invalid_argument("empty counts entry");
            double expectation = double(zeros - ones) / double(total);
            double var = std::max(0.25 / double(total),
                                  (1.0 - expectation * expectation) /
                                      double(total));
            series[{axis_index(e.basis.prep), e.basis.sign,
                    axis_index(e.basis.meas)}]
                .push_back({e.length * dt, expectation, var});
        }

        std::map<std::tuple<int, int, int>, LineFit> fits;
        for (const auto& [key, pts] : series) {
            LineFit f = fit_small_angle(pts);
            fits[key] = f;
            residual_sum += f.ssr;
            residual_points += f.points;
        }

        auto fit_at = [&](int p, int sign, int m) -> const LineFit* {
            auto it = fits.find({p, sign, m});
            return it == fits.end() ? nullptr : &it->second;
        };
        // Half-difference and half-sum of the two prep signs' slopes. With
        // only one sign available the slope itself stands in for the
        // difference (affine asymmetry unresolvable, reported as 0).
        auto signed_stats = [&](int p, int m, SlopeStat& diff, SlopeStat& sum,
                                bool& have_sum) {
            const LineFit* plus = fit_at(p, +1, m);
            const LineFit* minus = fit_at(p, -1, m);
            have_sum = false;
            if (plus && minus) {
                diff = {(plus->slope - minus->slope) / 2.0,
                        (plus->slope_var + minus->slope_var) / 4.0};
                sum = {(plus->slope + minus->slope) / 2.0,
                       (plus->slope_var + minus->slope_var) / 4.0};
                have_sum = true;
            } else if (plus) {
                diff = {plus->slope, plus->slope_var};
            } else if (minus) {
                diff = {-minus->slope, minus->slope_var};
            } else {
                diff = {0, 0};
            }
        };

        // h_k from the off-axis drift e_M . (h x e_P) = h . (e_P x e_M).
        // (X,Y)->+h_Z, (Y,X)->-h_Z and cyclic.
        auto h_component = [&](int p1, int m1, int p2, int m2) -> SlopeStat {
            std::vector<SlopeStat> parts;
            SlopeStat diff, sum;
            bool have_sum;
            if (series.count({p1, +1, m1}) || series.count({p1, -1, m1})) {
                signed_stats(p1, m1, diff, sum, have_sum);
                parts.push_back(diff);
            }
            if (series.count({p2, +1, m2}) || series.count({p2, -1, m2})) {
                signed_stats(p2, m2, diff, sum, have_sum);
                parts.push_back({-diff.value, diff.var});
            }
            return average(parts);
        };

        HsaRates rates;
        HsaRates errs;
        SlopeStat hx = h_component(1, 2, 2, 1);  // (Y,Z) and -(Z,Y)
        SlopeStat hy = h_component(2, 0, 0, 2);  // (Z,X) and -(X,Z)
        SlopeStat hz = h_component(0, 1, 1, 0);  // (X,Y) and -(Y,X)
        rates.h = {hx.value, hy.value, hz.value};
        errs.h = {std::sqrt(hx.var), std::sqrt(hy.var), std::sqrt(hz.var)};

        // a_M is the sign-symmetric part of every slope measured along M.
        std::array<SlopeStat, 3> a_stat;
        for (int m = 0; m < 3; ++m) {
            std::vector<SlopeStat> parts;
            for (int p = 0; p < 3; ++p) {
                SlopeStat diff, sum;
                bool have_sum;
                if (!series.count({p, +1, m}) && !series.count({p, -1, m})) {
                    continue;
                }
                signed_stats(p, m, diff, sum, have_sum);
                if (have_sum) parts.push_back(sum);
            }
            a_stat[m] = average(parts);
            rates.a[m] = a_stat[m].value;
            errs.a[m] = std::sqrt(a_stat[m].var);
        }

        // Same-axis decay lambda_P = 2(s_j + s_k); invert for s.
        std::array<SlopeStat, 3> lambda;
        for (int p = 0; p < 3; ++p) {
            SlopeStat diff, sum;
            bool have_sum;
            if (!series.count({p, +1, p}) && !series.count({p, -1, p})) {
                continue;
            }
            signed_stats(p, p, diff, sum, have_sum);
            lambda[p] = {-diff.value, diff.var};
        }
        for (int k = 0; k < 3; ++k) {
            int j1 = (k + 1) % 3, j2 = (k + 2) % 3;
            rates.s[k] =
                (lambda[j1].value + lambda[j2].value - lambda[k].value) / 4.0;
            errs.s[k] = std::sqrt(lambda[j1].var + lambda[j2].var +
                                  lambda[k].var) /
                        4.0;
        }

        est.rates[q] = rates;
        est.errors[q] = errs;
    }

    est.fit_residual =
        residual_points > 0 ? residual_sum / residual_points : 0.0;
    return est;
}

std::map<int, HsaRates> build_crosstalk_entry(const RateEstimate& baseline,
                                              const RateEstimate& driven) {
    if (baseline.rates.size() != driven.rates.size()) {
        throw std::invalid_argument("mismatched tomography qubit sets");
    }
    std::map<int, HsaRates> entry;
    for (const auto& [q, drv] : driven.rates) {
        auto it = baseline.rates.find(q);
        if (it == baseline.rates.end()) {
            throw std::invalid_argument("mismatched tomography qubit sets");
        }
        HsaRates delta;
        for (int i = 0; i < 3; ++i) {
            delta.h[i] = drv.h[i] - it->second.h[i];
            delta.s[i] = std::max(0.0, drv.s[i] - it->second.s[i]);
            delta.a[i] = drv.a[i] - it->second.a[i];
        }
        if (!delta.is_zero()) entry[q] = delta;
    }
    return entry;
}

std::string estimate_to_json(const RateEstimate& est) {
    nlohmann::ordered_json doc;
    doc["fit_residual"] = est.fit_residual;
    doc["qubits"] = nlohmann::ordered_json::object();
    for (const auto& [q, r] : est.rates) {
        nlohmann::ordered_json item;
        item["h"] = r.h;
        item["s"] = r.s;
        item["a"] = r.a;
        const HsaRates& e = est.errors.at(q);
        item["h_stderr"] = e.h;
        item["s_stderr"] = e.s;
        item["a_stderr"] = e.a;
        doc["qubits"][std::to_string(q)] = item;
    }
    return doc.dump(2);
}

}  // namespace qxs
