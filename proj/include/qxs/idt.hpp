#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qxs/circuit.hpp"
#include "qxs/device.hpp"
#include "qxs/noise.hpp"

namespace qxs {

enum class Axis { X = 0, Y = 1, Z = 2 };

char axis_letter(Axis a);
Axis axis_from_letter(char c);

/// One prep/meas combination: every tomography qubit is prepared in the
/// signed `prep` eigenstate and measured along `meas`.
struct BasisPair {
    Axis prep = Axis::Z;
    int sign = +1;  // +1 or -1 eigenstate of the prep axis
    Axis meas = Axis::Z;
};

/// The 18 signed pairs {+-X, +-Y, +-Z} x {X, Y, Z}. Both prep signs are
/// required to separate the affine offset from decay and drift.
std::vector<BasisPair> default_bases();

/// The 9 unsigned pairs (positive preps only); usable for suite-size
/// accounting but not for affine estimation.
std::vector<BasisPair> unsigned_bases();

struct IdtExperiment {
    BasisPair basis;
    int length = 0;  // idle block repetitions
};

/// A family of prep/idle/measure circuits that share the tomography qubit
/// set, the optional driven gate and the device size.
struct IdtSuite {
    int qubit_count = 0;
    std::vector<int> tomography;  // ascending physical indices
    std::optional<std::pair<int, int>> driven;
    std::vector<IdtExperiment> experiments;

    /// Elapsed time units per idle repetition: the driven-gate duration, or
    /// the bare idle-layer duration when nothing is driven.
    double segment_duration() const;

    void validate() const;
    Circuit circuit(std::size_t index) const;

    std::string to_json() const;
    static IdtSuite from_json(const std::string& text);
};

/// Deterministic suite over every non-driven qubit of `topo`. Throws when a
/// driven pair is given that is not a coupling edge.
IdtSuite generate_idt_suite(const DeviceTopology& topo,
                            std::optional<std::pair<int, int>> driven,
                            const std::vector<int>& lengths,
                            const std::vector<BasisPair>& bases);

/// Same, with an explicit tomography subset (used to keep the simulated
/// register small on large devices).
IdtSuite generate_idt_suite(const DeviceTopology& topo,
                            std::optional<std::pair<int, int>> driven,
                            const std::vector<int>& lengths,
                            const std::vector<BasisPair>& bases,
                            const std::vector<int>& tomography);

/// One Counts per experiment; experiment i uses the stream derived from
/// (seed, i), so the output is independent of the worker count.
std::vector<Counts> run_suite(const IdtSuite& suite, const NoiseSpec& noise,
                              long long shots, std::uint64_t seed,
                              int workers = 0);

struct RateEstimate {
    std::map<int, HsaRates> rates;
    std::map<int, HsaRates> errors;
    double fit_residual = 0;  // mean squared residual over all line fits
};

/// First-order inversion of expectation-vs-time slopes into HsaRates per
/// tomography qubit. Off-axis drift gives h, same-axis symmetric decay gives
/// s, and the prep-sign asymmetry of the slopes gives a.
RateEstimate estimate_hsa(const IdtSuite& suite,
                          const std::vector<Counts>& results);

/// Gate-induced model entry: driven minus baseline per victim, with negative
/// stochastic components clipped to zero.
std::map<int, HsaRates> build_crosstalk_entry(const RateEstimate& baseline,
                                              const RateEstimate& driven);

std::string estimate_to_json(const RateEstimate& est);

}  // namespace qxs
