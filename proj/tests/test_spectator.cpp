#include <doctest.h>

#include <cmath>

#include "qxs/spectator.hpp"

using namespace qxs;

namespace {

SpectatorConfig fast_config() {
    SpectatorConfig cfg;
    cfg.shots = 200;
    cfg.duration = 60;
    cfg.seed = 7;
    return cfg;
}

Device device() { return bundled_device(); }

// The detection routines scale the coherent attack terms internally by
// config.attack_scale; tests always hand over the unscaled device model.
CrosstalkModel scenario_model(const Device& dev) {
    return default_device_model(dev.topology, dev.calibration);
}

}  // namespace

TEST_CASE("config validation and threshold arithmetic") {
    SpectatorConfig cfg;
    cfg.validate();
    CHECK(cfg.cycles_at(7) == 100 / 9);
    // f0 = max(1, ceil(3 * flip * cycles)).
    CHECK(cfg.default_threshold(7) ==
          std::max(1, int(std::ceil(3 * 0.01 * (100 / 9)))));
    CHECK(cfg.threshold(7) == cfg.default_threshold(7));
    cfg.flag_threshold = 5;
    CHECK(cfg.threshold(7) == 5);

    SpectatorConfig bad;
    bad.tau = 0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SpectatorConfig{};
    bad.attack_fraction = 1.5;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = SpectatorConfig{};
    bad.spectator = 12;  // collides with the attack pair
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("scale_attack_h scales coherent gate terms only") {
    Device dev = device();
    CrosstalkModel base = default_device_model(dev.topology, dev.calibration);
    CrosstalkModel scaled = scale_attack_h(base, 4.0);
    const auto& bk = base.gates.at(gate_key(GateKind::CNOT, 12, 13));
    const auto& sk = scaled.gates.at(gate_key(GateKind::CNOT, 12, 13));
    for (const auto& [v, r] : bk) {
        CHECK(sk.at(v).h[0] == doctest::Approx(4.0 * r.h[0]));
        CHECK(sk.at(v).s[0] == doctest::Approx(r.s[0]));
    }
    for (const auto& [q, r] : base.idle) {
        CHECK(scaled.idle.at(q).h[0] == doctest::Approx(r.h[0]));
        CHECK(scaled.idle.at(q).s[2] == doctest::Approx(r.s[2]));
    }
}

TEST_CASE("bloch trajectory starts at the prepared states") {
    Device dev = device();
    CrosstalkModel model = scenario_model(dev);
    SpectatorConfig cfg = fast_config();
    auto traj = bloch_trajectory(cfg, model, dev.topology, {0, 5, 10});
    REQUIRE(traj.size() == 3);
    CHECK(traj[0].t == 0);
    CHECK(traj[0].data.x == doctest::Approx(1.0));
    CHECK(traj[0].data.z == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(traj[0].spectator.z == doctest::Approx(1.0));
}

TEST_CASE("zero-strength model gives constant trajectories") {
    Device dev = device();
    CrosstalkModel zero;
    SpectatorConfig cfg = fast_config();
    auto traj = bloch_trajectory(cfg, zero, dev.topology, {0, 10, 40});
    for (const BlochSample& s : traj) {
        CHECK(s.data.x == doctest::Approx(1.0));
        CHECK(s.spectator.z == doctest::Approx(1.0));
    }
}

TEST_CASE("data and spectator drift azimuthally in the same direction") {
    Device dev = device();
    CrosstalkModel model = scenario_model(dev);
    SpectatorConfig cfg = fast_config();
    auto traj = bloch_trajectory(cfg, model, dev.topology, {2, 4, 6});
    for (const BlochSample& s : traj) {
        // Both start on +x/+z; the attack rotates each off its pole. The
        // azimuthal displacements must carry the same sign.
        double dq_phi = std::atan2(s.data.y, s.data.x);
        double sq_phi = std::atan2(s.spectator.y, s.spectator.x);
        CHECK(dq_phi * sq_phi > 0.0);
    }
}

TEST_CASE("trajectory sample times must fit the duration and be sorted") {
    Device dev = device();
    CrosstalkModel zero;
    SpectatorConfig cfg = fast_config();
    CHECK_THROWS_AS(
        bloch_trajectory(cfg, zero, dev.topology, {0, cfg.duration + 5}),
        std::invalid_argument);
    CHECK_THROWS_AS(bloch_trajectory(cfg, zero, dev.topology, {5, 2}),
                    std::invalid_argument);
}

TEST_CASE("clean shots without flips or idle noise never flag") {
    Device dev = device();
    CrosstalkModel zero;
    SpectatorConfig cfg = fast_config();
    cfg.meas_flip = 0.0;
    RandomStream rng(1);
    for (int i = 0; i < 20; ++i) {
        CHECK(run_detection_shot(cfg, false, zero, dev.topology, rng) == 0);
    }
}

TEST_CASE("clean flag counts follow the binomial flip model") {
    Device dev = device();
    CrosstalkModel zero;
    SpectatorConfig cfg = fast_config();
    cfg.tau = 4;
    cfg.duration = 120;  // 20 cycles per shot
    const int shots = 800;
    RandomStream rng(5);
    double total = 0;
    for (int i = 0; i < shots; ++i) {
        total += run_detection_shot(cfg, false, zero, dev.topology, rng);
    }
    int cycles = cfg.cycles_at(cfg.tau);
    double expect = cycles * cfg.meas_flip;
    double sigma =
        std::sqrt(cycles * cfg.meas_flip * (1 - cfg.meas_flip) / shots);
    CHECK(std::abs(total / shots - expect) < 4 * sigma);
}

TEST_CASE("attacked shots flag far above the clean population") {
    Device dev = device();
    CrosstalkModel model = scenario_model(dev);
    SpectatorConfig cfg = fast_config();
    cfg.tau = 5;
    const int shots = 120;
    RandomStream rng(11);
    double clean_sum = 0, clean_sq = 0, attacked_sum = 0;
    for (int i = 0; i < shots; ++i) {
        double f = run_detection_shot(cfg, false, model, dev.topology, rng);
        clean_sum += f;
        clean_sq += f * f;
    }
    for (int i = 0; i < shots; ++i) {
        attacked_sum += run_detection_shot(cfg, true, model, dev.topology, rng);
    }
    double clean_mean = clean_sum / shots;
    double clean_sd =
        std::sqrt(std::max(1e-9, clean_sq / shots - clean_mean * clean_mean));
    CHECK(attacked_sum / shots > clean_mean + 5 * clean_sd);
}

TEST_CASE("detection rate is deterministic and worker independent") {
    Device dev = device();
    CrosstalkModel model = scenario_model(dev);
    SpectatorConfig cfg = fast_config();
    cfg.shots = 100;
    DetectionOutcome a = detection_rate(cfg, model, dev.topology, 1);
    DetectionOutcome b = detection_rate(cfg, model, dev.topology, 4);
    CHECK(a.detected_attacked == b.detected_attacked);
    CHECK(a.total_flags == b.total_flags);
    CHECK(a.eta == doctest::Approx(b.eta));
}

TEST_CASE("zero-strength model yields zero detections beyond flips") {
    Device dev = device();
    CrosstalkModel zero;
    SpectatorConfig cfg = fast_config();
    cfg.shots = 200;
    DetectionOutcome out = detection_rate(cfg, zero, dev.topology);
    CHECK(out.attacked_shots == 200);
    // Flags arise only from the 1% measurement error; the threshold is
    // tuned three expected flips out, so detections are rare.
    CHECK(out.eta < 0.05);
}

TEST_CASE("false positives at attack fraction zero stay within the binomial tail") {
    Device dev = device();
    CrosstalkModel model = scenario_model(dev);
    SpectatorConfig cfg = fast_config();
    cfg.attack_fraction = 0.0;
    cfg.shots = 500;
    DetectionOutcome out = detection_rate(cfg, model, dev.topology);
    CHECK(out.attacked_shots == 0);
    CHECK(out.clean_shots == 500);
    CHECK(out.false_positive_rate < 0.02);
}

TEST_CASE("detection rate grows with attack strength") {
    Device dev = device();
    SpectatorConfig cfg = fast_config();
    cfg.tau = 5;
    cfg.shots = 150;
    CrosstalkModel model = scenario_model(dev);
    double prev = -1.0;
    for (double scale : {1.0, 4.0, 8.0}) {
        cfg.attack_scale = scale;
        DetectionOutcome out = detection_rate(cfg, model, dev.topology);
        CHECK(out.eta >= prev - 0.05);  // allow shot-noise wiggle
        prev = out.eta;
    }
    CHECK(prev > 0.5);
}

TEST_CASE("waiting-time sweep reports an interior argmax") {
    Device dev = device();
    CrosstalkModel model = scenario_model(dev);
    SpectatorConfig cfg = fast_config();
    cfg.shots = 150;
    TauSweep sweep =
        sweep_waiting_time(cfg, model, dev.topology, {1, 3, 5, 8, 20});
    REQUIRE(sweep.points.size() == 5);
    CHECK(sweep.best_eta >= sweep.points.front().second);
    CHECK(sweep.best_eta >= sweep.points.back().second);
    CHECK(sweep.best_tau > 1);
    CHECK(sweep.best_tau < 20);
    CHECK(sweep_to_csv(sweep).rfind("tau,eta\n", 0) == 0);
}

TEST_CASE("post-selection with no attack keeps the Bell outcome") {
    Device dev = device();
    CrosstalkModel zero;
    SpectatorConfig cfg = fast_config();
    cfg.data = {8, 11};
    cfg.attack_fraction = 0.0;
    cfg.meas_flip = 0.0;
    cfg.shots = 100;
    PostSelectResult r = post_select(cfg, zero, dev.topology);
    CHECK_FALSE(r.all_discarded);
    CHECK(r.retained_fraction == doctest::Approx(1.0));
    CHECK(r.all.at("00") == doctest::Approx(1.0));
    CHECK(r.retained.at("00") == doctest::Approx(1.0));
}

TEST_CASE("post-selection removes attacked shots and keeps clean ones") {
    Device dev = device();
    CrosstalkModel model = scenario_model(dev);
    SpectatorConfig cfg = fast_config();
    cfg.data = {8, 11};
    cfg.tau = 5;
    cfg.attack_fraction = 0.2;
    cfg.shots = 400;
    PostSelectResult r = post_select(cfg, model, dev.topology);
    CHECK(r.total_shots == 400);
    CHECK(r.retained.at("00") > r.all.at("00"));
    CHECK(r.retained_fraction >= 0.75);
    CHECK(r.clean_retained_fraction >= 0.9);
    CHECK(r.discarded_shots ==
          400 - llround(r.retained_fraction * 400));
}
