#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qxs/rl.hpp"

using namespace qxs;

namespace {

RlConfig small_config() {
    RlConfig cfg;
    cfg.hidden = 8;
    cfg.actions = 4;
    cfg.batch = 10;
    cfg.learning_rate = 0.05;
    cfg.seed = 3;
    cfg.ambient_attack = std::nullopt;
    cfg.tenancy_window = 0.0;
    return cfg;
}

Eigen::VectorXd random_features(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::VectorXd x(dim);
    for (int i = 0; i < dim; ++i) x(i) = u(rng);
    return x;
}

double mean_entropy(const PolicyNetwork& policy,
                    const std::vector<Circuit>& circuits, int valid) {
    double total = 0;
    for (const Circuit& c : circuits) {
        Eigen::VectorXd pi = policy.probs(circuit_features(c), valid);
        double h = 0;
        for (int a = 0; a < valid; ++a) {
            if (pi(a) > 0) h -= pi(a) * std::log(pi(a));
        }
        total += h;
    }
    return total / double(circuits.size());
}

}  // namespace

TEST_CASE("circuit features are fixed-width, bounded and padded") {
    Circuit c(3, 0);
    c.append(Gate::h(0));
    c.append(Gate::cnot(1, 2));
    Eigen::VectorXd x = circuit_features(c);
    CHECK(x.size() == kRlFeatureDim);
    CHECK(x.allFinite());
    CHECK(x(0) == doctest::Approx(3.0 / 5.0));
    CHECK(x(1) == doctest::Approx(2.0 / 20.0));
    // Per-qubit counts beyond the circuit's register stay zero.
    CHECK(x(2 + 13 + 3) == 0.0);
    CHECK(x(2 + 13 + 4) == 0.0);

    Circuit big(kRlMaxQubits + 1, 0);
    big.append(Gate::h(0));
    CHECK_THROWS_AS(circuit_features(big), std::invalid_argument);
}

TEST_CASE("policy outputs are a masked softmax distribution") {
    PolicyNetwork p = PolicyNetwork::init(6, 8, 4, 1);
    std::mt19937_64 rng(4);
    Eigen::VectorXd x = random_features(rng, 6);
    for (int valid : {2, 3, 4}) {
        Eigen::VectorXd pi = p.probs(x, valid);
        CHECK(pi.size() == valid);
        CHECK(pi.sum() == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(pi.minCoeff() > 0.0);
    }
    CHECK_THROWS_AS(p.probs(x, 0), std::invalid_argument);
    CHECK_THROWS_AS(p.probs(x, 5), std::invalid_argument);
    CHECK(p.log_prob(x, 1, 3) == doctest::Approx(std::log(p.probs(x, 3)(1))));
}

TEST_CASE("parameter vector round-trips through set_parameters and JSON") {
    PolicyNetwork p = PolicyNetwork::init(5, 7, 3, 9);
    Eigen::VectorXd theta = p.parameters();
    CHECK(theta.size() ==
          static_cast<Eigen::Index>(p.parameter_count()));
    PolicyNetwork q = PolicyNetwork::init(5, 7, 3, 0);
    q.set_parameters(theta);
    CHECK((q.parameters() - theta).cwiseAbs().maxCoeff() == 0.0);
    PolicyNetwork r = PolicyNetwork::from_json(p.to_json());
    CHECK((r.parameters() - theta).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS(PolicyNetwork::from_json("{}"));
}

TEST_CASE("analytic policy gradient matches central finite differences") {
    std::mt19937_64 rng(2718);
    for (int trial = 0; trial < 5; ++trial) {
        int f = 2 + int(rng() % 15), h = 1 + int(rng() % 8),
            k = 2 + int(rng() % 3);
        PolicyNetwork p = PolicyNetwork::init(f, h, k, rng());
        Eigen::VectorXd x = random_features(rng, f);
        int valid = 2 + int(rng() % (k - 1));
        int action = int(rng() % valid);

        Eigen::VectorXd analytic = p.log_prob_grad(x, action, valid);
        Eigen::VectorXd theta = p.parameters();
        const double eps = 1e-6;
        for (Eigen::Index i = 0; i < theta.size(); i += 7) {
            Eigen::VectorXd tp = theta, tm = theta;
            tp(i) += eps;
            tm(i) -= eps;
            PolicyNetwork pp = p, pm = p;
            pp.set_parameters(tp);
            pm.set_parameters(tm);
            double fd = (pp.log_prob(x, action, valid) -
                         pm.log_prob(x, action, valid)) /
                        (2 * eps);
            double scale = std::max({1.0, std::abs(fd), std::abs(analytic(i))});
            CHECK(std::abs(analytic(i) - fd) / scale < 1e-5);
        }
    }
}

TEST_CASE("reinforce solves a two-armed bandit") {
    PolicyNetwork p = PolicyNetwork::init(4, 8, 2, 5);
    Eigen::VectorXd x(4);
    x << 0.3, -0.2, 0.8, 0.1;
    for (int it = 0; it < 500; ++it) {
        std::vector<EpisodeStep> steps = {{x, 0, 2, 1.0}, {x, 1, 2, 0.0}};
        reinforce_update(p, steps, 0.05, 0.5);
    }
    CHECK(p.probs(x, 2)(0) > 0.95);
}

TEST_CASE("zero advantage leaves the parameters unchanged") {
    PolicyNetwork p = PolicyNetwork::init(4, 6, 3, 2);
    Eigen::VectorXd before = p.parameters();
    Eigen::VectorXd x(4);
    x << 1, 0, -1, 0.5;
    std::vector<EpisodeStep> steps = {
        {x, 0, 3, 0.7}, {x, 1, 3, 0.7}, {x, 2, 3, 0.7}};
    reinforce_update(p, steps, 0.05, 0.7);
    CHECK((p.parameters() - before).norm() < 1e-8);
}

TEST_CASE("reinforce rejects non-finite rewards") {
    PolicyNetwork p = PolicyNetwork::init(4, 6, 3, 2);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
    std::vector<EpisodeStep> steps = {
        {x, 0, 3, std::numeric_limits<double>::quiet_NaN()}};
    CHECK_THROWS_AS(reinforce_update(p, steps, 0.05, 0.0),
                    std::runtime_error);
}

TEST_CASE("generated circuits respect the configured bounds") {
    auto circuits =
        gen_training_circuits(200, 5, 20, default_gate_set(), 77);
    CHECK(circuits.size() == 200);
    bool saw_cnot = false;
    for (const Circuit& c : circuits) {
        c.validate();
        CHECK(c.qubits() >= 1);
        CHECK(c.qubits() <= 5);
        CHECK(c.gate_count() >= 1);
        CHECK(c.gate_count() <= 20);
        for (const Layer& layer : c.layers()) {
            for (const Gate& g : layer) {
                if (g.kind == GateKind::CNOT) {
                    saw_cnot = true;
                    CHECK(std::abs(g.operands[0] - g.operands[1]) == 1);
                }
            }
        }
    }
    CHECK(saw_cnot);
    auto again = gen_training_circuits(200, 5, 20, default_gate_set(), 77);
    for (std::size_t i = 0; i < circuits.size(); ++i) {
        CHECK(again[i].to_json() == circuits[i].to_json());
    }
    CHECK_THROWS_AS(gen_training_circuits(5, 5, 20, {}, 1),
                    std::invalid_argument);
}

TEST_CASE("candidate sets cap at K and include the linear mapping") {
    DeviceTopology line = DeviceTopology::path(10);
    Circuit c(3, 0);
    c.append(Gate::cnot(0, 1));
    c.append(Gate::cnot(1, 2));
    ActionSet set = candidate_actions(line, c, 6, 123);
    CHECK(set.actions.size() == 6);
    Placement linear = {0, 1, 2};
    CHECK(std::find(set.actions.begin(), set.actions.end(), linear) !=
          set.actions.end());
    // Deterministic under the seed.
    ActionSet again = candidate_actions(line, c, 6, 123);
    CHECK(again.actions == set.actions);

    // Fewer placements than K: return all of them.
    DeviceTopology tiny = DeviceTopology::path(3);
    Circuit one(1, 0);
    one.append(Gate::h(0));
    ActionSet all = candidate_actions(tiny, one, 16, 1);
    CHECK(all.actions.size() == 3);
}

TEST_CASE("rewards are fidelities in [0,1] and exact at zero strength") {
    DeviceTopology line = DeviceTopology::path(6);
    CrosstalkModel zero;
    Circuit c(2, 0);
    c.append(Gate::h(0));
    c.append(Gate::cnot(0, 1));
    CHECK(rl_reward(c, {0, 1}, zero, line) == doctest::Approx(1.0));
    CrosstalkModel strong = synth_default_model(line, 0.1, 0.5, 3);
    double r = rl_reward(c, {0, 1}, strong, line, std::pair{3, 4}, 20.0);
    CHECK(r >= 0.0);
    CHECK(r < 1.0);
    CHECK_THROWS_AS(
        rl_reward(c, {3, 4}, strong, line, std::pair{3, 4}, 20.0),
        std::invalid_argument);
}

TEST_CASE("windowed reward padding increases exposure") {
    DeviceTopology line = DeviceTopology::path(6);
    CrosstalkModel model = synth_default_model(line, 0.05, 0.5, 3);
    Circuit c(2, 0);
    c.append(Gate::h(0));
    double short_window =
        rl_reward(c, {0, 1}, model, line, std::pair{3, 4}, 5.0);
    double long_window =
        rl_reward(c, {0, 1}, model, line, std::pair{3, 4}, 40.0);
    CHECK(long_window < short_window);
}

TEST_CASE("training is deterministic and its curve is well-formed") {
    DeviceTopology line = DeviceTopology::path(6);
    CrosstalkModel model = synth_default_model(line, 0.06, 0.5, 3);
    RlConfig cfg = small_config();
    auto circuits = gen_training_circuits(30, 3, 8, default_gate_set(), 5);
    TrainResult a = train(cfg, circuits, model, line);
    TrainResult b = train(cfg, circuits, model, line);
    CHECK((a.policy.parameters() - b.policy.parameters()).norm() == 0.0);
    CHECK(a.curve.size() == 3);  // 30 circuits / batch 10
    for (const auto& [ep, reward] : a.curve) {
        CHECK(reward >= 0.0);
        CHECK(reward <= 1.0 + 1e-12);
    }
}

TEST_CASE("zero-strength model leaves the policy entropy near its start") {
    DeviceTopology line = DeviceTopology::path(6);
    CrosstalkModel zero;
    RlConfig cfg = small_config();
    auto circuits = gen_training_circuits(40, 3, 8, default_gate_set(), 8);
    PolicyNetwork fresh = PolicyNetwork::init(kRlFeatureDim, cfg.hidden,
                                              cfg.actions, cfg.seed);
    double before = mean_entropy(fresh, circuits, cfg.actions);
    TrainResult r = train(cfg, circuits, zero, line);
    double after = mean_entropy(r.policy, circuits, cfg.actions);
    CHECK(std::abs(after - before) <= 0.1 * before);
    for (const auto& [ep, reward] : r.curve) {
        CHECK(reward == doctest::Approx(1.0));
    }
}

TEST_CASE("fine-tuning on the same noise keeps the evaluation stable") {
    DeviceTopology line = DeviceTopology::path(6);
    CrosstalkModel model = synth_default_model(line, 0.06, 0.5, 3);
    RlConfig cfg = small_config();
    auto circuits = gen_training_circuits(60, 3, 8, default_gate_set(), 21);
    TrainResult trained = train(cfg, circuits, model, line);
    EvalReport before =
        evaluate_policy(trained.policy, circuits, model, line, cfg);
    TrainResult tuned =
        fine_tune(trained.policy, cfg, circuits, model, line);
    EvalReport after =
        evaluate_policy(tuned.policy, circuits, model, line, cfg);
    CHECK(std::abs(after.mean_predicted - before.mean_predicted) <= 0.02);
}

TEST_CASE("predict is greedy and handles single-candidate sets") {
    PolicyNetwork p = PolicyNetwork::init(kRlFeatureDim, 8, 4, 11);
    Circuit c(2, 0);
    c.append(Gate::cnot(0, 1));
    std::vector<Placement> one = {{4, 5}};
    CHECK(predict_index(p, c, one) == 0);
    CHECK_THROWS_AS(predict_index(p, c, {}), std::invalid_argument);

    std::vector<Placement> many = {{0, 1}, {1, 2}, {2, 3}};
    std::size_t idx = predict_index(p, c, many);
    Eigen::VectorXd pi = p.probs(circuit_features(c), 3);
    for (int a = 0; a < 3; ++a) CHECK(pi(a) <= pi(int(idx)));
}

TEST_CASE("greedy predict is invariant under positive logit rescaling") {
    PolicyNetwork p = PolicyNetwork::init(kRlFeatureDim, 8, 4, 13);
    Circuit c(3, 0);
    c.append(Gate::h(0));
    c.append(Gate::cnot(1, 2));
    std::vector<Placement> cands = {{0, 1, 2}, {2, 3, 4}, {5, 6, 7}, {1, 2, 3}};
    std::size_t before = predict_index(p, c, cands);

    // Scaling the output layer by a positive constant scales every logit
    // without reordering them.
    Eigen::VectorXd theta = p.parameters();
    Eigen::Index head = Eigen::Index(8) * kRlFeatureDim + 8;  // w1 + b1
    theta.segment(head, theta.size() - head) *= 3.0;
    PolicyNetwork scaled = p;
    scaled.set_parameters(theta);
    CHECK(predict_index(scaled, c, cands) == before);
}

TEST_CASE("ambient attack operands are excluded from predictions") {
    DeviceTopology line = DeviceTopology::path(8);
    RlConfig cfg = small_config();
    cfg.ambient_attack = std::pair{2, 3};
    PolicyNetwork p = PolicyNetwork::init(kRlFeatureDim, cfg.hidden,
                                          cfg.actions, 1);
    Circuit c(2, 0);
    c.append(Gate::cnot(0, 1));
    Placement got = predict(p, c, line, cfg);
    for (int q : got) {
        CHECK(q != 2);
        CHECK(q != 3);
    }
}

TEST_CASE("config validation") {
    RlConfig cfg = small_config();
    cfg.validate();
    cfg.learning_rate = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.actions = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.finetune_fraction = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.ambient_attack = std::pair{4, 4};
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = small_config();
    cfg.tenancy_window = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
