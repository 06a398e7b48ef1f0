#include "qxs/rl.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "qxs/experiments.hpp"
#include "qxs/parallel.hpp"
#include "qxs/rng.hpp"

namespace qxs {

namespace {

constexpr int kGateKinds = 13;
constexpr double kTwoPi = 6.28318530717958647692;

int triangle_index(int a, int b) {
    // Upper-triangle (a < b) of a kRlMaxQubits square, row-major.
    int idx = 0;
    for (int r = 0; r < a; ++r) idx += kRlMaxQubits - 1 - r;
    return idx + (b - a - 1);
}

}  // namespace

Eigen::VectorXd circuit_features(const Circuit& circuit) {
    if (circuit.qubits() < 1 || circuit.qubits() > kRlMaxQubits) {
        throw std::invalid_argument("circuit outside the policy's qubit range");
    }
    Eigen::VectorXd x = Eigen::VectorXd::Zero(kRlFeatureDim);
    x(0) = circuit.qubits() / double(kRlMaxQubits);
    int total = 0;
    for (const Layer& layer : circuit.layers()) {
        for (const Gate& g : layer) {
            if (g.kind == GateKind::IDLE) continue;
            ++total;
            int kind = static_cast<int>(g.kind);
            x(2 + kind) += 1.0 / 20.0;
            for (int q : g.operands) x(2 + kGateKinds + q) += 1.0 / 20.0;
            if (g.operands.size() == 2) {
                int a = std::min(g.operands[0], g.operands[1]);
                int b = std::max(g.operands[0], g.operands[1]);
                x(2 + kGateKinds + kRlMaxQubits + triangle_index(a, b)) +=
                    1.0 / 10.0;
            }
        }
    }
    x(1) = total / 20.0;
    return x;
}

PolicyNetwork PolicyNetwork::init(int features, int hidden, int actions,
                                  std::uint64_t seed) {
    if (features < 1 || hidden < 1 || actions < 2) {
        throw std::invalid_argument("bad policy dimensions");
    }
    PolicyNetwork p;
    RandomStream rng(seed);
    auto draw = [&]() { return (rng.uniform() - 0.5) * 0.2; };
    p.w1_ = Eigen::MatrixXd::Zero(hidden, features);
    p.b1_ = Eigen::VectorXd::Zero(hidden);
    p.w2_ = Eigen::MatrixXd::Zero(actions, hidden);
    p.b2_ = Eigen::VectorXd::Zero(actions);
    for (int r = 0; r < hidden; ++r) {
        for (int c = 0; c < features; ++c) p.w1_(r, c) = draw();
    }
    for (int r = 0; r < actions; ++r) {
        for (int c = 0; c < hidden; ++c) p.w2_(r, c) = draw();
    }
    return p;
}

std::size_t PolicyNetwork::parameter_count() const {
    return std::size_t(w1_.size()) + b1_.size() + w2_.size() + b2_.size();
}

Eigen::VectorXd PolicyNetwork::probs(const Eigen::VectorXd& x,
                                     int valid) const {
    if (x.size() != w1_.cols()) {
        throw std::invalid_argument("feature dimension mismatch");
    }
    if (valid < 1 || valid > actions()) {
        throw std::invalid_argument("valid action count out of range");
    }
    Eigen::VectorXd z = (w1_ * x + b1_).array().tanh();
    Eigen::VectorXd logits = (w2_ * z + b2_).head(valid);
    double m = logits.maxCoeff();
    Eigen::VectorXd e = (logits.array() - m).exp();
    return e / e.sum();
}

double PolicyNetwork::log_prob(const Eigen::VectorXd& x, int action,
                               int valid) const {
    if (action < 0 || action >= valid) {
        throw std::invalid_argument("action index out of range");
    }
    return std::log(probs(x, valid)(action));
}

Eigen::VectorXd PolicyNetwork::log_prob_grad(const Eigen::VectorXd& x,
                                             int action, int valid) const {
    if (action < 0 || action >= valid) {
        throw std::invalid_argument("action index out of range");
    }
    Eigen::VectorXd pre = w1_ * x + b1_;
    Eigen::VectorXd z = pre.array().tanh();
    Eigen::VectorXd pi = probs(x, valid);

    // d log pi(a) / d logits = e_a - pi on the valid block, 0 beyond it.
    Eigen::VectorXd dlogits = Eigen::VectorXd::Zero(actions());
    dlogits.head(valid) = -pi;
    dlogits(action) += 1.0;

    Eigen::MatrixXd dw2 = dlogits * z.transpose();
    Eigen::VectorXd db2 = dlogits;
    Eigen::VectorXd dz = w2_.transpose() * dlogits;
    Eigen::VectorXd dpre =
        dz.array() * (1.0 - z.array() * z.array());
    Eigen::MatrixXd dw1 = dpre * x.transpose();
    Eigen::VectorXd db1 = dpre;

    Eigen::VectorXd flat(parameter_count());
    Eigen::Index off = 0;
    for (int r = 0; r < dw1.rows(); ++r) {
        flat.segment(off, dw1.cols()) = dw1.row(r);
        off += dw1.cols();
    }
    flat.segment(off, db1.size()) = db1;
    off += db1.size();
    for (int r = 0; r < dw2.rows(); ++r) {
        flat.segment(off, dw2.cols()) = dw2.row(r);
        off += dw2.cols();
    }
    flat.segment(off, db2.size()) = db2;
    return flat;
}

Eigen::VectorXd PolicyNetwork::parameters() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index off = 0;
    for (int r = 0; r < w1_.rows(); ++r) {
        flat.segment(off, w1_.cols()) = w1_.row(r);
        off += w1_.cols();
    }
    flat.segment(off, b1_.size()) = b1_;
    off += b1_.size();
    for (int r = 0; r < w2_.rows(); ++r) {
        flat.segment(off, w2_.cols()) = w2_.row(r);
        off += w2_.cols();
    }
    flat.segment(off, b2_.size()) = b2_;
    return flat;
}

void PolicyNetwork::set_parameters(const Eigen::VectorXd& flat) {
    if (flat.size() != static_cast<Eigen::Index>(parameter_count())) {
        throw std::invalid_argument("parameter vector size mismatch");
    }
    Eigen::Index off = 0;
    for (int r = 0; r < w1_.rows(); ++r) {
        w1_.row(r) = flat.segment(off, w1_.cols());
        off += w1_.cols();
    }
    b1_ = flat.segment(off, b1_.size());
    off += b1_.size();
    for (int r = 0; r < w2_.rows(); ++r) {
        w2_.row(r) = flat.segment(off, w2_.cols());
        off += w2_.cols();
    }
    b2_ = flat.segment(off, b2_.size());
}

std::string PolicyNetwork::to_json() const {
    nlohmann::ordered_json doc;
    doc["features"] = features();
    doc["hidden"] = hidden();
    doc["actions"] = actions();
    doc["nonlinearity"] = "tanh";
    Eigen::VectorXd flat = parameters();
    std::vector<double> params(flat.data(), flat.data() + flat.size());
    doc["parameters"] = params;
    return doc.dump();
}

PolicyNetwork PolicyNetwork::from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text);
    int f = doc.at("features").get<int>();
    int h = doc.at("hidden").get<int>();
    int k = doc.at("actions").get<int>();
    PolicyNetwork p = PolicyNetwork::init(f, h, k, 0);
    auto params = doc.at("parameters").get<std::vector<double>>();
    if (params.size() != p.parameter_count()) {
        throw std::invalid_argument("checkpoint parameter count mismatch");
    }
    p.set_parameters(Eigen::Map<const Eigen::VectorXd>(
        params.data(), static_cast<Eigen::Index>(params.size())));
    return p;
}

void reinforce_update(PolicyNetwork& policy,
                      const std::vector<EpisodeStep>& steps,
                      double learning_rate, double baseline) {
    if (learning_rate <= 0) {
        throw std::invalid_argument("learning rate must be positive");
    }
    Eigen::VectorXd grad =
        Eigen::VectorXd::Zero(static_cast<Eigen::Index>(
            policy.parameter_count()));
    for (std::size_t i = 0; i < steps.size(); ++i) {
        const EpisodeStep& s = steps[i];
        if (!std::isfinite(s.reward)) {
            throw std::runtime_error("non-finite reward at step " +
                                     std::to_string(i));
        }
        grad += (s.reward - baseline) *
                policy.log_prob_grad(s.state, s.action, s.valid_actions);
    }
    if (!grad.allFinite()) {
        throw std::runtime_error("non-finite policy gradient");
    }
    policy.set_parameters(policy.parameters() + learning_rate * grad);
}

void RlConfig::validate() const {
    if (learning_rate <= 0) throw std::invalid_argument("learning rate <= 0");
    if (actions < 2) throw std::invalid_argument("K must be >= 2");
    if (hidden < 1) throw std::invalid_argument("hidden width < 1");
    if (batch < 1) throw std::invalid_argument("batch < 1");
    if (finetune_fraction <= 0 || finetune_fraction > 1) {
        throw std::invalid_argument("fine-tune fraction outside (0,1]");
    }
    if (decay_interval < 1) throw std::invalid_argument("decay interval < 1");
    if (max_qubits < 1 || max_qubits > kRlMaxQubits) {
        throw std::invalid_argument("max qubits outside [1,5]");
    }
    if (max_gates < 1) throw std::invalid_argument("max gates < 1");
    if (tenancy_window < 0) throw std::invalid_argument("negative window");
    if (ambient_attack && ambient_attack->first == ambient_attack->second) {
        throw std::invalid_argument("ambient attack pair must be distinct");
    }
}

std::vector<GateKind> default_gate_set() {
    return {GateKind::H,  GateKind::X,  GateKind::Y,  GateKind::Z,
            GateKind::S,  GateKind::T,  GateKind::RX, GateKind::RY,
            GateKind::RZ, GateKind::CNOT};
}

std::vector<Circuit> gen_training_circuits(int count, int max_qubits,
                                           int max_gates,
                                           const std::vector<GateKind>& gates,
                                           std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("count must be >= 1");
    if (gates.empty()) throw std::invalid_argument("empty gate set");
    if (max_qubits < 1 || max_qubits > kRlMaxQubits) {
        throw std::invalid_argument("max qubits outside [1,5]");
    }
    std::vector<GateKind> single;
    for (GateKind k : gates) {
        if (gate_arity(k) == 1) single.push_back(k);
    }
    std::vector<Circuit> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        RandomStream rng = RandomStream::derived(seed, std::uint64_t(i));
        int n = 1 + static_cast<int>(rng.below(max_qubits));
        int g = 1 + static_cast<int>(rng.below(max_gates));
        Circuit c(n, 0);
        for (int j = 0; j < g; ++j) {
            const std::vector<GateKind>& pool =
                (n >= 2 || single.empty()) ? gates : single;
            GateKind kind = pool[rng.below(pool.size())];
            if (kind == GateKind::CNOT && n < 2) {
                kind = single.empty() ? GateKind::H
                                      : single[rng.below(single.size())];
            }
            if (kind == GateKind::CNOT) {
                int a = static_cast<int>(rng.below(n - 1));
                bool flip = rng.below(2) == 1;
                c.append(flip ? Gate::cnot(a + 1, a) : Gate::cnot(a, a + 1));
            } else if (is_rotation(kind)) {
                int q = static_cast<int>(rng.below(n));
                c.append(Gate{kind, {q}, rng.uniform() * kTwoPi, {}});
            } else {
                int q = static_cast<int>(rng.below(n));
                c.append(Gate{kind, {q}, {}, {}});
            }
        }
        c.validate();
        out.push_back(std::move(c));
    }
    return out;
}

ActionSet candidate_actions(const DeviceTopology& topo, const Circuit& circuit,
                            int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("K must be >= 2");
    int n = circuit.qubits();
    PlacementConstraints cons;
    cons.exclude_dead_edges = false;
    std::vector<Placement> all =
        enumerate_placements(topo, CircuitShape::line(n), cons);
    if (all.empty()) throw std::invalid_argument("no valid placement");

    ActionSet set;
    if (static_cast<int>(all.size()) <= k) {
        set.actions = all;
        return set;
    }
    Placement linear(n);
    for (int i = 0; i < n; ++i) linear[i] = i;
    bool linear_valid =
        std::find(all.begin(), all.end(), linear) != all.end();

    RandomStream rng = RandomStream::derived(seed, std::uint64_t(n));
    std::vector<std::size_t> order(all.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size() - 1; i > 0; --i) {
        std::swap(order[i], order[rng.below(i + 1)]);
    }
    std::vector<Placement> chosen;
    for (std::size_t i = 0; i < order.size() &&
                            chosen.size() < static_cast<std::size_t>(k);
         ++i) {
        chosen.push_back(all[order[i]]);
    }
    if (linear_valid &&
        std::find(chosen.begin(), chosen.end(), linear) == chosen.end()) {
        chosen.back() = linear;
    }
    std::sort(chosen.begin(), chosen.end());
    set.actions = std::move(chosen);
    return set;
}

double rl_reward(const Circuit& circuit, const Placement& placement,
                 const CrosstalkModel& model, const DeviceTopology& topo) {
    return placed_fidelity(circuit, placement, {}, model, topo);
}

double rl_reward(const Circuit& circuit, const Placement& placement,
                 const CrosstalkModel& model, const DeviceTopology& topo,
                 std::optional<std::pair<int, int>> ambient_attack,
                 double window) {
    if (ambient_attack) {
        for (int q : placement) {
            if (q == ambient_attack->first || q == ambient_attack->second) {
                throw std::invalid_argument(
                    "placement overlaps the ambient attack pair");
            }
        }
    }
    Circuit padded = circuit;
    double elapsed = 0;
    for (const Layer& l : padded.layers()) elapsed += layer_duration(l);
    // With a scheduled attack every layer lasts a full CNOT; bare idle
    // layers only half a unit.
    double per_layer = ambient_attack ? 1.0 : 0.5;
    while (elapsed + 1e-12 < window) {
        padded.append_layer(Gate::idle(0));
        elapsed += per_layer;
    }
    return placed_fidelity(padded, placement, ambient_attack, model, topo);
}

namespace {

/// Candidate set with any placement touching the ambient attack pair
/// removed; those cannot be scheduled alongside it.
ActionSet usable_actions(const DeviceTopology& topo, const Circuit& circuit,
                         const RlConfig& config) {
    ActionSet set = candidate_actions(topo, circuit, config.actions,
                                      config.action_seed);
    if (!config.ambient_attack) return set;
    auto [a, b] = *config.ambient_attack;
    std::erase_if(set.actions, [&](const Placement& p) {
        return std::find(p.begin(), p.end(), a) != p.end() ||
               std::find(p.begin(), p.end(), b) != p.end();
    });
    if (set.actions.empty()) {
        throw std::invalid_argument("ambient attack excludes all candidates");
    }
    return set;
}

struct CircuitEval {
    Eigen::VectorXd state;
    ActionSet actions;
    std::vector<double> rewards;
};

/// Candidate sets depend only on the qubit count; cache per n.
class ActionCache {
  public:
    ActionCache(const DeviceTopology& topo, const RlConfig& config)
        : topo_(topo), config_(config) {}

    const ActionSet& get(const Circuit& circuit) {
        int n = circuit.qubits();
        auto it = cache_.find(n);
        if (it == cache_.end()) {
            it = cache_
                     .emplace(n, usable_actions(topo_, circuit, config_))
                     .first;
        }
        return it->second;
    }

  private:
    const DeviceTopology& topo_;
    const RlConfig& config_;
    std::map<int, ActionSet> cache_;
};

TrainResult run_training(PolicyNetwork policy, const RlConfig& config,
                         const std::vector<Circuit>& circuits,
                         const CrosstalkModel& model,
                         const DeviceTopology& topo, int workers,
                         bool decay_lr) {
    config.validate();
    if (circuits.empty()) throw std::invalid_argument("no training circuits");

    TrainResult result;
    ActionCache cache(topo, config);
    double baseline_sum = 0;
    long long baseline_count = 0;
    int episode = 0;
    for (std::size_t start = 0; start < circuits.size();
         start += config.batch, ++episode) {
        std::size_t stop =
            std::min(circuits.size(), start + std::size_t(config.batch));
        std::vector<CircuitEval> evals(stop - start);
        std::vector<std::pair<std::size_t, std::size_t>> tasks;
        for (std::size_t c = start; c < stop; ++c) {
            CircuitEval& ev = evals[c - start];
            ev.state = circuit_features(circuits[c]);
            ev.actions = cache.get(circuits[c]);
            ev.rewards.resize(ev.actions.actions.size());
            for (std::size_t a = 0; a < ev.rewards.size(); ++a) {
                tasks.emplace_back(c - start, a);
            }
        }
        parallel_for(tasks.size(), workers, [&](std::size_t t) {
            auto [ci, ai] = tasks[t];
            evals[ci].rewards[ai] =
                rl_reward(circuits[start + ci],
                          evals[ci].actions.actions[ai], model, topo,
                          config.ambient_attack, config.tenancy_window);
        });

        double lr = config.learning_rate;
        if (decay_lr) {
            lr *= std::pow(config.decay_factor,
                           double(episode / config.decay_interval));
        }
        double episode_reward = 0;
        for (CircuitEval& ev : evals) {
            int valid = static_cast<int>(ev.actions.actions.size());
            Eigen::VectorXd pi = policy.probs(ev.state, valid);
            double expected = 0;
            for (int a = 0; a < valid; ++a) expected += pi(a) * ev.rewards[a];
            episode_reward += expected;

            double baseline = 0;
            if (config.use_baseline && baseline_count > 0) {
                baseline = baseline_sum / double(baseline_count);
            }
            std::vector<EpisodeStep> steps;
            steps.reserve(valid);
            for (int a = 0; a < valid; ++a) {
                steps.push_back({ev.state, a, valid, ev.rewards[a]});
                baseline_sum += ev.rewards[a];
                ++baseline_count;
            }
            reinforce_update(policy, steps, lr, baseline);
        }
        result.curve.emplace_back(episode,
                                  episode_reward / double(evals.size()));
    }
    result.policy = std::move(policy);
    return result;
}

}  // namespace

TrainResult train(const RlConfig& config, const std::vector<Circuit>& circuits,
                  const CrosstalkModel& model, const DeviceTopology& topo,
                  int workers) {
    PolicyNetwork policy = PolicyNetwork::init(kRlFeatureDim, config.hidden,
                                               config.actions, config.seed);
    return run_training(std::move(policy), config, circuits, model, topo,
                        workers, /*decay_lr=*/false);
}

TrainResult fine_tune(const PolicyNetwork& policy, const RlConfig& config,
                      const std::vector<Circuit>& circuits,
                      const CrosstalkModel& model, const DeviceTopology& topo,
                      int workers) {
    config.validate();
    std::size_t subset = std::max<std::size_t>(
        1, std::size_t(std::ceil(config.finetune_fraction *
                                 double(circuits.size()))));
    std::vector<Circuit> part(circuits.begin(),
                              circuits.begin() +
                                  std::min(subset, circuits.size()));
    return run_training(policy, config, part, model, topo, workers,
                        /*decay_lr=*/true);
}

Placement predict(const PolicyNetwork& policy, const Circuit& circuit,
                  const DeviceTopology& topo, const RlConfig& config) {
    ActionSet set = usable_actions(topo, circuit, config);
    std::size_t idx = predict_index(policy, circuit, set.actions);
    return set.actions[idx];
}

std::size_t predict_index(const PolicyNetwork& policy, const Circuit& circuit,
                          const std::vector<Placement>& candidates) {
    if (candidates.empty()) throw std::invalid_argument("no candidates");
    if (static_cast<int>(candidates.size()) > policy.actions()) {
        throw std::invalid_argument("more candidates than policy actions");
    }
    Eigen::VectorXd pi = policy.probs(circuit_features(circuit),
                                      static_cast<int>(candidates.size()));
    Eigen::Index best = 0;
    pi.maxCoeff(&best);
    return static_cast<std::size_t>(best);
}

PolicyNetwork fine_tune_scenario(const PolicyNetwork& policy,
                                 const Scenario& scenario,
                                 const CrosstalkModel& model,
                                 const DeviceTopology& topo,
                                 const RlConfig& config, int episodes,
                                 int workers) {
    config.validate();
    if (scenario.candidates.empty()) {
        throw std::invalid_argument("scenario has no candidates");
    }
    if (static_cast<int>(scenario.candidates.size()) > config.actions) {
        throw std::invalid_argument("more candidates than policy actions");
    }
    Eigen::VectorXd state = circuit_features(scenario.victim);
    int valid = static_cast<int>(scenario.candidates.size());
    std::vector<double> rewards(valid);
    parallel_for(std::size_t(valid), workers, [&](std::size_t a) {
        rewards[a] = placed_fidelity(scenario.victim, scenario.candidates[a],
                                     scenario.attack, model, topo);
    });
    PolicyNetwork tuned = policy;
    double baseline_sum = 0;
    long long baseline_count = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        double lr = config.learning_rate *
                    std::pow(config.decay_factor,
                             double(ep / config.decay_interval));
        double baseline = 0;
        if (config.use_baseline && baseline_count > 0) {
            baseline = baseline_sum / double(baseline_count);
        }
        std::vector<EpisodeStep> steps;
        for (int a = 0; a < valid; ++a) {
            steps.push_back({state, a, valid, rewards[a]});
            baseline_sum += rewards[a];
            ++baseline_count;
        }
        reinforce_update(tuned, steps, lr, baseline);
    }
    return tuned;
}

EvalReport evaluate_policy(const PolicyNetwork& policy,
                           const std::vector<Circuit>& circuits,
                           const CrosstalkModel& model,
                           const DeviceTopology& topo, const RlConfig& config,
                           int workers) {
    if (circuits.empty()) throw std::invalid_argument("no circuits");
    std::vector<double> predicted(circuits.size());
    std::vector<double> linear(circuits.size());
    ActionCache cache(topo, config);
    // Pre-resolve the candidate sets serially; the cache is not
    // thread-safe.
    std::vector<const ActionSet*> sets(circuits.size());
    for (std::size_t i = 0; i < circuits.size(); ++i) {
        sets[i] = &cache.get(circuits[i]);
    }
    parallel_for(circuits.size(), workers, [&](std::size_t i) {
        std::size_t idx =
            predict_index(policy, circuits[i], sets[i]->actions);
        predicted[i] =
            rl_reward(circuits[i], sets[i]->actions[idx], model, topo,
                      config.ambient_attack, config.tenancy_window);
        Placement id(circuits[i].qubits());
        for (int q = 0; q < circuits[i].qubits(); ++q) id[q] = q;
        linear[i] = rl_reward(circuits[i], id, model, topo,
                              config.ambient_attack, config.tenancy_window);
    });
    EvalReport report;
    for (std::size_t i = 0; i < circuits.size(); ++i) {
        report.mean_predicted += predicted[i];
        report.mean_linear += linear[i];
    }
    report.mean_predicted /= double(circuits.size());
    report.mean_linear /= double(circuits.size());
    return report;
}

}  // namespace qxs
