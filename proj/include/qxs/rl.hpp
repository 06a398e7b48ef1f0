#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qxs/circuit.hpp"
#include "qxs/device.hpp"
#include "qxs/noise.hpp"

namespace qxs {

/// Fixed policy input width: qubit count, gate count, 13-bin gate-kind
/// histogram, per-logical-qubit gate counts (padded to 5) and the flattened
/// 5x5 upper triangle of the two-qubit interaction matrix.
inline constexpr int kRlFeatureDim = 30;
inline constexpr int kRlMaxQubits = 5;

Eigen::VectorXd circuit_features(const Circuit& circuit);

/// Two-layer tanh/softmax policy over at most K candidate placements.
/// Logits past the valid action count are masked out.
class PolicyNetwork {
  public:
    PolicyNetwork() = default;
    static PolicyNetwork init(int features, int hidden, int actions,
                              std::uint64_t seed);

    int features() const { return static_cast<int>(w1_.cols()); }
    int hidden() const { return static_cast<int>(w1_.rows()); }
    int actions() const { return static_cast<int>(w2_.rows()); }
    std::size_t parameter_count() const;

    Eigen::VectorXd probs(const Eigen::VectorXd& x, int valid) const;
    double log_prob(const Eigen::VectorXd& x, int action, int valid) const;
    /// d log pi(action|x) / d theta in the flat parameter order.
    Eigen::VectorXd log_prob_grad(const Eigen::VectorXd& x, int action,
                                  int valid) const;

    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::VectorXd& flat);

    std::string to_json() const;
    static PolicyNetwork from_json(const std::string& text);

  private:
    Eigen::MatrixXd w1_, w2_;
    Eigen::VectorXd b1_, b2_;
};

struct EpisodeStep {
    Eigen::VectorXd state;
    int action = 0;
    int valid_actions = 0;
    double reward = 0;
};

/// One gradient-ascent step on sum over steps of
/// log pi(a|s) * (reward - baseline). Throws on non-finite gradients.
void reinforce_update(PolicyNetwork& policy,
                      const std::vector<EpisodeStep>& steps,
                      double learning_rate, double baseline);

struct RlConfig {
    int hidden = 64;
    int actions = 16;  // K
    double learning_rate = 0.05;
    int batch = 50;  // circuits per episode
    bool use_baseline = true;
    std::uint64_t seed = 1;
    /// Seed for candidate-placement sampling; fixed across circuits so the
    /// K device regions stay identical through training and prediction.
    std::uint64_t action_seed = 0x9d2c5680;
    double finetune_fraction = 0.2;
    int decay_interval = 10;  // episodes per learning-rate step
    double decay_factor = 0.5;
    int max_qubits = kRlMaxQubits;
    int max_gates = 20;
    /// Co-tenancy landscape for training and evaluation rewards: a repeated
    /// CNOT keeps firing on this pair while the circuit runs, and the
    /// circuit's qubits stay allocated (idling) until the window closes.
    /// Short circuits therefore see the same exposure as long ones.
    std::optional<std::pair<int, int>> ambient_attack = std::pair<int, int>{5, 8};
    double tenancy_window = 80.0;  // time units

    void validate() const;
};

/// Random circuits: qubit count uniform in [1, max_qubits], gate count
/// uniform in [1, max_gates], kinds uniform over the gate set, CNOT operands
/// adjacent on the logical line. Deterministic under seed.
std::vector<Circuit> gen_training_circuits(int count, int max_qubits,
                                           int max_gates,
                                           const std::vector<GateKind>& gates,
                                           std::uint64_t seed);
std::vector<GateKind> default_gate_set();

struct ActionSet {
    std::vector<Placement> actions;
};

/// K line-shaped placements for the circuit's qubit count, deterministically
/// sampled; the identity mapping i -> i is always included when it respects
/// the coupling graph.
ActionSet candidate_actions(const DeviceTopology& topo, const Circuit& circuit,
                            int k, std::uint64_t seed);

/// Fidelity of the placed circuit against its noise-free output under the
/// crosstalk model. Placements are not required to respect the coupling
/// graph; a CNOT landing on a non-edge simply drives no modeled crosstalk.
double rl_reward(const Circuit& circuit, const Placement& placement,
                 const CrosstalkModel& model, const DeviceTopology& topo);

/// Reward over a co-tenancy window: the circuit is padded with idle layers
/// until `window` time units and an optional repeated CNOT fires on
/// `ambient_attack` throughout. The placement must not overlap the attack
/// operands.
double rl_reward(const Circuit& circuit, const Placement& placement,
                 const CrosstalkModel& model, const DeviceTopology& topo,
                 std::optional<std::pair<int, int>> ambient_attack,
                 double window);

struct TrainResult {
    PolicyNetwork policy;
    // (episode index, mean reward of the policy's sampled-action
    // distribution over that episode's circuits)
    std::vector<std::pair<int, double>> curve;
};

/// Full-information REINFORCE: every candidate action of every circuit is
/// evaluated exactly and contributes a weighted log-probability gradient.
TrainResult train(const RlConfig& config, const std::vector<Circuit>& circuits,
                  const CrosstalkModel& model, const DeviceTopology& topo,
                  int workers = 0);

/// Continues training on a circuit subset against a new model with the
/// step-decayed learning rate schedule.
TrainResult fine_tune(const PolicyNetwork& policy, const RlConfig& config,
                      const std::vector<Circuit>& circuits,
                      const CrosstalkModel& model, const DeviceTopology& topo,
                      int workers = 0);

/// Greedy argmax action for the circuit's candidate set.
Placement predict(const PolicyNetwork& policy, const Circuit& circuit,
                  const DeviceTopology& topo, const RlConfig& config);

/// Greedy argmax over an explicit candidate list (placement-table
/// scenarios).
std::size_t predict_index(const PolicyNetwork& policy, const Circuit& circuit,
                          const std::vector<Placement>& candidates);

/// Bandit-style fine-tune against one fixed scenario: victim circuit, fixed
/// attack pair and an explicit candidate list.
struct Scenario {
    Circuit victim;
    std::pair<int, int> attack;
    std::vector<Placement> candidates;
};
PolicyNetwork fine_tune_scenario(const PolicyNetwork& policy,
                                 const Scenario& scenario,
                                 const CrosstalkModel& model,
                                 const DeviceTopology& topo,
                                 const RlConfig& config, int episodes = 60,
                                 int workers = 0);

struct EvalReport {
    double mean_predicted = 0;
    double mean_linear = 0;  // identity mapping i -> i
};
EvalReport evaluate_policy(const PolicyNetwork& policy,
                           const std::vector<Circuit>& circuits,
                           const CrosstalkModel& model,
                           const DeviceTopology& topo, const RlConfig& config,
                           int workers = 0);

}  // namespace qxs
