#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "orgnav/adam.hpp"
#include "orgnav/org.hpp"
#include "orgnav/rng.hpp"

namespace orgnav {

struct NavConfig {
  int global_dim = 64;
  int appearance_dim = 16;
  int hidden1 = 128;
  int hidden2 = 128;
  int rnn_dim = 64;
  bool use_org = true;
  bool use_graph_attention = true;

  int local_dim() const { return kNumCategories * (appearance_dim + kLafDim); }
  // Visual prefix of the joint representation: [global | local].
  int prefix_dim() const { return global_dim + local_dim(); }
  int joint_dim() const { return prefix_dim() + kActionCount + rnn_dim; }
};

// All trainable tensors of the navigation network. The recurrent agent
// embedding enters through the joint input and is re-emitted each step.
struct NavParameters {
  NavConfig config;
  std::optional<OrgParameters> org;  // absent when config.use_org is false
  Tensor w1, b1;  // joint -> hidden1
  Tensor w2, b2;  // hidden1 -> hidden2
  Tensor wr, br;  // hidden2 -> rnn state (tanh)
  Tensor wp, bp;  // rnn state -> action logits
  Tensor wv, bv;  // rnn state -> value

  static NavParameters init(const NavConfig& config, std::uint64_t seed,
                            bool requires_grad = true);

  std::vector<Tensor> trainable();
  std::vector<Tensor> trainable() const;
  NavParameters clone(bool requires_grad) const;
  void zero_grad();
  std::size_t parameter_count() const;
  bool all_finite() const;
};

struct PolicyOutput {
  Tensor distribution;  // 1 x kActionCount, softmax output
  Tensor value;         // 1 x 1
  Tensor next_hidden;   // 1 x rnn_dim
};

// Builds [global | local | prev-action one-hot | hidden]. prev_action < 0
// (the first step) leaves the one-hot block zero.
Tensor make_joint(Tape& tape, std::span<const double> global_feature, const Tensor& local,
                  int prev_action, std::span<const double> hidden, const NavConfig& config);

// Two ReLU layers, a tanh recurrent cell, then softmax policy and linear
// value heads. Throws NumericError if the heads produce non-finite values.
PolicyOutput policy_forward(Tape& tape, const Tensor& joint, const NavParameters& params);

enum class SelectMode { Train, Eval };

// Train samples from the distribution; Eval takes the argmax with ties broken
// by action order.
Action select_action(std::span<const double> distribution, SelectMode mode, Rng* rng = nullptr);

// One step of an unroll segment, holding the tape tensors the losses need.
struct TrajectoryStep {
  Tensor log_prob;  // log pi(a_t), scalar
  Tensor value;     // V(s_t), scalar
  Tensor entropy;   // H(pi_t), scalar
  Tensor distribution;
  double reward = 0.0;
  bool il_flagged = false;
  int expert_action = -1;
  int action = -1;
};

struct TrajectoryBuffer {
  std::vector<TrajectoryStep> steps;
};

// n-step advantage actor-critic loss over one segment:
//   sum_t [ -log pi(a_t) * A_t + c_value (R_t - V_t)^2 - beta H(pi_t) ]
// with R_t the discounted return bootstrapped by `bootstrap_value` at the
// segment end and A_t = R_t - V_t treated as a constant for the policy term.
Tensor a3c_loss(Tape& tape, const TrajectoryBuffer& buffer, double bootstrap_value, double gamma,
                double beta_entropy, double value_coef);

// Cross-entropy of the predicted distribution against the expert action.
Tensor il_loss(Tape& tape, const Tensor& distribution, int expert_action);

struct LossBreakdown {
  Tensor nav;
  Tensor il;
  Tensor total;  // exactly nav + il
};

// The imitation term is optional; absent supervision contributes an exact 0.
LossBreakdown total_loss(Tape& tape, const Tensor& nav, std::optional<Tensor> il);

}  // namespace orgnav
