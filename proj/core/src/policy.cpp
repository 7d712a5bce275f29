#include "orgnav/policy.hpp"

#include <cmath>

namespace orgnav {

namespace {

Tensor dense_init(int in, int out, Rng& rng, bool requires_grad) {
  const double k = 1.0 / std::sqrt(static_cast<double>(in));
  return Tensor::uniform(in, out, -k, k, rng, requires_grad);
}

}  // namespace

NavParameters NavParameters::init(const NavConfig& config, std::uint64_t seed,
                                  bool requires_grad) {
  Rng rng(mix64(0x9a41ull, seed));
  NavParameters p;
  p.config = config;
  if (config.use_org) p.org = OrgParameters::init(seed, requires_grad);
  p.w1 = dense_init(config.joint_dim(), config.hidden1, rng, requires_grad);
  p.b1 = Tensor::zeros(1, config.hidden1, requires_grad);
  p.w2 = dense_init(config.hidden1, config.hidden2, rng, requires_grad);
  p.b2 = Tensor::zeros(1, config.hidden2, requires_grad);
  p.wr = dense_init(config.hidden2, config.rnn_dim, rng, requires_grad);
  p.br = Tensor::zeros(1, config.rnn_dim, requires_grad);
  p.wp = dense_init(config.rnn_dim, kActionCount, rng, requires_grad);
  p.bp = Tensor::zeros(1, kActionCount, requires_grad);
  p.wv = dense_init(config.rnn_dim, 1, rng, requires_grad);
  p.bv = Tensor::zeros(1, 1, requires_grad);
  return p;
}

std::vector<Tensor> NavParameters::trainable() {
  std::vector<Tensor> out;
  if (org) {
    out.push_back(org->adjacency);
    out.push_back(org->node_embed);
  }
  for (const Tensor& t : {w1, b1, w2, b2, wr, br, wp, bp, wv, bv}) out.push_back(t);
  return out;
}

std::vector<Tensor> NavParameters::trainable() const {
  return const_cast<NavParameters*>(this)->trainable();
}

NavParameters NavParameters::clone(bool requires_grad) const {
  NavParameters p;
  p.config = config;
  if (org) p.org = org->clone(requires_grad);
  p.w1 = w1.clone(requires_grad);
  p.b1 = b1.clone(requires_grad);
  p.w2 = w2.clone(requires_grad);
  p.b2 = b2.clone(requires_grad);
  p.wr = wr.clone(requires_grad);
  p.br = br.clone(requires_grad);
  p.wp = wp.clone(requires_grad);
  p.bp = bp.clone(requires_grad);
  p.wv = wv.clone(requires_grad);
  p.bv = bv.clone(requires_grad);
  return p;
}

void NavParameters::zero_grad() {
  for (Tensor& t : trainable()) t.zero_grad();
}

std::size_t NavParameters::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : trainable()) n += static_cast<std::size_t>(t.size());
  return n;
}

bool NavParameters::all_finite() const {
  for (const Tensor& t : trainable()) {
    if (!t.all_finite()) return false;
  }
  return true;
}

Tensor make_joint(Tape& tape, std::span<const double> global_feature, const Tensor& local,
                  int prev_action, std::span<const double> hidden, const NavConfig& config) {
  if (static_cast<int>(global_feature.size()) != config.global_dim) {
    throw ShapeError("global feature length " + std::to_string(global_feature.size()) +
                     ", expected " + std::to_string(config.global_dim));
  }
  if (local.rows() != 1 || local.cols() != config.local_dim()) {
    throw ShapeError("local feature shape " + local.shape().str() + ", expected 1x" +
                     std::to_string(config.local_dim()));
  }
  if (static_cast<int>(hidden.size()) != config.rnn_dim) {
    throw ShapeError("hidden state length " + std::to_string(hidden.size()) + ", expected " +
                     std::to_string(config.rnn_dim));
  }
  Tensor prev = prev_action >= 0 ? Tensor::onehot(kActionCount, prev_action)
                                 : Tensor::zeros(1, kActionCount);
  const Tensor parts[] = {Tensor::from(global_feature, 1, config.global_dim), local, prev,
                          Tensor::from(hidden, 1, config.rnn_dim)};
  return concat(tape, parts, Axis::Cols);
}

PolicyOutput policy_forward(Tape& tape, const Tensor& joint, const NavParameters& params) {
  if (joint.rows() != 1 || joint.cols() != params.config.joint_dim()) {
    throw ShapeError("joint representation shape " + joint.shape().str() + ", expected 1x" +
                     std::to_string(params.config.joint_dim()));
  }
  const Tensor h1 = relu(tape, add(tape, matmul(tape, joint, params.w1), params.b1));
  const Tensor h2 = relu(tape, add(tape, matmul(tape, h1, params.w2), params.b2));
  const Tensor state = tanh(tape, add(tape, matmul(tape, h2, params.wr), params.br));

  PolicyOutput out;
  out.next_hidden = state;
  out.distribution =
      softmax(tape, add(tape, matmul(tape, state, params.wp), params.bp), Axis::Cols);
  out.value = add(tape, matmul(tape, state, params.wv), params.bv);
  if (!out.distribution.all_finite() || !out.value.all_finite()) {
    throw NumericError("policy forward produced non-finite outputs");
  }
  return out;
}

Action select_action(std::span<const double> distribution, SelectMode mode, Rng* rng) {
  if (static_cast<int>(distribution.size()) != kActionCount) {
    throw ShapeError("action distribution must have " + std::to_string(kActionCount) +
                     " entries");
  }
  if (mode == SelectMode::Eval) {
    int best = 0;
    for (int i = 1; i < kActionCount; ++i) {
      if (distribution[static_cast<std::size_t>(i)] >
          distribution[static_cast<std::size_t>(best)]) {
        best = i;
      }
    }
    return static_cast<Action>(best);
  }
  if (rng == nullptr) throw ProtocolError("train-mode action selection needs an rng");
  const double u = rng->uniform();
  double cdf = 0.0;
  for (int i = 0; i < kActionCount; ++i) {
    cdf += distribution[static_cast<std::size_t>(i)];
    if (u < cdf) return static_cast<Action>(i);
  }
  return Action::Done;  // cdf ended short of 1 by rounding
}

Tensor a3c_loss(Tape& tape, const TrajectoryBuffer& buffer, double bootstrap_value, double gamma,
                double beta_entropy, double value_coef) {
  if (buffer.steps.empty()) throw ProtocolError("a3c_loss on an empty trajectory buffer");

  const std::size_t n = buffer.steps.size();
  std::vector<double> returns(n);
  double running = bootstrap_value;
  for (std::size_t i = n; i-- > 0;) {
    running = buffer.steps[i].reward + gamma * running;
    returns[i] = running;
  }

  Tensor loss = Tensor::scalar(0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const TrajectoryStep& s = buffer.steps[i];
    const double advantage = returns[i] - s.value.item();
    const Tensor policy_term = scale(tape, s.log_prob, -advantage);
    const Tensor value_err = sub(tape, s.value, Tensor::scalar(returns[i]));
    const Tensor value_term = scale(tape, square(tape, value_err), value_coef);
    const Tensor entropy_term = scale(tape, s.entropy, -beta_entropy);
    loss = add(tape, loss, add(tape, policy_term, add(tape, value_term, entropy_term)));
  }
  return loss;
}

Tensor il_loss(Tape& tape, const Tensor& distribution, int expert_action) {
  return cross_entropy(tape, distribution, expert_action);
}

LossBreakdown total_loss(Tape& tape, const Tensor& nav, std::optional<Tensor> il) {
  LossBreakdown out;
  out.nav = nav;
  out.il = il.has_value() ? *il : Tensor::scalar(0.0);
  out.total = il.has_value() ? add(tape, nav, *il) : nav;
  return out;
}

}  // namespace orgnav
