#include "orgnav/tpn.hpp"

#include <cmath>

namespace orgnav {

bool detect_deadlock(const ExternalMemory& memory, std::span<const double> feature, double tau,
                     int min_revisits) {
  int hits = 0;
  for (const std::vector<double>& past : memory.features()) {
    if (past.size() != feature.size()) continue;
    double worst = 0.0;
    for (std::size_t i = 0; i < feature.size(); ++i) {
      worst = std::max(worst, std::abs(past[i] - feature[i]));
      if (worst > tau) break;
    }
    if (worst <= tau && ++hits >= min_revisits) return true;
  }
  return false;
}

void record_step(ExternalMemory& external, InternalMemory& internal,
                 std::span<const double> feature,
                 const std::array<double, kActionCount>& action_dist,
                 std::span<const double> next_feature) {
  if (feature.size() != next_feature.size()) {
    throw ShapeError("record_step: feature lengths " + std::to_string(feature.size()) + " and " +
                     std::to_string(next_feature.size()) + " differ");
  }
  external.append({feature.begin(), feature.end()});
  MemorySlot slot;
  slot.key.assign(feature.begin(), feature.end());
  slot.action_dist = action_dist;
  slot.next_state.assign(next_feature.begin(), next_feature.end());
  internal.append(std::move(slot));
}

Tensor memory_attention(Tape& tape, const Tensor& query, const InternalMemory& memory) {
  if (memory.empty()) {
    throw ProtocolError("memory_attention on an empty internal memory");
  }
  const int n = static_cast<int>(memory.size());
  const int dim = query.size();
  if (query.rows() != 1) throw ShapeError("attention query must be a row vector");

  Tensor keys = Tensor::zeros(n, dim);
  const int value_dim = kActionCount + dim;
  Tensor values = Tensor::zeros(n, value_dim);
  for (int i = 0; i < n; ++i) {
    const MemorySlot& slot = memory.slots()[static_cast<std::size_t>(i)];
    if (static_cast<int>(slot.key.size()) != dim) {
      throw ShapeError("memory slot " + std::to_string(i) + " key length " +
                       std::to_string(slot.key.size()) + " does not match the query");
    }
    std::copy(slot.key.begin(), slot.key.end(),
              keys.data().begin() + static_cast<std::size_t>(i) * dim);
    double* vrow = values.data().data() + static_cast<std::size_t>(i) * value_dim;
    std::copy(slot.action_dist.begin(), slot.action_dist.end(), vrow);
    std::copy(slot.next_state.begin(), slot.next_state.end(), vrow + kActionCount);
  }

  // scores = q . K^T realized as (K . q^T)^T via the existing primitives.
  Tensor query_col = reshape(tape, query, dim, 1);
  Tensor scores = reshape(tape, matmul(tape, keys, query_col), 1, n);
  Tensor probs = softmax(tape, scores, Axis::Cols);
  return matmul(tape, probs, values);
}

TpnParameters TpnParameters::init(int feature_dim, int hidden_dim, std::uint64_t seed,
                                  bool requires_grad) {
  Rng rng(mix64(0x791ull, seed));
  const int in = feature_dim + kActionCount + feature_dim;  // query + attended value
  TpnParameters p;
  const double k1 = 1.0 / std::sqrt(static_cast<double>(in));
  p.w_embed = Tensor::uniform(in, hidden_dim, -k1, k1, rng, requires_grad);
  p.b_embed = Tensor::zeros(1, hidden_dim, requires_grad);
  const double k2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  p.w_head = Tensor::uniform(hidden_dim, kActionCount, -k2, k2, rng, requires_grad);
  p.b_head = Tensor::zeros(1, kActionCount, requires_grad);
  return p;
}

std::vector<Tensor> TpnParameters::trainable() { return {w_embed, b_embed, w_head, b_head}; }

TpnParameters TpnParameters::clone(bool requires_grad) const {
  TpnParameters p;
  p.w_embed = w_embed.clone(requires_grad);
  p.b_embed = b_embed.clone(requires_grad);
  p.w_head = w_head.clone(requires_grad);
  p.b_head = b_head.clone(requires_grad);
  return p;
}

void TpnParameters::zero_grad() {
  for (Tensor& t : trainable()) t.zero_grad();
}

std::size_t TpnParameters::parameter_count() const {
  std::size_t n = 0;
  for (const Tensor& t : {w_embed, b_embed, w_head, b_head}) {
    n += static_cast<std::size_t>(t.size());
  }
  return n;
}

int TpnParameters::feature_dim() const { return (w_embed.rows() - kActionCount) / 2; }

Tensor tpn_forward(Tape& tape, const Tensor& query, const Tensor& embedded,
                   const TpnParameters& params) {
  const Tensor parts[] = {query, embedded};
  Tensor joint = concat(tape, parts, Axis::Cols);
  if (joint.cols() != params.w_embed.rows()) {
    throw ShapeError("tpn_forward input width " + std::to_string(joint.cols()) +
                     " does not match the embedding (" + std::to_string(params.w_embed.rows()) +
                     ")");
  }
  const Tensor hidden = relu(tape, add(tape, matmul(tape, joint, params.w_embed), params.b_embed));
  return softmax(tape, add(tape, matmul(tape, hidden, params.w_head), params.b_head), Axis::Cols);
}

void test_time_adapt(Tape& tape, const Tensor& nav_distribution, int guidance_action,
                     NavParameters& nav, AdamState& optimizer) {
  nav.zero_grad();
  const Tensor loss = cross_entropy(tape, nav_distribution, guidance_action);
  tape.backward(loss);
  auto params = nav.trainable();
  adam_step(params, optimizer);
}

}  // namespace orgnav
