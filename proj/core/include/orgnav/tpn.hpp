#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "orgnav/policy.hpp"

namespace orgnav {

// Episode-local log of state representations, scanned for repeats to detect
// deadlock. Cleared at every reset.
class ExternalMemory {
 public:
  void append(std::vector<double> feature) { features_.push_back(std::move(feature)); }
  void clear() { features_.clear(); }
  std::size_t size() const { return features_.size(); }
  const std::vector<std::vector<double>>& features() const { return features_; }

 private:
  std::vector<std::vector<double>> features_;
};

// One internal-memory entry: the state representation keys the pair of the
// action distribution taken there and the representation that followed.
struct MemorySlot {
  std::vector<double> key;
  std::array<double, kActionCount> action_dist{};
  std::vector<double> next_state;
};

class InternalMemory {
 public:
  void append(MemorySlot slot) { slots_.push_back(std::move(slot)); }
  void clear() { slots_.clear(); }
  std::size_t size() const { return slots_.size(); }
  bool empty() const { return slots_.empty(); }
  const std::vector<MemorySlot>& slots() const { return slots_; }

 private:
  std::vector<MemorySlot> slots_;
};

// True iff at least `min_revisits` recorded features lie within `tau` of the
// query in the infinity norm. The defaults treat a single exact repeat as
// deadlock.
bool detect_deadlock(const ExternalMemory& memory, std::span<const double> feature,
                     double tau = 0.0, int min_revisits = 1);

// Appends the step to both memories: the feature to the external log and the
// (key, action, next feature) slot to the internal one.
void record_step(ExternalMemory& external, InternalMemory& internal,
                 std::span<const double> feature,
                 const std::array<double, kActionCount>& action_dist,
                 std::span<const double> next_feature);

// Soft attention over the internal memory: probabilities from the inner
// product of the query with each key, output the probability-weighted sum of
// [action_dist | next_state] values. Throws on empty memory.
Tensor memory_attention(Tape& tape, const Tensor& query, const InternalMemory& memory);

struct TpnParameters {
  Tensor w_embed, b_embed;  // [query | attended value] -> hidden
  Tensor w_head, b_head;    // hidden -> action logits

  static TpnParameters init(int feature_dim, int hidden_dim, std::uint64_t seed,
                            bool requires_grad = true);
  std::vector<Tensor> trainable();
  TpnParameters clone(bool requires_grad) const;
  void zero_grad();
  std::size_t parameter_count() const;
  int feature_dim() const;
  int hidden_dim() const { return w_embed.cols(); }
};

// Action guidance head: dense + ReLU over [query | embedded memory], softmax
// over the six actions.
Tensor tpn_forward(Tape& tape, const Tensor& query, const Tensor& embedded,
                   const TpnParameters& params);

// One gradient step pulling the navigation policy toward the guidance action:
// backward of CE(nav distribution, guidance) through the tape that produced
// the distribution, then an optimizer step on every navigation parameter.
// The TPN itself is never touched.
void test_time_adapt(Tape& tape, const Tensor& nav_distribution, int guidance_action,
                     NavParameters& nav, AdamState& optimizer);

}  // namespace orgnav
