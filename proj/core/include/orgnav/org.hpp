#pragma once

#include <cstdint>

#include "orgnav/env.hpp"
#include "orgnav/tensor.hpp"

namespace orgnav {

// Columns of the location-aware feature matrix: bbox corners, detection
// confidence, and the target flag.
inline constexpr int kLafDim = 6;

// Learned node embedding and adjacency of the object relation graph.
struct OrgParameters {
  Tensor node_embed;  // kLafDim x kNumCategories
  Tensor adjacency;   // kNumCategories x kNumCategories

  // adjacency starts as identity plus small noise so the untrained graph
  // approximately passes detections through; node_embed is U(-k, k) with
  // k = 1/sqrt(kLafDim).
  static OrgParameters init(std::uint64_t seed, bool requires_grad = true);

  OrgParameters clone(bool requires_grad) const;
  std::size_t parameter_count() const;
};

// Packs detections into the 22x6 node matrix. Exactly one row carries the
// target flag; undetected rows stay zero except possibly that flag.
Tensor build_laf(const Observation& obs, int target_category);

// 22 x appearance_dim matrix of per-category appearance features.
Tensor appearance_matrix(const Observation& obs);

// Relation graph Z = relu(A . X . W), shape 22x22.
Tensor org_forward(Tape& tape, const Tensor& laf, const OrgParameters& params);

// Parameter-free attention: relu(Z . F).
Tensor graph_attention(Tape& tape, const Tensor& relation_graph, const Tensor& appearance);

// Row-wise [F_hat | X] flattened to one row of length 22*(d+6).
Tensor fuse_local(Tape& tape, const Tensor& attended, const Tensor& laf);

// Full local pipeline. With use_org the appearance is re-weighted through the
// learned graph (optionally skipping the attention layer); without it the raw
// appearance is concatenated with the LAF, which is the detection-only
// baseline. Output length is identical either way.
Tensor local_feature(Tape& tape, const Tensor& laf, const Tensor& appearance,
                     const OrgParameters* params, bool use_graph_attention = true);

}  // namespace orgnav
