#include "orgnav/org.hpp"

#include <cmath>

#include "orgnav/rng.hpp"

namespace orgnav {

OrgParameters OrgParameters::init(std::uint64_t seed, bool requires_grad) {
  Rng rng(mix64(0x0960ull, seed));
  OrgParameters p;
  const double k = 1.0 / std::sqrt(static_cast<double>(kLafDim));
  p.node_embed = Tensor::uniform(kLafDim, kNumCategories, -k, k, rng, requires_grad);
  p.adjacency = Tensor::identity(kNumCategories, requires_grad);
  for (double& v : p.adjacency.data()) v += rng.uniform(-0.01, 0.01);
  return p;
}

OrgParameters OrgParameters::clone(bool requires_grad) const {
  OrgParameters p;
  p.node_embed = node_embed.clone(requires_grad);
  p.adjacency = adjacency.clone(requires_grad);
  return p;
}

std::size_t OrgParameters::parameter_count() const {
  return static_cast<std::size_t>(node_embed.size()) + static_cast<std::size_t>(adjacency.size());
}

Tensor build_laf(const Observation& obs, int target_category) {
  if (!valid_category(target_category)) {
    throw IndexError("target category " + std::to_string(target_category) + " out of range");
  }
  Tensor laf = Tensor::zeros(kNumCategories, kLafDim);
  auto data = laf.data();
  for (int c = 0; c < kNumCategories; ++c) {
    const Detection& d = obs.detections[static_cast<std::size_t>(c)];
    double* row = data.data() + static_cast<std::size_t>(c) * kLafDim;
    row[0] = d.x1;
    row[1] = d.y1;
    row[2] = d.x2;
    row[3] = d.y2;
    row[4] = d.confidence;
    row[5] = c == target_category ? 1.0 : 0.0;
  }
  return laf;
}

Tensor appearance_matrix(const Observation& obs) {
  return Tensor::from(obs.appearance, kNumCategories, obs.appearance_dim);
}

Tensor org_forward(Tape& tape, const Tensor& laf, const OrgParameters& params) {
  if (laf.rows() != kNumCategories || laf.cols() != kLafDim) {
    throw ShapeError("org_forward expects a " + std::to_string(kNumCategories) + "x" +
                     std::to_string(kLafDim) + " node matrix, got " + laf.shape().str());
  }
  return relu(tape, matmul(tape, matmul(tape, params.adjacency, laf), params.node_embed));
}

Tensor graph_attention(Tape& tape, const Tensor& relation_graph, const Tensor& appearance) {
  if (relation_graph.rows() != kNumCategories || relation_graph.cols() != kNumCategories) {
    throw ShapeError("graph_attention expects a square relation graph, got " +
                     relation_graph.shape().str());
  }
  if (appearance.rows() != kNumCategories) {
    throw ShapeError("graph_attention appearance has " + std::to_string(appearance.rows()) +
                     " rows, want " + std::to_string(kNumCategories));
  }
  return relu(tape, matmul(tape, relation_graph, appearance));
}

Tensor fuse_local(Tape& tape, const Tensor& attended, const Tensor& laf) {
  const Tensor parts[] = {attended, laf};
  Tensor fused = concat(tape, parts, Axis::Cols);
  return reshape(tape, fused, 1, fused.size());
}

Tensor local_feature(Tape& tape, const Tensor& laf, const Tensor& appearance,
                     const OrgParameters* params, bool use_graph_attention) {
  if (params != nullptr && use_graph_attention) {
    const Tensor z = org_forward(tape, laf, *params);
    return fuse_local(tape, graph_attention(tape, z, appearance), laf);
  }
  return fuse_local(tape, appearance, laf);
}

}  // namespace orgnav
