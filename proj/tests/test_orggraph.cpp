#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "orgnav/gradcheck.hpp"
#include "orgnav/org.hpp"
#include "orgnav/policy.hpp"
#include "orgnav/rng.hpp"

using namespace orgnav;

namespace {

Observation random_observation(Rng& rng, int appearance_dim = 16, int global_dim = 64,
                               int detected = 6) {
  Observation obs;
  obs.appearance_dim = appearance_dim;
  obs.appearance.assign(static_cast<std::size_t>(kNumCategories) * appearance_dim, 0.0);
  obs.global_feature.resize(static_cast<std::size_t>(global_dim));
  for (double& v : obs.global_feature) v = rng.uniform();
  for (int k = 0; k < detected; ++k) {
    const int c = rng.uniform_int(kNumCategories);
    Detection& d = obs.detections[static_cast<std::size_t>(c)];
    const double cx = rng.uniform(0.2, 0.8);
    const double cy = rng.uniform(0.2, 0.8);
    const double half = rng.uniform(0.02, 0.15);
    d.x1 = cx - half;
    d.y1 = cy - half;
    d.x2 = cx + half;
    d.y2 = cy + half;
    d.confidence = rng.uniform(0.1, 1.0);
    for (int j = 0; j < appearance_dim; ++j) {
      obs.appearance[static_cast<std::size_t>(c) * appearance_dim + j] = rng.uniform(-1.0, 1.0);
    }
  }
  return obs;
}

// Straight-line reference: plain loops, no tape.
std::vector<double> reference_mm_relu(const std::vector<double>& a, int ar, int ac,
                                      const std::vector<double>& b, int bc, bool apply_relu) {
  std::vector<double> out(static_cast<std::size_t>(ar) * bc, 0.0);
  for (int i = 0; i < ar; ++i) {
    for (int j = 0; j < bc; ++j) {
      double acc = 0.0;
      for (int k = 0; k < ac; ++k) {
        acc += a[static_cast<std::size_t>(i) * ac + k] * b[static_cast<std::size_t>(k) * bc + j];
      }
      out[static_cast<std::size_t>(i) * bc + j] = apply_relu ? std::max(acc, 0.0) : acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("build_laf packs detections and the target flag") {
  Rng rng(1);
  SUBCASE("empty observation leaves only the target flag") {
    Observation obs;
    obs.appearance_dim = 16;
    obs.appearance.assign(22 * 16, 0.0);
    Tensor laf = build_laf(obs, 3);
    for (int c = 0; c < kNumCategories; ++c) {
      for (int j = 0; j < 5; ++j) CHECK(laf.at(c, j) == 0.0);
      CHECK(laf.at(c, 5) == (c == 3 ? 1.0 : 0.0));
    }
  }

  SUBCASE("a detection row carries bbox, confidence, and flag") {
    Observation obs;
    obs.appearance_dim = 16;
    obs.appearance.assign(22 * 16, 0.0);
    Detection& d = obs.detections[3];
    d.x1 = 0.4;
    d.y1 = 0.4;
    d.x2 = 0.6;
    d.y2 = 0.6;
    d.confidence = 0.9;
    Tensor laf = build_laf(obs, 3);
    CHECK(laf.at(3, 0) == 0.4);
    CHECK(laf.at(3, 1) == 0.4);
    CHECK(laf.at(3, 2) == 0.6);
    CHECK(laf.at(3, 3) == 0.6);
    CHECK(laf.at(3, 4) == 0.9);
    CHECK(laf.at(3, 5) == 1.0);
  }

  SUBCASE("target column sums to exactly one over random observations") {
    for (int trial = 0; trial < 50; ++trial) {
      Observation obs = random_observation(rng);
      const int target = rng.uniform_int(kNumCategories);
      Tensor laf = build_laf(obs, target);
      double flag_sum = 0.0;
      for (int c = 0; c < kNumCategories; ++c) flag_sum += laf.at(c, 5);
      CHECK(flag_sum == 1.0);
    }
  }

  CHECK_THROWS_AS(build_laf(random_observation(rng), 22), IndexError);
}

TEST_CASE("org_forward against the reference implementation") {
  Rng rng(5);
  Tape tape;

  SUBCASE("zero input gives a zero graph") {
    Observation empty;
    empty.appearance_dim = 16;
    empty.appearance.assign(22 * 16, 0.0);
    OrgParameters params = OrgParameters::init(3);
    // No target flag contribution either: zero the flag column by hand.
    Tensor x = Tensor::zeros(kNumCategories, kLafDim);
    Tensor z = org_forward(tape, x, params);
    for (double v : z.data()) CHECK(v == 0.0);
  }

  SUBCASE("identity adjacency passes the embedded nodes through") {
    OrgParameters params = OrgParameters::init(4);
    params.adjacency = Tensor::identity(kNumCategories, true);
    Observation obs = random_observation(rng);
    Tensor x = build_laf(obs, 2);
    Tensor z = org_forward(tape, x, params);
    const auto expected =
        reference_mm_relu(std::vector<double>(x.data().begin(), x.data().end()), kNumCategories,
                          kLafDim,
                          std::vector<double>(params.node_embed.data().begin(),
                                              params.node_embed.data().end()),
                          kNumCategories, true);
    for (int i = 0; i < z.size(); ++i) {
      CHECK(z.data()[i] == doctest::Approx(expected[i]).epsilon(1e-10));
    }
  }

  SUBCASE("random inputs match matmul+relu composition within 1e-10") {
    for (int trial = 0; trial < 10; ++trial) {
      OrgParameters params = OrgParameters::init(rng.next());
      Observation obs = random_observation(rng);
      Tensor x = build_laf(obs, rng.uniform_int(kNumCategories));
      Tensor z = org_forward(tape, x, params);
      const auto ax = reference_mm_relu(
          std::vector<double>(params.adjacency.data().begin(), params.adjacency.data().end()),
          kNumCategories, kNumCategories,
          std::vector<double>(x.data().begin(), x.data().end()), kLafDim, false);
      const auto expected = reference_mm_relu(
          ax, kNumCategories, kLafDim,
          std::vector<double>(params.node_embed.data().begin(), params.node_embed.data().end()),
          kNumCategories, true);
      for (int i = 0; i < z.size(); ++i) {
        CHECK(z.data()[i] == doctest::Approx(expected[i]).epsilon(1e-10));
      }
      for (double v : z.data()) CHECK(v >= 0.0);
    }
  }
}

TEST_CASE("graph_attention is relu(Z.F) with no parameters") {
  Rng rng(9);
  Tape tape;

  SUBCASE("identity graph reduces to relu(F)") {
    Tensor f = Tensor::uniform(kNumCategories, 16, -1.0, 1.0, rng);
    Tensor fhat = graph_attention(tape, Tensor::identity(kNumCategories), f);
    for (int i = 0; i < f.size(); ++i) {
      CHECK(fhat.data()[i] == doctest::Approx(std::max(f.data()[i], 0.0)));
    }
  }

  SUBCASE("zero appearance maps to zero") {
    Tensor z = Tensor::uniform(kNumCategories, kNumCategories, 0.0, 1.0, rng);
    Tensor fhat = graph_attention(tape, z, Tensor::zeros(kNumCategories, 16));
    for (double v : fhat.data()) CHECK(v == 0.0);
  }

  SUBCASE("random inputs match the reference within 1e-10") {
    Tensor z = Tensor::uniform(kNumCategories, kNumCategories, -1.0, 1.0, rng);
    Tensor f = Tensor::uniform(kNumCategories, 16, -1.0, 1.0, rng);
    Tensor fhat = graph_attention(tape, z, f);
    const auto expected = reference_mm_relu(
        std::vector<double>(z.data().begin(), z.data().end()), kNumCategories, kNumCategories,
        std::vector<double>(f.data().begin(), f.data().end()), 16, true);
    for (int i = 0; i < fhat.size(); ++i) {
      CHECK(fhat.data()[i] == doctest::Approx(expected[i]).epsilon(1e-10));
    }
  }

  SUBCASE("the model parameter count is independent of the attention layer") {
    NavConfig with;
    NavConfig without;
    without.use_graph_attention = false;
    CHECK(NavParameters::init(with, 1).parameter_count() ==
          NavParameters::init(without, 1).parameter_count());
  }
}

TEST_CASE("fuse_local layout") {
  Rng rng(13);
  Tape tape;

  SUBCASE("output length is 22*(d+6)") {
    Tensor fhat = Tensor::zeros(kNumCategories, 16);
    Tensor laf = Tensor::zeros(kNumCategories, kLafDim);
    Tensor fused = fuse_local(tape, fhat, laf);
    CHECK(fused.rows() == 1);
    CHECK(fused.cols() == 22 * 22);
  }

  SUBCASE("a zero attended block preserves the detector features") {
    Observation obs = random_observation(rng);
    Tensor laf = build_laf(obs, 4);
    Tensor fused = fuse_local(tape, Tensor::zeros(kNumCategories, 16), laf);
    for (int c = 0; c < kNumCategories; ++c) {
      for (int j = 0; j < 16; ++j) CHECK(fused.at(0, c * 22 + j) == 0.0);
      for (int j = 0; j < kLafDim; ++j) {
        CHECK(fused.at(0, c * 22 + 16 + j) == laf.at(c, j));
      }
    }
  }

  SUBCASE("perturbing one detection touches only its LAF block plus the attended features") {
    OrgParameters params = OrgParameters::init(21);
    Observation obs = random_observation(rng);
    const int target = 1;
    Tensor laf = build_laf(obs, target);
    Tensor f = appearance_matrix(obs);
    Tensor base = local_feature(tape, laf, f, &params);

    Tensor laf2 = laf.clone(false);
    laf2.set(7, 4, std::min(1.0, laf2.at(7, 4) + 0.25));  // bump category 7 confidence
    Tensor moved = local_feature(tape, laf2, f, &params);

    for (int c = 0; c < kNumCategories; ++c) {
      for (int j = 0; j < kLafDim; ++j) {
        const int col = c * 22 + 16 + j;
        if (c == 7 && j == 4) {
          CHECK(base.at(0, col) != moved.at(0, col));
        } else {
          CHECK(base.at(0, col) == moved.at(0, col));
        }
      }
    }
  }
}

TEST_CASE("relation graph and attended features are non-negative") {
  Rng rng(17);
  Tape tape;
  for (int trial = 0; trial < 20; ++trial) {
    OrgParameters params = OrgParameters::init(rng.next());
    Observation obs = random_observation(rng);
    Tensor laf = build_laf(obs, rng.uniform_int(kNumCategories));
    Tensor z = org_forward(tape, laf, params);
    Tensor fhat = graph_attention(tape, z, appearance_matrix(obs));
    for (double v : z.data()) CHECK(v >= 0.0);
    for (double v : fhat.data()) CHECK(v >= 0.0);
  }
}

TEST_CASE("category permutation equivariance") {
  // Swapping two non-target categories consistently in X rows, F rows, A rows
  // and cols, and W cols permutes Z and F_hat the same way.
  Rng rng(19);
  Tape tape;
  const int a = 4, b = 9, target = 1;

  OrgParameters params = OrgParameters::init(77);
  Observation obs = random_observation(rng);
  Tensor x = build_laf(obs, target);
  Tensor f = appearance_matrix(obs);

  auto swap_rows = [](Tensor t, int r1, int r2) {
    Tensor out = t.clone(false);
    for (int c = 0; c < t.cols(); ++c) {
      out.set(r1, c, t.at(r2, c));
      out.set(r2, c, t.at(r1, c));
    }
    return out;
  };
  auto swap_cols = [](Tensor t, int c1, int c2) {
    Tensor out = t.clone(false);
    for (int r = 0; r < t.rows(); ++r) {
      out.set(r, c1, t.at(r, c2));
      out.set(r, c2, t.at(r, c1));
    }
    return out;
  };

  OrgParameters permuted;
  permuted.adjacency = swap_cols(swap_rows(params.adjacency, a, b), a, b);
  permuted.node_embed = swap_cols(params.node_embed, a, b);

  Tensor zp = org_forward(tape, swap_rows(x, a, b), permuted);
  Tensor z = org_forward(tape, x, params);
  Tensor z_expected = swap_cols(swap_rows(z, a, b), a, b);
  for (int i = 0; i < z.size(); ++i) {
    CHECK(zp.data()[i] == doctest::Approx(z_expected.data()[i]).epsilon(1e-12));
  }

  Tensor fhat = graph_attention(tape, z, f);
  Tensor fhat_p = graph_attention(tape, zp, swap_rows(f, a, b));
  Tensor fhat_expected = swap_rows(fhat, a, b);
  for (int i = 0; i < fhat.size(); ++i) {
    CHECK(fhat_p.data()[i] == doctest::Approx(fhat_expected.data()[i]).epsilon(1e-12));
  }
}

TEST_CASE("end-to-end gradients through the graph match finite differences") {
  Rng rng(23);
  NavConfig config;
  NavParameters nav = NavParameters::init(config, 31);
  Observation obs = random_observation(rng);
  const int target = 5;
  const std::vector<double> hidden(config.rnn_dim, 0.0);

  Tensor params[] = {nav.org->adjacency, nav.org->node_embed};
  auto report = finite_difference_check(
      [&](Tape& t) {
        Tensor laf = build_laf(obs, target);
        Tensor local = local_feature(t, laf, appearance_matrix(obs), &*nav.org);
        Tensor joint = make_joint(t, obs.global_feature, local, -1, hidden, config);
        PolicyOutput out = policy_forward(t, joint, nav);
        return cross_entropy(t, out.distribution, 2);
      },
      params, {.max_components_per_param = 60, .sample_seed = 7});
  CHECK(report.max_rel_error <= 1e-4);
}
