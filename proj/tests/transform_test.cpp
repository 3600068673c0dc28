#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "bregforest/error.hpp"
#include "bregforest/partition_layout.hpp"
#include "bregforest/transform.hpp"
#include "test_support.hpp"

using namespace bregforest;
using bregforest::fixtures::kAllKinds;
using bregforest::fixtures::random_point;
using bregforest::fixtures::relative_gap;
using bregforest::fixtures::spec_for;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

PartitionLayout random_layout(Index d, Index m, std::mt19937_64& rng) {
  std::vector<Index> perm(static_cast<std::size_t>(d));
  std::iota(perm.begin(), perm.end(), Index{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return PartitionLayout(perm, PartitionLayout::balanced_offsets(d, m));
}

double subspace_distance(const DivergenceSpec& spec, const VectorXd& x, const VectorXd& y,
                         const PartitionLayout& layout, Index part) {
  const auto dims = layout.subspace(part);
  std::vector<Index> idx(dims.begin(), dims.end());
  return bregman_distance(spec, x(idx), y(idx), dims);
}

}  // namespace

TEST(PartitionLayout, Validation) {
  EXPECT_NO_THROW(PartitionLayout({2, 0, 1}, {0, 2, 3}));
  EXPECT_THROW(PartitionLayout({0, 0, 1}, {0, 2, 3}), InvalidArgument);  // not a bijection
  EXPECT_THROW(PartitionLayout({0, 1, 2}, {0, 3, 3}), InvalidArgument);  // empty range
  EXPECT_THROW(PartitionLayout({0, 1, 2}, {0, 2}), InvalidArgument);     // does not cover
  EXPECT_THROW(PartitionLayout({0, 1, 2, 3}, {0, 3, 4}), InvalidArgument);  // unbalanced
}

TEST(PartitionLayout, BalancedWidths) {
  for (Index d : {1, 7, 64, 200}) {
    for (Index m = 1; m <= d; m += std::max<Index>(1, d / 7)) {
      const auto layout = PartitionLayout::contiguous(d, m);
      ASSERT_EQ(layout.partitions(), m);
      Index lo = d, hi = 0;
      for (Index p = 0; p < m; ++p) {
        lo = std::min(lo, layout.width(p));
        hi = std::max(hi, layout.width(p));
      }
      ASSERT_LE(hi - lo, 1);
      ASSERT_EQ(layout.end(m - 1), d);
    }
  }
}

TEST(Transform, UpperBoundExamples) {
  const auto se = DivergenceSpec::squared_euclidean();
  const auto one = PartitionLayout::contiguous(2, 1);
  const auto p = p_transform(vec({1, 0}), one, se);
  const auto q = q_transform(vec({0, 1}), one, se);
  EXPECT_DOUBLE_EQ(p[0].alpha, 1);
  EXPECT_DOUBLE_EQ(p[0].gamma, 1);
  EXPECT_DOUBLE_EQ(q[0].alpha, -1);
  EXPECT_DOUBLE_EQ(q[0].beta_yy, 2);
  EXPECT_DOUBLE_EQ(q[0].delta, 4);
  EXPECT_DOUBLE_EQ(ub_compute(p[0], q[0]), 4);
  EXPECT_DOUBLE_EQ(bregman_distance(se, vec({1, 0}), vec({0, 1})), 2);

  // Zero-gradient query: the bound is the exact distance.
  const VectorXd x = vec({1.5, -2.0});
  const auto qz = q_transform(vec({0, 0}), one, se);
  EXPECT_DOUBLE_EQ(ub_compute(p_transform(x, one, se)[0], qz[0]), bregman_distance(se, x, vec({0, 0})));

  const auto is = DivergenceSpec::itakura_saito();
  const auto line = PartitionLayout::contiguous(1, 1);
  const auto pi = p_transform(vec({1}), line, is);
  const auto qi = q_transform(vec({2}), line, is);
  EXPECT_NEAR(pi[0].alpha, 0, 1e-15);
  EXPECT_NEAR(pi[0].gamma, 1, 1e-15);
  EXPECT_NEAR(qi[0].alpha, 0.6931471806, 1e-10);
  EXPECT_NEAR(qi[0].beta_yy, -1, 1e-15);
  EXPECT_NEAR(qi[0].delta, 0.25, 1e-15);
  EXPECT_NEAR(ub_compute(pi[0], qi[0]), 0.1931471806, 1e-10);
}

TEST(Transform, PointAndQueryTransforms) {
  const auto se = DivergenceSpec::squared_euclidean();
  const auto p = p_transform(vec({1, 2, 0, 3}), PartitionLayout::contiguous(4, 2), se);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_DOUBLE_EQ(p[0].alpha, 5);
  EXPECT_DOUBLE_EQ(p[0].gamma, 5);
  EXPECT_DOUBLE_EQ(p[1].alpha, 9);
  EXPECT_DOUBLE_EQ(p[1].gamma, 9);

  const auto pi = p_transform(vec({1, 2}), PartitionLayout::contiguous(2, 1), DivergenceSpec::itakura_saito());
  EXPECT_NEAR(pi[0].alpha, -0.6931471806, 1e-10);
  EXPECT_DOUBLE_EQ(pi[0].gamma, 5);

  const auto q = q_transform(vec({1, 1}), PartitionLayout::contiguous(2, 1), se);
  EXPECT_DOUBLE_EQ(q[0].alpha, -2);
  EXPECT_DOUBLE_EQ(q[0].beta_yy, 4);
  EXPECT_DOUBLE_EQ(q[0].delta, 8);
  const auto q0 = q_transform(vec({0, 0}), PartitionLayout::contiguous(2, 1), se);
  EXPECT_EQ(q0[0].alpha, 0);
  EXPECT_EQ(q0[0].beta_yy, 0);
  EXPECT_EQ(q0[0].delta, 0);
}

TEST(Transform, DomainErrorNamesRecord) {
  Dataset data(3, 2);
  data << 1, 2, 3, 4, 5, -6;
  try {
    TransformTable::build(data, PartitionLayout::contiguous(2, 1), DivergenceSpec::itakura_saito());
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("record 2"), std::string::npos) << e.what();
  }
}

TEST(Transform, QbDetermineExample) {
  Dataset data(3, 2);
  data << 1, 1, 2, 0, 0, 3;
  const auto layout = PartitionLayout::contiguous(2, 2);
  const auto se = DivergenceSpec::squared_euclidean();
  const auto table = TransformTable::build(data, layout, se);
  const auto q = q_transform(vec({0, 0}), layout, se);
  const BoundVector b = qb_determine(table, q, 2);
  EXPECT_EQ(b.defining_record, 1u);
  EXPECT_DOUBLE_EQ(b.total, 4);
  EXPECT_DOUBLE_EQ(b.per_subspace[0], 4);
  EXPECT_DOUBLE_EQ(b.per_subspace[1], 0);

  EXPECT_DOUBLE_EQ(qb_determine(table, q, 3).total, 9);
  EXPECT_DOUBLE_EQ(qb_determine(table, q, 1).total, 2);
  EXPECT_THROW(qb_determine(table, q, 4), InvalidArgument);
  EXPECT_THROW(qb_determine(table, q, 0), InvalidArgument);
}

TEST(Transform, QbDetermineTiesPreferSmallerId) {
  Dataset data(3, 1);
  data << 2, 1, 2;
  const auto layout = PartitionLayout::contiguous(1, 1);
  const auto se = DivergenceSpec::squared_euclidean();
  const auto table = TransformTable::build(data, layout, se);
  const auto q = q_transform(vec({0}), layout, se);
  EXPECT_EQ(qb_determine(table, q, 2).defining_record, 0u);
  EXPECT_EQ(qb_determine(table, q, 3).defining_record, 2u);
}

class BoundProperties : public ::testing::TestWithParam<DivergenceKind> {};

TEST_P(BoundProperties, SubspaceAndTotalBoundsHold) {
  const DivergenceKind kind = GetParam();
  constexpr Index d = 16;
  const auto spec = spec_for(kind, d);
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20000; ++trial) {
    const Index m = 1 + static_cast<Index>(rng() % d);
    const auto layout = random_layout(d, m, rng);
    const VectorXd x = random_point(kind, d, rng);
    const VectorXd y = random_point(kind, d, rng);
    const auto p = p_transform(x, layout, spec);
    const auto q = q_transform(y, layout, spec);
    double total = 0.0;
    for (Index j = 0; j < m; ++j) {
      const double ub = ub_compute(p[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(j)]);
      const double dist = subspace_distance(spec, x, y, layout, j);
      ASSERT_GE(ub - dist, -1e-9 * ub_magnitude(p[static_cast<std::size_t>(j)], q[static_cast<std::size_t>(j)]));
      total += ub;
    }
    ASSERT_GE(total - bregman_distance(spec, x, y), -1e-9 * std::max(1.0, std::abs(total)));
  }
}

TEST_P(BoundProperties, DecompositionIdentity) {
  const DivergenceKind kind = GetParam();
  constexpr Index d = 20;
  const auto spec = spec_for(kind, d);
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto layout = random_layout(d, 1 + static_cast<Index>(rng() % d), rng);
    const VectorXd x = random_point(kind, d, rng);
    const VectorXd y = random_point(kind, d, rng);
    double sum = 0.0;
    for (Index j = 0; j < layout.partitions(); ++j) sum += subspace_distance(spec, x, y, layout, j);
    ASSERT_LE(relative_gap(sum, bregman_distance(spec, x, y)), 1e-9);
  }
}

TEST_P(BoundProperties, SplittingNeverLoosens) {
  const DivergenceKind kind = GetParam();
  constexpr Index d = 16;
  const auto spec = spec_for(kind, d);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5000; ++trial) {
    const VectorXd x = random_point(kind, d, rng);
    const VectorXd y = random_point(kind, d, rng);
    // One coarse subspace versus the same dimensions cut in two.
    const auto whole = random_layout(d, 1, rng);
    const Index cut = 1 + static_cast<Index>(rng() % (d - 1));
    std::vector<Index> perm(whole.perm().begin(), whole.perm().end());
    const PTuple p_all = p_transform(x, whole, spec)[0];
    const QTriple q_all = q_transform(y, whole, spec)[0];
    double split = 0.0;
    for (auto [lo, hi] : {std::pair<Index, Index>{0, cut}, {cut, d}}) {
      std::vector<Index> dims(perm.begin() + lo, perm.begin() + hi);
      PTuple p;
      QTriple q;
      for (Index i : dims) {
        p.alpha += spec.value_unchecked(i, x[i]);
        p.gamma += x[i] * x[i];
        const double g = spec.grad_unchecked(i, y[i]);
        q.alpha -= spec.value_unchecked(i, y[i]);
        q.beta_yy += y[i] * g;
        q.delta += g * g;
      }
      split += ub_compute(p, q);
    }
    const double coarse = ub_compute(p_all, q_all);
    ASSERT_LE(split - coarse, 1e-9 * std::max(1.0, ub_magnitude(p_all, q_all)));
  }
}

TEST_P(BoundProperties, PigeonholeFilterIsSound) {
  const DivergenceKind kind = GetParam();
  constexpr Index n = 1000;
  constexpr Index d = 12;
  const auto spec = spec_for(kind, d);
  std::mt19937_64 rng(24);
  Dataset data(n, d);
  for (Index i = 0; i < n; ++i) data.row(i) = random_point(kind, d, rng).cast<float>().transpose();
  for (int trial = 0; trial < 10; ++trial) {
    const auto layout = random_layout(d, 1 + static_cast<Index>(rng() % 6), rng);
    const auto table = TransformTable::build(data, layout, spec);
    const VectorXd y = random_point(kind, d, rng);
    const auto q = q_transform(y, layout, spec);
    const BoundVector b = qb_determine(table, q, 1 + static_cast<Index>(rng() % 50));
    for (Index i = 0; i < n; ++i) {
      const VectorXd z = data.row(i).cast<double>().transpose();
      if (bregman_distance(spec, z, y) > b.total) continue;
      bool found = false;
      for (Index j = 0; j < layout.partitions() && !found; ++j) {
        found = subspace_distance(spec, z, y, layout, j) <= b.per_subspace[j] * (1 + 1e-9) + 1e-12;
      }
      ASSERT_TRUE(found) << "record " << i;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(AllKinds, BoundProperties, ::testing::ValuesIn(kAllKinds),
                         [](const auto& info) { return bregforest::fixtures::kind_label(info.param); });
