#include "bregforest/transform.hpp"

#include <queue>
#include <string>
#include <utility>

#include "bregforest/error.hpp"

namespace bregforest {

namespace {

void check_dims(Index size, const PartitionLayout& layout, const char* what) {
  if (size != layout.dims()) {
    throw InvalidArgument(std::string(what) + ": vector has " + std::to_string(size) + " coordinates, layout expects " +
                          std::to_string(layout.dims()));
  }
}

}  // namespace

std::vector<PTuple> p_transform(const Eigen::Ref<const VectorXd>& x, const PartitionLayout& layout,
                                const DivergenceSpec& spec) {
  check_dims(x.size(), layout, "p_transform");
  std::vector<PTuple> out(static_cast<std::size_t>(layout.partitions()));
  for (Index part = 0; part < layout.partitions(); ++part) {
    PTuple& p = out[static_cast<std::size_t>(part)];
    for (Index dim : layout.subspace(part)) {
      const double t = x[dim];
      spec.check_domain(dim, t);
      p.alpha += spec.value_unchecked(dim, t);
      p.gamma += t * t;
    }
  }
  return out;
}

std::vector<QTriple> q_transform(const Eigen::Ref<const VectorXd>& y, const PartitionLayout& layout,
                                 const DivergenceSpec& spec) {
  check_dims(y.size(), layout, "q_transform");
  std::vector<QTriple> out(static_cast<std::size_t>(layout.partitions()));
  for (Index part = 0; part < layout.partitions(); ++part) {
    QTriple& q = out[static_cast<std::size_t>(part)];
    for (Index dim : layout.subspace(part)) {
      const double t = y[dim];
      spec.check_domain(dim, t);
      const double g = spec.grad_unchecked(dim, t);
      q.alpha -= spec.value_unchecked(dim, t);
      q.beta_yy += t * g;
      q.delta += g * g;
    }
  }
  return out;
}

TransformTable TransformTable::build(const Dataset& data, const PartitionLayout& layout, const DivergenceSpec& spec) {
  if (data.cols() != layout.dims()) {
    throw InvalidArgument("transform table: dataset has " + std::to_string(data.cols()) +
                          " columns, layout expects " + std::to_string(layout.dims()));
  }
  TransformTable table(data.rows(), layout.partitions());
  VectorXd row(data.cols());
  for (Index r = 0; r < data.rows(); ++r) {
    row = data.row(r).cast<double>().transpose();
    std::vector<PTuple> tuples;
    try {
      tuples = p_transform(row, layout, spec);
    } catch (const DomainError& e) {
      throw DomainError("record " + std::to_string(r) + ": " + e.what());
    }
    for (Index part = 0; part < layout.partitions(); ++part) table.set(r, part, tuples[static_cast<std::size_t>(part)]);
  }
  return table;
}

BoundVector qb_determine(const TransformTable& table, const std::vector<QTriple>& q, Index k) {
  const Index n = table.records();
  const Index m = table.partitions();
  if (static_cast<Index>(q.size()) != m) {
    throw InvalidArgument("qb_determine: query has " + std::to_string(q.size()) + " triples, table has " +
                          std::to_string(m) + " partitions");
  }
  if (k < 1 || k > n) {
    throw InvalidArgument("qb_determine: k = " + std::to_string(k) + " must be in [1, " + std::to_string(n) + "]");
  }

  // Max-heap of the k smallest (total, id) pairs seen so far.
  using Entry = std::pair<double, Index>;
  std::priority_queue<Entry> heap;
  const auto& raw = table.raw();
  for (Index r = 0; r < n; ++r) {
    double total = 0.0;
    const double* row = raw.data() + r * raw.cols();
    for (Index j = 0; j < m; ++j) {
      const QTriple& qj = q[static_cast<std::size_t>(j)];
      total += row[2 * j] + qj.alpha + qj.beta_yy + std::sqrt(row[2 * j + 1] * qj.delta);
    }
    if (static_cast<Index>(heap.size()) < k) {
      heap.emplace(total, r);
    } else if (Entry{total, r} < heap.top()) {
      heap.pop();
      heap.emplace(total, r);
    }
  }

  const Index defining = heap.top().second;
  BoundVector bound;
  bound.per_subspace.resize(m);
  bound.defining_record = static_cast<RecordId>(defining);
  for (Index j = 0; j < m; ++j) {
    bound.per_subspace[j] = ub_compute(table.at(defining, j), q[static_cast<std::size_t>(j)]);
  }
  bound.total = heap.top().first;
  return bound;
}

}  // namespace bregforest
