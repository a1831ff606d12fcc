#include "pgw/transport_lp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace pgw {

TransportPlan TransportPlan::from_matrix(Eigen::MatrixXd m, double objective) {
  TransportPlan plan;
  plan.row_marginal = m.rowwise().sum();
  plan.col_marginal = m.colwise().sum();
  plan.total = plan.row_marginal.sum();
  plan.objective = objective;
  plan.matrix = std::move(m);
  return plan;
}

namespace {

void check_problem(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                   const Eigen::VectorXd& q) {
  if (cost.rows() != p.size() || cost.cols() != q.size())
    throw InputError("cost/marginal dimension mismatch");
  if (!cost.allFinite()) throw InputError("non-finite cost entry");
  if ((p.array() < 0.0).any() || (q.array() < 0.0).any())
    throw InputError("negative marginal entry");
  if (!p.allFinite() || !q.allFinite())
    throw InputError("non-finite marginal entry");
}

// Dense transportation simplex. Nodes 0..n-1 are rows, n..n+m-1 are columns;
// the basis is a spanning tree with n+m-1 arcs, some possibly at zero
// allocation (degenerate). Entering arc by Dantzig's rule with a Bland
// fallback; all tie-breaks are lexicographic so repeated calls on identical
// inputs produce the identical plan.
class TransportSimplex {
 public:
  TransportSimplex(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                   const Eigen::VectorXd& q)
      : cost_(cost), n_(p.size()), m_(q.size()) {
    const double scale = std::max(1.0, cost_.cwiseAbs().maxCoeff());
    opt_tol_ = 1e-11 * scale;
    build_initial_basis(p, q);
  }

  Eigen::MatrixXd solve() {
    const long max_dantzig = 200 + 20L * (n_ + m_);
    const long max_total = 10000 + 100L * (n_ + m_);
    long pivots = 0;
    while (true) {
      compute_duals();
      Eigen::Index ei, ej;
      if (!find_entering(pivots >= max_dantzig, ei, ej)) break;
      pivot(ei, ej);
      if (++pivots > max_total)
        throw NumericalError("transportation simplex failed to converge");
    }
    Eigen::MatrixXd plan = Eigen::MatrixXd::Zero(n_, m_);
    for (const Arc& a : arcs_)
      if (a.in_basis) plan(a.row, a.col) = std::max(a.flow, 0.0);
    return plan;
  }

 private:
  struct Arc {
    Eigen::Index row, col;
    double flow = 0.0;
    bool in_basis = false;
  };

  Eigen::Index node_of_col(Eigen::Index j) const { return n_ + j; }

  void add_basis_arc(Eigen::Index row, Eigen::Index col, double flow) {
    Arc a;
    a.row = row;
    a.col = col;
    a.flow = flow;
    a.in_basis = true;
    const int id = static_cast<int>(arcs_.size());
    arcs_.push_back(a);
    adj_[row].push_back(id);
    adj_[node_of_col(col)].push_back(id);
  }

  // Matrix-minimum greedy allocation (yields a forest), completed to a
  // spanning tree with zero-flow arcs in the same cost order.
  void build_initial_basis(Eigen::VectorXd p, Eigen::VectorXd q) {
    adj_.assign(n_ + m_, {});
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n_ * m_));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) {
                       return cost_(a / m_, a % m_) < cost_(b / m_, b % m_);
                     });

    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n_ + m_));
    std::iota(parent.begin(), parent.end(), Eigen::Index{0});
    auto find = [&](Eigen::Index x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };

    for (const Eigen::Index cell : order) {
      const Eigen::Index i = cell / m_, j = cell % m_;
      const double amount = std::min(p[i], q[j]);
      if (amount <= 0.0) continue;
      p[i] -= amount;
      q[j] -= amount;
      parent[find(i)] = find(node_of_col(j));
      add_basis_arc(i, j, amount);
    }
    // zero-mass rows/columns never got an arc; connect everything
    for (const Eigen::Index cell : order) {
      if (static_cast<Eigen::Index>(arcs_.size()) == n_ + m_ - 1) break;
      const Eigen::Index i = cell / m_, j = cell % m_;
      const Eigen::Index a = find(i), b = find(node_of_col(j));
      if (a == b) continue;
      parent[a] = b;
      add_basis_arc(i, j, 0.0);
    }
  }

  void compute_duals() {
    u_.assign(static_cast<std::size_t>(n_), 0.0);
    v_.assign(static_cast<std::size_t>(m_), 0.0);
    std::vector<char> seen(static_cast<std::size_t>(n_ + m_), 0);
    std::vector<Eigen::Index> stack = {0};
    seen[0] = 1;
    while (!stack.empty()) {
      const Eigen::Index node = stack.back();
      stack.pop_back();
      for (const int id : adj_[node]) {
        const Arc& a = arcs_[static_cast<std::size_t>(id)];
        if (!a.in_basis) continue;
        const Eigen::Index other = (node == a.row) ? node_of_col(a.col) : a.row;
        if (seen[other]) continue;
        seen[other] = 1;
        if (other >= n_)
          v_[other - n_] = cost_(a.row, a.col) - u_[a.row];
        else
          u_[other] = cost_(a.row, a.col) - v_[a.col];
        stack.push_back(other);
      }
    }
  }

  bool find_entering(bool bland, Eigen::Index& ei, Eigen::Index& ej) const {
    const Eigen::Map<const Eigen::VectorXd> u(u_.data(), n_);
    const Eigen::Map<const Eigen::VectorXd> v(v_.data(), m_);
    if (bland) {
      for (Eigen::Index i = 0; i < n_; ++i)
        for (Eigen::Index j = 0; j < m_; ++j)
          if (cost_(i, j) - u[i] - v[j] < -opt_tol_) {
            ei = i;
            ej = j;
            return true;
          }
      return false;
    }
    Eigen::Index bi = 0, bj = 0;
    const double best =
        (cost_ - u.replicate(1, m_) - v.transpose().replicate(n_, 1))
            .minCoeff(&bi, &bj);
    if (best >= -opt_tol_) return false;
    ei = bi;
    ej = bj;
    return true;
  }

  // Tree path from `from` to `to` as a list of arc ids.
  std::vector<int> tree_path(Eigen::Index from, Eigen::Index to) const {
    std::vector<int> parent_arc(static_cast<std::size_t>(n_ + m_), -1);
    std::vector<char> seen(static_cast<std::size_t>(n_ + m_), 0);
    std::vector<Eigen::Index> stack = {from};
    seen[from] = 1;
    while (!stack.empty()) {
      const Eigen::Index node = stack.back();
      stack.pop_back();
      if (node == to) break;
      for (const int id : adj_[node]) {
        const Arc& a = arcs_[static_cast<std::size_t>(id)];
        if (!a.in_basis) continue;
        const Eigen::Index other = (node == a.row) ? node_of_col(a.col) : a.row;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_arc[other] = id;
        stack.push_back(other);
      }
    }
    std::vector<int> path;
    Eigen::Index node = to;
    while (node != from) {
      const int id = parent_arc[node];
      path.push_back(id);
      const Arc& a = arcs_[static_cast<std::size_t>(id)];
      node = (node == a.row) ? node_of_col(a.col) : a.row;
    }
    std::reverse(path.begin(), path.end());
    return path;
  }

  void pivot(Eigen::Index ei, Eigen::Index ej) {
    // Cycle = entering arc (row ei -> col ej) plus the tree path back from
    // col ej to row ei. Walking the path from ei, arcs alternate -,+,-,...
    const std::vector<int> path = tree_path(ei, node_of_col(ej));

    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    Eigen::Index node = ei;
    bool minus = true;
    for (const int id : path) {
      const Arc& a = arcs_[static_cast<std::size_t>(id)];
      if (minus && a.flow < theta) {
        theta = a.flow;
        leaving = id;
      }
      node = (node == a.row) ? node_of_col(a.col) : a.row;
      minus = !minus;
    }

    node = ei;
    minus = true;
    for (const int id : path) {
      Arc& a = arcs_[static_cast<std::size_t>(id)];
      a.flow += minus ? -theta : theta;
      if (a.flow < 0.0) a.flow = 0.0;
      node = (node == a.row) ? node_of_col(a.col) : a.row;
      minus = !minus;
    }

    drop_arc(leaving);
    add_basis_arc(ei, ej, theta);
  }

  void drop_arc(int id) {
    Arc& a = arcs_[static_cast<std::size_t>(id)];
    a.in_basis = false;
    auto erase_from = [&](Eigen::Index node) {
      auto& list = adj_[node];
      list.erase(std::find(list.begin(), list.end(), id));
    };
    erase_from(a.row);
    erase_from(node_of_col(a.col));
  }

  const Eigen::MatrixXd& cost_;
  Eigen::Index n_, m_;
  double opt_tol_ = 1e-11;
  std::vector<Arc> arcs_;
  std::vector<std::vector<int>> adj_;
  std::vector<double> u_, v_;
};

}  // namespace

TransportPlan solve_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                       const Eigen::VectorXd& q) {
  check_problem(cost, p, q);
  const double tp = p.sum(), tq = q.sum();
  if (std::abs(tp - tq) > 1e-9 * std::max({1.0, tp, tq}))
    throw InputError("marginal totals mismatch");
  if (tp <= 0.0)
    return TransportPlan::from_matrix(
        Eigen::MatrixXd::Zero(p.size(), q.size()), 0.0);

  TransportSimplex simplex(cost, p, q);
  Eigen::MatrixXd plan = simplex.solve();
  const double objective = (cost.array() * plan.array()).sum();
  return TransportPlan::from_matrix(std::move(plan), objective);
}

TransportPlan solve_partial_ot(const Eigen::MatrixXd& cost,
                               const Eigen::VectorXd& p,
                               const Eigen::VectorXd& q) {
  check_problem(cost, p, q);
  const Eigen::Index n = p.size(), m = q.size();
  const double tp = p.sum(), tq = q.sum();
  if (tp <= 0.0 || tq <= 0.0)
    return TransportPlan::from_matrix(Eigen::MatrixXd::Zero(n, m), 0.0);

  Eigen::MatrixXd aug_cost = Eigen::MatrixXd::Zero(n + 1, m + 1);
  aug_cost.topLeftCorner(n, m) = cost;
  Eigen::VectorXd ap(n + 1), aq(m + 1);
  ap.head(n) = p;
  ap[n] = tq;
  aq.head(m) = q;
  aq[m] = tp;

  TransportSimplex simplex(aug_cost, ap, aq);
  const Eigen::MatrixXd aug_plan = simplex.solve();
  Eigen::MatrixXd plan = aug_plan.topLeftCorner(n, m);
  const double objective = (cost.array() * plan.array()).sum();
  return TransportPlan::from_matrix(std::move(plan), objective);
}

}  // namespace pgw
