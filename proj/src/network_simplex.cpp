#include "entsel/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace entsel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TransportSimplex::TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                                   const Eigen::MatrixXd& cost)
    : sources_(static_cast<int>(supply.size())),
      sinks_(static_cast<int>(demand.size())),
      node_num_(sources_ + sinks_),
      root_(node_num_),
      arc_num_(static_cast<std::int64_t>(sources_) * sinks_),
      search_arc_num_(arc_num_) {
  block_size_ = std::max<std::int64_t>(
      10, static_cast<std::int64_t>(std::sqrt(static_cast<double>(search_arc_num_))));

  cost_.resize(static_cast<std::size_t>(arc_num_));
  double max_cost = 0.0;
  for (int i = 0; i < sources_; ++i) {
    for (int j = 0; j < sinks_; ++j) {
      const double c = cost(i, j);
      cost_[static_cast<std::size_t>(i) * sinks_ + j] = c;
      max_cost = std::max(max_cost, std::abs(c));
    }
  }
  opt_tol_ = 1e-13 * std::max(1.0, max_cost);
  const double art_cost = (max_cost + 1.0) * node_num_;

  const int all_nodes = node_num_ + 1;
  supply_.assign(all_nodes, 0.0);
  double sum_supply = 0.0;
  for (int i = 0; i < sources_; ++i) {
    supply_[i] = supply[i];
    sum_supply += supply[i];
  }
  for (int j = 0; j < sinks_; ++j) {
    supply_[sources_ + j] = -demand[j];
    sum_supply -= demand[j];
  }

  const std::int64_t all_arcs = arc_num_ + node_num_;
  flow_.assign(static_cast<std::size_t>(all_arcs), 0.0);
  state_.assign(static_cast<std::size_t>(all_arcs), kLower);
  art_source_.resize(node_num_);
  art_target_.resize(node_num_);
  art_cost_.resize(node_num_);

  parent_.assign(all_nodes, -1);
  pred_.assign(all_nodes, -1);
  thread_.assign(all_nodes, 0);
  rev_thread_.assign(all_nodes, 0);
  succ_num_.assign(all_nodes, 0);
  last_succ_.assign(all_nodes, 0);
  pred_dir_.assign(all_nodes, 0);
  pi_.assign(all_nodes, 0.0);

  parent_[root_] = -1;
  pred_[root_] = -1;
  thread_[root_] = 0;
  rev_thread_[0] = root_;
  succ_num_[root_] = node_num_ + 1;
  last_succ_[root_] = root_ - 1;
  supply_[root_] = -sum_supply;
  pi_[root_] = 0.0;

  for (int u = 0; u < node_num_; ++u) {
    const std::int64_t e = arc_num_ + u;
    const std::size_t k = static_cast<std::size_t>(u);
    parent_[u] = root_;
    pred_[u] = e;
    thread_[u] = u + 1;
    rev_thread_[u + 1] = u;
    succ_num_[u] = 1;
    last_succ_[u] = u;
    state_[static_cast<std::size_t>(e)] = kTree;
    if (supply_[u] >= 0.0) {
      pred_dir_[u] = kDirUp;
      pi_[u] = 0.0;
      art_source_[k] = u;
      art_target_[k] = root_;
      flow_[static_cast<std::size_t>(e)] = supply_[u];
      art_cost_[k] = 0.0;
    } else {
      pred_dir_[u] = kDirDown;
      pi_[u] = art_cost;
      art_source_[k] = root_;
      art_target_[k] = u;
      flow_[static_cast<std::size_t>(e)] = -supply_[u];
      art_cost_[k] = art_cost;
    }
  }
}

bool TransportSimplex::find_entering_arc() {
  double min = -opt_tol_;
  bool found = false;
  std::int64_t cnt = block_size_;
  std::int64_t e = next_arc_;
  // Cyclic block search; the first arc with the most negative reduced cost
  // in a block wins, which makes the pivot sequence deterministic.
  for (std::int64_t visited = 0; visited < search_arc_num_; ++visited) {
    const std::size_t k = static_cast<std::size_t>(e);
    if (state_[k] != kTree) {
      const int i = static_cast<int>(e / sinks_);
      const int j = sources_ + static_cast<int>(e % sinks_);
      const double c = state_[k] * (cost_[k] + pi_[i] - pi_[j]);
      if (c < min) {
        min = c;
        in_arc_ = e;
        found = true;
      }
    }
    if (++e == search_arc_num_) e = 0;
    if (--cnt == 0) {
      if (found) break;
      cnt = block_size_;
    }
  }
  if (!found) return false;
  next_arc_ = e;
  return true;
}

void TransportSimplex::find_join_node() {
  int u = source(in_arc_);
  int v = target(in_arc_);
  while (u != v) {
    if (succ_num_[u] < succ_num_[v]) {
      u = parent_[u];
    } else {
      v = parent_[v];
    }
  }
  join_ = u;
}

bool TransportSimplex::find_leaving_arc() {
  int first;
  int second;
  if (state_[static_cast<std::size_t>(in_arc_)] == kLower) {
    first = source(in_arc_);
    second = target(in_arc_);
  } else {
    first = target(in_arc_);
    second = source(in_arc_);
  }
  delta_ = kInf;
  int result = 0;
  for (int u = first; u != join_; u = parent_[u]) {
    const std::int64_t e = pred_[u];
    const double d = pred_dir_[u] == kDirDown ? kInf : flow_[static_cast<std::size_t>(e)];
    if (d < delta_) {
      delta_ = d;
      u_out_ = u;
      result = 1;
    }
  }
  for (int u = second; u != join_; u = parent_[u]) {
    const std::int64_t e = pred_[u];
    const double d = pred_dir_[u] == kDirUp ? kInf : flow_[static_cast<std::size_t>(e)];
    if (d <= delta_) {
      delta_ = d;
      u_out_ = u;
      result = 2;
    }
  }
  if (result == 1) {
    u_in_ = first;
    v_in_ = second;
  } else {
    u_in_ = second;
    v_in_ = first;
  }
  return result != 0;
}

void TransportSimplex::change_flow(bool change) {
  if (delta_ > 0.0) {
    const double val = state_[static_cast<std::size_t>(in_arc_)] * delta_;
    flow_[static_cast<std::size_t>(in_arc_)] += val;
    for (int u = source(in_arc_); u != join_; u = parent_[u]) {
      flow_[static_cast<std::size_t>(pred_[u])] -= pred_dir_[u] * val;
    }
    for (int u = target(in_arc_); u != join_; u = parent_[u]) {
      flow_[static_cast<std::size_t>(pred_[u])] += pred_dir_[u] * val;
    }
  }
  if (change) {
    state_[static_cast<std::size_t>(in_arc_)] = kTree;
    const std::size_t out = static_cast<std::size_t>(pred_[u_out_]);
    state_[out] = flow_[out] == 0.0 ? kLower : kUpper;
  } else {
    state_[static_cast<std::size_t>(in_arc_)] = -state_[static_cast<std::size_t>(in_arc_)];
  }
}

void TransportSimplex::update_tree_structure() {
  const int old_rev_thread = rev_thread_[u_out_];
  const int old_succ_num = succ_num_[u_out_];
  const int old_last_succ = last_succ_[u_out_];
  v_out_ = parent_[u_out_];

  if (u_in_ == u_out_) {
    parent_[u_in_] = v_in_;
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;

    if (thread_[v_in_] != u_out_) {
      int after = thread_[old_last_succ];
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
      after = thread_[v_in_];
      thread_[v_in_] = u_out_;
      rev_thread_[u_out_] = v_in_;
      thread_[old_last_succ] = after;
      rev_thread_[after] = old_last_succ;
    }
  } else {
    // When old_rev_thread == v_in, join and v_out coincide.
    const int thread_continue =
        old_rev_thread == v_in_ ? thread_[old_last_succ] : thread_[v_in_];

    // Re-hang the stem nodes between u_in and u_out.
    int stem = u_in_;
    int par_stem = v_in_;
    int next_stem;
    int last = last_succ_[u_in_];
    int before;
    int after = thread_[last];
    thread_[v_in_] = u_in_;
    dirty_revs_.clear();
    dirty_revs_.push_back(v_in_);
    while (stem != u_out_) {
      next_stem = parent_[stem];
      thread_[last] = next_stem;
      dirty_revs_.push_back(last);

      before = rev_thread_[stem];
      thread_[before] = after;
      rev_thread_[after] = before;

      parent_[stem] = par_stem;
      par_stem = stem;
      stem = next_stem;

      last = last_succ_[stem] == last_succ_[par_stem] ? rev_thread_[par_stem] : last_succ_[stem];
      after = thread_[last];
    }
    parent_[u_out_] = par_stem;
    thread_[last] = thread_continue;
    rev_thread_[thread_continue] = last;
    last_succ_[u_out_] = last;

    if (old_rev_thread != v_in_) {
      thread_[old_rev_thread] = after;
      rev_thread_[after] = old_rev_thread;
    }

    for (int u : dirty_revs_) rev_thread_[thread_[u]] = u;

    int tmp_sc = 0;
    const int tmp_ls = last_succ_[u_out_];
    for (int u = u_out_, p = parent_[u]; u != u_in_; u = p, p = parent_[u]) {
      pred_[u] = pred_[p];
      pred_dir_[u] = static_cast<signed char>(-pred_dir_[p]);
      tmp_sc += succ_num_[u] - succ_num_[p];
      succ_num_[u] = tmp_sc;
      last_succ_[p] = tmp_ls;
    }
    pred_[u_in_] = in_arc_;
    pred_dir_[u_in_] = u_in_ == source(in_arc_) ? kDirUp : kDirDown;
    succ_num_[u_in_] = old_succ_num;
  }

  const int up_limit_out = last_succ_[join_] == v_in_ ? join_ : -1;
  const int last_succ_out = last_succ_[u_out_];
  for (int u = v_in_; u != -1 && last_succ_[u] == v_in_; u = parent_[u]) {
    last_succ_[u] = last_succ_out;
  }

  if (join_ != old_rev_thread && v_in_ != old_rev_thread) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = old_rev_thread;
    }
  } else if (last_succ_out != old_last_succ) {
    for (int u = v_out_; u != up_limit_out && last_succ_[u] == old_last_succ; u = parent_[u]) {
      last_succ_[u] = last_succ_out;
    }
  }

  for (int u = v_in_; u != join_; u = parent_[u]) succ_num_[u] += old_succ_num;
  for (int u = v_out_; u != join_; u = parent_[u]) succ_num_[u] -= old_succ_num;
}

void TransportSimplex::update_potential() {
  const double sigma = pi_[v_in_] - pi_[u_in_] - pred_dir_[u_in_] * arc_cost(in_arc_);
  const int end = thread_[last_succ_[u_in_]];
  for (int u = u_in_; u != end; u = thread_[u]) pi_[u] += sigma;
}

void TransportSimplex::recompute_potentials() {
  // Thread order visits every parent before its subtree.
  pi_[root_] = 0.0;
  for (int u = thread_[root_]; u != root_; u = thread_[u]) {
    const std::int64_t e = pred_[u];
    pi_[u] = pred_dir_[u] == kDirUp ? pi_[parent_[u]] - arc_cost(e)
                                    : pi_[parent_[u]] + arc_cost(e);
  }
}

TransportSimplex::Status TransportSimplex::run(std::int64_t max_pivots) {
  while (find_entering_arc()) {
    if (pivots_ >= max_pivots) return Status::pivot_limit;
    find_join_node();
    const bool change = find_leaving_arc();
    if (delta_ == kInf) return Status::infeasible;  // unbounded cannot happen with artificials
    change_flow(change);
    if (change) {
      update_tree_structure();
      update_potential();
    }
    ++pivots_;
    // Periodic refresh keeps round-off in the potentials from drifting.
    if (pivots_ % 4096 == 0) recompute_potentials();
  }
  recompute_potentials();
  return Status::optimal;
}

double TransportSimplex::artificial_flow() const {
  double worst = 0.0;
  for (int u = 0; u < node_num_; ++u) {
    worst = std::max(worst, flow_[static_cast<std::size_t>(arc_num_ + u)]);
  }
  return worst;
}

Eigen::MatrixXd TransportSimplex::plan() const {
  Eigen::MatrixXd p(sources_, sinks_);
  for (int i = 0; i < sources_; ++i) {
    for (int j = 0; j < sinks_; ++j) {
      p(i, j) = flow_[static_cast<std::size_t>(i) * sinks_ + j];
    }
  }
  return p;
}

void TransportSimplex::duals(Eigen::VectorXd& f, Eigen::VectorXd& g) const {
  // Reduced cost is cost + pi_source - pi_sink, so f = -pi and g = pi.
  f.resize(sources_);
  g.resize(sinks_);
  for (int i = 0; i < sources_; ++i) f[i] = -pi_[i];
  for (int j = 0; j < sinks_; ++j) g[j] = pi_[sources_ + j];
}

}  // namespace entsel
