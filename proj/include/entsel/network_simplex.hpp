// Primal network simplex for the dense uncapacitated transportation problem.
//
// The spanning-tree representation (parent / thread / successor counts)
// follows the classic LEMON layout: one artificial root joined to every node
// by an artificial arc, block-search pivoting over the real arcs, and the
// strongly feasible leaving-arc rule, which keeps degenerate pivots from
// cycling. Supplies and costs are real-valued.
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace entsel {

class TransportSimplex {
 public:
  enum class Status { optimal, infeasible, pivot_limit };

  /// `cost` is sources x sinks; supplies must be non-negative.
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   const Eigen::MatrixXd& cost);

  Status run(std::int64_t max_pivots);

  std::int64_t pivots() const { return pivots_; }
  /// Largest flow left on an artificial arc (zero for a feasible solution).
  double artificial_flow() const;

  Eigen::MatrixXd plan() const;
  /// Dual pair with f_i + g_j <= cost_ij, tight on basic arcs.
  void duals(Eigen::VectorXd& f, Eigen::VectorXd& g) const;

 private:
  static constexpr signed char kUpper = -1;
  static constexpr signed char kTree = 0;
  static constexpr signed char kLower = 1;
  static constexpr signed char kDirUp = 1;
  static constexpr signed char kDirDown = -1;

  int source(std::int64_t e) const {
    return e < arc_num_ ? static_cast<int>(e / sinks_) : art_source_[e - arc_num_];
  }
  int target(std::int64_t e) const {
    return e < arc_num_ ? sources_ + static_cast<int>(e % sinks_) : art_target_[e - arc_num_];
  }
  double arc_cost(std::int64_t e) const {
    return e < arc_num_ ? cost_[e] : art_cost_[e - arc_num_];
  }

  bool find_entering_arc();
  void find_join_node();
  bool find_leaving_arc();
  void change_flow(bool change);
  void update_tree_structure();
  void update_potential();
  void recompute_potentials();

  int sources_;
  int sinks_;
  int node_num_;
  int root_;
  std::int64_t arc_num_;
  std::int64_t search_arc_num_;
  std::int64_t block_size_;
  std::int64_t next_arc_ = 0;
  std::int64_t pivots_ = 0;
  double opt_tol_;

  std::vector<double> cost_;  // row-major sources x sinks
  std::vector<int> art_source_;
  std::vector<int> art_target_;
  std::vector<double> art_cost_;

  std::vector<double> supply_;
  std::vector<double> flow_;
  std::vector<signed char> state_;

  std::vector<int> parent_;
  std::vector<std::int64_t> pred_;
  std::vector<int> thread_;
  std::vector<int> rev_thread_;
  std::vector<int> succ_num_;
  std::vector<int> last_succ_;
  std::vector<signed char> pred_dir_;
  std::vector<int> dirty_revs_;
  std::vector<double> pi_;

  std::int64_t in_arc_ = -1;
  int join_ = -1;
  int u_in_ = -1;
  int v_in_ = -1;
  int u_out_ = -1;
  int v_out_ = -1;
  double delta_ = 0.0;
};

}  // namespace entsel
