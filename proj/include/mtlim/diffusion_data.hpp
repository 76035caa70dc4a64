#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <vector>

#include "mtlim/layout.hpp"

namespace mtlim {

// One infection record: node and contagion are 1-based, time is 0-based.
struct Event {
  int node = 0;
  int contagion = 0;
  int time = 0;
};

inline bool operator==(const Event& a, const Event& b) {
  return a.node == b.node && a.contagion == b.contagion && a.time == b.time;
}

// Set of infection events over N nodes, K contagions and time steps 0..T.
// Events are stored sorted by (contagion, node, time) with duplicates
// collapsed; the number of collapsed records is kept for reporting.
struct InfectionLog {
  int n_nodes = 0;      // N
  int n_contagions = 0; // K
  int horizon = 0;      // T
  std::vector<Event> events;
  long duplicates_collapsed = 0;

  // Validates bounds, sorts, collapses duplicates.  Throws
  // std::invalid_argument on an out-of-bounds index or empty dimensions.
  static InfectionLog create(int n_nodes, int n_contagions, int horizon,
                             std::vector<Event> events);

  bool has_event(int node, int contagion, int time) const;
};

// Parses "node_id,contagion_id,time" records.  A first line that does not
// parse as an integer triple is treated as a header; any later malformed
// line is an error reported with its line number, as are out-of-bounds
// indices.  An input with no event records at all is an error.
InfectionLog load_events(std::istream& in, int n_nodes, int n_contagions,
                         int horizon);

// T x K matrix of infection counts; row t-1 holds time step t for t in 1..T.
// Events at time 0 are lag sources only and are not counted.
Eigen::MatrixXd build_volume(const InfectionLog& log);

// Per-contagion design matrices, K entries of shape T x (L*N).  Row t-1,
// column (u-1)*L + (l-1) is 1 exactly when node u was infected with the
// contagion at time t-l; negative times contribute zeros.
std::vector<Eigen::MatrixXd> build_design(const InfectionLog& log, int lag);

// Model volume at time step t_target (>= 1) for every contagion:
// sum over nodes and lags of the design entry times the influence weight.
// The lag count is derived from influence.rows() / n_nodes.  The summation
// order matches a scalar walk over a design-matrix row so the result is
// bit-identical to that inner product.
Eigen::VectorXd predict_volume(const InfectionLog& log,
                               const Eigen::MatrixXd& influence, int t_target);

}  // namespace mtlim
