#pragma once

#include <stdexcept>

namespace mtlim {

// Block structure of an (L*N) x K influence matrix.
//
// Node u (1-based) owns the L consecutive rows starting at (u-1)*L; row
// (u-1)*L + (l-1) holds the weight of lag l in 1..L.  Column k-1 holds
// contagion k.  Every module that slices influence matrices shares this
// layout so the block conventions live in exactly one place.
struct BlockLayout {
  int lag = 1;          // L
  int n_nodes = 1;      // N
  int n_contagions = 1; // K

  int rows() const { return lag * n_nodes; }
  int cols() const { return n_contagions; }

  // First row of node u's block, u in 1..N.
  int block_row(int node) const { return (node - 1) * lag; }

  // Column of the design matrix holding lag l of node u.
  int design_col(int node, int l) const { return (node - 1) * lag + (l - 1); }

  void validate() const {
    if (lag < 1 || n_nodes < 1 || n_contagions < 1)
      throw std::invalid_argument(
          "BlockLayout: lag, n_nodes and n_contagions must all be >= 1");
  }
};

}  // namespace mtlim
