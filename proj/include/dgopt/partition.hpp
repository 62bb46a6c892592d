#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dgopt {

// Pixel index (i = x/column, j = y/row).
struct Index {
  int i = 0;
  int j = 0;
  bool operator==(const Index&) const = default;
};

struct Dims {
  int nx = 0;
  int ny = 0;
  int count() const { return nx * ny; }
};

// Chebyshev distance between two pixels.
int dist_ind(Index a, Index b);

// min over pairs; by convention +infinity-like large value for empty sets.
int dist_set(const std::vector<Index>& a, const std::vector<Index>& b);

enum class OrderingKind { natural, red_black, random, block };

struct Ordering {
  OrderingKind kind = OrderingKind::natural;
  std::vector<Index> visit;  // every pixel exactly once
};

Ordering make_natural(Dims d);
Ordering make_red_black(Dims d);
Ordering make_random(Dims d, uint64_t seed);

// Separator/block decomposition for coordinate decoupling. Any two distinct
// blocks are at Chebyshev distance > radius from each other; separator sets
// within one group Gamma_t are likewise pairwise > radius apart. Sweeping
// Gamma groups first, then blocks, allows every set in a stage to update in
// parallel as long as the objective's reads stay within `radius` of the
// updated pixel.
struct Partition {
  Dims dims;
  int radius = 1;
  // stage 1: separator groups, each a list of sets updated concurrently
  std::vector<std::vector<std::vector<Index>>> separators;
  // stage 2: blocks, all mutually > radius apart
  std::vector<std::vector<Index>> blocks;
};

// Cut the grid into blocks_x-by-blocks_y tiles separated by bands of width
// `radius`. Strip layouts (blocks_x==1 or blocks_y==1) make each band a
// separator set and group bands that sit more than `radius` apart for
// concurrent updates (all of them, once tiles are at least `radius` wide).
// True 2-D layouts place the whole band lattice in a single set, since band
// crossings keep every band within `radius` of its neighbours.
Partition build_partition(Dims d, int radius, int blocks_x, int blocks_y);

// Returns human-readable violations; empty means the partition is valid
// (covers every pixel exactly once, respects pairwise distances).
std::vector<std::string> validate_partition(const Partition& p);

// Visit order that replays the partition serially: separator groups in
// order (sets in order, natural order inside each), then blocks.
Ordering make_block(const Partition& p);

}  // namespace dgopt
