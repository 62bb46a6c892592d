#include "dgopt/partition.hpp"

#include <algorithm>
#include <array>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>

#include "dgopt/rng.hpp"

namespace dgopt {

int dist_ind(Index a, Index b) {
  return std::max(std::abs(a.i - b.i), std::abs(a.j - b.j));
}

int dist_set(const std::vector<Index>& a, const std::vector<Index>& b) {
  if (a.empty() || b.empty()) return std::numeric_limits<int>::max();
  int best = std::numeric_limits<int>::max();
  for (const Index& p : a)
    for (const Index& q : b) best = std::min(best, dist_ind(p, q));
  return best;
}

Ordering make_natural(Dims d) {
  Ordering o;
  o.kind = OrderingKind::natural;
  o.visit.reserve(size_t(d.count()));
  for (int i = 0; i < d.nx; ++i)
    for (int j = 0; j < d.ny; ++j) o.visit.push_back({i, j});
  return o;
}

Ordering make_red_black(Dims d) {
  Ordering o;
  o.kind = OrderingKind::red_black;
  o.visit.reserve(size_t(d.count()));
  for (int pass = 0; pass < 2; ++pass)
    for (int i = 0; i < d.nx; ++i)
      for (int j = 0; j < d.ny; ++j)
        if ((i + j) % 2 == pass) o.visit.push_back({i, j});
  return o;
}

Ordering make_random(Dims d, uint64_t seed) {
  Ordering o = make_natural(d);
  o.kind = OrderingKind::random;
  Rng rng(seed);
  for (size_t k = o.visit.size(); k > 1; --k)
    std::swap(o.visit[k - 1], o.visit[size_t(rng.below(k))]);
  return o;
}

namespace {

// Splits [0, n) into `parts` tile intervals separated by gaps of width
// `radius`. Returns tile [start, end) pairs; gaps fill the space between.
std::vector<std::pair<int, int>> tile_axis(int n, int parts, int radius) {
  int gaps = parts - 1;
  int usable = n - gaps * radius;
  if (usable < parts)
    throw std::invalid_argument("partition: axis too short for layout");
  std::vector<std::pair<int, int>> tiles;
  int pos = 0;
  for (int t = 0; t < parts; ++t) {
    int len = usable / parts + (t < usable % parts ? 1 : 0);
    tiles.push_back({pos, pos + len});
    pos += len + radius;
  }
  return tiles;
}

bool in_any(int x, const std::vector<std::pair<int, int>>& tiles, int& which) {
  for (size_t t = 0; t < tiles.size(); ++t)
    if (x >= tiles[t].first && x < tiles[t].second) {
      which = int(t);
      return true;
    }
  return false;
}

}  // namespace

Partition build_partition(Dims d, int radius, int blocks_x, int blocks_y) {
  if (radius < 1) throw std::invalid_argument("partition: radius must be >= 1");
  if (blocks_x < 1 || blocks_y < 1)
    throw std::invalid_argument("partition: block counts must be >= 1");
  auto tx = tile_axis(d.nx, blocks_x, radius);
  auto ty = tile_axis(d.ny, blocks_y, radius);

  Partition p;
  p.dims = d;
  p.radius = radius;
  p.blocks.assign(size_t(blocks_x) * size_t(blocks_y), {});

  std::vector<Index> band_pixels;
  for (int i = 0; i < d.nx; ++i)
    for (int j = 0; j < d.ny; ++j) {
      int bx = -1, by = -1;
      bool on_x = in_any(i, tx, bx);
      bool on_y = in_any(j, ty, by);
      if (on_x && on_y)
        p.blocks[size_t(by) * size_t(blocks_x) + size_t(bx)].push_back({i, j});
      else
        band_pixels.push_back({i, j});
    }

  if (band_pixels.empty()) {
    // single block, no separators
  } else if (blocks_x == 1 || blocks_y == 1) {
    // Strip layout: parallel bands. Bands far enough apart (gap > radius)
    // share a group and sweep concurrently; first-fit grouping handles
    // narrow tiles by serializing only the bands that sit too close.
    bool vertical = blocks_x > 1;  // bands are vertical columns
    const auto& tiles = vertical ? tx : ty;
    auto band_of = [&](Index q) {
      int c = vertical ? q.i : q.j;
      int band = 0;
      for (size_t t = 0; t + 1 < tiles.size(); ++t)
        if (c >= tiles[t].second) band = int(t);
      return band;
    };
    int nbands = (vertical ? blocks_x : blocks_y) - 1;
    std::vector<std::vector<Index>> bands;
    bands.resize(size_t(nbands));
    for (const Index& q : band_pixels) bands[size_t(band_of(q))].push_back(q);

    std::vector<std::vector<int>> groups;
    for (int t = 0; t < nbands; ++t) {
      int start_t = tiles[size_t(t)].second;
      bool placed = false;
      for (auto& g : groups) {
        bool fits = true;
        for (int o : g) {
          int end_o = tiles[size_t(o) + 1].first;  // one past band o
          fits = fits && (start_t - (end_o - 1) > radius);
        }
        if (fits) {
          g.push_back(t);
          placed = true;
          break;
        }
      }
      if (!placed) groups.push_back({t});
    }
    for (const auto& g : groups) {
      std::vector<std::vector<Index>> sets;
      for (int t : g) sets.push_back(std::move(bands[size_t(t)]));
      p.separators.push_back(std::move(sets));
    }
  } else {
    // 2-D layout: the band lattice is Chebyshev-connected at crossings, so
    // it cannot be split into sets pairwise > radius apart. One group, one
    // set, swept serially before the blocks run in parallel.
    p.separators.push_back({std::move(band_pixels)});
  }
  return p;
}

std::vector<std::string> validate_partition(const Partition& p) {
  std::vector<std::string> errs;
  auto note = [&](std::string m) { errs.push_back(std::move(m)); };
  if (p.radius < 1) {
    note("radius must be >= 1");
    return errs;
  }

  // Label every pixel with its owning set; distance constraints then reduce
  // to a window scan (dist_set(A,B) <= R iff some A pixel sees B within R).
  struct Label {
    int count = 0;
    int group = -1;  // separator group, or -1 for blocks
    int set = -1;
  };
  std::vector<Label> lab(size_t(p.dims.count()));
  auto mark = [&](const std::vector<Index>& set, int group, int idx,
                  const char* what) {
    for (const Index& q : set) {
      if (q.i < 0 || q.i >= p.dims.nx || q.j < 0 || q.j >= p.dims.ny) {
        note(std::string(what) + ": pixel out of range");
        continue;
      }
      Label& l = lab[size_t(q.j) * size_t(p.dims.nx) + size_t(q.i)];
      ++l.count;
      l.group = group;
      l.set = idx;
    }
  };
  for (size_t g = 0; g < p.separators.size(); ++g)
    for (size_t s = 0; s < p.separators[g].size(); ++s)
      mark(p.separators[g][s], int(g), int(s), "separator");
  for (size_t b = 0; b < p.blocks.size(); ++b)
    mark(p.blocks[b], -1, int(b), "block");

  int missing = 0, dup = 0;
  for (const Label& l : lab) {
    if (l.count == 0) ++missing;
    if (l.count > 1) ++dup;
  }
  if (missing) note(std::to_string(missing) + " pixels uncovered");
  if (dup) note(std::to_string(dup) + " pixels covered more than once");

  std::set<std::array<int, 4>> close;  // {group, set_a, set_b, is_block}
  for (int j = 0; j < p.dims.ny; ++j)
    for (int i = 0; i < p.dims.nx; ++i) {
      const Label& a = lab[size_t(j) * size_t(p.dims.nx) + size_t(i)];
      if (a.count == 0) continue;
      for (int dj = -p.radius; dj <= p.radius; ++dj)
        for (int di = -p.radius; di <= p.radius; ++di) {
          int qi = i + di, qj = j + dj;
          if (qi < 0 || qi >= p.dims.nx || qj < 0 || qj >= p.dims.ny) continue;
          const Label& b = lab[size_t(qj) * size_t(p.dims.nx) + size_t(qi)];
          if (b.count == 0 || a.group != b.group || a.set == b.set) continue;
          close.insert({a.group, std::min(a.set, b.set),
                        std::max(a.set, b.set), a.group < 0 ? 1 : 0});
        }
    }
  for (const auto& c : close) {
    if (c[3])
      note("blocks " + std::to_string(c[1]) + "," + std::to_string(c[2]) +
           " within radius");
    else
      note("separator group " + std::to_string(c[0]) + ": sets " +
           std::to_string(c[1]) + "," + std::to_string(c[2]) +
           " within radius");
  }
  return errs;
}

Ordering make_block(const Partition& p) {
  Ordering o;
  o.kind = OrderingKind::block;
  o.visit.reserve(size_t(p.dims.count()));
  auto append = [&](std::vector<Index> set) {
    std::sort(set.begin(), set.end(), [](Index a, Index b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    o.visit.insert(o.visit.end(), set.begin(), set.end());
  };
  for (const auto& group : p.separators)
    for (const auto& set : group) append(set);
  for (const auto& block : p.blocks) append(block);
  return o;
}

}  // namespace dgopt
