#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "moljson/graph.hpp"
#include "moljson/molecule.hpp"
#include "moljson/smiles.hpp"
#include "moljson/taskgen/random.hpp"

namespace moljson {

/// Halogen path and ring constraints for one constrained-generation task.
struct ConstraintSet {
  Topology subset = Topology::Acyclic;
  int path_fcl = 0, path_fbr = 0, path_clbr = 0;
  int ring_count = 0;
  std::vector<int> ring_sizes;  // ascending
  Topology topology = Topology::Acyclic;
  bool halogen_on_ring = false;
  Molecule witness;

  /// Stable identity: subset, the three paths and the ring sizes.
  std::string key() const {
    std::string k(to_string(subset));
    k += "|" + std::to_string(path_fcl) + "," + std::to_string(path_fbr) + "," + std::to_string(path_clbr) + "|";
    for (std::size_t i = 0; i < ring_sizes.size(); ++i) k += (i ? "," : "") + std::to_string(ring_sizes[i]);
    return k;
  }

  /// Sampling stratum: ring sizes, or total halogen path length when acyclic.
  std::string stratum() const {
    if (ring_count == 0) return "paths=" + std::to_string(path_fcl + path_fbr + path_clbr);
    std::string s = "rings=";
    for (std::size_t i = 0; i < ring_sizes.size(); ++i) s += (i ? "," : "") + std::to_string(ring_sizes[i]);
    return s;
  }
};

struct SubsetLimits {
  int path_min = 3, path_max = 8;
  int ring_min = 3, ring_max = 7;
  int max_heavy = 16;   // acyclic scaffolds
  int linker_max = 4;   // separate rings
};

/// Ranges per subset as used in the benchmark.
inline SubsetLimits default_limits(Topology subset) {
  SubsetLimits l;
  switch (subset) {
    case Topology::Acyclic: l.path_min = 2; l.path_max = 13; break;
    case Topology::Monocyclic: l.ring_min = 3; l.ring_max = 27; l.path_min = 3; l.path_max = 11; break;
    case Topology::Separate: l.path_min = 3; l.path_max = 9; break;
    default: break;
  }
  return l;
}

namespace detail {

struct Scaffold {
  int carbons = 0;
  std::vector<std::pair<int, int>> edges;

  int add() { return carbons++; }
  void link(int a, int b) { edges.emplace_back(a, b); }
  void ring(const std::vector<int> &cyc) {
    for (std::size_t i = 0; i < cyc.size(); ++i) link(cyc[i], cyc[(i + 1) % cyc.size()]);
  }
  std::vector<int> new_atoms(int n) {
    std::vector<int> v;
    for (int i = 0; i < n; ++i) v.push_back(add());
    return v;
  }

  std::vector<std::vector<int>> distances() const {
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(carbons));
    for (auto [a, b] : edges) {
      adj[static_cast<std::size_t>(a)].push_back(b);
      adj[static_cast<std::size_t>(b)].push_back(a);
    }
    std::vector<std::vector<int>> d(static_cast<std::size_t>(carbons), std::vector<int>(static_cast<std::size_t>(carbons), -1));
    for (int s = 0; s < carbons; ++s) {
      auto &row = d[static_cast<std::size_t>(s)];
      std::vector<int> q{s};
      row[static_cast<std::size_t>(s)] = 0;
      for (std::size_t h = 0; h < q.size(); ++h)
        for (int v : adj[static_cast<std::size_t>(q[h])])
          if (row[static_cast<std::size_t>(v)] < 0) {
            row[static_cast<std::size_t>(v)] = row[static_cast<std::size_t>(q[h])] + 1;
            q.push_back(v);
          }
    }
    return d;
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(carbons), 0);
    for (auto [a, b] : edges) {
      ++deg[static_cast<std::size_t>(a)];
      ++deg[static_cast<std::size_t>(b)];
    }
    return deg;
  }

  /// Carbon skeleton with F, Cl and Br on the given carbons.
  Molecule with_halogens(int f, int cl, int br) const {
    std::vector<Atom> atoms(static_cast<std::size_t>(carbons), Atom{element::C, 0, 0});
    std::vector<Bond> bonds;
    for (auto [a, b] : edges) bonds.push_back({a, b, BondOrder::Single});
    const int hal[3] = {element::F, element::Cl, element::Br};
    const int at[3] = {f, cl, br};
    for (int k = 0; k < 3; ++k) {
      atoms.push_back(Atom{hal[k], 0, 0});
      bonds.push_back({at[k], static_cast<int>(atoms.size()) - 1, BondOrder::Single});
    }
    return build_molecule(std::move(atoms), std::move(bonds));
  }
};

/// Orders three halogen sites so F-Cl is the shortest path, Cl-Br the
/// middle one and F-Br the longest. Returns {f, cl, br}.
inline std::array<int, 3> assign_halogens(const std::array<int, 3> &sites, const std::vector<std::vector<int>> &d) {
  std::array<int, 3> p = sites;
  std::sort(p.begin(), p.end());
  auto dist = [&](int a, int b) { return d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]; };
  do {
    const int fcl = dist(p[0], p[1]), clbr = dist(p[1], p[2]), fbr = dist(p[0], p[2]);
    if (fcl <= clbr && clbr <= fbr) return p;
  } while (std::next_permutation(p.begin(), p.end()));
  return p;
}

class SetCollector {
 public:
  SetCollector(Topology subset, const SubsetLimits &lim) : subset_(subset), lim_(lim) {}

  /// Fixes ring sizes for the following offers; false if the scaffold
  /// itself has the wrong topology.
  bool begin(const Scaffold &sc) {
    std::vector<Atom> atoms(static_cast<std::size_t>(sc.carbons), Atom{element::C, 0, 0});
    std::vector<Bond> bonds;
    for (auto [a, b] : sc.edges) bonds.push_back({a, b, BondOrder::Single});
    Molecule bare = build_molecule(std::move(atoms), std::move(bonds));
    auto rings = sssr_rings(bare);
    sizes_ = ring_sizes(rings);
    return classify_topology(rings) == subset_;
  }

  /// Records the tuple realised by halogens on `sites` if new and in range.
  void offer(const Scaffold &sc, const std::vector<std::vector<int>> &d, std::array<int, 3> sites) {
    auto [f, cl, br] = assign_halogens(sites, d);
    auto dd = [&](int a, int b) { return d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] + 2; };
    const int fcl = dd(f, cl), clbr = dd(cl, br), fbr = dd(f, br);
    if (fcl < lim_.path_min || fbr > lim_.path_max) return;
    std::string key = std::to_string(fcl) + "," + std::to_string(fbr) + "," + std::to_string(clbr) + "|";
    for (int s : sizes_) key += std::to_string(s) + ",";
    if (!seen_.insert(key).second) return;
    ConstraintSet cs;
    cs.subset = subset_;
    cs.path_fcl = fcl;
    cs.path_fbr = fbr;
    cs.path_clbr = clbr;
    cs.ring_count = static_cast<int>(sizes_.size());
    cs.ring_sizes = sizes_;
    cs.topology = subset_;
    cs.halogen_on_ring = cs.ring_count >= 1;
    cs.witness = sc.with_halogens(f, cl, br);
    out_.push_back(std::move(cs));
  }

  /// Offers every triple of distinct scaffold carbons that can still take a substituent.
  void offer_ring_sites(const Scaffold &sc) {
    if (!begin(sc)) return;
    const auto d = sc.distances();
    const auto deg = sc.degrees();
    std::vector<int> eligible;
    for (int i = 0; i < sc.carbons; ++i)
      if (deg[static_cast<std::size_t>(i)] <= 3) eligible.push_back(i);
    for (std::size_t a = 0; a < eligible.size(); ++a)
      for (std::size_t b = a + 1; b < eligible.size(); ++b)
        for (std::size_t c = b + 1; c < eligible.size(); ++c)
          offer(sc, d, {eligible[a], eligible[b], eligible[c]});
  }

  std::vector<ConstraintSet> take() { return std::move(out_); }

 private:
  Topology subset_;
  SubsetLimits lim_;
  std::set<std::string> seen_;
  std::vector<int> sizes_;
  std::vector<ConstraintSet> out_;
};

}  // namespace detail

/// Every distinct constraint tuple reachable with carbon scaffolds of the
/// given topology and F/Cl/Br substituents, one witness each. Halogen
/// permutations collapse to a single tuple.
inline std::vector<ConstraintSet> enumerate_constraint_sets(Topology subset,
                                                            const SubsetLimits &lim) {
  detail::SetCollector col(subset, lim);
  switch (subset) {
    case Topology::Acyclic: {
      // Three arms of a, b, c bonds (halogen bond included) meet at one carbon.
      for (int a = 1; a <= lim.path_max; ++a)
        for (int b = a; b <= lim.path_max; ++b)
          for (int c = b; c <= lim.path_max; ++c) {
            if (a + b + c - 2 + 3 > lim.max_heavy) continue;
            if (a + b < lim.path_min || b + c > lim.path_max) continue;
            detail::Scaffold sc;
            const int center = sc.add();
            std::array<int, 3> ends{};
            const int arms[3] = {a, b, c};
            for (int k = 0; k < 3; ++k) {
              int prev = center;
              for (int s = 1; s < arms[k]; ++s) {
                int x = sc.add();
                sc.link(prev, x);
                prev = x;
              }
              ends[static_cast<std::size_t>(k)] = prev;
            }
            if (col.begin(sc)) col.offer(sc, sc.distances(), ends);
          }
      break;
    }
    case Topology::Monocyclic:
      for (int n = lim.ring_min; n <= lim.ring_max; ++n) {
        detail::Scaffold sc;
        sc.ring(sc.new_atoms(n));
        if (!col.begin(sc)) continue;
        const auto d = sc.distances();
        for (int j = 1; j < n; ++j)
          for (int k = j + 1; k < n; ++k) col.offer(sc, d, {0, j, k});
      }
      break;
    case Topology::Separate:
      for (int s1 = lim.ring_min; s1 <= lim.ring_max; ++s1)
        for (int s2 = s1; s2 <= lim.ring_max; ++s2)
          for (int link = 1; link <= lim.linker_max; ++link) {
            detail::Scaffold sc;
            auto r1 = sc.new_atoms(s1);
            auto r2 = sc.new_atoms(s2);
            sc.ring(r1);
            sc.ring(r2);
            int prev = r1[0];
            for (int k = 1; k < link; ++k) {
              int x = sc.add();
              sc.link(prev, x);
              prev = x;
            }
            sc.link(prev, r2[0]);
            if (!col.begin(sc)) continue;
            const auto d = sc.distances();
            std::vector<int> ring_atoms(r1);
            ring_atoms.insert(ring_atoms.end(), r2.begin(), r2.end());
            for (std::size_t a = 0; a < ring_atoms.size(); ++a)
              for (std::size_t b = a + 1; b < ring_atoms.size(); ++b)
                for (std::size_t c = b + 1; c < ring_atoms.size(); ++c)
                  col.offer(sc, d, {ring_atoms[a], ring_atoms[b], ring_atoms[c]});
          }
      break;
    case Topology::Fused:
      for (int s1 = lim.ring_min; s1 <= lim.ring_max; ++s1)
        for (int s2 = s1; s2 <= lim.ring_max; ++s2) {
          detail::Scaffold sc;
          auto r1 = sc.new_atoms(s1);
          sc.ring(r1);
          auto extra = sc.new_atoms(s2 - 2);
          std::vector<int> path{r1[1]};
          path.insert(path.end(), extra.begin(), extra.end());
          path.push_back(r1[0]);
          for (std::size_t i = 0; i + 1 < path.size(); ++i) sc.link(path[i], path[i + 1]);
          col.offer_ring_sites(sc);
        }
      break;
    case Topology::Spiro:
      for (int s1 = lim.ring_min; s1 <= lim.ring_max; ++s1)
        for (int s2 = s1; s2 <= lim.ring_max; ++s2) {
          detail::Scaffold sc;
          auto r1 = sc.new_atoms(s1);
          sc.ring(r1);
          auto extra = sc.new_atoms(s2 - 1);
          std::vector<int> cyc{r1[0]};
          cyc.insert(cyc.end(), extra.begin(), extra.end());
          sc.ring(cyc);
          col.offer_ring_sites(sc);
        }
      break;
    case Topology::Other:
      break;
  }
  return col.take();
}

inline std::vector<ConstraintSet> enumerate_constraint_sets(Topology subset) {
  return enumerate_constraint_sets(subset, default_limits(subset));
}

struct ConstraintSampling {
  int per_subset_total = 100;
  int per_stratum_cap = 100;
  std::uint64_t seed = 0;
};

/// Draws without replacement, one set per stratum in turn (strata visited
/// in shuffled order), until the subset total or every stratum cap is hit.
inline std::vector<ConstraintSet> sample_constraint_sets(std::vector<ConstraintSet> sets,
                                                         const ConstraintSampling &p) {
  std::map<std::string, std::map<std::string, std::vector<ConstraintSet>>> by_subset;
  for (ConstraintSet &cs : sets) by_subset[std::string(to_string(cs.subset))][cs.stratum()].push_back(std::move(cs));
  std::vector<ConstraintSet> out;
  for (auto &[subset, strata] : by_subset) {
    std::vector<std::string> order;
    for (auto &[name, members] : strata) {
      std::sort(members.begin(), members.end(),
                [](const ConstraintSet &a, const ConstraintSet &b) { return a.key() < b.key(); });
      seeded_shuffle(members, derive_seed(p.seed, subset + "/" + name));
      order.push_back(name);
    }
    seeded_shuffle(order, derive_seed(p.seed, subset));
    int taken = 0;
    for (int round = 0; round < p.per_stratum_cap && taken < p.per_subset_total; ++round) {
      bool any = false;
      for (const std::string &name : order) {
        auto &members = strata[name];
        if (round >= static_cast<int>(members.size())) continue;
        if (taken >= p.per_subset_total) break;
        out.push_back(members[static_cast<std::size_t>(round)]);
        ++taken;
        any = true;
      }
      if (!any) break;
    }
  }
  std::sort(out.begin(), out.end(), [](const ConstraintSet &a, const ConstraintSet &b) { return a.key() < b.key(); });
  return out;
}

inline const std::vector<Topology> &constraint_subsets() {
  static const std::vector<Topology> kSubsets = {Topology::Acyclic, Topology::Monocyclic, Topology::Separate,
                                                  Topology::Fused, Topology::Spiro};
  return kSubsets;
}

}  // namespace moljson
