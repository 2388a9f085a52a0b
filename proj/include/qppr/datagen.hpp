#pragma once

// Synthetic graph generators (Erdos-Renyi G(n,p), Watts-Strogatz small world,
// Holme-Kim power law with triad formation) and SNAP edge-list ingestion.
//
// Undirected models emit both arcs of every edge.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qppr/graph.hpp"
#include "qppr/rng.hpp"

namespace qppr::datagen {

struct ErdosRenyi {
  std::uint32_t n = 0;
  double p = 0.0;
};

struct WattsStrogatz {
  std::uint32_t n = 0;
  std::uint32_t k = 0;  // lattice degree, even
  double rewire_p = 0.0;
};

struct HolmeKim {
  std::uint32_t n = 0;
  std::uint32_t m = 0;  // edges added per new vertex
  double triad_p = 0.0;
};

using Model = std::variant<ErdosRenyi, WattsStrogatz, HolmeKim>;

struct GenSpec {
  Model model;
  std::uint64_t seed = 0;
  bool directed = false;
};

inline void check(const GenSpec& spec) {
  auto bad = [](const std::string& what) { throw Error(ErrorCode::kInvalidParameters, what); };
  auto probability = [&](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) bad(std::string(name) + " must lie in [0, 1]");
  };
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if (m.n == 0) bad("n must be positive");
        if constexpr (std::is_same_v<M, ErdosRenyi>) {
          probability(m.p, "p");
        } else if constexpr (std::is_same_v<M, WattsStrogatz>) {
          if (m.k % 2 != 0) bad("Watts-Strogatz k must be even");
          if (m.k >= m.n) bad("Watts-Strogatz k must be < n");
          probability(m.rewire_p, "rewire_p");
        } else {
          if (m.m < 1 || m.m >= m.n) bad("Holme-Kim m must be in [1, n)");
          probability(m.triad_p, "triad_p");
        }
      },
      spec.model);
}

namespace detail {

/// Undirected simple graph with small adjacency vectors.
class Adjacency {
 public:
  explicit Adjacency(std::uint32_t n) : adj_(n) {}

  bool has(Vertex u, Vertex v) const {
    const auto& a = adj_[u].size() <= adj_[v].size() ? adj_[u] : adj_[v];
    const Vertex other = adj_[u].size() <= adj_[v].size() ? v : u;
    return std::find(a.begin(), a.end(), other) != a.end();
  }
  void add(Vertex u, Vertex v) {
    if (u == v || has(u, v)) return;
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  void remove(Vertex u, Vertex v) {
    std::erase(adj_[u], v);
    std::erase(adj_[v], u);
  }
  const std::vector<Vertex>& neighbors(Vertex u) const { return adj_[u]; }
  std::size_t degree(Vertex u) const { return adj_[u].size(); }

  EdgeList to_edge_list(bool directed) const {
    EdgeList out;
    out.num_vertices = static_cast<std::uint32_t>(adj_.size());
    for (Vertex u = 0; u < adj_.size(); ++u) {
      std::vector<Vertex> sorted = adj_[u];
      std::sort(sorted.begin(), sorted.end());
      for (Vertex v : sorted) {
        if (directed && v < u) continue;
        out.edges.push_back({u, v});
      }
    }
    return out;
  }

 private:
  std::vector<std::vector<Vertex>> adj_;
};

// Geometric skipping over the candidate pairs (Batagelj-Brandes), O(n + m).
inline EdgeList erdos_renyi(const ErdosRenyi& m, bool directed, Rng& rng) {
  EdgeList out;
  out.num_vertices = m.n;
  if (m.p <= 0.0 || m.n < 2) return out;
  const double log_q = std::log1p(-m.p);
  auto skip = [&]() -> std::uint64_t {
    if (m.p >= 1.0) return 0;
    return static_cast<std::uint64_t>(std::floor(std::log1p(-rng.uniform()) / log_q));
  };
  const std::uint64_t n = m.n;
  if (directed) {
    const std::uint64_t slots = n * n;
    for (std::uint64_t slot = skip(); slot < slots; slot += 1 + skip()) {
      const auto u = static_cast<Vertex>(slot / n), v = static_cast<Vertex>(slot % n);
      if (u != v) out.edges.push_back({u, v});
    }
    return out;
  }
  std::uint64_t v = 1;
  std::int64_t w = -1;
  while (v < n) {
    w += 1 + static_cast<std::int64_t>(skip());
    while (w >= static_cast<std::int64_t>(v) && v < n) {
      w -= static_cast<std::int64_t>(v);
      ++v;
    }
    if (v < n) {
      out.edges.push_back({static_cast<Vertex>(v), static_cast<Vertex>(w)});
      out.edges.push_back({static_cast<Vertex>(w), static_cast<Vertex>(v)});
    }
  }
  return out;
}

// Ring lattice, then each lattice edge (u, u + j) is rewired to a uniform
// random endpoint with probability rewire_p, avoiding loops and multi-edges.
inline EdgeList watts_strogatz(const WattsStrogatz& m, bool directed, Rng& rng) {
  Adjacency g(m.n);
  const std::uint32_t half = m.k / 2;
  for (std::uint32_t j = 1; j <= half; ++j) {
    for (Vertex u = 0; u < m.n; ++u) g.add(u, static_cast<Vertex>((u + j) % m.n));
  }
  if (m.rewire_p > 0.0) {
    for (std::uint32_t j = 1; j <= half; ++j) {
      for (Vertex u = 0; u < m.n; ++u) {
        const auto v = static_cast<Vertex>((u + j) % m.n);
        if (!rng.bernoulli(m.rewire_p)) continue;
        if (g.degree(u) >= m.n - 1) continue;
        auto w = static_cast<Vertex>(rng.below(m.n));
        while (w == u || g.has(u, w)) w = static_cast<Vertex>(rng.below(m.n));
        g.remove(u, v);
        g.add(u, w);
      }
    }
  }
  return g.to_edge_list(directed);
}

// Preferential attachment where, after each attachment, a triad-formation
// step links to a neighbor of the last target with probability triad_p.
inline EdgeList holme_kim(const HolmeKim& m, bool directed, Rng& rng) {
  Adjacency g(m.n);
  std::vector<Vertex> repeated;  // vertex multiset weighted by degree
  repeated.reserve(static_cast<std::size_t>(m.n) * m.m * 2);
  for (Vertex v = 0; v < m.m; ++v) repeated.push_back(v);

  std::vector<Vertex> targets;
  std::vector<Vertex> neighborhood;
  for (Vertex source = m.m; source < m.n; ++source) {
    targets.clear();
    while (targets.size() < m.m) {
      const Vertex pick = repeated[rng.below(repeated.size())];
      if (std::find(targets.begin(), targets.end(), pick) == targets.end()) {
        targets.push_back(pick);
      }
    }
    Vertex target = targets.back();
    targets.pop_back();
    g.add(source, target);
    repeated.push_back(target);
    std::uint32_t count = 1;
    while (count < m.m) {
      if (rng.bernoulli(m.triad_p)) {
        neighborhood.clear();
        for (Vertex nbr : g.neighbors(target)) {
          if (nbr != source && !g.has(source, nbr)) neighborhood.push_back(nbr);
        }
        if (!neighborhood.empty()) {
          const Vertex nbr = neighborhood[rng.below(neighborhood.size())];
          g.add(source, nbr);
          repeated.push_back(nbr);
          ++count;
          continue;
        }
      }
      target = targets.back();
      targets.pop_back();
      g.add(source, target);
      repeated.push_back(target);
      ++count;
    }
    for (std::uint32_t i = 0; i < m.m; ++i) repeated.push_back(source);
  }
  return g.to_edge_list(directed);
}

}  // namespace detail

/// Deterministic for a given spec (seed included).
inline EdgeList generate(const GenSpec& spec) {
  check(spec);
  Rng rng(spec.seed);
  return std::visit(
      [&](const auto& m) -> EdgeList {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ErdosRenyi>) {
          return detail::erdos_renyi(m, spec.directed, rng);
        } else if constexpr (std::is_same_v<M, WattsStrogatz>) {
          return detail::watts_strogatz(m, spec.directed, rng);
        } else {
          return detail::holme_kim(m, spec.directed, rng);
        }
      },
      spec.model);
}

// --- presets ----------------------------------------------------------------

struct Preset {
  std::string name;
  GenSpec spec;
  std::optional<std::uint64_t> target_arcs;
};

inline nlohmann::json to_json(const GenSpec& spec) {
  nlohmann::json j;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, ErdosRenyi>) {
          j = {{"model", "erdos_renyi"}, {"n", m.n}, {"p", m.p}};
        } else if constexpr (std::is_same_v<M, WattsStrogatz>) {
          j = {{"model", "watts_strogatz"}, {"n", m.n}, {"k", m.k}, {"rewire_p", m.rewire_p}};
        } else {
          j = {{"model", "holme_kim"}, {"n", m.n}, {"m", m.m}, {"triad_p", m.triad_p}};
        }
      },
      spec.model);
  j["seed"] = spec.seed;
  j["directed"] = spec.directed;
  return j;
}

inline GenSpec gen_spec_from_json(const nlohmann::json& j) {
  try {
    GenSpec spec;
    const std::string model = j.at("model").get<std::string>();
    const auto n = j.at("n").get<std::uint32_t>();
    if (model == "erdos_renyi") {
      spec.model = ErdosRenyi{n, j.at("p").get<double>()};
    } else if (model == "watts_strogatz") {
      spec.model = WattsStrogatz{n, j.at("k").get<std::uint32_t>(), j.at("rewire_p").get<double>()};
    } else if (model == "holme_kim") {
      spec.model = HolmeKim{n, j.at("m").get<std::uint32_t>(), j.at("triad_p").get<double>()};
    } else {
      throw Error(ErrorCode::kInvalidParameters, "unknown model '" + model + "'");
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.directed = j.value("directed", false);
    check(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidParameters, e.what());
  }
}

/// Reads {"presets": [{"name": ..., "model": ..., ..., "target_arcs": ...}]}.
inline std::vector<Preset> load_presets(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidParameters, std::string("preset file: ") + e.what());
  }
  std::vector<Preset> presets;
  for (const auto& entry : doc.at("presets")) {
    Preset p;
    p.name = entry.at("name").get<std::string>();
    p.spec = gen_spec_from_json(entry);
    if (entry.contains("target_arcs")) p.target_arcs = entry["target_arcs"].get<std::uint64_t>();
    presets.push_back(std::move(p));
  }
  return presets;
}

inline std::vector<Preset> load_presets(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open preset file " + path.string());
  return load_presets(in);
}

inline const Preset& find_preset(const std::vector<Preset>& presets, const std::string& name) {
  for (const auto& p : presets) {
    if (p.name == name) return p;
  }
  throw Error(ErrorCode::kInvalidParameters, "unknown preset '" + name + "'");
}

// --- SNAP text --------------------------------------------------------------

struct SnapGraph {
  EdgeList edges;
  /// id_map[dense] = original id. Dense ids follow ascending original ids.
  std::vector<std::uint64_t> id_map;
};

/// Whitespace-separated "src dst" lines; '#' starts a comment line. Duplicate
/// edges are kept.
inline SnapGraph parse_snap(std::istream& in) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    std::string a, b, extra;
    fields >> a >> b;
    auto parse_id = [&](const std::string& token) -> std::uint64_t {
      std::size_t used = 0;
      std::uint64_t id = 0;
      try {
        if (token.empty() || token[0] == '-' || token[0] == '+') throw std::invalid_argument("sign");
        id = std::stoull(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != token.size()) {
        throw Error(ErrorCode::kMalformedLine, "line " + std::to_string(line_no) + ": '" +
                                                   line + "'");
      }
      return id;
    };
    const std::uint64_t src = parse_id(a);
    const std::uint64_t dst = parse_id(b);
    if (fields >> extra) {
      throw Error(ErrorCode::kMalformedLine,
                  "line " + std::to_string(line_no) + ": expected two fields");
    }
    raw.emplace_back(src, dst);
  }
  if (raw.empty()) throw Error(ErrorCode::kEmptyInput, "edge list has no edges");

  SnapGraph out;
  out.id_map.reserve(raw.size() * 2);
  for (const auto& [s, d] : raw) {
    out.id_map.push_back(s);
    out.id_map.push_back(d);
  }
  std::sort(out.id_map.begin(), out.id_map.end());
  out.id_map.erase(std::unique(out.id_map.begin(), out.id_map.end()), out.id_map.end());
  if (out.id_map.size() > 0xFFFFFFFFull) {
    throw Error(ErrorCode::kCapacityExceeded, "more than 2^32 - 1 distinct vertices");
  }
  auto dense = [&](std::uint64_t id) {
    return static_cast<Vertex>(std::lower_bound(out.id_map.begin(), out.id_map.end(), id) -
                               out.id_map.begin());
  };
  out.edges.num_vertices = static_cast<std::uint32_t>(out.id_map.size());
  out.edges.edges.reserve(raw.size());
  for (const auto& [s, d] : raw) out.edges.edges.push_back({dense(s), dense(d)});
  return out;
}

inline SnapGraph parse_snap_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return parse_snap(in);
}

inline void write_snap(std::ostream& out, const EdgeList& list) {
  out << "# Nodes: " << list.num_vertices << " Edges: " << list.edges.size() << '\n';
  out << "# FromNodeId\tToNodeId\n";
  for (const Edge& e : list.edges) out << e.src << '\t' << e.dst << '\n';
}

/// Dense-to-original id table, one "dense<TAB>original" pair per line.
inline void write_id_map(std::ostream& out, std::span<const std::uint64_t> id_map) {
  out << "# dense_id\toriginal_id\n";
  for (std::size_t i = 0; i < id_map.size(); ++i) out << i << '\t' << id_map[i] << '\n';
}

}  // namespace qppr::datagen
