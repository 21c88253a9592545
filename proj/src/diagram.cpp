#include "negfspec/diagram.hpp"

#include <json.hpp>

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace negf {

using json = nlohmann::ordered_json;

namespace {

/// Nonzero pattern of the lowering operator; reachability only needs the
/// sparsity structure, not the matrix values.
struct Reach {
  std::vector<std::vector<char>> lower;  // lower[i][j]: V(i,j) != 0
  int n = 0;
  int ground = 0;

  explicit Reach(const LevelScheme& s, const DipolePartition& dp)
      : n(s.n()), ground(s.ground) {
    lower.assign(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) lower[i][j] = dp.lowering(i, j) != cplx(0.0);
  }

  std::vector<char> start() const {
    std::vector<char> r(n, 0);
    r[ground] = 1;
    return r;
  }

  /// Applies one interaction to a strand-level set.
  ///   ket raise: i reachable if V(j,i) != 0 from some reachable j
  ///   ket lower: i reachable if V(i,j) != 0
  ///   bra ops use the transposed patterns (operators act from the right).
  std::vector<char> step(const std::vector<char>& r, Strand st,
                         VertexOp op) const {
    std::vector<char> out(n, 0);
    const bool transpose = (st == Strand::bra);
    const bool use_lower = (op == VertexOp::lower) != transpose;
    // use_lower: out_i |= lower[i][j] & r_j ; else out_i |= lower[j][i] & r_j
    for (int j = 0; j < n; ++j) {
      if (!r[j]) continue;
      for (int i = 0; i < n; ++i) {
        if (use_lower ? lower[i][j] : lower[j][i]) out[i] = 1;
      }
    }
    return out;
  }

  static bool empty(const std::vector<char>& r) {
    return std::none_of(r.begin(), r.end(), [](char c) { return c != 0; });
  }
  static bool intersects(const std::vector<char>& a,
                         const std::vector<char>& b) {
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i] && b[i]) return true;
    return false;
  }
};

struct Family {
  VertexOp obs_op;
  bool has_anchor;
  VertexOp anchor_op;
  int weight;
};

std::vector<Family> families(DetectionKind d) {
  switch (d) {
    case DetectionKind::spontaneous:
      return {{VertexOp::lower, true, VertexOp::raise, +1}};
    case DetectionKind::stimulated:
      return {{VertexOp::raise, true, VertexOp::lower, +1},
              {VertexOp::lower, true, VertexOp::raise, -1}};
    case DetectionKind::amplitude:
      return {{VertexOp::lower, false, VertexOp::raise, +1}};
  }
  return {};
}

using Item = std::pair<int, VertexOp>;  // (mode, op); role derived later

/// Enumerates all distinct orderings of `pool` whose reachability prefix
/// never dies, invoking `done` with each complete ordering and final set.
void order_multiset(const Reach& reach, std::vector<Item>& pool,
                    std::vector<char> levels, Strand strand,
                    std::vector<Item>& seq,
                    const std::function<void(const std::vector<Item>&,
                                             const std::vector<char>&)>& done) {
  if (pool.empty()) {
    done(seq, levels);
    return;
  }
  for (size_t i = 0; i < pool.size(); ++i) {
    if (i > 0 && pool[i] == pool[i - 1]) continue;  // skip duplicate siblings
    Item it = pool[i];
    auto next = reach.step(levels, strand, it.second);
    if (Reach::empty(next)) continue;
    pool.erase(pool.begin() + static_cast<long>(i));
    seq.push_back(it);
    order_multiset(reach, pool, std::move(next), strand, seq, done);
    seq.pop_back();
    pool.insert(pool.begin() + static_cast<long>(i), it);
  }
}

std::string canonical_key(const LoopDiagram& l) {
  std::ostringstream os;
  int bra_exp = 0;
  for (const auto& v : l.bra)
    if (v.role == Role::expansion) ++bra_exp;
  os << l.family_weight << '|' << bra_exp << '|';
  for (const auto& v : l.loop_order()) {
    os << (v.arrow() == Arrow::in ? 'i' : 'o') << v.mode
       << (v.op == VertexOp::raise ? '+' : '-')
       << (v.strand == Strand::ket ? 'k' : 'b')
       << static_cast<int>(v.role) << ';';
  }
  return os.str();
}

void assign_labels(LoopDiagram& l) {
  int next = 1;
  for (auto& v : l.ket) {
    if (v.role == Role::observation)
      v.label = "t";
    else
      v.label = "t" + std::to_string(next++);
  }
  for (auto& v : l.bra) {
    if (v.role == Role::signal_anchor)
      v.label = "tau";
    else
      v.label = "t" + std::to_string(next++);
  }
}

long binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  long r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

void validate_process(const std::vector<FieldMode>& modes, const Process& p) {
  const int nm = static_cast<int>(modes.size());
  auto fail = [](const std::string& m) { throw std::invalid_argument("process: " + m); };
  if (p.signal_mode < 0 || p.signal_mode >= nm) fail("signal mode out of range");
  std::set<int> seen{p.signal_mode};
  for (const auto& [m, c] : p.incoming) {
    if (m < 0 || m >= nm) fail("incoming mode out of range");
    if (!seen.insert(m).second) fail("duplicate mode in process");
    if (c < 0) fail("negative interaction count");
  }
  if (p.detection == DetectionKind::amplitude) {
    if (p.net.size() != p.incoming.size())
      fail("amplitude detection needs one net count per incoming mode");
    double combo = 0.0;
    for (size_t i = 0; i < p.incoming.size(); ++i) {
      const auto& [m, c] = p.incoming[i];
      if ((c + p.net[i]) % 2 != 0 || c + p.net[i] < 0 || c - p.net[i] < 0)
        fail("net raising count incompatible with interaction count");
      combo += p.net[i] * modes[static_cast<size_t>(m)].omega;
    }
    if (std::abs(combo - modes[static_cast<size_t>(p.signal_mode)].omega) > 1e-9)
      fail("signal mode frequency does not match the net combination");
  } else {
    if (!p.net.empty()) fail("net counts only apply to amplitude detection");
    for (const auto& [m, c] : p.incoming)
      if (c % 2 != 0)
        fail("balanced detection needs an even interaction count per mode");
    if (p.detection == DetectionKind::spontaneous &&
        modes[static_cast<size_t>(p.signal_mode)].alpha != cplx(0.0))
      fail("spontaneous detection needs an undriven signal mode");
  }
}

}  // namespace

std::vector<Interaction> LoopDiagram::loop_order() const {
  std::vector<Interaction> out(ket);
  out.insert(out.end(), bra.rbegin(), bra.rend());
  return out;
}

long LoopDiagram::feynman_count() const {
  const int f = static_cast<int>(ket.size()) - 1;
  const int b = static_cast<int>(bra.size());
  return binomial(f + b, b);
}

std::vector<LoopDiagram> generate_loops(const LevelScheme& s,
                                        const std::vector<FieldMode>& modes,
                                        const Process& p) {
  validate_process(modes, p);
  const DipolePartition dp = partition_dipole(s);
  const Reach reach(s, dp);

  std::vector<Item> expansion;
  for (size_t i = 0; i < p.incoming.size(); ++i) {
    const auto& [m, c] = p.incoming[i];
    const int net = (p.detection == DetectionKind::amplitude) ? p.net[i] : 0;
    const int raises = (c + net) / 2;
    for (int r = 0; r < raises; ++r) expansion.emplace_back(m, VertexOp::raise);
    for (int l = 0; l < c - raises; ++l) expansion.emplace_back(m, VertexOp::lower);
  }
  std::sort(expansion.begin(), expansion.end());

  std::vector<LoopDiagram> loops;
  std::set<std::string> dedup;

  for (const Family& fam : families(p.detection)) {
    // Split the expansion multiset between the strands by subset mask over
    // the sorted item list, deduplicated through the canonical key below.
    const size_t k = expansion.size();
    for (size_t mask = 0; mask < (size_t{1} << k); ++mask) {
      std::vector<Item> ket_pool, bra_pool;
      for (size_t i = 0; i < k; ++i)
        ((mask >> i) & 1 ? ket_pool : bra_pool).push_back(expansion[i]);
      if (fam.has_anchor) bra_pool.emplace_back(p.signal_mode, fam.anchor_op);
      std::sort(ket_pool.begin(), ket_pool.end());
      std::sort(bra_pool.begin(), bra_pool.end());

      std::vector<Item> kseq, bseq;
      order_multiset(
          reach, ket_pool, reach.start(), Strand::ket, kseq,
          [&](const std::vector<Item>& kord, const std::vector<char>& kl) {
            // observation closes the ket strand
            auto kfinal = reach.step(kl, Strand::ket, fam.obs_op);
            if (Reach::empty(kfinal)) return;
            order_multiset(
                reach, bra_pool, reach.start(), Strand::bra, bseq,
                [&](const std::vector<Item>& bord, const std::vector<char>& bl) {
                  if (!Reach::intersects(kfinal, bl)) return;
                  LoopDiagram l;
                  l.detection = p.detection;
                  l.family_weight = fam.weight;
                  for (const auto& [m, op] : kord)
                    l.ket.push_back({Strand::ket, op, m, Role::expansion, ""});
                  l.ket.push_back({Strand::ket, fam.obs_op, p.signal_mode,
                                   Role::observation, ""});
                  int bra_exp = 0;
                  for (const auto& [m, op] : bord) {
                    const bool anchor =
                        fam.has_anchor && m == p.signal_mode && op == fam.anchor_op;
                    l.bra.push_back({Strand::bra, op, m,
                                     anchor ? Role::signal_anchor : Role::expansion,
                                     ""});
                    if (!anchor) ++bra_exp;
                  }
                  l.sign = (bra_exp % 2 == 0) ? 1 : -1;
                  assign_labels(l);
                  if (dedup.insert(canonical_key(l)).second) loops.push_back(l);
                });
          });
    }
  }

  std::sort(loops.begin(), loops.end(),
            [](const LoopDiagram& a, const LoopDiagram& b) {
              return canonical_key(a) < canonical_key(b);
            });
  return loops;
}

std::vector<FeynmanDiagram> decompose(const LoopDiagram& loop) {
  const std::vector<Interaction> pre(loop.ket.begin(), loop.ket.end() - 1);
  const Interaction obs = loop.ket.back();
  std::vector<FeynmanDiagram> out;
  std::vector<Interaction> merged;

  std::function<void(size_t, size_t)> merge = [&](size_t i, size_t j) {
    if (i == pre.size() && j == loop.bra.size()) {
      FeynmanDiagram fd;
      fd.parent = loop;
      fd.global = merged;
      fd.global.push_back(obs);
      out.push_back(std::move(fd));
      return;
    }
    if (i < pre.size()) {
      merged.push_back(pre[i]);
      merge(i + 1, j);
      merged.pop_back();
    }
    if (j < loop.bra.size()) {
      merged.push_back(loop.bra[j]);
      merge(i, j + 1);
      merged.pop_back();
    }
  };
  merge(0, 0);
  return out;
}

namespace {

/// Frequency coefficients contributed by one interaction (over the mode list).
std::vector<int> freq_coeff(const Interaction& v, const Process& p, int nm) {
  std::vector<int> c(static_cast<size_t>(nm), 0);
  if (v.role == Role::observation && p.detection == DetectionKind::amplitude) {
    for (size_t i = 0; i < p.incoming.size(); ++i)
      c[static_cast<size_t>(p.incoming[i].first)] -= p.net[i];
  } else {
    c[static_cast<size_t>(v.mode)] += v.signed_freq();
  }
  return c;
}

int mode_count(const Process& p) {
  int nm = p.signal_mode;
  for (const auto& [m, c] : p.incoming) nm = std::max(nm, m);
  return nm + 1;
}

cplx ipow(int k) {
  static const cplx tab[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return tab[((k % 4) + 4) % 4];
}

}  // namespace

FreqExpression compile_frequency(const LoopDiagram& loop, const Process& p) {
  FreqExpression e;
  e.vertices = loop.loop_order();
  e.family_weight = loop.family_weight;
  const int n = static_cast<int>(e.vertices.size());
  const int fwd = static_cast<int>(loop.ket.size()) - 1;
  const int nm = mode_count(p);

  std::vector<int> cum(static_cast<size_t>(nm), 0);
  for (int m = 0; m + 1 < n; ++m) {
    const auto c = freq_coeff(e.vertices[static_cast<size_t>(m)], p, nm);
    for (int i = 0; i < nm; ++i) cum[static_cast<size_t>(i)] += c[static_cast<size_t>(i)];
    e.args.push_back(cum);
    e.branches.push_back(m < fwd ? Branch::retarded : Branch::advanced);
  }
  e.scalar_prefactor =
      cplx(loop.sign, 0.0) * ipow(fwd) * std::conj(ipow(n - 1 - fwd));
  return e;
}

cplx FreqExpression::bracket(const LevelScheme& s, const DipolePartition& dp,
                             const std::vector<double>& omegas) const {
  const int n = s.n();
  const double wg = s.omega(s.ground);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(n);
  psi(s.ground) = 1.0;
  for (size_t m = 0; m < vertices.size(); ++m) {
    psi = (vertices[m].op == VertexOp::raise ? dp.raising : dp.lowering) * psi;
    if (m + 1 == vertices.size()) break;
    double w = 0.0;
    for (size_t i = 0; i < args[m].size(); ++i) w += args[m][i] * omegas[i];
    const bool ret = branches[m] == Branch::retarded;
    for (int x = 0; x < n; ++x) {
      const double width = effective_width(s, x);
      const cplx den(w + wg - s.omega(x), ret ? width : -width);
      psi(x) /= den;
    }
  }
  return psi(s.ground);
}

cplx FreqExpression::evaluate(const LevelScheme& s, const DipolePartition& dp,
                              const std::vector<double>& omegas) const {
  return scalar_prefactor * bracket(s, dp, omegas);
}

std::string FreqExpression::render() const {
  // traversal printed right-to-left so it reads like an operator product
  std::ostringstream os;
  os << "<g| ";
  for (int m = static_cast<int>(vertices.size()) - 1; m >= 0; --m) {
    os << (vertices[static_cast<size_t>(m)].op == VertexOp::raise ? "V+" : "V");
    if (m == 0) break;
    os << " G" << (branches[static_cast<size_t>(m - 1)] == Branch::retarded ? "(" : "+(");
    bool first = true;
    const auto& a = args[static_cast<size_t>(m - 1)];
    for (size_t i = 0; i < a.size(); ++i) {
      if (a[i] == 0) continue;
      if (a[i] > 0 && !first) os << "+";
      if (a[i] == -1) os << "-";
      else if (a[i] != 1) os << a[i] << "*";
      os << "w" << i;
      first = false;
    }
    if (first) os << "0";
    os << ") ";
  }
  os << " |g>";
  return os.str();
}

cplx feynman_frequency_value(const FeynmanDiagram& fd, const LevelScheme& s,
                             const DipolePartition& dp, const Process& p,
                             const std::vector<double>& omegas) {
  const int n = s.n();
  const int nm = mode_count(p);
  Mat m = Mat::Zero(n, n);
  m(s.ground, s.ground) = 1.0;
  std::vector<double> cum(static_cast<size_t>(nm), 0.0);
  bool ket_on = false, bra_on = false;

  for (size_t j = 0; j < fd.global.size(); ++j) {
    const Interaction& v = fd.global[j];
    if (v.strand == Strand::ket) {
      m = (v.op == VertexOp::raise ? dp.raising : dp.lowering) * m;
      ket_on = true;
    } else {
      m = m * (v.op == VertexOp::raise ? dp.raising : dp.lowering);
      bra_on = true;
    }
    if (j + 1 == fd.global.size()) break;
    const auto c = freq_coeff(v, p, nm);
    for (int i = 0; i < nm; ++i)
      cum[static_cast<size_t>(i)] += c[static_cast<size_t>(i)] * omegas[static_cast<size_t>(i)];
    double cw = 0.0;
    for (double x : cum) cw += x;
    for (int kk = 0; kk < n; ++kk) {
      for (int bb = 0; bb < n; ++bb) {
        if (m(kk, bb) == cplx(0.0)) continue;
        const double damp = (ket_on ? effective_width(s, kk) : 0.0) +
                            (bra_on ? effective_width(s, bb) : 0.0);
        const cplx den(cw - (s.omega(kk) - s.omega(bb)), damp);
        m(kk, bb) *= cplx(0.0, 1.0) / den;
      }
    }
  }
  return cplx(fd.parent.sign, 0.0) * m.trace();
}

ThetaTerm compile_time(const FeynmanDiagram& fd, const Process& p) {
  ThetaTerm t;
  t.diagram = fd;
  const int nm = mode_count(p);
  std::vector<int> cum(static_cast<size_t>(nm), 0);
  bool ket_on = false, bra_on = false;
  std::ostringstream chain;
  for (size_t j = 0; j + 1 < fd.global.size(); ++j) {
    const Interaction& v = fd.global[j];
    (v.strand == Strand::ket ? ket_on : bra_on) = true;
    const auto c = freq_coeff(v, p, nm);
    for (int i = 0; i < nm; ++i) cum[static_cast<size_t>(i)] += c[static_cast<size_t>(i)];
    t.phase.push_back(cum);
    t.ket_active.push_back(ket_on);
    t.bra_active.push_back(bra_on);
  }
  for (size_t j = fd.global.size() - 1; j > 0; --j) {
    chain << "theta(" << fd.global[j].label << "-" << fd.global[j - 1].label
          << ")";
    if (j > 1) chain << " ";
  }
  t.theta_chain = chain.str();
  return t;
}

namespace {

std::string vertex_text(const Interaction& v) {
  std::ostringstream os;
  os << "(" << v.label << " " << (v.op == VertexOp::raise ? "+" : "-") << "m"
     << v.mode;
  if (v.role == Role::observation) os << " obs";
  if (v.role == Role::signal_anchor) os << " anchor";
  os << ")";
  return os.str();
}

}  // namespace

std::string render_ascii(const std::vector<LoopDiagram>& loops) {
  std::ostringstream os;
  for (size_t i = 0; i < loops.size(); ++i) {
    const LoopDiagram& l = loops[i];
    os << "loop " << i << "  [" << to_string(l.detection) << ", sign "
       << (l.sign > 0 ? "+1" : "-1") << ", weight "
       << (l.family_weight > 0 ? "+1" : "-1") << ", feynman "
       << l.feynman_count() << "]\n";
    os << "  ket: |g) ";
    for (const auto& v : l.ket) os << "-" << vertex_text(v);
    os << "\n  bra: (g| ";
    for (const auto& v : l.bra) os << "-" << vertex_text(v);
    os << "\n";
  }
  return os.str();
}

std::string render_dot(const std::vector<LoopDiagram>& loops) {
  std::ostringstream os;
  os << "digraph loops {\n  rankdir=LR;\n  node [shape=box];\n";
  for (size_t i = 0; i < loops.size(); ++i) {
    const LoopDiagram& l = loops[i];
    os << "  subgraph cluster_" << i << " {\n    label=\"loop " << i
       << " sign " << (l.sign > 0 ? "+1" : "-1") << " weight "
       << (l.family_weight > 0 ? "+1" : "-1") << "\";\n";
    auto emit_strand = [&](const std::vector<Interaction>& st, const char* tag) {
      for (size_t j = 0; j < st.size(); ++j) {
        os << "    l" << i << "_" << tag << j << " [label=\""
           << vertex_text(st[j]) << "\"];\n";
        if (j > 0)
          os << "    l" << i << "_" << tag << j - 1 << " -> l" << i << "_"
             << tag << j << ";\n";
      }
    };
    emit_strand(l.ket, "k");
    emit_strand(l.bra, "b");
    os << "  }\n";
  }
  os << "}\n";
  return os.str();
}

namespace {

json interaction_to_json(const Interaction& v) {
  return json{{"strand", to_string(v.strand)},
              {"op", to_string(v.op)},
              {"mode", v.mode},
              {"role", to_string(v.role)},
              {"label", v.label}};
}

Interaction interaction_from_json(const json& j) {
  Interaction v;
  const std::string strand = j.at("strand");
  const std::string op = j.at("op");
  const std::string role = j.at("role");
  v.strand = strand == "ket" ? Strand::ket : Strand::bra;
  v.op = op == "raise" ? VertexOp::raise : VertexOp::lower;
  v.mode = j.at("mode");
  if (role == "observation") v.role = Role::observation;
  else if (role == "signal_anchor") v.role = Role::signal_anchor;
  else v.role = Role::expansion;
  v.label = j.at("label");
  return v;
}

DetectionKind detection_from_string(const std::string& s) {
  if (s == "spontaneous") return DetectionKind::spontaneous;
  if (s == "stimulated") return DetectionKind::stimulated;
  if (s == "amplitude") return DetectionKind::amplitude;
  throw std::invalid_argument("unknown detection kind: " + s);
}

}  // namespace

std::string diagrams_to_json(const Process& p,
                             const std::vector<LoopDiagram>& loops) {
  json root;
  json proc;
  proc["signal_mode"] = p.signal_mode;
  proc["detection"] = to_string(p.detection);
  proc["incoming"] = json::array();
  for (const auto& [m, c] : p.incoming) proc["incoming"].push_back({m, c});
  proc["net"] = p.net;
  root["process"] = proc;
  root["loops"] = json::array();
  for (const auto& l : loops) {
    json jl;
    jl["sign"] = l.sign;
    jl["weight"] = l.family_weight;
    jl["detection"] = to_string(l.detection);
    jl["feynman_count"] = l.feynman_count();
    jl["ket"] = json::array();
    for (const auto& v : l.ket) jl["ket"].push_back(interaction_to_json(v));
    jl["bra"] = json::array();
    for (const auto& v : l.bra) jl["bra"].push_back(interaction_to_json(v));
    root["loops"].push_back(jl);
  }
  return root.dump(2) + "\n";
}

ParsedDiagrams diagrams_from_json(const std::string& text) {
  const json root = json::parse(text);
  ParsedDiagrams out;
  const json& proc = root.at("process");
  out.process.signal_mode = proc.at("signal_mode");
  out.process.detection = detection_from_string(proc.at("detection"));
  for (const auto& e : proc.at("incoming"))
    out.process.incoming.emplace_back(e.at(0), e.at(1));
  out.process.net = proc.at("net").get<std::vector<int>>();
  for (const auto& jl : root.at("loops")) {
    LoopDiagram l;
    l.sign = jl.at("sign");
    l.family_weight = jl.at("weight");
    l.detection = detection_from_string(jl.at("detection"));
    for (const auto& v : jl.at("ket")) l.ket.push_back(interaction_from_json(v));
    for (const auto& v : jl.at("bra")) l.bra.push_back(interaction_from_json(v));
    out.loops.push_back(std::move(l));
  }
  return out;
}

const char* to_string(Strand s) { return s == Strand::ket ? "ket" : "bra"; }
const char* to_string(VertexOp v) {
  return v == VertexOp::raise ? "raise" : "lower";
}
const char* to_string(Role r) {
  switch (r) {
    case Role::observation: return "observation";
    case Role::signal_anchor: return "signal_anchor";
    case Role::expansion: return "expansion";
  }
  return "?";
}
const char* to_string(DetectionKind d) {
  switch (d) {
    case DetectionKind::spontaneous: return "spontaneous";
    case DetectionKind::stimulated: return "stimulated";
    case DetectionKind::amplitude: return "amplitude";
  }
  return "?";
}

}  // namespace negf
