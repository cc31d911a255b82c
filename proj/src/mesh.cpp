#include "tpt/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "tpt/rng.hpp"

namespace tpt {

double TriMesh::tri_area(std::size_t t) const {
  const auto& a = nodes[tris[t][0]];
  const auto& b = nodes[tris[t][1]];
  const auto& c = nodes[tris[t][2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

std::array<double, 2> TriMesh::centroid(std::size_t t) const {
  const auto& a = nodes[tris[t][0]];
  const auto& b = nodes[tris[t][1]];
  const auto& c = nodes[tris[t][2]];
  return {(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0};
}

void TriMesh::p1_gradients(std::size_t t, std::array<std::array<double, 2>, 3>& g,
                           double& area) const {
  const auto& a = nodes[tris[t][0]];
  const auto& b = nodes[tris[t][1]];
  const auto& c = nodes[tris[t][2]];
  const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
  area = 0.5 * det;
  // grad of hat_i is the rotated opposite edge over twice the area
  g[0] = {(b[1] - c[1]) / det, (c[0] - b[0]) / det};
  g[1] = {(c[1] - a[1]) / det, (a[0] - c[0]) / det};
  g[2] = {(a[1] - b[1]) / det, (b[0] - a[0]) / det};
}

// ---------------------------------------------------------------------------
// Bowyer-Watson Delaunay with a super-triangle and walking point location.
// Predicates run in double with an error bound and fall back to long double;
// exact ties count as outside.
// ---------------------------------------------------------------------------

namespace {

struct P2 {
  double x, y;
};

double orient2d(const P2& a, const P2& b, const P2& c) {
  const double detl = (b.x - a.x) * (c.y - a.y);
  const double detr = (b.y - a.y) * (c.x - a.x);
  const double det = detl - detr;
  const double bound = 3.33e-16 * (std::fabs(detl) + std::fabs(detr));
  if (std::fabs(det) > bound) return det;
  const long double dl = (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
                         (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
  return static_cast<double>(dl);
}

// > 0 when d lies strictly inside the circumcircle of ccw triangle (a,b,c)
double incircle(const P2& a, const P2& b, const P2& c, const P2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double ad = adx * adx + ady * ady;
  const double bd = bdx * bdx + bdy * bdy;
  const double cd = cdx * cdx + cdy * cdy;
  const double det = adx * (bdy * cd - cdy * bd) - ady * (bdx * cd - cdx * bd) +
                     ad * (bdx * cdy - cdx * bdy);
  const double mag = (std::fabs(adx) + std::fabs(ady) + std::fabs(bdx) + std::fabs(bdy) +
                      std::fabs(cdx) + std::fabs(cdy));
  const double bound = 1e-13 * mag * mag * mag * mag + 1e-300;
  if (std::fabs(det) > bound) return det;
  const long double ladx = static_cast<long double>(a.x) - d.x, lady = static_cast<long double>(a.y) - d.y;
  const long double lbdx = static_cast<long double>(b.x) - d.x, lbdy = static_cast<long double>(b.y) - d.y;
  const long double lcdx = static_cast<long double>(c.x) - d.x, lcdy = static_cast<long double>(c.y) - d.y;
  const long double lad = ladx * ladx + lady * lady;
  const long double lbd = lbdx * lbdx + lbdy * lbdy;
  const long double lcd = lcdx * lcdx + lcdy * lcdy;
  const long double ldet = ladx * (lbdy * lcd - lcdy * lbd) - lady * (lbdx * lcd - lcdx * lbd) +
                           lad * (lbdx * lcdy - lcdx * lbdy);
  return static_cast<double>(ldet);
}

struct DelTri {
  int v[3];
  int adj[3];  // neighbor opposite v[i]; -1 outside
  bool alive = true;
};

std::uint64_t morton_interleave(std::uint32_t a, std::uint32_t b) {
  auto spread = [](std::uint64_t v) {
    v &= 0x00000000ffffffffULL;
    v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
    v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v << 2)) & 0x3333333333333333ULL;
    v = (v | (v << 1)) & 0x5555555555555555ULL;
    return v;
  };
  return spread(a) | (spread(b) << 1);
}

}  // namespace

std::vector<std::array<int, 3>> delaunay(const std::vector<std::array<double, 2>>& pts) {
  const int n = static_cast<int>(pts.size());
  if (n < 3) throw NumericalFailure("triangulation needs at least 3 points");

  double xmin = pts[0][0], xmax = xmin, ymin = pts[0][1], ymax = ymin;
  for (const auto& p : pts) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);

  std::vector<P2> pt(n + 3);
  for (int i = 0; i < n; ++i) pt[i] = {pts[i][0], pts[i][1]};
  pt[n] = {cx - 1e3 * span, cy - 1e3 * span};
  pt[n + 1] = {cx + 1e3 * span, cy - 1e3 * span};
  pt[n + 2] = {cx, cy + 1e3 * span};

  // insertion order along a Morton curve keeps walks short
  std::vector<int> order(n);
  {
    std::vector<std::pair<std::uint64_t, int>> keyed(n);
    const double scale = 2097151.0 / span;  // 21 bits
    for (int i = 0; i < n; ++i) {
      const auto a = static_cast<std::uint32_t>((pts[i][0] - xmin) * scale);
      const auto b = static_cast<std::uint32_t>((pts[i][1] - ymin) * scale);
      keyed[i] = {morton_interleave(a, b), i};
    }
    std::sort(keyed.begin(), keyed.end());
    for (int i = 0; i < n; ++i) order[i] = keyed[i].second;
  }

  std::vector<DelTri> tris;
  tris.reserve(static_cast<std::size_t>(2 * n + 16));
  tris.push_back({{n, n + 1, n + 2}, {-1, -1, -1}, true});

  auto inside_tri = [&](int t, const P2& p, int& exit_edge) {
    // returns true when p is inside (or on) triangle t; otherwise reports an
    // edge to walk through
    for (int e = 0; e < 3; ++e) {
      const P2& a = pt[tris[t].v[(e + 1) % 3]];
      const P2& b = pt[tris[t].v[(e + 2) % 3]];
      if (orient2d(a, b, p) < 0) {
        exit_edge = e;
        return false;
      }
    }
    return true;
  };

  int last = 0;
  std::vector<int> stack, cavity, newly;
  std::vector<std::pair<std::array<int, 2>, std::array<int, 2>>> hull;  // edge -> (outside tri, its edge idx)

  for (int oi = 0; oi < n; ++oi) {
    const int ip = order[oi];
    const P2& p = pt[ip];

    // locate
    int t = last;
    if (!tris[t].alive) {
      t = -1;
      for (int k = static_cast<int>(tris.size()) - 1; k >= 0; --k)
        if (tris[k].alive) {
          t = k;
          break;
        }
    }
    for (long guard = 0; guard < 4 * static_cast<long>(tris.size()) + 16; ++guard) {
      int edge;
      if (inside_tri(t, p, edge)) break;
      const int next = tris[t].adj[edge];
      if (next < 0) throw NumericalFailure("point location walked out of the triangulation");
      t = next;
    }

    // grow the cavity of triangles whose circumcircle strictly contains p
    cavity.clear();
    stack.clear();
    stack.push_back(t);
    tris[t].alive = false;
    cavity.push_back(t);
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      for (int e = 0; e < 3; ++e) {
        const int nb = tris[cur].adj[e];
        if (nb < 0 || !tris[nb].alive) continue;
        if (incircle(pt[tris[nb].v[0]], pt[tris[nb].v[1]], pt[tris[nb].v[2]], p) > 0) {
          tris[nb].alive = false;
          cavity.push_back(nb);
          stack.push_back(nb);
        }
      }
    }

    // boundary edges of the cavity, with the surviving neighbor behind each
    hull.clear();
    for (int ct : cavity) {
      for (int e = 0; e < 3; ++e) {
        const int nb = tris[ct].adj[e];
        const bool nb_dead = nb >= 0 && !tris[nb].alive;
        if (nb_dead) continue;
        const int a = tris[ct].v[(e + 1) % 3];
        const int b = tris[ct].v[(e + 2) % 3];
        int nb_edge = -1;
        if (nb >= 0) {
          for (int k = 0; k < 3; ++k)
            if (tris[nb].adj[k] == ct) nb_edge = k;
        }
        hull.push_back({{a, b}, {nb, nb_edge}});
      }
    }

    // fan the cavity boundary to p; new triangle over boundary edge (a, b) is
    // (p, a, b), which is counterclockwise because the cavity is star-shaped
    // around p
    newly.clear();
    // at each boundary vertex two fan triangles meet: the one whose edge ends
    // there (free slot 1, edge (b, p)) and the one whose edge starts there
    // (free slot 2, edge (p, a))
    std::map<int, std::pair<int, int>> open;  // vertex -> (triangle, free slot)
    auto link_at = [&](int vtx, int id, int slot) {
      auto it = open.find(vtx);
      if (it == open.end()) {
        open[vtx] = {id, slot};
        return;
      }
      const auto [other, other_slot] = it->second;
      tris[id].adj[slot] = other;
      tris[other].adj[other_slot] = id;
      open.erase(it);
    };
    for (const auto& [edge, outside] : hull) {
      const int a = edge[0], b = edge[1];
      DelTri nt;
      nt.v[0] = ip;
      nt.v[1] = a;
      nt.v[2] = b;
      nt.adj[0] = outside[0];
      nt.adj[1] = -1;
      nt.adj[2] = -1;
      const int id = static_cast<int>(tris.size());
      tris.push_back(nt);
      newly.push_back(id);
      if (outside[0] >= 0) tris[outside[0]].adj[outside[1]] = id;
      link_at(a, id, 2);
      link_at(b, id, 1);
      last = id;
    }
    if (!open.empty()) throw NumericalFailure("triangulation cavity failed to close");
  }

  std::vector<std::array<int, 3>> out;
  out.reserve(tris.size());
  for (const auto& t : tris) {
    if (!t.alive) continue;
    if (t.v[0] >= n || t.v[1] >= n || t.v[2] >= n) continue;  // touches the super-triangle
    out.push_back({t.v[0], t.v[1], t.v[2]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// marching-squares contour tracing
// ---------------------------------------------------------------------------

std::vector<std::vector<std::array<double, 2>>> trace_contours(
    const std::function<double(double, double)>& f, double level, const double bbox[4],
    int n_grid) {
  const int nx = n_grid, ny = n_grid;
  const double dx = (bbox[1] - bbox[0]) / nx, dy = (bbox[3] - bbox[2]) / ny;
  std::vector<double> val(static_cast<std::size_t>(nx + 1) * (ny + 1));
  auto vat = [&](int i, int j) -> double& { return val[static_cast<std::size_t>(j) * (nx + 1) + i]; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) vat(i, j) = f(bbox[0] + i * dx, bbox[2] + j * dy) - level;

  // edge key: horizontal edges (i,j,0) from (i,j)-(i+1,j); vertical (i,j,1)
  auto cross_pt = [&](int i, int j, int dir) -> std::array<double, 2> {
    if (dir == 0) {
      const double va = vat(i, j), vb = vat(i + 1, j);
      const double t = va / (va - vb);
      return {bbox[0] + (i + t) * dx, bbox[2] + j * dy};
    }
    const double va = vat(i, j), vb = vat(i, j + 1);
    const double t = va / (va - vb);
    return {bbox[0] + i * dx, bbox[2] + (j + t) * dy};
  };
  auto ekey = [&](int i, int j, int dir) { return (static_cast<long>(j) * (nx + 1) + i) * 2 + dir; };

  std::map<long, std::array<double, 2>> epoint;          // edge -> crossing point
  std::multimap<long, long> adj;                         // edge adjacency along the contour
  auto add_seg = [&](long e1, const std::array<double, 2>& p1, long e2,
                     const std::array<double, 2>& p2) {
    epoint[e1] = p1;
    epoint[e2] = p2;
    adj.insert({e1, e2});
    adj.insert({e2, e1});
  };

  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double v00 = vat(i, j), v10 = vat(i + 1, j), v01 = vat(i, j + 1), v11 = vat(i + 1, j + 1);
      int c = 0;
      if (v00 < 0) c |= 1;
      if (v10 < 0) c |= 2;
      if (v11 < 0) c |= 4;
      if (v01 < 0) c |= 8;
      if (c == 0 || c == 15) continue;
      auto has = [&](int bit) { return (c & bit) != 0; };
      std::vector<long> edges;
      std::vector<std::array<double, 2>> ptsv;
      if (has(1) != has(2)) {
        edges.push_back(ekey(i, j, 0));
        ptsv.push_back(cross_pt(i, j, 0));
      }
      if (has(2) != has(4)) {
        edges.push_back(ekey(i + 1, j, 1));
        ptsv.push_back(cross_pt(i + 1, j, 1));
      }
      if (has(4) != has(8)) {
        edges.push_back(ekey(i, j + 1, 0));
        ptsv.push_back(cross_pt(i, j + 1, 0));
      }
      if (has(8) != has(1)) {
        edges.push_back(ekey(i, j, 1));
        ptsv.push_back(cross_pt(i, j, 1));
      }
      if (edges.size() == 2) {
        add_seg(edges[0], ptsv[0], edges[1], ptsv[1]);
      } else if (edges.size() == 4) {
        // ambiguous saddle: split by the cell-center value
        const double vc = 0.25 * (v00 + v10 + v01 + v11);
        if ((vc < 0) == has(1)) {
          add_seg(edges[0], ptsv[0], edges[1], ptsv[1]);
          add_seg(edges[2], ptsv[2], edges[3], ptsv[3]);
        } else {
          add_seg(edges[0], ptsv[0], edges[3], ptsv[3]);
          add_seg(edges[1], ptsv[1], edges[2], ptsv[2]);
        }
      }
    }
  }

  // chain edges into loops
  std::vector<std::vector<std::array<double, 2>>> loops;
  std::map<long, bool> used;
  for (const auto& [e0, dummy] : epoint) {
    (void)dummy;
    if (used[e0]) continue;
    std::vector<std::array<double, 2>> loop;
    long cur = e0;
    while (true) {
      used[cur] = true;
      loop.push_back(epoint[cur]);
      long next = -1;
      auto range = adj.equal_range(cur);
      for (auto it = range.first; it != range.second; ++it) {
        if (!used[it->second]) {
          next = it->second;
          break;
        }
      }
      if (next < 0) break;  // closed back to the start or hit the box edge
      cur = next;
    }
    if (loop.size() >= 8) loops.push_back(std::move(loop));
  }
  return loops;
}

// ---------------------------------------------------------------------------
// mesh generation
// ---------------------------------------------------------------------------

namespace {

std::vector<std::array<double, 2>> resample_loop(const std::vector<std::array<double, 2>>& loop,
                                                 double h) {
  double len = 0;
  const std::size_t n = loop.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = loop[i];
    const auto& b = loop[(i + 1) % n];
    len += std::hypot(b[0] - a[0], b[1] - a[1]);
  }
  const int m = std::max(8, static_cast<int>(std::llround(len / h)));
  const double step = len / m;
  std::vector<std::array<double, 2>> out;
  out.reserve(m);
  double carry = 0;
  for (std::size_t i = 0; i < n && static_cast<int>(out.size()) < m; ++i) {
    const auto& a = loop[i];
    const auto& b = loop[(i + 1) % n];
    const double seg = std::hypot(b[0] - a[0], b[1] - a[1]);
    double pos = carry;
    while (pos < seg && static_cast<int>(out.size()) < m) {
      const double t = pos / seg;
      out.push_back({a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
      pos += step;
    }
    carry = pos - seg;
  }
  return out;
}

std::vector<std::array<double, 2>> region_loop(const Region& r, double h) {
  // walk the parameterization with steps targeting arclength h
  std::vector<std::array<double, 2>> out;
  double t = 0;
  while (t < 1.0) {
    Vec p = r.surface_point(t, 0.0);
    out.push_back({p[0], p[1]});
    Vec p2 = r.surface_point(t + 1e-5, 0.0);
    const double speed = std::hypot(p2[0] - p[0], p2[1] - p[1]) / 1e-5;
    t += std::max(1e-4, h / std::max(speed, 1e-12));
  }
  return out;
}

}  // namespace

TriMesh generate_mesh(const MeshSpec& spec) {
  const double h = spec.h;
  if (!(h > 0)) throw ConfigError("mesh spacing must be positive");

  auto in_domain = [&](double x, double y) {
    switch (spec.domain) {
      case MeshSpec::Domain::Sublevel:
        return spec.level_fn(x, y) <= spec.level;
      case MeshSpec::Domain::Rectangle:
        return x >= spec.bbox[0] && x <= spec.bbox[1] && y >= spec.bbox[2] && y <= spec.bbox[3];
      case MeshSpec::Domain::Annulus: {
        const double r = std::hypot(x - spec.ann_cx, y - spec.ann_cy);
        return r >= spec.ann_r0 && r <= spec.ann_r1;
      }
    }
    return false;
  };

  std::vector<std::array<double, 2>> nodes;
  std::vector<int> tags;
  auto push_loop = [&](const std::vector<std::array<double, 2>>& loop, int tag) {
    for (const auto& p : loop) {
      nodes.push_back(p);
      tags.push_back(tag);
    }
  };

  // boundary loops first; they are protected in the spacing scan below
  switch (spec.domain) {
    case MeshSpec::Domain::Sublevel: {
      auto loops = trace_contours(spec.level_fn, spec.level, spec.bbox, 1200);
      if (loops.empty()) throw NumericalFailure("no level-set contour found in the search box");
      std::sort(loops.begin(), loops.end(),
                [](const auto& a, const auto& b) { return a.size() > b.size(); });
      push_loop(resample_loop(loops.front(), h), kTagOuter);
      break;
    }
    case MeshSpec::Domain::Rectangle: {
      std::vector<std::array<double, 2>> loop;
      const double x0 = spec.bbox[0], x1 = spec.bbox[1], y0 = spec.bbox[2], y1 = spec.bbox[3];
      const int mx = std::max(1, static_cast<int>(std::llround((x1 - x0) / h)));
      const int my = std::max(1, static_cast<int>(std::llround((y1 - y0) / h)));
      for (int i = 0; i < mx; ++i) loop.push_back({x0 + (x1 - x0) * i / mx, y0});
      for (int j = 0; j < my; ++j) loop.push_back({x1, y0 + (y1 - y0) * j / my});
      for (int i = mx; i > 0; --i) loop.push_back({x0 + (x1 - x0) * i / mx, y1});
      for (int j = my; j > 0; --j) loop.push_back({x0, y0 + (y1 - y0) * j / my});
      push_loop(loop, kTagOuter);
      break;
    }
    case MeshSpec::Domain::Annulus: {
      std::vector<std::array<double, 2>> inner, outer;
      const int mi = std::max(8, static_cast<int>(std::llround(2 * M_PI * spec.ann_r0 / h)));
      const int mo = std::max(8, static_cast<int>(std::llround(2 * M_PI * spec.ann_r1 / h)));
      for (int i = 0; i < mi; ++i)
        inner.push_back({spec.ann_cx + spec.ann_r0 * std::cos(2 * M_PI * i / mi),
                         spec.ann_cy + spec.ann_r0 * std::sin(2 * M_PI * i / mi)});
      for (int i = 0; i < mo; ++i)
        outer.push_back({spec.ann_cx + spec.ann_r1 * std::cos(2 * M_PI * i / mo),
                         spec.ann_cy + spec.ann_r1 * std::sin(2 * M_PI * i / mo)});
      push_loop(inner, kTagBdryA);
      push_loop(outer, kTagBdryB);
      break;
    }
  }
  if (spec.region_a) push_loop(region_loop(*spec.region_a, h), kTagBdryA);
  if (spec.region_b) push_loop(region_loop(*spec.region_b, h), kTagBdryB);
  const std::size_t n_protected = nodes.size();

  // fine candidate grid restricted to the committor domain
  {
    const double g = h / 2.0;
    Vec xy(2);
    for (double y = spec.bbox[2] + 0.5 * g; y < spec.bbox[3]; y += g) {
      for (double x = spec.bbox[0] + 0.5 * g; x < spec.bbox[1]; x += g) {
        if (!in_domain(x, y)) continue;
        xy[0] = x;
        xy[1] = y;
        if (spec.region_a && spec.region_a->contains_closed(xy)) continue;
        if (spec.region_b && spec.region_b->contains_closed(xy)) continue;
        nodes.push_back({x, y});
        tags.push_back(kTagInterior);
      }
    }
  }

  // deterministic sub-nanometer jitter breaks lattice and circle ties in the
  // Delaunay predicates
  {
    std::uint64_t s = spec.seed;
    for (auto& p : nodes) {
      const double jx = (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53 - 0.5) * 2e-9 * h;
      const double jy = (static_cast<double>(splitmix64(s) >> 11) * 0x1.0p-53 - 0.5) * 2e-9 * h;
      p[0] += jx;
      p[1] += jy;
    }
  }

  // ordered spacing scan; boundary nodes are kept unconditionally
  std::vector<std::array<double, 2>> kept;
  std::vector<int> kept_tags;
  {
    double xmin = nodes[0][0], ymin = nodes[0][1];
    for (const auto& p : nodes) {
      xmin = std::min(xmin, p[0]);
      ymin = std::min(ymin, p[1]);
    }
    const double cell = h;
    std::map<std::pair<long, long>, std::vector<std::size_t>> grid;
    auto cell_of = [&](const std::array<double, 2>& p) {
      return std::make_pair(static_cast<long>((p[0] - xmin) / cell),
                            static_cast<long>((p[1] - ymin) / cell));
    };
    auto near_kept = [&](const std::array<double, 2>& p, double dist) {
      const auto [ci, cj] = cell_of(p);
      for (long i = ci - 1; i <= ci + 1; ++i)
        for (long j = cj - 1; j <= cj + 1; ++j) {
          auto it = grid.find({i, j});
          if (it == grid.end()) continue;
          for (std::size_t k : it->second) {
            const double dx = kept[k][0] - p[0], dy = kept[k][1] - p[1];
            if (dx * dx + dy * dy < dist * dist) return true;
          }
        }
      return false;
    };
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const bool protected_node = i < n_protected;
      if (!protected_node && near_kept(nodes[i], 0.999 * h)) continue;
      kept.push_back(nodes[i]);
      kept_tags.push_back(tags[i]);
      grid[cell_of(nodes[i])].push_back(kept.size() - 1);
    }
  }

  auto tris = delaunay(kept);

  TriMesh mesh;
  mesh.nodes = kept;
  mesh.tag = kept_tags;
  Vec xy(2);
  for (auto& t : tris) {
    // orient counterclockwise
    const auto& a = kept[t[0]];
    const auto& b = kept[t[1]];
    const auto& c = kept[t[2]];
    if ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) < 0) std::swap(t[1], t[2]);
    const double cx = (a[0] + b[0] + c[0]) / 3.0, cy = (a[1] + b[1] + c[1]) / 3.0;
    if (!in_domain(cx, cy)) continue;
    xy[0] = cx;
    xy[1] = cy;
    if (spec.region_a && spec.region_a->contains_closed(xy)) continue;
    if (spec.region_b && spec.region_b->contains_closed(xy)) continue;
    mesh.tris.push_back(t);
  }

  // drop unreferenced nodes
  std::vector<int> remap(mesh.nodes.size(), -1);
  for (const auto& t : mesh.tris)
    for (int v : t) remap[v] = 0;
  TriMesh out;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (remap[i] < 0) continue;
    remap[i] = static_cast<int>(out.nodes.size());
    out.nodes.push_back(mesh.nodes[i]);
    out.tag.push_back(mesh.tag[i]);
  }
  out.tris.reserve(mesh.tris.size());
  for (const auto& t : mesh.tris)
    out.tris.push_back({remap[t[0]], remap[t[1]], remap[t[2]]});

  for (std::size_t t = 0; t < out.n_tris(); ++t) {
    if (!(out.tri_area(t) > 0)) throw NumericalFailure("degenerate triangle in generated mesh");
  }
  return out;
}

// ---------------------------------------------------------------------------
// file formats
// ---------------------------------------------------------------------------

TriMesh import_mesh(const std::string& node_path, const std::string& ele_path) {
  std::ifstream fn(node_path);
  if (!fn) throw MissingArtifact("cannot open " + node_path);
  std::size_t n;
  int dim, nattr, nbmark;
  if (!(fn >> n >> dim >> nattr >> nbmark) || dim != 2)
    throw ConfigError("bad node header in " + node_path);
  TriMesh mesh;
  mesh.nodes.resize(n);
  mesh.tag.assign(n, kTagInterior);
  for (std::size_t i = 0; i < n; ++i) {
    int id, tag = 0;
    double x, y;
    if (!(fn >> id >> x >> y)) throw ConfigError("truncated node file " + node_path);
    if (nbmark > 0 && !(fn >> tag)) throw ConfigError("truncated node file " + node_path);
    if (id < 1 || static_cast<std::size_t>(id) > n) throw ConfigError("node id out of range");
    mesh.nodes[id - 1] = {x, y};
    mesh.tag[id - 1] = tag;
  }
  std::ifstream fe(ele_path);
  if (!fe) throw MissingArtifact("cannot open " + ele_path);
  std::size_t m;
  int per, eattr;
  if (!(fe >> m >> per >> eattr) || per != 3) throw ConfigError("bad element header in " + ele_path);
  mesh.tris.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    int id, a, b, c;
    if (!(fe >> id >> a >> b >> c)) throw ConfigError("truncated element file " + ele_path);
    if (id < 1 || static_cast<std::size_t>(id) > m) throw ConfigError("element id out of range");
    mesh.tris[id - 1] = {a - 1, b - 1, c - 1};
  }
  for (std::size_t t = 0; t < mesh.n_tris(); ++t) {
    for (int v : mesh.tris[t])
      if (v < 0 || static_cast<std::size_t>(v) >= n) throw ConfigError("element references missing node");
    if (!(mesh.tri_area(t) > 0)) throw NumericalFailure("imported triangle with non-positive area");
  }
  return mesh;
}

void export_mesh(const TriMesh& mesh, const std::string& node_path, const std::string& ele_path) {
  std::ofstream fn(node_path);
  if (!fn) throw MissingArtifact("cannot write " + node_path);
  fn.precision(17);
  fn << mesh.n_nodes() << " 2 0 1\n";
  for (std::size_t i = 0; i < mesh.n_nodes(); ++i)
    fn << i + 1 << " " << mesh.nodes[i][0] << " " << mesh.nodes[i][1] << " " << mesh.tag[i] << "\n";
  std::ofstream fe(ele_path);
  if (!fe) throw MissingArtifact("cannot write " + ele_path);
  fe << mesh.n_tris() << " 3 0\n";
  for (std::size_t t = 0; t < mesh.n_tris(); ++t)
    fe << t + 1 << " " << mesh.tris[t][0] + 1 << " " << mesh.tris[t][1] + 1 << " "
       << mesh.tris[t][2] + 1 << "\n";
}

}  // namespace tpt
