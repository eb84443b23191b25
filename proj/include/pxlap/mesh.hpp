#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "pxlap/csv.hpp"
#include "pxlap/linalg.hpp"

namespace pxlap {

// Simplicial mesh of an interval or an axis-aligned rectangle. 2D cells
// are split into two right triangles; node ordering is lexicographic so
// the assembled systems stay banded.
struct Mesh {
  int dim = 1;
  Box extent;
  int nx = 0, ny = 0;  // nodes per axis (ny unused in 1D)

  std::vector<Vec> nodes;
  std::vector<std::array<int, 3>> elements;  // 2 or 3 indices used per element
  std::vector<double> element_measures;
  std::vector<Vec> element_barycenters;
  std::vector<char> boundary_flag;           // per node
  std::vector<int> boundary_nodes;
  std::vector<std::vector<int>> neighbors;   // node adjacency via shared elements

  int node_count() const { return static_cast<int>(nodes.size()); }
  int element_count() const { return static_cast<int>(elements.size()); }
  int nodes_per_element() const { return dim + 1; }
  bool is_boundary(int node) const { return boundary_flag[static_cast<std::size_t>(node)] != 0; }
  double diameter() const { return extent.diameter(); }

  double total_measure() const {
    double s = 0.0;
    for (double m : element_measures) s += m;
    return s;
  }

  std::string nodes_csv() const {
    Csv csv(dim == 1 ? std::initializer_list<std::string>{"node_id", "x"}
                     : std::initializer_list<std::string>{"node_id", "x", "y"});
    for (int i = 0; i < node_count(); ++i) {
      std::vector<std::string> row{std::to_string(i), format_double(nodes[i][0])};
      if (dim == 2) row.push_back(format_double(nodes[i][1]));
      csv.row(row);
    }
    return csv.str();
  }

  std::string elements_csv() const {
    Csv csv(dim == 1 ? std::initializer_list<std::string>{"element_id", "n0", "n1"}
                     : std::initializer_list<std::string>{"element_id", "n0", "n1", "n2"});
    for (int e = 0; e < element_count(); ++e) {
      std::vector<std::string> row{std::to_string(e), std::to_string(elements[e][0]),
                                   std::to_string(elements[e][1])};
      if (dim == 2) row.push_back(std::to_string(elements[e][2]));
      csv.row(row);
    }
    return csv.str();
  }
};

using MeshPtr = std::shared_ptr<const Mesh>;

// Conforming mesh with `resolution` nodes per axis.
inline MeshPtr make_mesh(int dimension, const Box& extent, int resolution) {
  if (dimension != 1 && dimension != 2) throw Error("make_mesh: dimension must be 1 or 2");
  if (resolution < 2) throw Error("make_mesh: resolution must be >= 2");
  for (int i = 0; i < dimension; ++i)
    if (!(extent.hi[i] > extent.lo[i])) throw Error("make_mesh: degenerate extent");

  auto mesh = std::make_shared<Mesh>();
  mesh->dim = dimension;
  mesh->extent = extent;
  mesh->nx = resolution;
  mesh->ny = dimension == 2 ? resolution : 1;

  if (dimension == 1) {
    const double a = extent.lo[0], b = extent.hi[0];
    const double h = (b - a) / (resolution - 1);
    for (int i = 0; i < resolution; ++i) mesh->nodes.push_back(Vec(a + i * h));
    for (int i = 0; i + 1 < resolution; ++i) {
      mesh->elements.push_back({i, i + 1, -1});
      mesh->element_measures.push_back(mesh->nodes[i + 1][0] - mesh->nodes[i][0]);
      mesh->element_barycenters.push_back(Vec(0.5 * (mesh->nodes[i][0] + mesh->nodes[i + 1][0])));
    }
    mesh->boundary_flag.assign(mesh->nodes.size(), 0);
    mesh->boundary_flag.front() = 1;
    mesh->boundary_flag.back() = 1;
  } else {
    const double ax = extent.lo[0], ay = extent.lo[1];
    const double hx = (extent.hi[0] - ax) / (resolution - 1);
    const double hy = (extent.hi[1] - ay) / (resolution - 1);
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i) mesh->nodes.push_back(Vec(ax + i * hx, ay + j * hy));
    const auto id = [resolution](int i, int j) { return j * resolution + i; };
    for (int j = 0; j + 1 < resolution; ++j)
      for (int i = 0; i + 1 < resolution; ++i) {
        mesh->elements.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        mesh->elements.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    for (const auto& el : mesh->elements) {
      const Vec& p0 = mesh->nodes[el[0]];
      const Vec& p1 = mesh->nodes[el[1]];
      const Vec& p2 = mesh->nodes[el[2]];
      const double area =
          0.5 * std::abs((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
      mesh->element_measures.push_back(area);
      mesh->element_barycenters.push_back((1.0 / 3.0) * (p0 + p1 + p2));
    }
    mesh->boundary_flag.assign(mesh->nodes.size(), 0);
    for (int j = 0; j < resolution; ++j)
      for (int i = 0; i < resolution; ++i)
        if (i == 0 || j == 0 || i == resolution - 1 || j == resolution - 1)
          mesh->boundary_flag[static_cast<std::size_t>(id(i, j))] = 1;
  }

  for (double m : mesh->element_measures)
    if (!(m > 0.0)) throw Error("make_mesh: element with nonpositive measure");

  for (int i = 0; i < mesh->node_count(); ++i)
    if (mesh->is_boundary(i)) mesh->boundary_nodes.push_back(i);

  mesh->neighbors.assign(mesh->nodes.size(), {});
  for (const auto& el : mesh->elements) {
    const int nv = dimension + 1;
    for (int a = 0; a < nv; ++a)
      for (int b = 0; b < nv; ++b)
        if (a != b) mesh->neighbors[static_cast<std::size_t>(el[a])].push_back(el[b]);
  }
  for (auto& nb : mesh->neighbors) {
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
  }

  return mesh;
}

// Nodal scalar field on a mesh. Values must be finite.
struct GridFunction {
  MeshPtr mesh;
  std::vector<double> values;

  GridFunction(MeshPtr m, std::vector<double> v) : mesh(std::move(m)), values(std::move(v)) {
    if (!mesh) throw Error("GridFunction: null mesh");
    if (static_cast<int>(values.size()) != mesh->node_count())
      throw Error("GridFunction: value count does not match node count");
    for (double x : values)
      if (!std::isfinite(x)) throw Error("GridFunction: non-finite nodal value");
  }

  template <class F>
  static GridFunction interpolate(MeshPtr m, F&& f) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(m->node_count()));
    for (const Vec& x : m->nodes) v.push_back(f(x));
    return GridFunction(std::move(m), std::move(v));
  }

  double& operator[](int i) { return values[static_cast<std::size_t>(i)]; }
  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }

  // P1 value at the element barycenter: the vertex mean.
  double barycenter_value(int element) const {
    const auto& el = mesh->elements[static_cast<std::size_t>(element)];
    const int nv = mesh->nodes_per_element();
    double s = 0.0;
    for (int k = 0; k < nv; ++k) s += values[static_cast<std::size_t>(el[k])];
    return s / nv;
  }
};

// Constant gradient of the linear interpolant on one element.
inline Vec element_gradient(const GridFunction& u, int element) {
  const Mesh& mesh = *u.mesh;
  const auto& el = mesh.elements[static_cast<std::size_t>(element)];
  if (mesh.dim == 1) {
    const double dx = mesh.nodes[el[1]][0] - mesh.nodes[el[0]][0];
    return Vec((u[el[1]] - u[el[0]]) / dx);
  }
  const Vec& p0 = mesh.nodes[el[0]];
  const Vec e1 = mesh.nodes[el[1]] - p0;
  const Vec e2 = mesh.nodes[el[2]] - p0;
  const double det = e1[0] * e2[1] - e2[0] * e1[1];
  const double d1 = u[el[1]] - u[el[0]];
  const double d2 = u[el[2]] - u[el[0]];
  return Vec((e2[1] * d1 - e1[1] * d2) / det, (-e2[0] * d1 + e1[0] * d2) / det);
}

// Gradients of the nodal hat functions on one element, in vertex order.
inline std::array<Vec, 3> hat_gradients(const Mesh& mesh, int element) {
  const auto& el = mesh.elements[static_cast<std::size_t>(element)];
  std::array<Vec, 3> g;
  if (mesh.dim == 1) {
    const double dx = mesh.nodes[el[1]][0] - mesh.nodes[el[0]][0];
    g[0] = Vec(-1.0 / dx);
    g[1] = Vec(1.0 / dx);
    g[2] = Vec::zero(1);
    return g;
  }
  const Vec& p0 = mesh.nodes[el[0]];
  const Vec& p1 = mesh.nodes[el[1]];
  const Vec& p2 = mesh.nodes[el[2]];
  const double det =
      (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
  g[0] = Vec((p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det);
  g[1] = Vec((p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det);
  g[2] = Vec((p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det);
  return g;
}

// Nodes within the given graph distance of `node` (distance 0 = the node).
inline std::vector<int> graph_ball(const Mesh& mesh, int node, int distance) {
  std::vector<int> dist(static_cast<std::size_t>(mesh.node_count()), -1);
  std::vector<int> queue{node};
  dist[static_cast<std::size_t>(node)] = 0;
  std::vector<int> out{node};
  std::size_t head = 0;
  while (head < queue.size()) {
    const int cur = queue[head++];
    if (dist[static_cast<std::size_t>(cur)] == distance) continue;
    for (int nb : mesh.neighbors[static_cast<std::size_t>(cur)]) {
      if (dist[static_cast<std::size_t>(nb)] >= 0) continue;
      dist[static_cast<std::size_t>(nb)] = dist[static_cast<std::size_t>(cur)] + 1;
      queue.push_back(nb);
      out.push_back(nb);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// P1 interpolation of a grid function at an arbitrary point of the
// meshed box (clamped to the closest cell).
inline double point_value(const GridFunction& u, const Vec& x) {
  const Mesh& mesh = *u.mesh;
  if (mesh.dim == 1) {
    const double a = mesh.extent.lo[0];
    const double h = (mesh.extent.hi[0] - a) / (mesh.nx - 1);
    int cell = static_cast<int>(std::floor((x[0] - a) / h));
    cell = std::clamp(cell, 0, mesh.nx - 2);
    const double x0 = mesh.nodes[cell][0];
    const double t = std::clamp((x[0] - x0) / h, 0.0, 1.0);
    return (1.0 - t) * u[cell] + t * u[cell + 1];
  }
  const double ax = mesh.extent.lo[0], ay = mesh.extent.lo[1];
  const double hx = (mesh.extent.hi[0] - ax) / (mesh.nx - 1);
  const double hy = (mesh.extent.hi[1] - ay) / (mesh.ny - 1);
  int ci = std::clamp(static_cast<int>(std::floor((x[0] - ax) / hx)), 0, mesh.nx - 2);
  int cj = std::clamp(static_cast<int>(std::floor((x[1] - ay) / hy)), 0, mesh.ny - 2);
  const double s = std::clamp((x[0] - (ax + ci * hx)) / hx, 0.0, 1.0);
  const double t = std::clamp((x[1] - (ay + cj * hy)) / hy, 0.0, 1.0);
  const auto id = [&mesh](int i, int j) { return j * mesh.nx + i; };
  const double u00 = u[id(ci, cj)], u10 = u[id(ci + 1, cj)];
  const double u11 = u[id(ci + 1, cj + 1)], u01 = u[id(ci, cj + 1)];
  // lower-right triangle when s >= t, upper-left otherwise
  if (s >= t) return u00 + s * (u10 - u00) + t * (u11 - u10);
  return u00 + s * (u11 - u01) + t * (u01 - u00);
}

}  // namespace pxlap
