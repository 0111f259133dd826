#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "sresn/error.hpp"
#include "sresn/sparse.hpp"

namespace sresn::esn {

namespace {

// Iterative Tarjan. Returns component id per vertex.
std::vector<std::size_t> strongly_connected_components(const SparseMatrix& a,
                                                       std::size_t& n_components) {
  const std::size_t n = a.rows();
  constexpr std::size_t kUnvisited = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), component(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  struct Frame {
    std::size_t vertex;
    std::size_t edge;
  };
  std::vector<Frame> call;
  std::size_t counter = 0;
  n_components = 0;
  const auto row_ptr = a.row_ptr();
  const auto cols = a.col_index();

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, row_ptr[root]});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const std::size_t v = f.vertex;
      if (f.edge < row_ptr[v + 1]) {
        const std::size_t w = cols[f.edge++];
        if (index[w] == kUnvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, row_ptr[w]});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component[w] = n_components;
        } while (w != v);
        ++n_components;
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().vertex;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return component;
}

}  // namespace

double spectral_radius(const SparseMatrix& a) {
  if (a.rows() != a.cols()) throw NumericalError("spectral_radius: matrix is not square");
  std::size_t n_components = 0;
  const auto component = strongly_connected_components(a, n_components);

  std::vector<std::vector<std::size_t>> members(n_components);
  for (std::size_t v = 0; v < component.size(); ++v) members[component[v]].push_back(v);

  double radius = 0.0;
  std::vector<std::size_t> local(a.rows());
  for (const auto& verts : members) {
    if (verts.size() == 1) {
      radius = std::max(radius, std::abs(a.coeff(verts[0], verts[0])));
      continue;
    }
    const auto m = static_cast<Eigen::Index>(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i) local[verts[i]] = i;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
    const std::size_t comp = component[verts[0]];
    for (std::size_t v : verts) {
      for (std::size_t k = a.row_ptr()[v]; k < a.row_ptr()[v + 1]; ++k) {
        const std::size_t w = a.col_index()[k];
        if (component[w] == comp) {
          block(static_cast<Eigen::Index>(local[v]), static_cast<Eigen::Index>(local[w])) =
              a.values()[k];
        }
      }
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(block, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
      throw NumericalError("spectral_radius: eigenvalue iteration did not converge");
    }
    radius = std::max(radius, solver.eigenvalues().cwiseAbs().maxCoeff());
  }
  return radius;
}

}  // namespace sresn::esn
