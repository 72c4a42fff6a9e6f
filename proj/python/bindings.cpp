#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "eigenmatch/correspondence.hpp"
#include "eigenmatch/io.hpp"
#include "eigenmatch/matching.hpp"
#include "eigenmatch/mesh.hpp"
#include "eigenmatch/moments.hpp"
#include "eigenmatch/spectral.hpp"

namespace py = pybind11;
using namespace eigenmatch;

namespace {

TriMesh mesh_from_arrays(const Eigen::MatrixX3d& vertices,
                         const Eigen::MatrixX3i& faces) {
  TriMesh mesh;
  mesh.vertices = vertices;
  mesh.faces = faces;
  validate_mesh(mesh);
  return mesh;
}

Eigen::MatrixXd tensor3_array(const Tensor3& t) {
  // flattened (N*N, N); reshape to (N, N, N) on the python side
  const int n = t.dim();
  Eigen::MatrixXd out(n * n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) out(i * n + j, k) = t(i, j, k);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "LBO eigenspace alignment via high-order eigenfunction statistics";

  py::register_exception<Error>(m, "EigenmatchError");

  py::class_<TriMesh>(m, "TriMesh")
      .def(py::init(&mesh_from_arrays), py::arg("vertices"), py::arg("faces"))
      .def_readonly("vertices", &TriMesh::vertices)
      .def_readonly("faces", &TriMesh::faces)
      .def_property_readonly("vertex_count", &TriMesh::vertex_count)
      .def_property_readonly("face_count", &TriMesh::face_count);

  m.def("load_mesh", py::overload_cast<const std::string&>(&load_mesh),
        py::arg("path"), "Load an OFF or ascii PLY mesh by extension");
  m.def("vertex_areas",
        [](const TriMesh& mesh) { return vertex_areas(mesh).diagonal; },
        "Mixed Voronoi vertex areas (the mass matrix diagonal)");
  m.def("cotan_matrix", &cotan_matrix, "Cotangent stiffness matrix (sparse)");
  m.def("face_normals", &face_normals);
  m.def("face_areas", &face_areas);
  m.def("face_gradient", &face_gradient, py::arg("mesh"), py::arg("values"),
        "Per-face gradient of a per-vertex scalar field");

  py::class_<SpectralBasis>(m, "SpectralBasis")
      .def_readonly("eigenvalues", &SpectralBasis::eigenvalues)
      .def_readonly("eigenfunctions", &SpectralBasis::eigenfunctions)
      .def_property_readonly(
          "mass", [](const SpectralBasis& b) { return b.mass.diagonal; })
      .def_readonly("near_degenerate", &SpectralBasis::near_degenerate)
      .def_property_readonly("count", &SpectralBasis::count)
      .def_property_readonly("total_area", &SpectralBasis::total_area);

  m.def(
      "compute_basis",
      [](const TriMesh& mesh, int h, int dense_threshold) {
        SolverOptions opts;
        opts.dense_threshold = dense_threshold;
        return compute_basis(mesh, h, opts);
      },
      py::arg("mesh"), py::arg("h"), py::arg("dense_threshold") = 3000,
      "Solve the generalized eigenproblem for the first h pairs");
  m.def("hks", &hks, py::arg("basis"), py::arg("t"));
  m.def(
      "diffusion_map",
      [](const SpectralBasis& b, double t, int n) {
        return diffusion_map(b, t, n).coords;
      },
      py::arg("basis"), py::arg("t"), py::arg("n"));
  m.def("diffusion_distance", &diffusion_distance, py::arg("basis"),
        py::arg("t"), py::arg("x"), py::arg("y"), py::arg("n"));

  py::class_<SignatureField>(m, "SignatureField")
      .def_readonly("values", &SignatureField::values)
      .def_readonly("times", &SignatureField::times);
  m.def("hks_derivative_signature", &hks_derivative_signature, py::arg("basis"),
        py::arg("q"), py::arg("h"));

  py::class_<MomentSet>(m, "MomentSet")
      .def_readonly("N", &MomentSet::N)
      .def_readonly("P", &MomentSet::P)
      .def_readonly("Q", &MomentSet::Q)
      .def_readonly("alpha", &MomentSet::alpha)
      .def_readonly("muS", &MomentSet::muS)
      .def_property_readonly(
          "mu", [](const MomentSet& m) { return tensor3_array(m.mu); })
      .def_property_readonly("threshold", [](const MomentSet& m) {
        return m.weights.threshold;
      });
  m.def("compute_moment_set", &compute_moment_set, py::arg("mesh"),
        py::arg("basis"), py::arg("signature"), py::arg("n"),
        "All raw-moment tensors and the alpha balance weight of one shape");

  py::class_<MatchParams>(m, "MatchParams")
      .def_readonly("signs", &MatchParams::signs)
      .def_readonly("perm", &MatchParams::perm)
      .def_static("identity", &MatchParams::identity);

  py::class_<CostBreakdown>(m, "CostBreakdown")
      .def_readonly("c_mu", &CostBreakdown::c_mu)
      .def_readonly("c_muS", &CostBreakdown::c_muS)
      .def_readonly("c_xi", &CostBreakdown::c_xi)
      .def_readonly("c_xiS", &CostBreakdown::c_xiS)
      .def_readonly("alpha", &CostBreakdown::alpha)
      .def_readonly("total", &CostBreakdown::total);

  py::class_<Candidate>(m, "Candidate")
      .def_readonly("params", &Candidate::params)
      .def_readonly("cost_cs", &Candidate::cost_cs)
      .def_readonly("total", &Candidate::total);

  py::class_<MatchResult>(m, "MatchResult")
      .def_readonly("params", &MatchResult::params)
      .def_readonly("cost", &MatchResult::cost)
      .def_readonly("candidates", &MatchResult::candidates)
      .def_readonly("undetermined", &MatchResult::undetermined);

  m.def(
      "match_moment_sets",
      [](const MomentSet& mx, const MomentSet& my, int k) {
        MatchOptions opts;
        opts.K = k;
        return match_moment_sets(mx, my, opts);
      },
      py::arg("mx"), py::arg("my"), py::arg("k") = 32,
      "Four-step sign/permutation search between two moment sets");
  m.def("total_cost", &total_cost, py::arg("mx"), py::arg("my"), py::arg("params"),
        py::arg("alpha"));
  m.def("apply_match", &apply_match, py::arg("basis_y"), py::arg("params"),
        py::arg("n"), "Signed, permuted eigenfunction stack of the second shape");

  py::class_<DescriptorField>(m, "DescriptorField")
      .def_readonly("values", &DescriptorField::values)
      .def_readonly("N", &DescriptorField::N)
      .def_readonly("Q", &DescriptorField::Q)
      .def_readonly("beta", &DescriptorField::beta);
  m.def("descriptor_field", &descriptor_field, py::arg("basis"),
        py::arg("matched_stack"), py::arg("signature"), py::arg("beta") = 0.5);

  py::class_<PointMatch>(m, "PointMatch")
      .def_readonly("src", &PointMatch::src)
      .def_readonly("dst", &PointMatch::dst)
      .def_readonly("distance", &PointMatch::distance);
  m.def("match_points", &match_points, py::arg("src"), py::arg("field_x"),
        py::arg("field_y"));
  m.def("farthest_point_sample", &farthest_point_sample, py::arg("mesh"),
        py::arg("k"), py::arg("seed") = 0);

  m.def("export_colored_ply", &export_colored_ply, py::arg("path"),
        py::arg("mesh"), py::arg("field"),
        "Write an ascii PLY colored with the red-blue diverging palette");

#ifdef VERSION_INFO
#define STRINGIFY(x) #x
#define MACRO_STRINGIFY(x) STRINGIFY(x)
  m.attr("__version__") = MACRO_STRINGIFY(VERSION_INFO);
#else
  m.attr("__version__") = "dev";
#endif
}
